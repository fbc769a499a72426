//! Dense tensor components and chart-wise tensor fields.
//!
//! Components are stored row-major with upper slots first. A (1,1) field is
//! `T[i][j] = T^i_j`, so `(T X)^i = T^i_j X^j`. Forms are stored fully
//! antisymmetrized and evaluate as `ω(X,Y) = ω_ij X^i Y^j`.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::{table, Jet};
use crate::kernel::manifold::{ChartedManifold, PointRef};
use crate::linalg::JMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Valence {
    pub upper: usize,
    pub lower: usize,
}

impl Valence {
    pub const SCALAR: Valence = Valence { upper: 0, lower: 0 };
    pub const VECTOR: Valence = Valence { upper: 1, lower: 0 };
    pub const ENDO: Valence = Valence { upper: 1, lower: 1 };

    pub fn new(upper: usize, lower: usize) -> Valence {
        Valence { upper, lower }
    }

    pub fn form(k: usize) -> Valence {
        Valence { upper: 0, lower: k }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }
}

impl fmt::Display for Valence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.upper, self.lower)
    }
}

/// Components of a tensor at one point, each a jet around that point.
#[derive(Clone, Debug)]
pub struct Tensor {
    pub dim: usize,
    pub valence: Valence,
    pub data: Vec<Jet>,
}

impl Tensor {
    pub fn zeros(dim: usize, valence: Valence, nvars: usize, order: usize) -> Tensor {
        let n = dim.pow(valence.rank() as u32);
        Tensor { dim, valence, data: vec![Jet::zero(table(nvars, order)); n] }
    }

    pub fn from_data(dim: usize, valence: Valence, data: Vec<Jet>) -> Tensor {
        assert_eq!(data.len(), dim.pow(valence.rank() as u32));
        Tensor { dim, valence, data }
    }

    pub fn from_mat(valence: Valence, m: JMat) -> Tensor {
        assert_eq!(valence.rank(), 2);
        Tensor { dim: m.rows, valence, data: m.data }
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: Jet) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn order(&self) -> usize {
        self.data[0].order()
    }

    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn truncate(&self, order: usize) -> Tensor {
        Tensor { dim: self.dim, valence: self.valence, data: self.data.iter().map(|j| j.truncate(order)).collect() }
    }

    pub fn as_mat(&self) -> JMat {
        assert_eq!(self.valence.rank(), 2);
        JMat::from_vec(self.dim, self.dim, self.data.clone())
    }

    /// Unpack a multi-index from a flat offset.
    pub fn multi_index(&self, mut off: usize) -> Vec<usize> {
        let r = self.valence.rank();
        let mut idx = vec![0; r];
        for k in (0..r).rev() {
            idx[k] = off % self.dim;
            off /= self.dim;
        }
        idx
    }
}

pub type Evaluator = Arc<dyn Fn(&PointRef, usize) -> Result<Tensor> + Send + Sync>;

/// A tensor field given by a chart-wise component evaluator.
#[derive(Clone)]
pub struct TensorField {
    pub valence: Valence,
    pub manifold: Arc<ChartedManifold>,
    eval: Evaluator,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TensorField{} on dim {}", self.valence, self.manifold.dim)
    }
}

impl TensorField {
    pub fn new<F>(manifold: Arc<ChartedManifold>, valence: Valence, f: F) -> TensorField
    where
        F: Fn(&PointRef, usize) -> Result<Tensor> + Send + Sync + 'static,
    {
        TensorField { valence, manifold, eval: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim
    }

    /// Components with Taylor coefficients up to `order` around `p`.
    pub fn eval_jet(&self, p: &PointRef, order: usize) -> Result<Tensor> {
        self.manifold.check(p)?;
        let t = (self.eval)(p, order)?;
        debug_assert_eq!(t.valence, self.valence);
        Ok(t)
    }

    /// Component values at `p`.
    pub fn eval(&self, p: &PointRef) -> Result<Vec<f64>> {
        Ok(self.eval_jet(p, 0)?.values())
    }

    /// A field with the same components everywhere.
    pub fn constant(manifold: Arc<ChartedManifold>, valence: Valence, comps: Vec<f64>) -> TensorField {
        let dim = manifold.dim;
        assert_eq!(comps.len(), dim.pow(valence.rank() as u32));
        TensorField::new(manifold, valence, move |_p, order| {
            let tab = table(dim, order);
            Ok(Tensor::from_data(dim, valence, comps.iter().map(|&v| Jet::constant(tab, v)).collect()))
        })
    }

    /// A field whose components are written in jet arithmetic of the coordinates.
    pub fn from_coords<F>(manifold: Arc<ChartedManifold>, valence: Valence, f: F) -> TensorField
    where
        F: Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        let dim = manifold.dim;
        TensorField::new(manifold, valence, move |p, order| {
            let x = Jet::point(&p.coords, order);
            Ok(Tensor::from_data(dim, valence, f(p.chart, &x)?))
        })
    }

    /// Pointwise combination of other fields on the same manifold, all
    /// evaluated at the requested order.
    pub fn combine<F>(manifold: Arc<ChartedManifold>, valence: Valence, inputs: Vec<TensorField>, f: F) -> TensorField
    where
        F: Fn(&[Tensor]) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        let dim = manifold.dim;
        TensorField::new(manifold, valence, move |p, order| {
            let vals = inputs.iter().map(|t| t.eval_jet(p, order)).collect::<Result<Vec<_>>>()?;
            Ok(Tensor::from_data(dim, valence, f(&vals)?))
        })
    }

    fn same_shape(&self, o: &TensorField) -> Result<()> {
        if self.valence != o.valence || self.dim() != o.dim() {
            return Err(GeomError::ValenceMismatch(format!("{} vs {}", self.valence, o.valence)));
        }
        Ok(())
    }

    pub fn add(&self, o: &TensorField) -> Result<TensorField> {
        self.same_shape(o)?;
        let (a, b) = (self.clone(), o.clone());
        Ok(TensorField::new(self.manifold.clone(), self.valence, move |p, k| {
            let (x, y) = (a.eval_jet(p, k)?, b.eval_jet(p, k)?);
            Ok(Tensor { dim: x.dim, valence: x.valence, data: x.data.iter().zip(&y.data).map(|(u, v)| u + v).collect() })
        }))
    }

    pub fn sub(&self, o: &TensorField) -> Result<TensorField> {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> TensorField {
        let a = self.clone();
        TensorField::new(self.manifold.clone(), self.valence, move |p, k| {
            let x = a.eval_jet(p, k)?;
            Ok(Tensor { dim: x.dim, valence: x.valence, data: x.data.iter().map(|u| u.scale(s)).collect() })
        })
    }

    /// Max-norm of the component values at `p`.
    pub fn norm_at(&self, p: &PointRef) -> Result<f64> {
        Ok(self.eval(p)?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }
}

/// A symmetric positive definite (0,2) field.
#[derive(Clone, Debug)]
pub struct MetricField(pub TensorField);

impl MetricField {
    pub fn new(field: TensorField) -> Result<MetricField> {
        if field.valence != Valence::form(2) {
            return Err(GeomError::ValenceMismatch(format!("metric needs (0,2), got {}", field.valence)));
        }
        Ok(MetricField(field))
    }

    pub fn field(&self) -> &TensorField {
        &self.0
    }

    /// Smallest eigenvalue at `p` (positive iff the metric is definite there).
    pub fn min_eigenvalue(&self, p: &PointRef) -> Result<f64> {
        let n = self.0.dim();
        let v = self.0.eval(p)?;
        let m = nalgebra::DMatrix::from_row_slice(n, n, &v);
        let sym = (&m + m.transpose()) * 0.5;
        Ok(sym.symmetric_eigenvalues().min())
    }
}

/// An almost complex structure, flagged when it is constant in holomorphic charts.
#[derive(Clone, Debug)]
pub struct ComplexStructureField {
    pub field: TensorField,
    pub constant_in_charts: bool,
}

impl ComplexStructureField {
    /// Standard J on R^{2m} with coordinates (x0, y0, x1, y1, ...): J∂x = ∂y, J∂y = −∂x.
    pub fn standard(manifold: Arc<ChartedManifold>) -> ComplexStructureField {
        let n = manifold.dim;
        ComplexStructureField { field: TensorField::constant(manifold, Valence::ENDO, standard_j(n)), constant_in_charts: true }
    }

    /// max |J∘J + Id| at `p`.
    pub fn square_residual(&self, p: &PointRef) -> Result<f64> {
        let n = self.field.dim();
        let j = self.field.eval(p)?;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (0..n).map(|k| j[r * n + k] * j[k * n + c]).sum();
                let id = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s + id).abs());
            }
        }
        Ok(worst)
    }
}

/// Row-major matrix of the standard complex structure on R^n (n even).
pub fn standard_j(n: usize) -> Vec<f64> {
    let mut j = vec![0.0; n * n];
    for k in 0..n / 2 {
        let (x, y) = (2 * k, 2 * k + 1);
        // J∂x = ∂y: column x has a 1 in row y.
        j[y * n + x] = 1.0;
        j[x * n + y] = -1.0;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::manifold::Chart;

    #[test]
    fn standard_j_squares_to_minus_one() {
        let m = Arc::new(ChartedManifold::single_chart(4, Chart::whole("R4")));
        let j = ComplexStructureField::standard(m);
        let r = j.square_residual(&PointRef::new(0, vec![0.1, 0.2, 0.3, 0.4])).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn polynomial_field_value_and_gradient() {
        let m = Arc::new(ChartedManifold::single_chart(2, Chart::whole("R2")));
        let f = TensorField::from_coords(m, Valence::SCALAR, |_c, x| Ok(vec![&x[0] * &x[1]]));
        let t = f.eval_jet(&PointRef::new(0, vec![2.0, 3.0]), 1).unwrap();
        assert_eq!(t.data[0].value(), 6.0);
        assert_eq!(t.data[0].gradient(), vec![3.0, 2.0]);
    }

    #[test]
    fn metric_eigenvalue_detects_definiteness() {
        let m = Arc::new(ChartedManifold::single_chart(2, Chart::whole("R2")));
        let g = MetricField::new(TensorField::constant(m.clone(), Valence::form(2), vec![2.0, 0.0, 0.0, 3.0])).unwrap();
        assert!((g.min_eigenvalue(&PointRef::new(0, vec![0.0, 0.0])).unwrap() - 2.0).abs() < 1e-14);
        let bad = MetricField::new(TensorField::constant(m, Valence::form(1), vec![1.0, 0.0]));
        assert!(matches!(bad, Err(GeomError::ValenceMismatch(_))));
    }
}
