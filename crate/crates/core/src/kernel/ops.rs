//! Brackets, Nijenhuis tensors, pullbacks and jet evaluation.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::{table, Jet};
use crate::kernel::manifold::{ChartedManifold, PointRef, SmoothMap};
use crate::kernel::tensor::{Tensor, TensorField, Valence};

/// Component values plus first and second derivative arrays.
#[derive(Clone, Debug)]
pub struct JetArrays {
    pub values: Vec<f64>,
    /// gradient[c][i] = ∂_i of component c (empty when order < 1)
    pub gradient: Vec<Vec<f64>>,
    /// hessian[c][i*dim+j] (empty when order < 2)
    pub hessian: Vec<Vec<f64>>,
}

pub fn eval_jet(field: &TensorField, p: &PointRef, order: usize) -> Result<JetArrays> {
    let t = field.eval_jet(p, order)?;
    let dim = field.dim();
    let values = t.values();
    let gradient = if order >= 1 { t.data.iter().map(Jet::gradient).collect() } else { Vec::new() };
    let hessian = if order >= 2 {
        t.data.iter().map(|c| (0..dim * dim).map(|k| c.d2(k / dim, k % dim)).collect()).collect()
    } else {
        Vec::new()
    };
    Ok(JetArrays { values, gradient, hessian })
}

fn require(f: &TensorField, v: Valence, what: &str) -> Result<()> {
    if f.valence != v {
        return Err(GeomError::ValenceMismatch(format!("{what}: expected {v}, got {}", f.valence)));
    }
    Ok(())
}

pub(crate) fn same_manifold(a: &TensorField, b: &TensorField) -> Result<()> {
    if !Arc::ptr_eq(&a.manifold, &b.manifold) {
        return Err(GeomError::ValenceMismatch("fields live on different manifolds".into()));
    }
    Ok(())
}

/// [X,Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a
pub fn lie_bracket(x: &TensorField, y: &TensorField) -> Result<TensorField> {
    require(x, Valence::VECTOR, "lie_bracket")?;
    require(y, Valence::VECTOR, "lie_bracket")?;
    same_manifold(x, y)?;
    let dim = x.dim();
    let (xf, yf) = (x.clone(), y.clone());
    Ok(TensorField::new(x.manifold.clone(), Valence::VECTOR, move |p, order| {
        let (xv, yv) = (xf.eval_jet(p, order + 1)?, yf.eval_jet(p, order + 1)?);
        let (x0, y0) = (xv.truncate(order), yv.truncate(order));
        let data = (0..dim)
            .map(|a| {
                let mut acc = Jet::zero(x0.data[0].table());
                for b in 0..dim {
                    acc += &(&x0.data[b] * &yv.data[a].partial(b));
                    acc -= &(&y0.data[b] * &xv.data[a].partial(b));
                }
                acc
            })
            .collect();
        Ok(Tensor::from_data(dim, Valence::VECTOR, data))
    }))
}

/// (ℒ_X T)_ab = X^c ∂_c T_ab + T_cb ∂_a X^c + T_ac ∂_b X^c for a covariant 2-tensor T.
pub fn lie_derivative_2(x: &TensorField, t: &TensorField) -> Result<TensorField> {
    require(x, Valence::VECTOR, "lie_derivative_2")?;
    require(t, Valence::form(2), "lie_derivative_2")?;
    same_manifold(x, t)?;
    let dim = x.dim();
    let (xf, tf) = (x.clone(), t.clone());
    Ok(TensorField::new(x.manifold.clone(), Valence::form(2), move |p, order| {
        let (xv, tv) = (xf.eval_jet(p, order + 1)?, tf.eval_jet(p, order + 1)?);
        let (x0, t0) = (xv.truncate(order), tv.truncate(order));
        let mut out = Tensor::zeros(dim, Valence::form(2), dim, order);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = Jet::zero(x0.data[0].table());
                for c in 0..dim {
                    acc += &(&x0.data[c] * &tv.data[a * dim + b].partial(c));
                    acc += &(&t0.data[c * dim + b] * &xv.data[c].partial(a));
                    acc += &(&t0.data[a * dim + c] * &xv.data[c].partial(b));
                }
                out.set(&[a, b], acc);
            }
        }
        Ok(out)
    }))
}

/// Components N^i_{jk} of [Φ,Φ](∂_j,∂_k) from Φ carrying one extra order.
pub fn nijenhuis_components(phi: &Tensor, order: usize) -> Tensor {
    let dim = phi.dim;
    let p0 = phi.truncate(order);
    let at = |t: &Tensor, i: usize, j: usize| t.data[i * dim + j].clone();
    // dphi[l][i][j] = ∂_l Φ^i_j
    let dphi: Vec<Vec<Jet>> = (0..dim).map(|l| phi.data.iter().map(|c| c.partial(l)).collect()).collect();
    let mut out = Tensor::zeros(dim, Valence::new(1, 2), phi.data[0].nvars(), order);
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                if j == k {
                    continue;
                }
                let mut acc = Jet::zero(p0.data[0].table());
                for l in 0..dim {
                    acc += &(&at(&p0, l, j) * &dphi[l][i * dim + k]);
                    acc -= &(&at(&p0, l, k) * &dphi[l][i * dim + j]);
                    acc += &(&at(&p0, i, l) * &dphi[k][l * dim + j]);
                    acc -= &(&at(&p0, i, l) * &dphi[j][l * dim + k]);
                }
                out.set(&[i, j, k], acc);
            }
        }
    }
    out
}

/// [Φ,Φ](X,Y) = Φ²[X,Y] + [ΦX,ΦY] − Φ[ΦX,Y] − Φ[X,ΦY] as a (1,2) field.
pub fn nijenhuis_endo(phi: &TensorField) -> Result<TensorField> {
    require(phi, Valence::ENDO, "nijenhuis_endo")?;
    let f = phi.clone();
    Ok(TensorField::new(phi.manifold.clone(), Valence::new(1, 2), move |p, order| {
        Ok(nijenhuis_components(&f.eval_jet(p, order + 1)?, order))
    }))
}

/// N_J(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] − [X,Y]. On coordinate fields the
/// last term vanishes and the components coincide with those of [J,J].
pub fn nijenhuis_complex(j: &crate::kernel::tensor::ComplexStructureField) -> Result<TensorField> {
    nijenhuis_endo(&j.field)
}

/// Apply a (1,1) field to a vector field.
pub fn apply_endo(phi: &TensorField, x: &TensorField) -> Result<TensorField> {
    require(phi, Valence::ENDO, "apply_endo")?;
    require(x, Valence::VECTOR, "apply_endo")?;
    same_manifold(phi, x)?;
    let dim = phi.dim();
    let (pf, xf) = (phi.clone(), x.clone());
    Ok(TensorField::new(phi.manifold.clone(), Valence::VECTOR, move |p, order| {
        let (pv, xv) = (pf.eval_jet(p, order)?, xf.eval_jet(p, order)?);
        let data = (0..dim)
            .map(|a| {
                let mut acc = Jet::zero(xv.data[0].table());
                for b in 0..dim {
                    acc += &(&pv.data[a * dim + b] * &xv.data[b]);
                }
                acc
            })
            .collect();
        Ok(Tensor::from_data(dim, Valence::VECTOR, data))
    }))
}

/// N_J(X,Y) evaluated through actual brackets of the fields X and Y.
pub fn nijenhuis_complex_on(j: &TensorField, x: &TensorField, y: &TensorField) -> Result<TensorField> {
    let jx = apply_endo(j, x)?;
    let jy = apply_endo(j, y)?;
    let t1 = lie_bracket(&jx, &jy)?;
    let t2 = apply_endo(j, &lie_bracket(&jx, y)?)?;
    let t3 = apply_endo(j, &lie_bracket(x, &jy)?)?;
    let t4 = lie_bracket(x, y)?;
    t1.sub(&t2)?.sub(&t3)?.sub(&t4)
}

/// [Φ,Φ](X,Y) evaluated through brackets of X and Y.
pub fn nijenhuis_endo_on(phi: &TensorField, x: &TensorField, y: &TensorField) -> Result<TensorField> {
    let px = apply_endo(phi, x)?;
    let py = apply_endo(phi, y)?;
    let xy = lie_bracket(x, y)?;
    let t0 = apply_endo(phi, &apply_endo(phi, &xy)?)?;
    let t1 = lie_bracket(&px, &py)?;
    let t2 = apply_endo(phi, &lie_bracket(&px, y)?)?;
    let t3 = apply_endo(phi, &lie_bracket(x, &py)?)?;
    t0.add(&t1)?.sub(&t2)?.sub(&t3)
}

/// Contract a (1,2) tensor field with two vector fields.
pub fn contract_12(n: &TensorField, x: &TensorField, y: &TensorField) -> Result<TensorField> {
    require(n, Valence::new(1, 2), "contract_12")?;
    let dim = n.dim();
    let (nf, xf, yf) = (n.clone(), x.clone(), y.clone());
    Ok(TensorField::new(n.manifold.clone(), Valence::VECTOR, move |p, order| {
        let (nv, xv, yv) = (nf.eval_jet(p, order)?, xf.eval_jet(p, order)?, yf.eval_jet(p, order)?);
        let data = (0..dim)
            .map(|i| {
                let mut acc = Jet::zero(xv.data[0].table());
                for j in 0..dim {
                    for k in 0..dim {
                        acc += &(&(&nv.data[(i * dim + j) * dim + k] * &xv.data[j]) * &yv.data[k]);
                    }
                }
                acc
            })
            .collect();
        Ok(Tensor::from_data(dim, Valence::VECTOR, data))
    }))
}

/// A smooth map between charted manifolds, one coordinate map per source chart.
#[derive(Clone)]
pub struct ChartMap {
    pub source: Arc<ChartedManifold>,
    pub target: Arc<ChartedManifold>,
    /// (target chart, coordinate map) for each source chart
    pub pieces: Vec<(usize, SmoothMap)>,
}

impl ChartMap {
    pub fn identity(m: Arc<ChartedManifold>) -> ChartMap {
        let pieces = (0..m.charts.len()).map(|c| (c, SmoothMap::identity(m.dim))).collect();
        ChartMap { source: m.clone(), target: m, pieces }
    }

    pub fn image(&self, p: &PointRef) -> Result<PointRef> {
        let (tc, f) = self.pieces.get(p.chart).ok_or(GeomError::UnknownChart(p.chart))?;
        Ok(PointRef::new(*tc, f.apply(&p.coords)))
    }
}

/// Pullback of a covariant tensor field along a chart map.
pub fn pullback(f: &ChartMap, t: &TensorField) -> Result<TensorField> {
    if t.valence.upper != 0 {
        return Err(GeomError::ValenceMismatch(format!("pullback needs a covariant tensor, got {}", t.valence)));
    }
    if !Arc::ptr_eq(&f.target, &t.manifold) {
        return Err(GeomError::ValenceMismatch("pullback target differs from the field's manifold".into()));
    }
    let q = t.valence.lower;
    let sdim = f.source.dim;
    let tdim = f.target.dim;
    let (fm, tf) = (f.clone(), t.clone());
    Ok(TensorField::new(f.source.clone(), Valence::form(q), move |p, order| {
        let (tc, map) = fm.pieces.get(p.chart).ok_or(GeomError::UnknownChart(p.chart))?;
        let x = Jet::point(&p.coords, order + 1);
        let y = map.apply_jets(&x);
        // ∂f^a/∂x^i as order-k jets; f itself at order k for composition.
        let df: Vec<Vec<Jet>> = y.iter().map(|ya| (0..sdim).map(|i| ya.partial(i)).collect()).collect();
        let y0: Vec<Jet> = y.iter().map(|ya| ya.truncate(order)).collect();
        let ypt = PointRef::new(*tc, y0.iter().map(Jet::value).collect());
        let tv = tf.eval_jet(&ypt, order)?;
        let tcomp: Vec<Jet> = tv.data.iter().map(|c| c.compose(&y0)).collect();
        let tab = table(sdim, order);
        let mut out = Tensor::zeros(sdim, Valence::form(q), sdim, order);
        let total_src = sdim.pow(q as u32);
        let total_tgt = tdim.pow(q as u32);
        for so in 0..total_src {
            let sidx = out.multi_index(so);
            let mut acc = Jet::zero(tab);
            for to in 0..total_tgt {
                if tcomp[to].max_abs() == 0.0 {
                    continue;
                }
                let mut tidx = vec![0; q];
                let mut r = to;
                for k in (0..q).rev() {
                    tidx[k] = r % tdim;
                    r /= tdim;
                }
                let mut term = tcomp[to].clone();
                for k in 0..q {
                    term = &term * &df[tidx[k]][sidx[k]];
                }
                acc += &term;
            }
            out.data[so] = acc;
        }
        Ok(out)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::manifold::Chart;
    use crate::kernel::tensor::{standard_j, ComplexStructureField};

    fn plane(dim: usize) -> Arc<ChartedManifold> {
        Arc::new(ChartedManifold::single_chart(dim, Chart::whole("Rn")))
    }

    fn coord_vec(m: Arc<ChartedManifold>, i: usize) -> TensorField {
        let mut c = vec![0.0; m.dim];
        c[i] = 1.0;
        TensorField::constant(m, Valence::VECTOR, c)
    }

    #[test]
    fn lie_derivative_of_euclidean_metric() {
        let m = Arc::new(ChartedManifold::single_chart(2, Chart::whole("R2")));
        let g = TensorField::constant(m.clone(), Valence::form(2), vec![1.0, 0.0, 0.0, 1.0]);
        let rot = TensorField::from_coords(m.clone(), Valence::VECTOR, |_c, x| Ok(vec![-&x[1], x[0].clone()]));
        let dil = TensorField::from_coords(m, Valence::VECTOR, |_c, x| Ok(vec![x[0].clone(), x[1].clone()]));
        let p = PointRef::new(0, vec![0.3, -0.7]);
        assert_eq!(lie_derivative_2(&rot, &g).unwrap().eval(&p).unwrap(), vec![0.0; 4]);
        assert_eq!(lie_derivative_2(&dil, &g).unwrap().eval(&p).unwrap(), vec![2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn coordinate_fields_commute() {
        let m = plane(2);
        let b = lie_bracket(&coord_vec(m.clone(), 0), &coord_vec(m, 1)).unwrap();
        assert_eq!(b.eval(&PointRef::new(0, vec![0.4, 0.1])).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn bracket_of_x_dy_with_dx() {
        // [x∂y, ∂x] = −∂y
        let m = plane(2);
        let xdy = TensorField::from_coords(m.clone(), Valence::VECTOR, |_c, x| Ok(vec![Jet::zero(x[0].table()), x[0].clone()]));
        let b = lie_bracket(&xdy, &coord_vec(m, 0)).unwrap();
        assert_eq!(b.eval(&PointRef::new(0, vec![0.4, 0.1])).unwrap(), vec![0.0, -1.0]);
    }

    #[test]
    fn nijenhuis_of_identity_and_standard_j_vanish() {
        let m = plane(4);
        let mut id = vec![0.0; 16];
        for i in 0..4 {
            id[i * 5] = 1.0;
        }
        let p = PointRef::new(0, vec![0.1, 0.2, 0.3, 0.4]);
        let n_id = nijenhuis_endo(&TensorField::constant(m.clone(), Valence::ENDO, id)).unwrap();
        assert!(n_id.eval(&p).unwrap().iter().all(|&v| v == 0.0));
        let j = ComplexStructureField::standard(m);
        let n_j = nijenhuis_complex(&j).unwrap();
        assert!(n_j.eval(&p).unwrap().iter().all(|&v| v == 0.0));
        assert!(standard_j(4).iter().filter(|&&v| v != 0.0).count() == 4);
    }

    #[test]
    fn pullback_along_identity_and_linear_map() {
        let m = plane(2);
        let w = TensorField::from_coords(m.clone(), Valence::form(1), |_c, x| Ok(vec![&x[0] * &x[1], x[0].sin()]));
        let p = PointRef::new(0, vec![0.3, -0.2]);
        let same = pullback(&ChartMap::identity(m.clone()), &w).unwrap();
        assert_eq!(same.eval(&p).unwrap(), w.eval(&p).unwrap());

        let a = vec![2.0, 1.0, 0.0, 3.0];
        let cm = ChartMap { source: m.clone(), target: m.clone(), pieces: vec![(0, SmoothMap::linear(2, 2, a.clone()))] };
        let c = TensorField::constant(m, Valence::form(1), vec![1.0, -1.0]);
        let pulled = pullback(&cm, &c).unwrap().eval(&p).unwrap();
        // (ω A)_i = ω_a A^a_i
        assert_eq!(pulled, vec![2.0, -2.0]);
    }
}
