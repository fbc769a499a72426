//! Chart atlases, points and smooth maps between coordinate spaces.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::Jet;

pub type Domain = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;
type MapFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// A point given by a chart id and its coordinates in that chart.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRef {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl PointRef {
    pub fn new(chart: usize, coords: Vec<f64>) -> PointRef {
        PointRef { chart, coords }
    }
}

/// A smooth map written in jet arithmetic, so it composes with any jet input.
#[derive(Clone)]
pub struct SmoothMap {
    pub in_dim: usize,
    pub out_dim: usize,
    f: MapFn,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SmoothMap({} -> {})", self.in_dim, self.out_dim)
    }
}

impl SmoothMap {
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> SmoothMap
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        SmoothMap { in_dim, out_dim, f: Arc::new(f) }
    }

    pub fn identity(dim: usize) -> SmoothMap {
        SmoothMap::new(dim, dim, |x| x.to_vec())
    }

    /// x ↦ M x with `m` given row-major (out_dim × in_dim).
    pub fn linear(out_dim: usize, in_dim: usize, m: Vec<f64>) -> SmoothMap {
        SmoothMap::new(in_dim, out_dim, move |x| {
            (0..out_dim)
                .map(|r| {
                    let mut acc = Jet::zero(x[0].table());
                    for (c, xc) in x.iter().enumerate() {
                        acc.axpy(m[r * in_dim + c], xc);
                    }
                    acc
                })
                .collect()
        })
    }

    pub fn apply_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.f)(x)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_jets(&Jet::point(x, 0)).iter().map(Jet::value).collect()
    }

    /// Value and Jacobian (row-major, out_dim × in_dim) at `x`.
    pub fn jacobian(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let y = self.apply_jets(&Jet::point(x, 1));
        let vals = y.iter().map(Jet::value).collect();
        let mut jac = Vec::with_capacity(self.out_dim * self.in_dim);
        for yj in &y {
            for i in 0..self.in_dim {
                jac.push(yj.d1(i));
            }
        }
        (vals, jac)
    }
}

pub struct Chart {
    pub name: String,
    pub domain: Domain,
}

impl Chart {
    pub fn new<F>(name: &str, domain: F) -> Chart
    where
        F: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        Chart { name: name.to_string(), domain: Arc::new(domain) }
    }

    /// A chart whose domain is all of R^dim.
    pub fn whole(name: &str) -> Chart {
        Chart::new(name, |x| x.iter().all(|v| v.is_finite()))
    }
}

/// Transition data for an ordered chart pair.
pub struct Overlap {
    pub from: usize,
    pub to: usize,
    /// Domain predicate in `from` coordinates.
    pub domain: Domain,
    pub forward: SmoothMap,
    pub backward: SmoothMap,
}

pub struct ChartedManifold {
    pub dim: usize,
    pub charts: Vec<Chart>,
    pub overlaps: Vec<Overlap>,
}

impl ChartedManifold {
    pub fn single_chart(dim: usize, chart: Chart) -> ChartedManifold {
        ChartedManifold { dim, charts: vec![chart], overlaps: Vec::new() }
    }

    pub fn check(&self, p: &PointRef) -> Result<()> {
        let chart = self.charts.get(p.chart).ok_or(GeomError::UnknownChart(p.chart))?;
        if p.coords.len() != self.dim || !(chart.domain)(&p.coords) {
            return Err(GeomError::DomainViolation { chart: p.chart, coords: p.coords.clone() });
        }
        Ok(())
    }

    pub fn overlap(&self, from: usize, to: usize) -> Option<&Overlap> {
        self.overlaps.iter().find(|o| o.from == from && o.to == to)
    }

    /// Re-express `p` in chart `to`.
    pub fn transition(&self, p: &PointRef, to: usize) -> Result<PointRef> {
        self.check(p)?;
        if p.chart == to {
            return Ok(p.clone());
        }
        if to >= self.charts.len() {
            return Err(GeomError::UnknownChart(to));
        }
        let ov = self.overlap(p.chart, to).ok_or(GeomError::UnknownChart(to))?;
        if !(ov.domain)(&p.coords) {
            return Err(GeomError::DomainViolation { chart: p.chart, coords: p.coords.clone() });
        }
        let q = PointRef::new(to, ov.forward.apply(&p.coords));
        self.check(&q)?;
        Ok(q)
    }

    /// max |backward(forward(x)) − x| over the given points of `from`.
    pub fn roundtrip_residual(&self, from: usize, to: usize, pts: &[Vec<f64>]) -> Result<f64> {
        let ov = self.overlap(from, to).ok_or(GeomError::UnknownChart(to))?;
        let mut worst: f64 = 0.0;
        for x in pts {
            let back = ov.backward.apply(&ov.forward.apply(x));
            for (a, b) in back.iter().zip(x) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_jacobian_is_matrix() {
        let m = SmoothMap::linear(2, 2, vec![1.0, 2.0, -3.0, 0.5]);
        let (v, j) = m.jacobian(&[1.0, 1.0]);
        assert_eq!(v, vec![3.0, -2.5]);
        assert_eq!(j, vec![1.0, 2.0, -3.0, 0.5]);
    }

    #[test]
    fn unknown_chart_is_reported() {
        let m = ChartedManifold::single_chart(2, Chart::whole("R2"));
        let err = m.check(&PointRef::new(3, vec![0.0, 0.0])).unwrap_err();
        assert_eq!(err, GeomError::UnknownChart(3));
    }
}
