//! Levi-Civita connection and curvature of a metric field.
//!
//! Conventions: `∇_{∂b} ∂c = Γ^a_{bc} ∂a`, `R(∂c,∂d)∂b = R^a_{bcd} ∂a`,
//! `Ric_{bd} = R^a_{bad}`. The unit round sphere S^m has `Ric = (m−1) g`.

use crate::error::{GeomError, Result};
use crate::jet::{table, Jet};
use crate::kernel::manifold::PointRef;
use crate::kernel::tensor::{MetricField, Tensor, TensorField, Valence};
use crate::linalg::JMat;

/// Christoffel symbols Γ^a_{bc} at `order` from the metric at `order + 1`.
pub fn christoffel_jets(g: &Tensor, order: usize) -> Result<Tensor> {
    let n = g.dim;
    let g0 = JMat::from_vec(n, n, g.truncate(order).data);
    let ginv = g0.inverse()?;
    // dg[l][b*n+c] = ∂_l g_bc
    let dg: Vec<Vec<Jet>> = (0..n).map(|l| g.data.iter().map(|c| c.partial(l)).collect()).collect();
    let tab = table(g.data[0].nvars(), order);
    // lowered Γ_{d,bc} = ½(∂_b g_dc + ∂_c g_db − ∂_d g_bc)
    let mut low = vec![Jet::zero(tab); n * n * n];
    for d in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut s = &dg[b][d * n + c] + &dg[c][d * n + b];
                s -= &dg[d][b * n + c];
                let s = s.scale(0.5);
                low[(d * n + b) * n + c] = s.clone();
                low[(d * n + c) * n + b] = s;
            }
        }
    }
    let mut out = Tensor::zeros(n, Valence::new(1, 2), g.data[0].nvars(), order);
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut acc = Jet::zero(tab);
                for d in 0..n {
                    acc += &(ginv.at(a, d) * &low[(d * n + b) * n + c]);
                }
                out.set(&[a, c, b], acc.clone());
                out.set(&[a, b, c], acc);
            }
        }
    }
    Ok(out)
}

/// Christoffel symbol values at `p`, indexed [a][b][c].
pub fn levi_civita(g: &MetricField, p: &PointRef) -> Result<Vec<f64>> {
    let gt = g.field().eval_jet(p, 1)?;
    Ok(christoffel_jets(&gt, 0)?.values())
}

/// ∇ξ as a (1,1) field: (∇ξ)^a_b = ∂_b ξ^a + Γ^a_{bc} ξ^c, so (∇ξ)(X) = ∇_X ξ.
pub fn covariant_derivative(g: &MetricField, xi: &TensorField) -> Result<TensorField> {
    if xi.valence != Valence::VECTOR {
        return Err(GeomError::ValenceMismatch(format!("covariant_derivative needs a vector, got {}", xi.valence)));
    }
    let n = xi.dim();
    let (gf, xf) = (g.field().clone(), xi.clone());
    Ok(TensorField::new(xi.manifold.clone(), Valence::ENDO, move |p, order| {
        let gam = christoffel_jets(&gf.eval_jet(p, order + 1)?, order)?;
        let xv = xf.eval_jet(p, order + 1)?;
        let x0 = xv.truncate(order);
        let mut out = Tensor::zeros(n, Valence::ENDO, n, order);
        for a in 0..n {
            for b in 0..n {
                let mut acc = xv.data[a].partial(b);
                for c in 0..n {
                    acc += &(gam.get(&[a, b, c]) * &x0.data[c]);
                }
                out.set(&[a, b], acc);
            }
        }
        Ok(out)
    }))
}

#[derive(Clone, Debug)]
pub struct Curvature {
    pub dim: usize,
    /// R^a_{bcd}, indexed [a][b][c][d]
    pub riemann: Vec<f64>,
    pub ricci: Vec<f64>,
    pub scalar: f64,
    pub metric: Vec<f64>,
}

impl Curvature {
    /// max |Ric − λ g| with λ = scalar / dim.
    pub fn einstein_defect(&self) -> f64 {
        let lam = self.scalar / self.dim as f64;
        self.ricci.iter().zip(&self.metric).fold(0.0, |m, (r, g)| m.max((r - lam * g).abs()))
    }
}

pub fn curvature_from_jets(g: &Tensor) -> Result<Curvature> {
    let n = g.dim;
    let gam1 = christoffel_jets(g, 1)?;
    let gam0 = gam1.truncate(0);
    let gv = |a: usize, b: usize, c: usize| gam0.get(&[a, b, c]).value();
    let dgam = |l: usize, a: usize, b: usize, c: usize| gam1.get(&[a, b, c]).d1(l);
    let mut riemann = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut r = dgam(c, a, d, b) - dgam(d, a, c, b);
                    for e in 0..n {
                        r += gv(a, c, e) * gv(e, d, b) - gv(a, d, e) * gv(e, c, b);
                    }
                    riemann[((a * n + b) * n + c) * n + d] = r;
                }
            }
        }
    }
    let mut ricci = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            ricci[b * n + d] = (0..n).map(|a| riemann[((a * n + b) * n + a) * n + d]).sum();
        }
    }
    let metric: Vec<f64> = g.values();
    let gm = nalgebra::DMatrix::from_row_slice(n, n, &metric);
    let ginv = gm.try_inverse().ok_or(GeomError::SingularMetric)?;
    let mut scalar = 0.0;
    for b in 0..n {
        for d in 0..n {
            scalar += ginv[(b, d)] * ricci[b * n + d];
        }
    }
    Ok(Curvature { dim: n, riemann, ricci, scalar, metric })
}

pub fn curvature(g: &MetricField, p: &PointRef) -> Result<Curvature> {
    curvature_from_jets(&g.field().eval_jet(p, 2)?)
}

/// max over indices of |(∇g)_{abc}| and of |Γ^a_{bc} − Γ^a_{cb}|, recomputed from
/// the Christoffel array (not from the formula that defines it).
pub fn compatibility_residuals(g: &MetricField, p: &PointRef) -> Result<(f64, f64)> {
    let gt = g.field().eval_jet(p, 1)?;
    let n = gt.dim;
    let gam = christoffel_jets(&gt, 0)?.values();
    let gv = gt.values();
    let mut nabla: f64 = 0.0;
    let mut torsion: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = gt.data[b * n + c].d1(a);
                for d in 0..n {
                    v -= gam[(d * n + a) * n + b] * gv[d * n + c] + gam[(d * n + a) * n + c] * gv[b * n + d];
                }
                nabla = nabla.max(v.abs());
                torsion = torsion.max((gam[(a * n + b) * n + c] - gam[(a * n + c) * n + b]).abs());
            }
        }
    }
    Ok((nabla, torsion))
}
