//! Transformation-law defects of tensor fields on chart overlaps.

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::kernel::manifold::PointRef;
use crate::kernel::tensor::TensorField;

/// Apply `m` (row-major dim×dim) to slot `s` of a dense rank-`r` array.
fn transform_slot(data: &[f64], dim: usize, rank: usize, s: usize, m: &[f64]) -> Vec<f64> {
    let stride = dim.pow((rank - 1 - s) as u32);
    let mut out = vec![0.0; data.len()];
    for (off, o) in out.iter_mut().enumerate() {
        let a = (off / stride) % dim;
        let base = off - a * stride;
        *o = (0..dim).map(|i| m[a * dim + i] * data[base + i * stride]).sum();
    }
    out
}

/// Express components given in chart `from` at `p` in chart `to`.
pub fn transform_components(t: &TensorField, p: &PointRef, to: usize, comps: &[f64]) -> Result<Vec<f64>> {
    let man = &t.manifold;
    let ov = man.overlap(p.chart, to).ok_or(GeomError::UnknownChart(to))?;
    let dim = man.dim;
    let (_, jac) = ov.forward.jacobian(&p.coords);
    let jm = DMatrix::from_row_slice(dim, dim, &jac);
    let inv = jm.try_inverse().ok_or(GeomError::SingularMetric)?;
    // lower slots transform by (DF⁻¹)ᵀ, written row-major
    let inv_t_rm: Vec<f64> = (0..dim * dim).map(|k| inv[(k % dim, k / dim)]).collect();
    let rank = t.valence.rank();
    let mut cur = comps.to_vec();
    for s in 0..rank {
        cur = if s < t.valence.upper {
            transform_slot(&cur, dim, rank, s, &jac)
        } else {
            transform_slot(&cur, dim, rank, s, &inv_t_rm)
        };
    }
    Ok(cur)
}

/// Defect of the transformation law at one overlap sample.
pub fn transition_defect(t: &TensorField, p: &PointRef, to: usize) -> Result<f64> {
    let q = t.manifold.transition(p, to)?;
    let here = t.eval(p)?;
    let there = t.eval(&q)?;
    let moved = transform_components(t, p, to, &here)?;
    Ok(moved.iter().zip(&there).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// max over samples (point, target chart) of the transformation-law defect.
pub fn transition_residual(t: &TensorField, samples: &[(PointRef, usize)]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        worst = worst.max(transition_defect(t, p, *to)?);
    }
    Ok(worst)
}
