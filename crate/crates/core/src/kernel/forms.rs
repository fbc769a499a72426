//! Exterior calculus on dense antisymmetric components.
//!
//! Conventions: `(α∧β)(v_1..v_{k+l}) = Σ_shuffles sgn · α(..)β(..)` so that
//! `dx∧dy(∂x,∂y) = 1`, and `(dω)_{i0..ik} = Σ_m (−1)^m ∂_{i_m} ω_{..î_m..}`
//! with no 1/(k+1) factor. For a 1-form, `(dω)_ij = ∂_i ω_j − ∂_j ω_i`.

use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::{table, Jet};
use crate::kernel::manifold::PointRef;
use crate::kernel::tensor::{Tensor, TensorField, Valence};
use crate::linalg::pfaffian;

fn require_form(w: &TensorField, what: &str) -> Result<usize> {
    if w.valence.upper != 0 {
        return Err(GeomError::ValenceMismatch(format!("{what} needs a form, got {}", w.valence)));
    }
    Ok(w.valence.lower)
}

fn all_indices(dim: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut off| {
        let mut idx = vec![0; rank];
        for k in (0..rank).rev() {
            idx[k] = off % dim;
            off /= dim;
        }
        idx
    })
}

fn has_repeat(idx: &[usize]) -> bool {
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            if idx[a] == idx[b] {
                return true;
            }
        }
    }
    false
}

/// Exterior derivative of a k-form field.
pub fn exterior_derivative(w: &TensorField) -> Result<TensorField> {
    let k = require_form(w, "exterior_derivative")?;
    let dim = w.dim();
    let src = w.clone();
    Ok(TensorField::new(w.manifold.clone(), Valence::form(k + 1), move |p, order| {
        let t = src.eval_jet(p, order + 1)?;
        Ok(d_of_components(&t, dim, k, order))
    }))
}

/// d applied to components that carry one extra order of Taylor data.
pub fn d_of_components(t: &Tensor, dim: usize, k: usize, order: usize) -> Tensor {
    // partials[j][c] = ∂_j of component c
    let partials: Vec<Vec<Jet>> = (0..dim).map(|j| t.data.iter().map(|c| c.partial(j)).collect()).collect();
    let mut out = Tensor::zeros(dim, Valence::form(k + 1), t.data[0].nvars(), order);
    for idx in all_indices(dim, k + 1) {
        if has_repeat(&idx) {
            continue;
        }
        let mut acc = Jet::zero(table(t.data[0].nvars(), order));
        for m in 0..=k {
            let rest: Vec<usize> = idx.iter().enumerate().filter(|&(q, _)| q != m).map(|(_, &v)| v).collect();
            let off = rest.iter().fold(0, |a, &i| a * dim + i);
            let term = &partials[idx[m]][off];
            if m % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        out.set(&idx, acc);
    }
    out
}

/// (k,l)-shuffles as (positions of the first factor, sign).
fn shuffles(k: usize, l: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let n = k + l;
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let first: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let second: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        // sign of the permutation (first, second): count inversions
        let perm: Vec<usize> = first.iter().chain(second.iter()).copied().collect();
        let mut inv = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                if perm[a] > perm[b] {
                    inv += 1;
                }
            }
        }
        out.push((first, second, if inv % 2 == 0 { 1.0 } else { -1.0 }));
    }
    out
}

/// Wedge of two component tensors at a point.
pub fn wedge_components(a: &Tensor, b: &Tensor) -> Tensor {
    let (k, l) = (a.valence.lower, b.valence.lower);
    let dim = a.dim;
    let sh = shuffles(k, l);
    let mut out = Tensor::zeros(dim, Valence::form(k + l), a.data[0].nvars(), a.order());
    for idx in all_indices(dim, k + l) {
        if has_repeat(&idx) {
            continue;
        }
        let mut acc = Jet::zero(a.data[0].table());
        for (f, s, sign) in &sh {
            let ia: Vec<usize> = f.iter().map(|&q| idx[q]).collect();
            let ib: Vec<usize> = s.iter().map(|&q| idx[q]).collect();
            let prod = a.get(&ia) * b.get(&ib);
            acc.axpy(*sign, &prod);
        }
        out.set(&idx, acc);
    }
    out
}

pub fn wedge(a: &TensorField, b: &TensorField) -> Result<TensorField> {
    let k = require_form(a, "wedge")?;
    let l = require_form(b, "wedge")?;
    if k + l > a.dim() || a.dim() != b.dim() {
        return Err(GeomError::ValenceMismatch(format!("wedge of degrees {k}+{l} in dimension {}", a.dim())));
    }
    crate::kernel::ops::same_manifold(a, b)?;
    let (x, y) = (a.clone(), b.clone());
    Ok(TensorField::new(a.manifold.clone(), Valence::form(k + l), move |p, order| {
        Ok(wedge_components(&x.eval_jet(p, order)?, &y.eval_jet(p, order)?))
    }))
}

/// Interior product ι_X ω.
pub fn interior(x: &TensorField, w: &TensorField) -> Result<TensorField> {
    let k = require_form(w, "interior")?;
    if x.valence != Valence::VECTOR || k == 0 {
        return Err(GeomError::ValenceMismatch("interior needs a vector and a k-form, k ≥ 1".into()));
    }
    crate::kernel::ops::same_manifold(x, w)?;
    let dim = w.dim();
    let (xf, wf) = (x.clone(), w.clone());
    Ok(TensorField::new(w.manifold.clone(), Valence::form(k - 1), move |p, order| {
        let (xv, wv) = (xf.eval_jet(p, order)?, wf.eval_jet(p, order)?);
        let inner = dim.pow((k - 1) as u32);
        let data = (0..inner)
            .map(|rest| {
                let mut acc = Jet::zero(xv.data[0].table());
                for j in 0..dim {
                    acc += &(&xv.data[j] * &wv.data[j * inner + rest]);
                }
                acc
            })
            .collect();
        Ok(Tensor::from_data(dim, Valence::form(k - 1), data))
    }))
}

/// Coefficient of `η∧ν^m` against `dx^0∧…∧dx^{2m}` in dimension 2m+1:
/// m!·Pf of the skew matrix bordered by η.
pub fn eta_nu_power_coefficient(eta: &[f64], nu: &[f64], dim: usize) -> f64 {
    assert_eq!(dim % 2, 1);
    let m = (dim - 1) / 2;
    let n = dim + 1;
    let mut b = vec![0.0; n * n];
    for i in 0..dim {
        b[i + 1] = eta[i];
        b[(i + 1) * n] = -eta[i];
        for j in 0..dim {
            b[(i + 1) * n + j + 1] = nu[i * dim + j];
        }
    }
    let fact: f64 = (1..=m).map(|v| v as f64).product();
    fact * pfaffian(&b, n)
}

/// Coefficient of `ν^m` against `dx^0∧…∧dx^{2m−1}` in dimension 2m: m!·Pf(ν).
pub fn nu_power_coefficient(nu: &[f64], dim: usize) -> f64 {
    let m = dim / 2;
    let fact: f64 = (1..=m).map(|v| v as f64).product();
    fact * pfaffian(nu, dim)
}

/// The scalar coefficient field of `η∧(ν)^m` on an odd-dimensional manifold.
pub fn eta_nu_power(eta: &TensorField, nu: &TensorField) -> Result<TensorField> {
    let dim = eta.dim();
    if eta.valence != Valence::form(1) || nu.valence != Valence::form(2) || dim % 2 == 0 {
        return Err(GeomError::ValenceMismatch("η∧ν^m needs a 1-form and a 2-form in odd dimension".into()));
    }
    let (e, n) = (eta.clone(), nu.clone());
    Ok(TensorField::new(eta.manifold.clone(), Valence::SCALAR, move |p, order| {
        if order > 0 {
            return Err(GeomError::ValenceMismatch("top-form coefficients are evaluated at order 0".into()));
        }
        let c = eta_nu_power_coefficient(&e.eval(p)?, &n.eval(p)?, dim);
        Ok(Tensor::from_data(dim, Valence::SCALAR, vec![Jet::constant(table(dim, 0), c)]))
    }))
}

/// min over `points` of |ω(∂_0, …, ∂_{n−1})| for a top-degree form ω.
pub fn min_topform_magnitude(w: &TensorField, points: &[PointRef]) -> Result<f64> {
    let dim = w.dim();
    if w.valence != Valence::form(dim) {
        return Err(GeomError::ValenceMismatch(format!("expected a {dim}-form, got {}", w.valence)));
    }
    let idx: Vec<usize> = (0..dim).collect();
    let mut m = f64::INFINITY;
    for p in points {
        let t = w.eval_jet(p, 0)?;
        m = m.min(t.get(&idx).value().abs());
    }
    Ok(if points.is_empty() { 0.0 } else { m })
}

/// min over `points` of |f| for a scalar field (e.g. a top-form coefficient).
pub fn min_abs_scalar(f: &TensorField, points: &[PointRef]) -> Result<f64> {
    let mut m = f64::INFINITY;
    for p in points {
        m = m.min(f.eval(p)?[0].abs());
    }
    Ok(if points.is_empty() { 0.0 } else { m })
}

/// Constant coordinate 1-form dx^i.
pub fn coordinate_form(manifold: Arc<crate::kernel::manifold::ChartedManifold>, i: usize) -> TensorField {
    let dim = manifold.dim;
    let mut c = vec![0.0; dim];
    c[i] = 1.0;
    TensorField::constant(manifold, Valence::form(1), c)
}
