#![allow(dead_code)]

use tricontact::bundle::{build_bundle, CircleBundleAtlas};
use tricontact::contact::AtlasSamples;
use tricontact::kernel::PointRef;
use tricontact::models::{model_by_name, ModelBundle};
use tricontact::sampling;
use tricontact::triple::{build_theorem_one, TheoremOneData};

pub struct Built {
    pub model: ModelBundle,
    pub bundle: CircleBundleAtlas,
    pub base: AtlasSamples,
    pub q: Vec<PointRef>,
    pub q_overlaps: Vec<(PointRef, usize)>,
    pub th: TheoremOneData,
}

/// A model with `n` base samples per chart and its 3-structure tensors.
pub fn build(name: &str, n: usize, seed: u64) -> Built {
    let model = model_by_name(name).unwrap();
    let mut rng = sampling::rng(seed);
    let base = sampling::atlas_samples(&model, n, &mut rng);
    let q = sampling::with_angle(&base.points, &mut rng);
    let q_overlaps = sampling::with_angle_pairs(&base.overlaps, &mut rng);
    let bundle = build_bundle(&model.engine).unwrap();
    let th = build_theorem_one(&bundle, &base.points, &q, 1e-7).unwrap();
    Built { model, bundle, base, q, q_overlaps, th }
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// (E·x) for a row-major endomorphism.
pub fn apply(e: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|r| (0..n).map(|c| e[r * n + c] * x[c]).sum()).collect()
}

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = (0..n).map(|k| a[r * n + k] * b[k * n + c]).sum();
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// B(x, y) for a row-major bilinear form.
pub fn bilinear(b: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    (0..n).map(|r| x[r] * (0..n).map(|c| b[r * n + c] * y[c]).sum::<f64>()).sum()
}

/// Dense antisymmetric component array of Σ c·dx^{i1}∧…∧dx^{ik}, built by
/// summing signed permutations, so that ω(∂_{i1},…,∂_{ik}) = c.
pub fn form(dim: usize, terms: &[(&[usize], f64)]) -> Vec<f64> {
    let k = terms.first().map_or(0, |t| t.0.len());
    let mut out = vec![0.0; dim.pow(k as u32)];
    for (idx, c) in terms {
        for (perm, sign) in permutations(k) {
            let off = perm.iter().fold(0, |o, &p| o * dim + idx[p]);
            out[off] += sign * c;
        }
    }
    out
}

fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    if k == 0 {
        return vec![(vec![], 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(k - 1) {
        // insert k-1 at every position; moving it left past j entries flips the sign j times
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            let flips = p.len() - pos;
            out.push((q, if flips % 2 == 0 { s } else { -s }));
        }
    }
    out
}
