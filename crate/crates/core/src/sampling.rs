//! Seeded sampling of chart points, overlap pairs and triple overlaps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contact::AtlasSamples;
use crate::kernel::manifold::PointRef;
use crate::models::{ModelBundle, SampleBox};

const MAX_TRIES: usize = 100_000;

/// Fiber coordinate range of the cone sample t ∈ [−T_RANGE, T_RANGE].
pub const T_RANGE: f64 = 0.5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw(bx: &SampleBox, rng: &mut ChaCha8Rng) -> Vec<f64> {
    bx.lo.iter().zip(&bx.hi).map(|(a, b)| rng.gen_range(*a..=*b)).collect()
}

fn draw_accepted<F: Fn(&[f64]) -> bool>(bx: &SampleBox, rng: &mut ChaCha8Rng, extra: F) -> Option<Vec<f64>> {
    (0..MAX_TRIES).map(|_| draw(bx, rng)).find(|x| bx.contains(x) && extra(x))
}

/// `n` points spread round-robin over the charts.
pub fn base_points(model: &ModelBundle, n: usize, rng: &mut ChaCha8Rng) -> Vec<PointRef> {
    let k = model.boxes.len();
    (0..n)
        .filter_map(|i| {
            let c = i % k;
            draw_accepted(&model.boxes[c], rng, |_| true).map(|x| PointRef::new(c, x))
        })
        .collect()
}

fn lands_in(model: &ModelBundle, p: &PointRef, to: usize) -> bool {
    model
        .atlas()
        .base
        .transition(p, to)
        .map(|q| model.boxes[to].contains(&q.coords))
        .unwrap_or(false)
}

/// `n` samples per ordered overlap whose images stay in the target box.
pub fn overlap_points(model: &ModelBundle, n: usize, rng: &mut ChaCha8Rng) -> Vec<(PointRef, usize)> {
    let base = &model.atlas().base;
    let mut out = Vec::new();
    for ov in &base.overlaps {
        for _ in 0..n {
            let from = ov.from;
            if let Some(x) = draw_accepted(&model.boxes[from], rng, |x| (ov.domain)(x) && lands_in(model, &PointRef::new(from, x.to_vec()), ov.to)) {
                out.push((PointRef::new(from, x), ov.to));
            }
        }
    }
    out
}

/// `n` samples of each triple overlap (i, j, k) with i < j < k, based in chart i.
pub fn triple_points(model: &ModelBundle, n: usize, rng: &mut ChaCha8Rng) -> Vec<(PointRef, usize, usize)> {
    let k = model.boxes.len();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                for _ in 0..n {
                    let ok = |x: &[f64]| {
                        let p = PointRef::new(i, x.to_vec());
                        lands_in(model, &p, j) && lands_in(model, &p, l)
                    };
                    if let Some(x) = draw_accepted(&model.boxes[i], rng, ok) {
                        out.push((PointRef::new(i, x), j, l));
                    }
                }
            }
        }
    }
    out
}

pub fn atlas_samples(model: &ModelBundle, n: usize, rng: &mut ChaCha8Rng) -> AtlasSamples {
    let points = base_points(model, n, rng);
    let overlaps = overlap_points(model, n, rng);
    let triples = triple_points(model, n, rng);
    AtlasSamples { points, overlaps, triples }
}

/// Append a fiber angle φ ∈ [0, 2π) to each base point.
pub fn with_angle(points: &[PointRef], rng: &mut ChaCha8Rng) -> Vec<PointRef> {
    points
        .iter()
        .map(|p| {
            let mut c = p.coords.clone();
            c.push(rng.gen_range(0.0..std::f64::consts::TAU));
            PointRef::new(p.chart, c)
        })
        .collect()
}

pub fn with_angle_pairs(pairs: &[(PointRef, usize)], rng: &mut ChaCha8Rng) -> Vec<(PointRef, usize)> {
    let pts: Vec<PointRef> = pairs.iter().map(|(p, _)| p.clone()).collect();
    with_angle(&pts, rng).into_iter().zip(pairs.iter().map(|(_, t)| *t)).collect()
}

/// Append the cone coordinate t to points of Q.
pub fn with_radius(points: &[PointRef], rng: &mut ChaCha8Rng) -> Vec<PointRef> {
    points
        .iter()
        .map(|p| {
            let mut c = p.coords.clone();
            c.push(rng.gen_range(-T_RANGE..=T_RANGE));
            PointRef::new(p.chart, c)
        })
        .collect()
}

pub fn with_radius_pairs(pairs: &[(PointRef, usize)], rng: &mut ChaCha8Rng) -> Vec<(PointRef, usize)> {
    let pts: Vec<PointRef> = pairs.iter().map(|(p, _)| p.clone()).collect();
    with_radius(&pts, rng).into_iter().zip(pairs.iter().map(|(_, t)| *t)).collect()
}
