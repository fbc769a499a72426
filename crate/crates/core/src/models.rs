//! Built-in complex contact manifolds with Hermitian weights, reference
//! metrics and sampling boxes.
//!
//! - `flat3`: ℂ^{2n+1} with θ = dz₀ + Σ z_{2k−1} dz_{2k}, h ≡ 1.
//! - `cp3`: ℂP³ in its four affine charts, θ from z₀dz₁ − z₁dz₀ + z₂dz₃ − z₃dz₂,
//!   cocycles and weight obtained as squares of the O(−1) data.
//! - `cotangent`: P(T*ℂ²) = ℂ² × ℂP¹ with θ = dq₁ + λ dq₂ (and its μ = 1/λ chart).

use std::sync::Arc;

use nalgebra::{Complex, DMatrix};

use crate::contact::{complex_coords, ComplexCoeffFn, CocycleFn, ContactEngine, HermitianWeight, HolomorphicContactAtlas, RealMatrixFn};
use crate::error::{GeomError, Result};
use crate::jet::{CJet, Jet};
use crate::kernel::manifold::{Chart, ChartedManifold, Overlap, PointRef, SmoothMap};

/// Sampling region of one chart: a coordinate box with an optional extra constraint.
#[derive(Clone)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub accept: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl SampleBox {
    pub fn cube(dim: usize, r: f64) -> SampleBox {
        SampleBox { lo: vec![-r; dim], hi: vec![r; dim], accept: Arc::new(|_x: &[f64]| true) }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *v >= *a && *v <= *b) && (self.accept)(x)
    }
}

/// Which suites must pass on a model; everything else is reported only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expectations {
    /// Φ₁ = κ′∇ξ₁ and normality of Φ₂, Φ₃
    pub sasaki: bool,
    /// Ric = λ g_Q with the normalized curvature targets
    pub einstein: bool,
    /// ω positive and the curvature normalization
    pub fano: bool,
    /// dω₁ = 0 on the cone
    pub hyperkahler: bool,
    /// ϑ agrees with the tautological form Λ of T*M
    pub tautological: bool,
}

pub struct ModelBundle {
    pub name: &'static str,
    pub doc: &'static str,
    pub engine: ContactEngine,
    pub boxes: Vec<SampleBox>,
    pub expectations: Expectations,
}

impl ModelBundle {
    pub fn atlas(&self) -> &HolomorphicContactAtlas {
        &self.engine.atlas
    }

    pub fn weight(&self) -> &HermitianWeight {
        &self.engine.weight
    }

    /// Flat models carry no curvature; tolerances for atlas checks are tighter there.
    pub fn is_flat(&self) -> bool {
        self.name == "flat3"
    }
}

pub const MODEL_NAMES: [&str; 3] = ["flat3", "cp3", "cotangent"];

pub fn model_by_name(name: &str) -> Result<ModelBundle> {
    match name {
        "flat3" => build_flat_model(1),
        "cp3" => Ok(build_projective_twistor()),
        "cotangent" => Ok(build_cotangent_model()),
        other => Err(GeomError::UnknownModel(other.to_string())),
    }
}

fn sum_norm_sqr(z: &[CJet]) -> Jet {
    let mut r = Jet::zero(z[0].table());
    for c in z {
        r += &c.norm_sqr();
    }
    r
}

/// Real symmetric form Re h(X, Ȳ) of a c×c hermitian matrix, interleaved coordinates.
fn hermitian_to_real(hm: &[CJet], c: usize) -> Vec<Jet> {
    let m = 2 * c;
    let tab = hm[0].table();
    let mut g = vec![Jet::zero(tab); m * m];
    for k in 0..c {
        for l in 0..c {
            let h = &hm[k * c + l];
            g[(2 * k) * m + 2 * l] = h.re.clone();
            g[(2 * k + 1) * m + 2 * l + 1] = h.re.clone();
            g[(2 * k) * m + 2 * l + 1] = h.im.clone();
            g[(2 * k + 1) * m + 2 * l] = -&h.im;
        }
    }
    g
}

/// Hermitian matrix of the Fubini–Study metric ∂∂̄ log(1 + |w|²).
fn fubini_study(w: &[CJet]) -> Vec<CJet> {
    let c = w.len();
    let s = &sum_norm_sqr(w) + 1.0;
    let inv = s.recip();
    let inv2 = &inv * &inv;
    let mut out = Vec::with_capacity(c * c);
    for k in 0..c {
        for l in 0..c {
            // (δ_kl (1+|w|²) − w̄_k w_l) / (1+|w|²)²
            let prod = &w[k].conj() * &w[l];
            let mut e = (-&prod).mul_real(&inv2);
            if k == l {
                e = &e + &CJet::real(inv.clone());
            }
            out.push(e);
        }
    }
    out
}

pub fn build_flat_model(n: usize) -> Result<ModelBundle> {
    if n == 0 || n > 2 {
        return Err(GeomError::UnsupportedDimension(n));
    }
    let c = 2 * n + 1;
    let m = 2 * c;
    let base = Arc::new(ChartedManifold::single_chart(m, Chart::whole("C^{2n+1}")));
    let theta: ComplexCoeffFn = Arc::new(move |_chart, z| {
        let tab = z[0].table();
        let mut a = vec![CJet::zero(tab); c];
        a[0] = CJet::constant(tab, 1.0, 0.0);
        for k in 1..=n {
            a[2 * k] = z[2 * k - 1].clone();
        }
        Ok(a)
    });
    let cocycle: CocycleFn = Arc::new(|_i, _j, z| Ok(CJet::constant(z[0].table(), 1.0, 0.0)));
    let atlas = Arc::new(HolomorphicContactAtlas::new(base, n, theta, cocycle));
    let weight = HermitianWeight::new(Arc::new(|_c, z| Ok(Jet::constant(z[0].table(), 1.0))));
    Ok(ModelBundle {
        name: "flat3",
        doc: "flat complex contact space C^{2n+1}, theta = dz0 + sum z_{2k-1} dz_{2k}, h = 1",
        engine: ContactEngine::new(atlas, weight, None),
        boxes: vec![SampleBox::cube(m, 1.0)],
        expectations: Expectations { sasaki: false, einstein: false, fano: false, hyperkahler: false, tautological: false },
    })
}

/// Homogeneous coordinates (Z_0..Z_3) of a point in affine chart `c`.
fn homogeneous(c: usize, w: &[CJet]) -> Vec<CJet> {
    let tab = w[0].table();
    let mut z = Vec::with_capacity(4);
    let mut it = w.iter();
    for k in 0..4 {
        if k == c {
            z.push(CJet::constant(tab, 1.0, 0.0));
        } else {
            z.push(it.next().expect("three affine coordinates").clone());
        }
    }
    z
}

fn affine_index(c: usize, k: usize) -> usize {
    if k < c {
        k
    } else {
        k - 1
    }
}

fn cdiv(a: &CJet, b: &CJet) -> CJet {
    a * &b.recip()
}

/// Scale of the O(−2) weight: h = ¼(1+|w|²)², the square of ½(1+|w|²).
pub const CP3_WEIGHT_SCALE: f64 = 0.25;

const CP3_RADIUS: f64 = 1.5;

pub fn build_projective_twistor() -> ModelBundle {
    let charts: Vec<Chart> = (0..4).map(|c| Chart::whole(&format!("Z{c}=1"))).collect();
    let mut overlaps = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let pivot = affine_index(i, j);
            let fwd = move |x: &[Jet]| -> Vec<Jet> {
                let w = complex_coords(x);
                let z = homogeneous(i, &w);
                let mut out = Vec::with_capacity(6);
                for (k, zk) in z.iter().enumerate() {
                    if k == j {
                        continue;
                    }
                    let q = cdiv(zk, &z[j]);
                    out.push(q.re);
                    out.push(q.im);
                }
                out
            };
            let bwd = move |y: &[Jet]| -> Vec<Jet> {
                let w = complex_coords(y);
                let z = homogeneous(j, &w);
                let mut out = Vec::with_capacity(6);
                for (k, zk) in z.iter().enumerate() {
                    if k == i {
                        continue;
                    }
                    let q = cdiv(zk, &z[i]);
                    out.push(q.re);
                    out.push(q.im);
                }
                out
            };
            overlaps.push(Overlap {
                from: i,
                to: j,
                domain: Arc::new(move |x: &[f64]| x[2 * pivot].hypot(x[2 * pivot + 1]) > 1e-8),
                forward: SmoothMap::new(6, 6, fwd),
                backward: SmoothMap::new(6, 6, bwd),
            });
        }
    }
    let base = Arc::new(ChartedManifold { dim: 6, charts, overlaps });
    // θ_c is the restriction of Θ = Z0dZ1 − Z1dZ0 + Z2dZ3 − Z3dZ2 to the section Z_c = 1.
    let theta: ComplexCoeffFn = Arc::new(|c, w| {
        if c > 3 {
            return Err(GeomError::UnknownChart(c));
        }
        let z = homogeneous(c, w);
        let coef = [-&z[1], z[0].clone(), -&z[3], z[2].clone()];
        Ok((0..4).filter(|&k| k != c).map(|k| coef[k].clone()).collect())
    });
    // O(−1) cocycle Z_j/Z_i; the contact line bundle cocycle is its square.
    let cocycle: CocycleFn = Arc::new(|i, j, w| {
        if i > 3 || j > 3 {
            return Err(GeomError::UnknownChart(i.max(j)));
        }
        let z = homogeneous(i, w);
        let g1 = cdiv(&z[j], &z[i]);
        Ok(&g1 * &g1)
    });
    let atlas = Arc::new(HolomorphicContactAtlas::new(base, 1, theta, cocycle));
    let sign = chart_sign_residual(&atlas, &[[0.3, -0.2, 0.5, 0.1, -0.4, 0.7], [-0.9, 0.6, 0.2, -0.3, 1.1, 0.05]]);
    assert!(sign < 1e-12, "cp3 chart forms disagree with the cocycle: {sign:e}");
    let weight = HermitianWeight::new(Arc::new(|c, w| {
        if c > 3 {
            return Err(GeomError::UnknownChart(c));
        }
        let h1 = (&sum_norm_sqr(w) + 1.0).scale(CP3_WEIGHT_SCALE.sqrt());
        Ok(&h1 * &h1)
    }));
    let reference: RealMatrixFn = Arc::new(|_c, x| {
        let w = complex_coords(x);
        Ok(hermitian_to_real(&fubini_study(&w), 3))
    });
    let r2 = CP3_RADIUS * CP3_RADIUS;
    let ball = SampleBox {
        lo: vec![-CP3_RADIUS; 6],
        hi: vec![CP3_RADIUS; 6],
        accept: Arc::new(move |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() <= r2),
    };
    ModelBundle {
        name: "cp3",
        doc: "CP^3 as the twistor space of S^4, four affine charts, O(-2) weight (1/4)(1+|w|^2)^2",
        engine: ContactEngine::new(atlas, weight, Some(reference)),
        boxes: vec![ball; 4],
        expectations: Expectations { sasaki: true, einstein: true, fano: true, hyperkahler: true, tautological: false },
    }
}

/// max |θ_i − f_ij θ_j| at the given chart-i points, over every overlap they lie in.
pub fn chart_sign_residual(atlas: &HolomorphicContactAtlas, points: &[[f64; 6]]) -> f64 {
    let mut worst: f64 = 0.0;
    for ov in &atlas.base.overlaps {
        for x in points {
            if !(ov.domain)(x) {
                continue;
            }
            let p = PointRef::new(ov.from, x.to_vec());
            let r = crate::contact::cocycle_defect(atlas, &p, ov.to).unwrap_or(f64::INFINITY);
            worst = worst.max(r);
        }
    }
    worst
}

/// Holomorphic Jacobian determinant of the transition `from → to` at `p`.
fn transition_det(base: &ChartedManifold, p: &PointRef, to: usize) -> Result<Complex<f64>> {
    let ov = base.overlap(p.chart, to).ok_or(GeomError::UnknownChart(to))?;
    let (_, jac) = ov.forward.jacobian(&p.coords);
    let m = base.dim;
    let c = m / 2;
    // ∂w^k/∂z^l = ∂Re w^k/∂x^l + i ∂Im w^k/∂x^l for holomorphic maps
    let mat = DMatrix::from_fn(c, c, |k, l| Complex::new(jac[(2 * k) * m + 2 * l], jac[(2 * k + 1) * m + 2 * l]));
    Ok(mat.determinant())
}

/// E^{n+1} ≅ det(TZ): the ratio r_ij = f_ij^{n+1} det(∂w_j/∂w_i) must be a
/// unimodular constant on each overlap. Returns the max over samples of
/// ||r_ij| − 1| and |r_ij(p) − r_ij(p₀)|, with p₀ the first sample of each pair.
pub fn power_consistency_residual(atlas: &HolomorphicContactAtlas, samples: &[(PointRef, usize)]) -> Result<f64> {
    let mut first: Vec<((usize, usize), Complex<f64>)> = Vec::new();
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        let f = atlas.cocycle_at(p.chart, *to, &complex_coords(&Jet::point(&p.coords, 0)))?;
        let f = Complex::new(f.re.value(), f.im.value());
        let r = f.powu(atlas.n as u32 + 1) * transition_det(&atlas.base, p, *to)?;
        worst = worst.max((r.norm() - 1.0).abs());
        match first.iter().find(|(k, _)| *k == (p.chart, *to)) {
            Some((_, r0)) => worst = worst.max((r - r0).norm()),
            None => first.push(((p.chart, *to), r)),
        }
    }
    Ok(worst)
}

const COT_RADIUS: f64 = 1.5;

pub fn build_cotangent_model() -> ModelBundle {
    let charts = vec![Chart::whole("lambda"), Chart::whole("mu")];
    let inv_last = |x: &[Jet]| -> Vec<Jet> {
        let l = CJet::new(x[4].clone(), x[5].clone()).recip();
        vec![x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone(), l.re, l.im]
    };
    let nonzero: Arc<dyn Fn(&[f64]) -> bool + Send + Sync> = Arc::new(|x: &[f64]| x[4].hypot(x[5]) > 1e-8);
    let overlaps = vec![
        Overlap { from: 0, to: 1, domain: nonzero.clone(), forward: SmoothMap::new(6, 6, inv_last), backward: SmoothMap::new(6, 6, inv_last) },
        Overlap { from: 1, to: 0, domain: nonzero, forward: SmoothMap::new(6, 6, inv_last), backward: SmoothMap::new(6, 6, inv_last) },
    ];
    let base = Arc::new(ChartedManifold { dim: 6, charts, overlaps });
    // chart 0: θ = dq₁ + λ dq₂; chart 1: θ = μ dq₁ + dq₂
    let theta: ComplexCoeffFn = Arc::new(|c, z| {
        let tab = z[0].table();
        match c {
            0 => Ok(vec![CJet::constant(tab, 1.0, 0.0), z[2].clone(), CJet::zero(tab)]),
            1 => Ok(vec![z[2].clone(), CJet::constant(tab, 1.0, 0.0), CJet::zero(tab)]),
            _ => Err(GeomError::UnknownChart(c)),
        }
    });
    // θ_0 = λ θ_1 and θ_1 = μ θ_0: f_ij is the fiber coordinate of the source chart
    let cocycle: CocycleFn = Arc::new(|i, j, z| {
        if i > 1 || j > 1 {
            return Err(GeomError::UnknownChart(i.max(j)));
        }
        Ok(if i == j { CJet::constant(z[0].table(), 1.0, 0.0) } else { z[2].clone() })
    });
    let atlas = Arc::new(HolomorphicContactAtlas::new(base, 1, theta, cocycle));
    let weight = HermitianWeight::new(Arc::new(|c, z| {
        if c > 1 {
            return Err(GeomError::UnknownChart(c));
        }
        Ok(&z[2].norm_sqr() + 1.0)
    }));
    let reference: RealMatrixFn = Arc::new(|_c, x| {
        let tab = x[0].table();
        let l = CJet::new(x[4].clone(), x[5].clone());
        let fs = (&l.norm_sqr() + 1.0).powf(-2.0);
        let mut g = vec![Jet::zero(tab); 36];
        for k in 0..4 {
            g[k * 6 + k] = Jet::constant(tab, 1.0);
        }
        g[4 * 6 + 4] = fs.clone();
        g[5 * 6 + 5] = fs;
        Ok(g)
    });
    let r2 = COT_RADIUS * COT_RADIUS;
    let bx = SampleBox {
        lo: vec![-1.0, -1.0, -1.0, -1.0, -COT_RADIUS, -COT_RADIUS],
        hi: vec![1.0, 1.0, 1.0, 1.0, COT_RADIUS, COT_RADIUS],
        accept: Arc::new(move |x: &[f64]| x[4] * x[4] + x[5] * x[5] <= r2),
    };
    ModelBundle {
        name: "cotangent",
        doc: "projectivized cotangent bundle of C^2 with the tautological contact form and weight 1+|lambda|^2",
        engine: ContactEngine::new(atlas, weight, Some(reference)),
        boxes: vec![bx.clone(), bx],
        expectations: Expectations { sasaki: false, einstein: false, fano: false, hyperkahler: false, tautological: true },
    }
}
