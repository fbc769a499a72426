//! The cone 𝒰 = Q × ℝ ≅ L^× with its hyperhermitian structure and the
//! holomorphic symplectic form Υ.
//!
//! Cone coordinates are (x, φ, t); the fiber point of L over x is
//! z = e^{t+iφ}/√h(x).

use std::sync::Arc;

use crate::algebra;
use crate::bundle::{wrap_angle, CircleBundleAtlas};
use crate::contact::{complex_coords, real_parts};
use crate::error::{GeomError, Result};
use crate::jet::{table, CJet, Jet};
use crate::kernel::manifold::{Chart, ChartedManifold, Overlap, PointRef, SmoothMap};
use crate::kernel::ops::{nijenhuis_endo, pullback, ChartMap};
use crate::kernel::tensor::{MetricField, Tensor, TensorField, Valence};
use crate::kernel::{exterior_derivative, transition_residual};
use crate::linalg::pfaffian_complex;
use crate::triple::AlmostContactTriple;

#[derive(Clone)]
pub struct ConeManifold {
    pub bundle: CircleBundleAtlas,
    pub manifold: Arc<ChartedManifold>,
    /// the projection 𝒰 → Q forgetting t
    pub projection: ChartMap,
}

impl ConeManifold {
    pub fn q_dim(&self) -> usize {
        self.bundle.dim()
    }

    pub fn dim(&self) -> usize {
        self.q_dim() + 1
    }

    pub fn t_index(&self) -> usize {
        self.q_dim()
    }

    /// Fiber point z ∈ L^×_x of a cone point, as (base point, Re z, Im z).
    pub fn to_line_bundle(&self, p: &PointRef) -> Result<(PointRef, f64, f64)> {
        self.manifold.check(p)?;
        let m = self.bundle.base_dim();
        let base = PointRef::new(p.chart, p.coords[..m].to_vec());
        let h = self.bundle.engine.weight.h_at(p.chart, &complex_coords(&Jet::point(&base.coords, 0)))?.value();
        let r = p.coords[m + 1].exp() / h.sqrt();
        let phi = p.coords[m];
        Ok((base, r * phi.cos(), r * phi.sin()))
    }

    /// Inverse of `to_line_bundle`: (x, z) ↦ (x, arg z, log(|z|√h)).
    pub fn from_line_bundle(&self, base: &PointRef, z: (f64, f64)) -> Result<PointRef> {
        let h = self.bundle.engine.weight.h_at(base.chart, &complex_coords(&Jet::point(&base.coords, 0)))?.value();
        let mut c = base.coords.clone();
        c.push(wrap_angle(z.1.atan2(z.0)));
        c.push((z.0.hypot(z.1) * h.sqrt()).ln());
        Ok(PointRef::new(base.chart, c))
    }

    /// A field on 𝒰 built from fields on Q and the t jet.
    pub fn extend<F>(&self, valence: Valence, inputs: Vec<TensorField>, f: F) -> TensorField
    where
        F: Fn(&[Tensor], &Jet) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        let qd = self.q_dim();
        let d = qd + 1;
        let map: Vec<usize> = (0..qd).collect();
        TensorField::new(self.manifold.clone(), valence, move |p, order| {
            let q = PointRef::new(p.chart, p.coords[..qd].to_vec());
            let vals = inputs
                .iter()
                .map(|t| {
                    let v = t.eval_jet(&q, order)?;
                    let data = v.data.iter().map(|j| j.embed(d, &map)).collect();
                    Ok(Tensor::from_data(v.dim, v.valence, data))
                })
                .collect::<Result<Vec<_>>>()?;
            let t = Jet::var(table(d, order), qd, p.coords[qd]);
            Ok(Tensor::from_data(d, valence, f(&vals, &t)?))
        })
    }
}

pub fn build_cone(bundle: &CircleBundleAtlas) -> ConeManifold {
    let qm = bundle.manifold.clone();
    let qd = qm.dim;
    let charts = qm
        .charts
        .iter()
        .map(|c| {
            let dom = c.domain.clone();
            Chart::new(&format!("{}×R", c.name), move |x: &[f64]| x.len() == qd + 1 && dom(&x[..qd]) && x[qd].is_finite())
        })
        .collect();
    let extend_map = |f: SmoothMap| {
        SmoothMap::new(qd + 1, qd + 1, move |x: &[Jet]| {
            let mut y = f.apply_jets(&x[..qd]);
            y.push(x[qd].clone());
            y
        })
    };
    let overlaps = qm
        .overlaps
        .iter()
        .map(|ov| {
            let dom = ov.domain.clone();
            Overlap {
                from: ov.from,
                to: ov.to,
                domain: Arc::new(move |x: &[f64]| dom(&x[..qd])),
                forward: extend_map(ov.forward.clone()),
                backward: extend_map(ov.backward.clone()),
            }
        })
        .collect();
    let manifold = Arc::new(ChartedManifold { dim: qd + 1, charts, overlaps });
    let pieces = (0..manifold.charts.len()).map(|c| (c, SmoothMap::new(qd + 1, qd, move |x: &[Jet]| x[..qd].to_vec()))).collect();
    let projection = ChartMap { source: manifold.clone(), target: qm, pieces };
    ConeManifold { bundle: bundle.clone(), manifold, projection }
}

/// max |z_j − f_ij z_i| over cone overlap samples: the fiber coordinate of
/// the identification is a section of L^× in every chart.
pub fn fiber_transition_residual(cone: &ConeManifold, samples: &[(PointRef, usize)]) -> Result<f64> {
    let m = cone.bundle.base_dim();
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        let q = cone.manifold.transition(p, *to)?;
        let (_, zr, zi) = cone.to_line_bundle(p)?;
        let (_, wr, wi) = cone.to_line_bundle(&q)?;
        let f = cone.bundle.engine.atlas.cocycle_at(p.chart, *to, &complex_coords(&Jet::point(&p.coords[..m], 0)))?;
        let (fr, fi) = (f.re.value(), f.im.value());
        worst = worst.max((wr - (fr * zr - fi * zi)).hypot(wi - (fr * zi + fi * zr)));
    }
    Ok(worst)
}

/// I_α X = Φ_α X − η_α(X) ∂_t and I_α ∂_t = ξ_α.
pub fn cone_complex_structures(cone: &ConeManifold, triple: &AlmostContactTriple) -> [TensorField; 3] {
    let qd = cone.q_dim();
    let d = qd + 1;
    let one = |a: usize| {
        cone.extend(Valence::new(1, 1), vec![triple.phi[a].clone(), triple.xi[a].clone(), triple.eta[a].clone()], move |v, t| {
            let tab = t.table();
            let mut out = vec![Jet::zero(tab); d * d];
            for i in 0..qd {
                for j in 0..qd {
                    out[i * d + j] = v[0].data[i * qd + j].clone();
                }
                out[i * d + qd] = v[1].data[i].clone();
                out[qd * d + i] = -&v[2].data[i];
            }
            Ok(out)
        })
    };
    [one(0), one(1), one(2)]
}

/// g_C = g_Q + dt² and g_U = e^t g_C.
pub fn cone_metrics(cone: &ConeManifold, g_q: &MetricField) -> Result<(MetricField, MetricField)> {
    let qd = cone.q_dim();
    let d = qd + 1;
    let block = move |v: &[Tensor], t: &Jet| {
        let mut out = vec![Jet::zero(t.table()); d * d];
        for i in 0..qd {
            for j in 0..qd {
                out[i * d + j] = v[0].data[i * qd + j].clone();
            }
        }
        out[qd * d + qd] = Jet::constant(t.table(), 1.0);
        out
    };
    let g_c = cone.extend(Valence::form(2), vec![g_q.0.clone()], move |v, t| Ok(block(v, t)));
    let g_u = cone.extend(Valence::form(2), vec![g_q.0.clone()], move |v, t| {
        let e = t.exp();
        Ok(block(v, t).iter().map(|c| c * &e).collect())
    });
    Ok((MetricField::new(g_c)?, MetricField::new(g_u)?))
}

/// g(I⊗Id): (X, Y) ↦ g(IX, Y).
pub fn lowered_form(i: &TensorField, g: &MetricField) -> TensorField {
    let d = i.dim();
    TensorField::combine(i.manifold.clone(), Valence::form(2), vec![i.clone(), g.0.clone()], move |v| {
        let tab = v[0].data[0].table();
        let mut out = vec![Jet::zero(tab); d * d];
        for a in 0..d {
            for b in 0..d {
                let mut s = Jet::zero(tab);
                for c in 0..d {
                    s += &(&v[0].data[c * d + a] * &v[1].data[c * d + b]);
                }
                out[a * d + b] = s;
            }
        }
        Ok(out)
    })
}

/// Θ_α = g_C(I_α⊗Id) and ω_α = g_U(I_α⊗Id), α = 1, 2, 3.
pub fn fundamental_forms(i: &[TensorField; 3], g_c: &MetricField, g_u: &MetricField) -> ([TensorField; 3], [TensorField; 3]) {
    let th = [lowered_form(&i[0], g_c), lowered_form(&i[1], g_c), lowered_form(&i[2], g_c)];
    let om = [lowered_form(&i[0], g_u), lowered_form(&i[1], g_u), lowered_form(&i[2], g_u)];
    (th, om)
}

/// Complex form as (real part, imaginary part).
pub type ComplexForm = (TensorField, TensorField);

/// ϑ = z π*θ with z = e^{t+iφ}/√h, written directly from the atlas data.
pub fn tautological_form(cone: &ConeManifold, overlap_samples: &[(PointRef, usize)], tol: f64) -> Result<ComplexForm> {
    let eng = cone.bundle.engine.clone();
    let m = cone.bundle.base_dim();
    let d = cone.dim();
    let part = |imag: bool| {
        let eng = eng.clone();
        TensorField::new(cone.manifold.clone(), Valence::form(1), move |p, order| {
            let x = Jet::point(&p.coords, order);
            let zc = complex_coords(&x[..m]);
            let a = eng.atlas.theta_at(p.chart, &zc)?;
            let (re, im) = real_parts(&a);
            let h = eng.weight.h_at(p.chart, &zc)?;
            let r = &x[m + 1].exp() * &h.sqrt().recip();
            let z = CJet::new(&r * &x[m].cos(), &r * &x[m].sin());
            let tab = x[0].table();
            let mut out = vec![Jet::zero(tab); d];
            for k in 0..m {
                out[k] = if imag { &(&z.re * &im[k]) + &(&z.im * &re[k]) } else { &(&z.re * &re[k]) - &(&z.im * &im[k]) };
            }
            Ok(Tensor::from_data(d, Valence::form(1), out))
        })
    };
    let theta = (part(false), part(true));
    let r = transition_residual(&theta.0, overlap_samples)?.max(transition_residual(&theta.1, overlap_samples)?);
    if r > tol {
        return Err(GeomError::GaugeInconsistency(r));
    }
    Ok(theta)
}

/// e^t(η₂ + iη₃) on the cone.
pub fn kobayashi_cone_form(cone: &ConeManifold, triple: &AlmostContactTriple) -> ComplexForm {
    let qd = cone.q_dim();
    let one = |e: &TensorField| {
        cone.extend(Valence::form(1), vec![e.clone()], move |v, t| {
            let et = t.exp();
            let mut out: Vec<Jet> = v[0].data.iter().map(|c| c * &et).collect();
            out.push(Jet::zero(t.table()));
            debug_assert_eq!(out.len(), qd + 1);
            Ok(out)
        })
    };
    (one(&triple.eta[1]), one(&triple.eta[2]))
}

#[derive(Clone, Debug)]
pub struct HyperhermitianData {
    pub i: [TensorField; 3],
    pub g_c: MetricField,
    pub g_u: MetricField,
    pub theta: [TensorField; 3],
    pub omega: [TensorField; 3],
    pub vartheta: ComplexForm,
    /// Υ = ω₂ + iω₃
    pub upsilon: ComplexForm,
}

pub fn hyperhermitian(cone: &ConeManifold, triple: &AlmostContactTriple, overlap_samples: &[(PointRef, usize)], tol: f64) -> Result<HyperhermitianData> {
    let i = cone_complex_structures(cone, triple);
    let (g_c, g_u) = cone_metrics(cone, &triple.g_q)?;
    let (theta, omega) = fundamental_forms(&i, &g_c, &g_u);
    let vartheta = tautological_form(cone, overlap_samples, tol)?;
    let upsilon = (omega[1].clone(), omega[2].clone());
    Ok(HyperhermitianData { i, g_c, g_u, theta, omega, vartheta, upsilon })
}

/// max over 2k-subsets of |k!·Pf_ℂ| of the principal minors of a complex 2-form:
/// the largest coefficient of its k-th wedge power.
pub fn complex_power_magnitude(re: &[f64], im: &[f64], dim: usize, k: usize) -> f64 {
    let size = 2 * k;
    let fact: f64 = (1..=k).map(|v| v as f64).product();
    let mut best: f64 = 0.0;
    let mut idx: Vec<usize> = (0..size).collect();
    if size > dim {
        return 0.0;
    }
    loop {
        let sub: Vec<(f64, f64)> = idx
            .iter()
            .flat_map(|&a| idx.iter().map(move |&b| (a, b)))
            .map(|(a, b)| (re[a * dim + b], im[a * dim + b]))
            .collect();
        let (pr, pi) = pfaffian_complex(&sub, size);
        best = best.max(fact * pr.hypot(pi));
        // next combination in lexicographic order
        let mut pos = size;
        while pos > 0 && idx[pos - 1] == dim - size + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return best;
        }
        idx[pos - 1] += 1;
        for q in pos..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Residuals of the hyperhermitian cone and the holomorphic symplectic form.
#[derive(Clone, Debug, Default)]
pub struct ConeReport {
    /// I_α² = −Id, I_αI_β = I_γ = −I_βI_α over cyclic (α, β, γ)
    pub quaternion: f64,
    /// g_U(I_α·, I_α·) − g_U
    pub hermitian: f64,
    pub nijenhuis_i1: f64,
    pub d_omega2: f64,
    pub d_omega3: f64,
    pub d_omega1: f64,
    /// Υ − dϑ
    pub upsilon_exact: f64,
    /// Υ(I₁X, Y) − iΥ(X, Y)
    pub holomorphicity: f64,
    /// min over samples of the largest coefficient of Υ^{n+1}
    pub upsilon_power_min: f64,
    /// ϑ − e^t(η₂ + iη₃)
    pub vartheta_kobayashi: f64,
    pub points: usize,
}

pub fn cone_report(cone: &ConeManifold, triple: &AlmostContactTriple, data: &HyperhermitianData, samples: &[PointRef]) -> Result<ConeReport> {
    let d = cone.dim();
    let n = cone.bundle.engine.atlas.n;
    let nij = nijenhuis_endo(&data.i[0])?;
    let dw: Vec<TensorField> = data.omega.iter().map(exterior_derivative).collect::<Result<_>>()?;
    let dth = (exterior_derivative(&data.vartheta.0)?, exterior_derivative(&data.vartheta.1)?);
    let kob = kobayashi_cone_form(cone, triple);
    let mut rep = ConeReport { upsilon_power_min: f64::INFINITY, points: samples.len(), ..Default::default() };
    for p in samples {
        let is: Vec<Vec<f64>> = data.i.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        let id = algebra::identity(d);
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let sq = algebra::add(&algebra::mat_mul(&is[a], &is[a], d), &id);
            let ab = algebra::sub(&algebra::mat_mul(&is[a], &is[b], d), &is[c]);
            let ba = algebra::add(&algebra::mat_mul(&is[b], &is[a], d), &is[c]);
            rep.quaternion = rep.quaternion.max(algebra::max_abs(&sq)).max(algebra::max_abs(&ab)).max(algebra::max_abs(&ba));
        }
        let gu = data.g_u.0.eval(p)?;
        for ia in &is {
            let pulled = algebra::mat_mul(&algebra::mat_mul(&algebra::transpose(ia, d), &gu, d), ia, d);
            rep.hermitian = rep.hermitian.max(algebra::max_diff(&pulled, &gu));
        }
        rep.nijenhuis_i1 = rep.nijenhuis_i1.max(algebra::max_abs(&nij.eval(p)?));
        rep.d_omega1 = rep.d_omega1.max(algebra::max_abs(&dw[0].eval(p)?));
        rep.d_omega2 = rep.d_omega2.max(algebra::max_abs(&dw[1].eval(p)?));
        rep.d_omega3 = rep.d_omega3.max(algebra::max_abs(&dw[2].eval(p)?));
        let (ur, ui) = (data.upsilon.0.eval(p)?, data.upsilon.1.eval(p)?);
        rep.upsilon_exact = rep.upsilon_exact.max(algebra::max_diff(&ur, &dth.0.eval(p)?)).max(algebra::max_diff(&ui, &dth.1.eval(p)?));
        // Υ(I₁X, Y) = iΥ(X, Y) splits into Re: Υ_re(I₁·,·) = −Υ_im and Im: Υ_im(I₁·,·) = Υ_re
        let hr = algebra::add(&algebra::lower_first(&is[0], &ur, d), &ui);
        let hi = algebra::sub(&algebra::lower_first(&is[0], &ui, d), &ur);
        rep.holomorphicity = rep.holomorphicity.max(algebra::max_abs(&hr)).max(algebra::max_abs(&hi));
        rep.upsilon_power_min = rep.upsilon_power_min.min(complex_power_magnitude(&ur, &ui, d, n + 1));
        rep.vartheta_kobayashi = rep
            .vartheta_kobayashi
            .max(algebra::max_diff(&data.vartheta.0.eval(p)?, &kob.0.eval(p)?))
            .max(algebra::max_diff(&data.vartheta.1.eval(p)?, &kob.1.eval(p)?));
    }
    if samples.is_empty() {
        rep.upsilon_power_min = 0.0;
    }
    Ok(rep)
}

/// T*ℂ² with coordinates (q₁, q₂, p₁, p₂), interleaved real and imaginary parts.
pub fn cotangent_space() -> Arc<ChartedManifold> {
    Arc::new(ChartedManifold::single_chart(8, Chart::whole("T*C^2")))
}

/// Λ = p₁dq₁ + p₂dq₂ as a complex 1-form on T*ℂ².
pub fn liouville_form(tstar: Arc<ChartedManifold>) -> ComplexForm {
    let part = |imag: bool| {
        TensorField::from_coords(tstar.clone(), Valence::form(1), move |_c, x| {
            let mut out = vec![Jet::zero(x[0].table()); 8];
            for k in 0..2 {
                let (pr, pi) = (&x[4 + 2 * k], &x[5 + 2 * k]);
                // p dq = (pr + i pi)(dx + i dy)
                if imag {
                    out[2 * k] = pi.clone();
                    out[2 * k + 1] = pr.clone();
                } else {
                    out[2 * k] = pr.clone();
                    out[2 * k + 1] = -pi;
                }
            }
            Ok(out)
        })
    };
    (part(false), part(true))
}

/// The cone of P(T*ℂ²) as (T*ℂ²)^×: (q, [ξ], φ, t) ↦ (q, z ξ̂) where ξ̂ = (1, λ)
/// in the λ chart and (μ, 1) in the μ chart.
pub fn cotangent_identification(cone: &ConeManifold, tstar: Arc<ChartedManifold>) -> ChartMap {
    let eng = cone.bundle.engine.clone();
    let d = cone.dim();
    let pieces = (0..cone.manifold.charts.len())
        .map(|c| {
            let eng = eng.clone();
            let map = SmoothMap::new(d, 8, move |x: &[Jet]| {
                let zc = complex_coords(&x[..6]);
                let h = eng.weight.h_at(c, &zc).expect("weight on a cone chart");
                let r = &x[7].exp() * &h.sqrt().recip();
                let z = CJet::new(&r * &x[6].cos(), &r * &x[6].sin());
                let one = CJet::constant(x[0].table(), 1.0, 0.0);
                let xi = if c == 0 { [one, zc[2].clone()] } else { [zc[2].clone(), one] };
                let p1 = &z * &xi[0];
                let p2 = &z * &xi[1];
                vec![x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone(), p1.re, p1.im, p2.re, p2.im]
            });
            (0, map)
        })
        .collect();
    ChartMap { source: cone.manifold.clone(), target: tstar, pieces }
}

/// max |ϑ − F*Λ| over cone samples, F the cotangent identification.
pub fn liouville_residual(cone: &ConeManifold, vartheta: &ComplexForm, samples: &[PointRef]) -> Result<f64> {
    let tstar = cotangent_space();
    let lam = liouville_form(tstar.clone());
    let f = cotangent_identification(cone, tstar);
    let (pr, pi) = (pullback(&f, &lam.0)?, pullback(&f, &lam.1)?);
    let mut worst: f64 = 0.0;
    for p in samples {
        worst = worst.max(algebra::max_diff(&pr.eval(p)?, &vartheta.0.eval(p)?)).max(algebra::max_diff(&pi.eval(p)?, &vartheta.1.eval(p)?));
    }
    Ok(worst)
}
