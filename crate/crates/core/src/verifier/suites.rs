//! The geometric suites: the 3-structure on Q, the sphere of structures,
//! Sasaki–Einstein conditions, the Fano normalization and the cone.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rayon::prelude::*;

use super::report::CheckResult;
use super::{max_over, min_over, nan_max, Context};
use crate::algebra;
use crate::bundle::{angle_transition_residual, bundle_roundtrip_residual, curvature_invariance_residual, gauge_transition_residual, kahler_form};
use crate::cone::{cone_report, fiber_transition_residual, liouville_residual, ConeReport};
use crate::contact::{gauge, validate_atlas};
use crate::error::Result;
use crate::kernel::connection::{covariant_derivative, curvature};
use crate::kernel::forms::eta_nu_power_coefficient;
use crate::kernel::manifold::PointRef;
use crate::kernel::ops::{lie_derivative_2, pullback};
use crate::kernel::residual::transition_defect;
use crate::kernel::tensor::{standard_j, MetricField, TensorField};
use crate::kernel::exterior_derivative;
use crate::models::power_consistency_residual;
use crate::sampling;
use crate::triple::{fundamental_two_form, normality_tensor, sphere_family};

const AXIOM_TOL: f64 = 1e-7;
const TRANSITION_TOL: f64 = 1e-6;
const SASAKI_TOL: f64 = 1e-5;

fn outer(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Φ² = −Id + η⊗ξ, η(ξ) = 1, Φξ = 0, η∘Φ = 0.
fn almost_contact_defect(phi: &[f64], xi: &[f64], eta: &[f64]) -> f64 {
    let n = xi.len();
    let sq = algebra::add(&algebra::mat_mul(phi, phi, n), &algebra::identity(n));
    let r1 = algebra::max_diff(&sq, &algebra::rank_one(eta, xi));
    let r2 = (algebra::pair(eta, xi) - 1.0).abs();
    let r3 = algebra::max_abs(&algebra::apply(phi, xi));
    let r4 = algebra::max_abs(&algebra::covec_mat(eta, phi));
    r1.max(r2).max(r3).max(r4)
}

/// g(Φ·, Φ·) = g − η⊗η and g(ξ, ·) = η.
fn metric_defect(phi: &[f64], xi: &[f64], eta: &[f64], g: &[f64]) -> f64 {
    let n = xi.len();
    let pulled = algebra::mat_mul(&algebra::mat_mul(&algebra::transpose(phi, n), g, n), phi, n);
    let r1 = algebra::max_diff(&pulled, &algebra::sub(g, &outer(eta, eta)));
    let r2 = algebra::max_diff(&algebra::lower(g, xi), eta);
    r1.max(r2)
}

fn transition_max(f: &TensorField, samples: &[(PointRef, usize)]) -> Result<f64> {
    max_over(samples, |(p, to)| transition_defect(f, p, *to))
}

pub fn theorem_one(ctx: &Context) -> Result<Vec<CheckResult>> {
    let tr = &ctx.th.triple;
    let pts = &ctx.q_points;
    let heavy = ctx.heavy_q();
    let np = pts.len();
    let mut out = Vec::new();

    let atlas = validate_atlas(ctx.model.atlas(), ctx.model.weight(), &ctx.base)?;
    let atol = if ctx.model.is_flat() { 1e-8 } else { 1e-6 };
    let nov = ctx.base.overlaps.len();
    out.push(CheckResult::lower("contact_form_min_magnitude", "θ∧(dθ)^n ≠ 0", ctx.base.points.len(), atlas.min_volume, 0.0));
    if nov > 0 {
        out.push(CheckResult::upper("atlas_cocycle", "θ_i = f_ij θ_j", nov, atlas.cocycle, atol));
        out.push(CheckResult::upper("atlas_cocycle_identity", "f_ij f_jk = f_ik", ctx.base.triples.len(), atlas.cocycle_identity, atol));
        out.push(CheckResult::upper("atlas_weight", "h_j = h_i |g_ij|²", nov, atlas.weight, atol));
        let pc = power_consistency_residual(ctx.model.atlas(), &ctx.base.overlaps)?;
        out.push(CheckResult::upper("line_bundle_power", "E^{n+1} ≅ det TZ", nov, pc, atol));
        let gt = gauge_transition_residual(&ctx.model.engine, &ctx.base.overlaps)?;
        out.push(CheckResult::upper("gauge_transition", "σ_j = σ_i + dψ_ij", nov, gt, TRANSITION_TOL));
        let at = angle_transition_residual(&ctx.bundle, &ctx.q_overlaps)?;
        out.push(CheckResult::upper("angle_transition", "φ_j = φ_i + arg f_ij", nov, at, TRANSITION_TOL));
        let rt = bundle_roundtrip_residual(&ctx.bundle, &ctx.q_overlaps)?;
        out.push(CheckResult::upper("bundle_roundtrip", "Q charts compose to the identity", nov, rt, TRANSITION_TOL));
    }

    for a in 0..3 {
        let r = max_over(pts, |p| Ok(almost_contact_defect(&tr.phi[a].eval(p)?, &tr.xi[a].eval(p)?, &tr.eta[a].eval(p)?)))?;
        out.push(CheckResult::upper(&format!("almost_contact_{}", a + 1), "Φ² = −Id + η⊗ξ, η(ξ) = 1", np, r, AXIOM_TOL));
        let r = max_over(pts, |p| Ok(metric_defect(&tr.phi[a].eval(p)?, &tr.xi[a].eval(p)?, &tr.eta[a].eval(p)?, &tr.g_q.0.eval(p)?)))?;
        out.push(CheckResult::upper(&format!("compatible_metric_{}", a + 1), "g(Φ·,Φ·) = g − η⊗η", np, r, AXIOM_TOL));
    }

    let hs = &ctx.th.hatakeyama;
    let kuo: Vec<[f64; 4]> = pts
        .par_iter()
        .map(|p| crate::triple::kuo_residuals(hs, &tr.phi[1], &tr.xi[1], &tr.eta[1], std::slice::from_ref(p)))
        .collect::<Result<_>>()?;
    let kmax = |i: usize| kuo.iter().fold(0.0f64, |m, r| m.max(r[i]));
    out.push(CheckResult::upper("kuo_l1", "Φ₁ξ₂ + Φ₂ξ₁ = 0", np, kmax(0), AXIOM_TOL));
    out.push(CheckResult::upper("kuo_l2", "η₁∘Φ₂ + η₂∘Φ₁ = 0", np, kmax(1), AXIOM_TOL));
    out.push(CheckResult::upper("kuo_orthogonality", "η₁(ξ₂) = η₂(ξ₁) = 0", np, kmax(2), AXIOM_TOL));
    out.push(CheckResult::upper("kuo_product", "Φ₁Φ₂ − η₂⊗ξ₁ = −Φ₂Φ₁ + η₁⊗ξ₂", np, kmax(3), AXIOM_TOL));

    let r1 = max_over(pts, |p| {
        let phi: Vec<Vec<f64>> = tr.phi.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        let xi: Vec<Vec<f64>> = tr.xi.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        let eta: Vec<Vec<f64>> = tr.eta.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
        let n = xi[0].len();
        let mut w: f64 = 0.0;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let ab = algebra::sub(&algebra::mat_mul(&phi[a], &phi[b], n), &algebra::rank_one(&eta[b], &xi[a]));
            let ba = algebra::add(&algebra::scale(&algebra::mat_mul(&phi[b], &phi[a], n), -1.0), &algebra::rank_one(&eta[a], &xi[b]));
            w = w.max(algebra::max_diff(&phi[c], &ab)).max(algebra::max_diff(&phi[c], &ba));
            w = w.max(algebra::max_diff(&xi[c], &algebra::apply(&phi[a], &xi[b])));
            w = w.max(algebra::max_diff(&xi[c], &algebra::scale(&algebra::apply(&phi[b], &xi[a]), -1.0)));
            w = w.max(algebra::max_diff(&eta[c], &algebra::covec_mat(&eta[a], &phi[b])));
            w = w.max(algebra::max_diff(&eta[c], &algebra::scale(&algebra::covec_mat(&eta[b], &phi[a]), -1.0)));
            w = w.max(algebra::pair(&eta[a], &xi[b]).abs()).max(algebra::pair(&eta[b], &xi[a]).abs());
        }
        Ok(w)
    })?;
    out.push(CheckResult::upper("r1_cyclic", "Φ_γ = Φ_αΦ_β − η_β⊗ξ_α, ξ_γ = Φ_αξ_β, η_γ = η_α∘Φ_β", np, r1, AXIOM_TOL));

    let n1 = normality_tensor(&tr.phi[0], &tr.eta[0], &tr.xi[0])?;
    let r = max_over(heavy, |p| Ok(algebra::max_abs(&n1.eval(p)?)))?;
    out.push(CheckResult::upper("normality_1", "[Φ₁,Φ₁] + 2dη₁⊗ξ₁ = 0", heavy.len(), r, AXIOM_TOL));

    for a in 1..3 {
        let de = exterior_derivative(&tr.eta[a])?;
        let nu = fundamental_two_form(&tr.phi[a], &tr.g_q);
        let k = ctx.kappa;
        let r = max_over(pts, |p| Ok(algebra::max_diff(&de.eval(p)?, &algebra::scale(&nu.eval(p)?, k))))?;
        out.push(CheckResult::upper(&format!("contact_metric_{}", a + 1), "dη_α = κ g(Φ_α⊗Id)", np, r, AXIOM_TOL));
    }

    let lie = lie_derivative_2(&tr.xi[0], &tr.g_q.0)?;
    let r = max_over(pts, |p| Ok(algebra::max_abs(&lie.eval(p)?)))?;
    out.push(CheckResult::upper("lie_xi1_metric", "ℒ_{ξ₁} g = 0", np, r, AXIOM_TOL));

    let (d2, d3) = (exterior_derivative(&tr.eta[1])?, exterior_derivative(&tr.eta[2])?);
    let dim = tr.dim();
    let vols: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|p| {
            let v2 = eta_nu_power_coefficient(&tr.eta[1].eval(p)?, &d2.eval(p)?, dim);
            let v3 = eta_nu_power_coefficient(&tr.eta[2].eval(p)?, &d3.eval(p)?, dim);
            Ok((v2, v3))
        })
        .collect::<Result<_>>()?;
    let rel = vols.iter().fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE)));
    let vmin = vols.iter().fold(f64::INFINITY, |m, (a, _)| m.min(a.abs()));
    out.push(CheckResult::upper("volume_equality", "η₂∧(dη₂)^{2n+1} = η₃∧(dη₃)^{2n+1}", np, rel, AXIOM_TOL));
    out.push(CheckResult::lower("volume_min_magnitude", "η₂∧(dη₂)^{2n+1} ≠ 0", np, if np == 0 { 0.0 } else { vmin }, 0.0));

    if !ctx.q_overlaps.is_empty() {
        let fields: [(&str, &str, &TensorField); 8] = [
            ("transition_eta1", "η₁ is global", &tr.eta[0]),
            ("transition_eta2", "η₂ is global", &tr.eta[1]),
            ("transition_eta3", "η₃ is global", &tr.eta[2]),
            ("transition_psi", "Ψ_i = Ψ_j", &ctx.th.psi_xi.psi),
            ("transition_xi", "Ξ_i = Ξ_j", &ctx.th.psi_xi.xi),
            ("transition_phi2", "Φ₂ is global", &tr.phi[1]),
            ("transition_phi3", "Φ₃ is global", &tr.phi[2]),
            ("transition_metric", "g_Q is global", &tr.g_q.0),
        ];
        for (name, reference, f) in fields {
            let r = transition_max(f, &ctx.q_overlaps)?;
            out.push(CheckResult::upper(name, reference, ctx.q_overlaps.len(), r, TRANSITION_TOL));
        }
    }
    Ok(out)
}

/// Uniform samples of S² from a seed derived from the run seed.
pub fn sphere_samples(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut rng = sampling::rng(seed ^ 0x5151_5151);
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).max(0.0).sqrt();
            let s = [r * a.cos(), r * a.sin(), z];
            let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            [s[0] / norm, s[1] / norm, s[2] / norm]
        })
        .collect()
}

fn spread(vals: &[f64]) -> f64 {
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        f64::INFINITY
    } else {
        (hi - lo) / scale
    }
}

pub fn corollary_one(ctx: &Context) -> Result<Vec<CheckResult>> {
    let tr = &ctx.th.triple;
    let pts = &ctx.q_points;
    let np = pts.len();
    let dim = tr.dim();
    let ss = sphere_samples(ctx.cfg.seed, 20);
    let fam = ss.iter().map(|s| sphere_family(tr, *s)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();

    // one pass per point: ν_s is formed from the evaluated Φ_s and g_Q
    let (ra, rt) = pts
        .par_iter()
        .map(|p| {
            let g = tr.g_q.0.eval(p)?;
            let mut w: f64 = 0.0;
            let mut vals = Vec::with_capacity(fam.len());
            for e in &fam {
                let (phi, xi, eta) = (e.phi.eval(p)?, e.xi.eval(p)?, e.eta.eval(p)?);
                w = w.max(almost_contact_defect(&phi, &xi, &eta)).max(metric_defect(&phi, &xi, &eta, &g));
                vals.push(eta_nu_power_coefficient(&eta, &algebra::lower_first(&phi, &g, dim), dim));
            }
            Ok((w, spread(&vals)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, 0.0f64), |m, v| (nan_max(m.0, v.0), nan_max(m.1, v.1)));
    out.push(CheckResult::upper("sphere_almost_contact_metric", "(g, Φ_s, ξ_s, η_s) is almost contact metric", np * fam.len(), ra, AXIOM_TOL));
    out.push(CheckResult::upper("sphere_taut_spread", "η_s∧ν_s^{2n+1} independent of s", np * fam.len(), rt, 1e-6));

    let nus: Vec<TensorField> = (0..3).map(|a| fundamental_two_form(&tr.phi[a], &tr.g_q)).collect();
    let (re, ri) = pts
        .par_iter()
        .map(|p| {
            let xi: Vec<Vec<f64>> = tr.xi.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
            let eta: Vec<Vec<f64>> = tr.eta.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
            let nu: Vec<Vec<f64>> = nus.iter().map(|f| f.eval(p)).collect::<Result<_>>()?;
            let (mut a1, mut a2): (f64, f64) = (0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        continue;
                    }
                    a1 = a1.max((algebra::pair(&eta[a], &xi[b]) + algebra::pair(&eta[b], &xi[a])).abs());
                    let ia = algebra::covec_mat(&xi[a], &nu[b]);
                    let ib = algebra::covec_mat(&xi[b], &nu[a]);
                    a2 = a2.max(algebra::max_abs(&algebra::add(&ia, &ib)));
                }
            }
            Ok((a1, a2))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, 0.0f64), |m, v| (nan_max(m.0, v.0), nan_max(m.1, v.1)));
    out.push(CheckResult::upper("roundness_eta_xi", "η_α(ξ_β) + η_β(ξ_α) = 0", np, re, AXIOM_TOL));
    out.push(CheckResult::upper("roundness_interior", "ι_{ξ_α}ν_β + ι_{ξ_β}ν_α = 0", np, ri, AXIOM_TOL));

    // contact circle s = (0, cos t, sin t) with dη_s in place of ν_s
    let (d2, d3) = (exterior_derivative(&tr.eta[1])?, exterior_derivative(&tr.eta[2])?);
    let angles: Vec<f64> = (0..20).map(|k| std::f64::consts::TAU * k as f64 / 20.0).collect();
    let r = max_over(pts, |p| {
        let (e2, e3, w2, w3) = (tr.eta[1].eval(p)?, tr.eta[2].eval(p)?, d2.eval(p)?, d3.eval(p)?);
        let vals: Vec<f64> = angles
            .iter()
            .map(|t| {
                let (c, s) = (t.cos(), t.sin());
                let e = algebra::add(&algebra::scale(&e2, c), &algebra::scale(&e3, s));
                let w = algebra::add(&algebra::scale(&w2, c), &algebra::scale(&w3, s));
                eta_nu_power_coefficient(&e, &w, dim)
            })
            .collect();
        Ok(spread(&vals))
    })?;
    out.push(CheckResult::upper("contact_circle_taut", "η_t∧(dη_t)^{2n+1} independent of t", np * angles.len(), r, AXIOM_TOL));

    let r = max_over(pts, |p| {
        let mut w: f64 = 0.0;
        for e in &fam {
            let nu = e.nu.eval(p)?;
            w = w.max(algebra::max_abs(&algebra::add(&nu, &algebra::transpose(&nu, dim))));
        }
        Ok(w)
    })?;
    out.push(CheckResult::upper("sphere_nu_antisymmetry", "ν_s is a 2-form", np * fam.len(), r, AXIOM_TOL).informational(true));
    Ok(out)
}

pub fn corollary_two(ctx: &Context) -> Result<Vec<CheckResult>> {
    let tr = &ctx.th.triple;
    let exp = ctx.model.expectations;
    let heavy = ctx.heavy_q();
    let kp = 2.0 / ctx.kappa;
    let mut out = Vec::new();

    let nabla = covariant_derivative(&tr.g_q, &tr.xi[0])?;
    let r = max_over(heavy, |p| Ok(algebra::max_diff(&tr.phi[0].eval(p)?, &algebra::scale(&nabla.eval(p)?, kp))))?;
    out.push(CheckResult::upper("sasaki_levi_civita", "Φ₁ = κ′∇ξ₁", heavy.len(), r, SASAKI_TOL).informational(!exp.sasaki));
    for a in 1..3 {
        let nt = normality_tensor(&tr.phi[a], &tr.eta[a], &tr.xi[a])?;
        let r = max_over(heavy, |p| Ok(algebra::max_abs(&nt.eval(p)?)))?;
        out.push(CheckResult::upper(&format!("sasaki_normality_{}", a + 1), "[Φ_α,Φ_α] + 2dη_α⊗ξ_α = 0", heavy.len(), r, SASAKI_TOL).informational(!exp.sasaki));
    }

    let ein = &ctx.q_points[..ctx.q_points.len().min(30)];
    let curv = ein.par_iter().map(|p| curvature(&tr.g_q, p)).collect::<Result<Vec<_>>>()?;
    let dim = tr.dim() as f64;
    let lams: Vec<f64> = curv.iter().map(|c| c.scalar / dim).collect();
    let mean = lams.iter().sum::<f64>() / lams.len().max(1) as f64;
    let pointwise = curv.iter().zip(&lams).fold(0.0f64, |m, (c, l)| m.max(c.einstein_defect() / l.abs().max(f64::MIN_POSITIVE)));
    let variation = spread(&lams);
    let inform = !exp.einstein;
    out.push(CheckResult::upper("einstein_pointwise", "Ric = λ g", ein.len(), pointwise, 1e-4).informational(inform));
    out.push(CheckResult::upper("einstein_lambda_variation", "λ constant", ein.len(), variation, 1e-4).informational(inform));
    // the homothety g ↦ g/κ′² makes ξ₁ unit with Φ₁ = ∇ξ₁; Ric is unchanged so λ and Scal scale by κ′²
    let lam_n = kp * kp * mean;
    let scal_n = kp * kp * curv.iter().map(|c| c.scalar).sum::<f64>() / curv.len().max(1) as f64;
    out.push(CheckResult::upper("normalized_lambda", "λ = 2(2n+1) after normalization", ein.len(), (lam_n - (dim - 1.0)).abs(), 0.05).informational(true));
    out.push(CheckResult::upper("normalized_scalar", "Scal = (4n+3)(4n+2) after normalization", ein.len(), (scal_n - dim * (dim - 1.0)).abs(), 0.05).informational(inform));
    Ok(out)
}

/// Smallest eigenvalue of the symmetrized Gram matrix ω(·, J·).
fn omega_gram_min(w: &[f64], m: usize) -> f64 {
    let j = standard_j(m);
    let g = DMatrix::from_fn(m, m, |a, b| (0..m).map(|c| w[a * m + c] * j[c * m + b]).sum::<f64>());
    let s = (&g + g.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn corollary_three(ctx: &Context) -> Result<Vec<CheckResult>> {
    let tr = &ctx.th.triple;
    let inform = !ctx.model.expectations.fano;
    let pts = &ctx.q_points;
    let base = &ctx.base.points;
    let dim = tr.dim();
    let m = ctx.bundle.base_dim();
    let mut out = Vec::new();

    let de1 = exterior_derivative(&tr.eta[0])?;
    let v = min_over(pts, |p| Ok(eta_nu_power_coefficient(&tr.eta[0].eval(p)?, &de1.eval(p)?, dim).abs()))?;
    out.push(CheckResult::lower("eta1_volume_min_magnitude", "η₁∧(dη₁)^{2n+1} ≠ 0", pts.len(), v, 0.0).informational(inform));

    let omega = kahler_form(&ctx.model.engine);
    let pb = pullback(&ctx.bundle.projection, &omega)?;
    let r = max_over(pts, |p| Ok(algebra::max_diff(&de1.eval(p)?, &pb.eval(p)?)))?;
    out.push(CheckResult::upper("d_eta1_pullback_omega", "dη₁ = π*ω", pts.len(), r, AXIOM_TOL).informational(inform));

    let v = min_over(base, |p| Ok(omega_gram_min(&omega.eval(p)?, m)))?;
    out.push(CheckResult::lower("omega_positive", "ω(·, J·) > 0", base.len(), v, 0.0).informational(inform));

    // F = dσ from the gauge potentials against the Hessian route ω = i∂∂̄ log h
    let sigma = gauge(ctx.model.atlas().base.clone(), ctx.model.weight());
    let ds = exterior_derivative(&sigma)?;
    let r = max_over(base, |p| Ok(algebra::max_diff(&ds.eval(p)?, &omega.eval(p)?) / std::f64::consts::TAU))?;
    out.push(CheckResult::upper("curvature_normalization", "(i/2π)F_∇ = −ω/2π", base.len(), r, 1e-6).informational(inform));

    let r = curvature_invariance_residual(&ctx.model.engine, base)?;
    out.push(CheckResult::upper("curvature_j_invariant", "ω(J·, J·) = ω", base.len(), r, AXIOM_TOL).informational(inform));
    Ok(out)
}

fn merge(reps: Vec<ConeReport>) -> ConeReport {
    let mut acc = ConeReport { upsilon_power_min: f64::INFINITY, ..Default::default() };
    for r in reps {
        acc.quaternion = acc.quaternion.max(r.quaternion);
        acc.hermitian = acc.hermitian.max(r.hermitian);
        acc.nijenhuis_i1 = acc.nijenhuis_i1.max(r.nijenhuis_i1);
        acc.d_omega1 = acc.d_omega1.max(r.d_omega1);
        acc.d_omega2 = acc.d_omega2.max(r.d_omega2);
        acc.d_omega3 = acc.d_omega3.max(r.d_omega3);
        acc.upsilon_exact = acc.upsilon_exact.max(r.upsilon_exact);
        acc.holomorphicity = acc.holomorphicity.max(r.holomorphicity);
        acc.upsilon_power_min = acc.upsilon_power_min.min(r.upsilon_power_min);
        acc.vartheta_kobayashi = acc.vartheta_kobayashi.max(r.vartheta_kobayashi);
        acc.points += r.points;
    }
    if acc.points == 0 {
        acc.upsilon_power_min = 0.0;
    }
    acc
}

pub fn corollary_four(ctx: &Context) -> Result<Vec<CheckResult>> {
    let exp = ctx.model.expectations;
    let hh = ctx.hyperhermitian()?;
    let pts = &ctx.cone_points[..ctx.cone_points.len().min(super::HEAVY_POINTS)];
    let reps = pts
        .par_iter()
        .map(|p| cone_report(&ctx.cone, &ctx.th.triple, &hh, std::slice::from_ref(p)))
        .collect::<Result<Vec<_>>>()?;
    let r = merge(reps);
    let n = r.points;
    let mut out = vec![
        CheckResult::upper("quaternion_relations", "I_α² = −Id, I_αI_β = I_γ = −I_βI_α", n, r.quaternion, 1e-10),
        CheckResult::upper("cone_hermitian", "g_U(I_α·, I_α·) = g_U", n, r.hermitian, 1e-9),
        CheckResult::upper("nijenhuis_i1", "[I₁, I₁] = 0", n, r.nijenhuis_i1, 1e-7),
        CheckResult::upper("d_omega2", "dω₂ = 0", n, r.d_omega2, 1e-7),
        CheckResult::upper("d_omega3", "dω₃ = 0", n, r.d_omega3, 1e-7),
        CheckResult::upper("d_omega1", "dω₁ = 0", n, r.d_omega1, 1e-5).informational(!exp.hyperkahler),
        CheckResult::upper("upsilon_exact", "Υ = ω₂ + iω₃ = dϑ", n, r.upsilon_exact, 1e-7),
        CheckResult::upper("upsilon_holomorphic", "Υ(I₁X, Y) = iΥ(X, Y)", n, r.holomorphicity, 1e-7),
        CheckResult::lower("upsilon_power_min_magnitude", "Υ^{n+1} ≠ 0", n, r.upsilon_power_min, 0.0),
        CheckResult::upper("vartheta_kobayashi", "ϑ = e^t(η₂ + iη₃)", n, r.vartheta_kobayashi, 1e-8),
    ];
    if !ctx.cone_overlaps.is_empty() {
        let no = ctx.cone_overlaps.len();
        let f = fiber_transition_residual(&ctx.cone, &ctx.cone_overlaps)?;
        out.push(CheckResult::upper("fiber_transition", "|z_i| = e^t/√h_i, z_j = f_ij z_i", no, f, 1e-8));
        let t = transition_max(&hh.vartheta.0, &ctx.cone_overlaps)?.max(transition_max(&hh.vartheta.1, &ctx.cone_overlaps)?);
        out.push(CheckResult::upper("vartheta_transition", "ϑ_i = ϑ_j", no, t, 1e-8));
    }
    if exp.tautological {
        let l = liouville_residual(&ctx.cone, &hh.vartheta, pts)?;
        out.push(CheckResult::upper("tautological_liouville", "ϑ = Λ on (T*M)^×", pts.len(), l, 1e-8));
    }
    Ok(out)
}

/// g_Q scaled by `c`, for negative tests of the calibration.
pub fn scaled_metric(g: &MetricField, c: f64) -> Result<MetricField> {
    MetricField::new(g.0.scale(c))
}
