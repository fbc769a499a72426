//! Kernel self-test: propagated derivatives against central differences,
//! d∘d = 0, the Jacobi identity, metric compatibility and determinism.

use rand::Rng;

use super::report::CheckResult;
use super::{max_over, run_suite, Context, SuiteConfig};
use crate::algebra;
use crate::contact::{associated_metric, complex_coords, gauge, normalize, vertical_frame};
use crate::error::Result;
use crate::kernel::connection::compatibility_residuals;
use crate::kernel::manifold::PointRef;
use crate::kernel::ops::lie_bracket;
use crate::kernel::tensor::{TensorField, Valence};
use crate::kernel::exterior_derivative;
use crate::sampling;

pub const FD_STEP: f64 = 1e-5;
pub const FD_COMPONENTS: usize = 10;
pub const FD_POINTS: usize = 20;

/// A field together with whether it lives on the base (true) or on Q.
struct Candidate {
    name: &'static str,
    field: TensorField,
    on_base: bool,
}

fn candidates(ctx: &Context) -> Result<Vec<Candidate>> {
    let eng = &ctx.model.engine;
    let base = &ctx.base.points;
    let tr = &ctx.th.triple;
    let nd = normalize(eng, base)?;
    let vf = vertical_frame(eng, base)?;
    let amd = associated_metric(eng, base)?;
    let e2 = eng.clone();
    let h = TensorField::from_coords(eng.atlas.base.clone(), Valence::SCALAR, move |c, x| Ok(vec![e2.weight.h_at(c, &complex_coords(x))?]));
    let logh = {
        let e3 = eng.clone();
        TensorField::from_coords(eng.atlas.base.clone(), Valence::SCALAR, move |c, x| Ok(vec![e3.weight.h_at(c, &complex_coords(x))?.ln()]))
    };
    let b = |name, field| Candidate { name, field, on_base: true };
    let q = |name, field| Candidate { name, field, on_base: false };
    Ok(vec![
        b("h", h),
        b("log_h", logh),
        b("u", nd.u),
        b("v", nd.v),
        b("sigma", gauge(eng.atlas.base.clone(), &eng.weight)),
        b("A", vf.a),
        b("g_Z", amd.g_z.0.clone()),
        q("eta2", tr.eta[1].clone()),
        q("eta3", tr.eta[2].clone()),
        q("Phi2", tr.phi[1].clone()),
        q("Phi3", tr.phi[2].clone()),
        q("g_Q", tr.g_q.0.clone()),
    ])
}

/// Relative error of one component's jet gradient against central differences.
fn fd_error(f: &TensorField, p: &PointRef, comp: usize) -> Result<f64> {
    let ad = f.eval_jet(p, 1)?.data[comp].gradient();
    let mut worst: f64 = 0.0;
    for (i, a) in ad.iter().enumerate() {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus.coords[i] += FD_STEP;
        minus.coords[i] -= FD_STEP;
        let fd = (f.eval(&plus)?[comp] - f.eval(&minus)?[comp]) / (2.0 * FD_STEP);
        worst = worst.max((a - fd).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}

/// Propagated derivatives of randomly chosen component functions against
/// central differences at the first sample points.
pub fn fd_crosscheck(ctx: &Context) -> Result<CheckResult> {
    let cands = candidates(ctx)?;
    let mut rng = sampling::rng(ctx.cfg.seed ^ 0xFD);
    let picks: Vec<(usize, usize)> = (0..FD_COMPONENTS)
        .map(|_| {
            let c = rng.gen_range(0..cands.len());
            let f = &cands[c].field;
            let ncomp = f.dim().pow(f.valence.rank() as u32);
            (c, rng.gen_range(0..ncomp))
        })
        .collect();
    let pts = &ctx.q_points[..ctx.q_points.len().min(FD_POINTS)];
    let m = ctx.bundle.base_dim();
    let cref = &cands;
    let jobs: Vec<(usize, usize, PointRef)> = picks
        .iter()
        .flat_map(|&(c, comp)| {
            pts.iter().map(move |p| {
                let p = if cref[c].on_base { PointRef::new(p.chart, p.coords[..m].to_vec()) } else { p.clone() };
                (c, comp, p)
            })
        })
        .collect();
    let r = max_over(&jobs, |(c, comp, p)| fd_error(&cands[*c].field, p, *comp))?;
    let names: Vec<&str> = picks.iter().map(|(c, _)| cands[*c].name).collect();
    let reference = format!("jet derivatives = central differences ({})", names.join(", "));
    Ok(CheckResult::upper("fd_crosscheck", &reference, jobs.len(), r, ctx.cfg.tol_fd))
}

pub fn kernel_selftest(ctx: &Context) -> Result<Vec<CheckResult>> {
    let tr = &ctx.th.triple;
    let pts = &ctx.q_points[..ctx.q_points.len().min(FD_POINTS)];
    let np = pts.len();
    let tol = ctx.cfg.tol_ad;
    let mut out = vec![fd_crosscheck(ctx)?];

    let dd2 = exterior_derivative(&exterior_derivative(&tr.eta[1])?)?;
    let dd1 = exterior_derivative(&exterior_derivative(&tr.eta[0])?)?;
    let r = max_over(pts, |p| Ok(algebra::max_abs(&dd2.eval(p)?).max(algebra::max_abs(&dd1.eval(p)?))))?;
    out.push(CheckResult::upper("d_squared_zero", "d∘d = 0", np, r, tol));

    let (x, y, z) = (&tr.xi[0], &tr.xi[1], &tr.xi[2]);
    let j1 = lie_bracket(x, &lie_bracket(y, z)?)?;
    let j2 = lie_bracket(y, &lie_bracket(z, x)?)?;
    let j3 = lie_bracket(z, &lie_bracket(x, y)?)?;
    let r = max_over(pts, |p| {
        let s = algebra::add(&algebra::add(&j1.eval(p)?, &j2.eval(p)?), &j3.eval(p)?);
        Ok(algebra::max_abs(&s))
    })?;
    out.push(CheckResult::upper("jacobi_identity", "[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]] = 0", np, r, tol));

    let res = pts.iter().map(|p| compatibility_residuals(&tr.g_q, p)).collect::<Result<Vec<_>>>()?;
    let nabla = res.iter().fold(0.0f64, |m, r| m.max(r.0));
    let torsion = res.iter().fold(0.0f64, |m, r| m.max(r.1));
    out.push(CheckResult::upper("levi_civita_metric", "∇g = 0", np, nabla, tol));
    out.push(CheckResult::upper("levi_civita_torsion", "Γ^a_bc = Γ^a_cb", np, torsion, tol));

    let small = SuiteConfig { suite: "theorem1".into(), samples: 10, out: None, ..ctx.cfg.clone() };
    let a = run_suite(&small)?.to_json();
    let b = run_suite(&small)?.to_json();
    let diff = if a == b { 0.0 } else { 1.0 };
    out.push(CheckResult::upper("determinism", "same seed, byte-identical report", 2, diff, 0.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::manifold::{Chart, ChartedManifold};
    use std::sync::Arc;

    #[test]
    fn fd_error_of_polynomial_is_tiny() {
        let m = Arc::new(ChartedManifold::single_chart(2, Chart::whole("R2")));
        let f = TensorField::from_coords(m, Valence::SCALAR, |_c, x| Ok(vec![&(&x[0] * &x[0]) * &x[1]]));
        let e = fd_error(&f, &PointRef::new(0, vec![0.4, -1.3]), 0).unwrap();
        assert!(e < 1e-9, "{e}");
    }
}
