mod common;

use std::sync::OnceLock;

use common::{apply, bilinear, build, form, max_abs, max_diff, unit, Built};
use tricontact::cone::{build_cone, fiber_transition_residual, hyperhermitian, liouville_residual, ConeManifold, HyperhermitianData};
use tricontact::jet::Jet;
use tricontact::kernel::*;
use tricontact::sampling;

struct ConeBuilt {
    b: Built,
    cone: ConeManifold,
    hh: HyperhermitianData,
    pts: Vec<PointRef>,
    overlaps: Vec<(PointRef, usize)>,
}

fn shared(name: &str) -> &'static ConeBuilt {
    static FLAT: OnceLock<ConeBuilt> = OnceLock::new();
    static CP3: OnceLock<ConeBuilt> = OnceLock::new();
    static COT: OnceLock<ConeBuilt> = OnceLock::new();
    let cell = match name {
        "flat3" => &FLAT,
        "cp3" => &CP3,
        _ => &COT,
    };
    cell.get_or_init(|| {
        let b = build(name, 4, 33);
        let mut rng = sampling::rng(34);
        let pts = sampling::with_radius(&b.q, &mut rng);
        let overlaps = sampling::with_radius_pairs(&b.q_overlaps, &mut rng);
        let cone = build_cone(&b.bundle);
        let hh = hyperhermitian(&cone, &b.th.triple, &overlaps, 1e-7).unwrap();
        ConeBuilt { b, cone, hh, pts, overlaps }
    })
}

const MODELS: [&str; 3] = ["flat3", "cp3", "cotangent"];

#[test]
fn flat_tautological_form_at_the_origin() {
    let c = shared("flat3");
    let o = PointRef::new(0, vec![0.0; 8]);
    assert!(max_diff(&c.hh.vartheta.0.eval(&o).unwrap(), &unit(8, 0)) < 1e-15);
    assert!(max_diff(&c.hh.vartheta.1.eval(&o).unwrap(), &unit(8, 1)) < 1e-15);
    // ϑ = e^{t+iφ}(dz₀ + z₁dz₂) at x = 0, φ = π/2, t = ln 2
    let p = PointRef::new(0, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, std::f64::consts::FRAC_PI_2, 2f64.ln()]);
    assert!(max_diff(&c.hh.vartheta.0.eval(&p).unwrap(), &unit(8, 1).iter().map(|v| -2.0 * v).collect::<Vec<_>>()) < 1e-14);
    assert!(max_diff(&c.hh.vartheta.1.eval(&p).unwrap(), &unit(8, 0).iter().map(|v| 2.0 * v).collect::<Vec<_>>()) < 1e-14);
}

#[test]
fn cp3_fiber_radius_matches_the_weight() {
    let c = shared("cp3");
    for q in c.b.q.iter().filter(|q| q.chart == 0) {
        let mut coords = q.coords.clone();
        coords.push(0.0);
        let p = PointRef::new(0, coords);
        let (base, zr, zi) = c.cone.to_line_bundle(&p).unwrap();
        let w2: f64 = base.coords.iter().map(|v| v * v).sum();
        let h = 0.25 * (1.0 + w2).powi(2);
        assert!((zr.hypot(zi) - 1.0 / h.sqrt()).abs() < 1e-14);
        assert!((zi.atan2(zr) - q.coords[6]).abs() < 1e-12);
        let back = c.cone.from_line_bundle(&base, (zr, zi)).unwrap();
        assert!(max_diff(&back.coords, &p.coords) < 1e-12);
    }
}

#[test]
fn cone_structures_extend_the_triple() {
    for name in MODELS {
        let c = shared(name);
        let t = &c.b.th.triple;
        for p in &c.pts {
            let q = PointRef::new(p.chart, p.coords[..7].to_vec());
            let (gc, gu) = (c.hh.g_c.0.eval(p).unwrap(), c.hh.g_u.0.eval(p).unwrap());
            assert!((gc[63] - 1.0).abs() < 1e-15);
            let et = p.coords[7].exp();
            assert!(max_diff(&gu, &gc.iter().map(|v| et * v).collect::<Vec<_>>()) < 1e-12);
            for a in 0..3 {
                let i = c.hh.i[a].eval(p).unwrap();
                let mut xi = t.xi[a].eval(&q).unwrap();
                xi.push(0.0);
                assert!(max_diff(&apply(&i, &unit(8, 7)), &xi) < 1e-15);
                let eta = t.eta[a].eval(&q).unwrap();
                let th = c.hh.theta[a].eval(p).unwrap();
                for e in 0..7 {
                    assert!((bilinear(&th, &unit(8, 7), &unit(8, e)) - eta[e]).abs() < 1e-12, "{name} α={}", a + 1);
                }
            }
        }
    }
}

/// Θ_α = dη_α + dt∧η_α and ω_α = d(e^t η_α) for α = 2, 3.
#[test]
fn fundamental_forms_of_the_contact_pair_are_exact() {
    for name in MODELS {
        let c = shared(name);
        let t = &c.b.th.triple;
        for a in [1, 2] {
            let d_eta = exterior_derivative(&t.eta[a]).unwrap();
            let eta = t.eta[a].clone();
            let scaled = TensorField::new(c.cone.manifold.clone(), Valence::form(1), move |p, order| {
                let q = PointRef::new(p.chart, p.coords[..7].to_vec());
                let v = eta.eval_jet(&q, order)?;
                let x = Jet::point(&p.coords, order);
                let et = x[7].exp();
                let map: Vec<usize> = (0..7).collect();
                let mut data: Vec<Jet> = v.data.iter().map(|j| &j.embed(8, &map) * &et).collect();
                data.push(Jet::zero(x[0].table()));
                Ok(Tensor::from_data(8, Valence::form(1), data))
            });
            let d_scaled = exterior_derivative(&scaled).unwrap();
            let mut worst: f64 = 0.0;
            for p in &c.pts {
                let q = PointRef::new(p.chart, p.coords[..7].to_vec());
                let (de, e) = (d_eta.eval(&q).unwrap(), t.eta[a].eval(&q).unwrap());
                let mut want = vec![0.0; 64];
                for i in 0..7 {
                    for j in 0..7 {
                        want[i * 8 + j] = de[i * 7 + j];
                    }
                    want[7 * 8 + i] = e[i];
                    want[i * 8 + 7] = -e[i];
                }
                worst = worst.max(max_diff(&c.hh.theta[a].eval(p).unwrap(), &want));
                worst = worst.max(max_diff(&c.hh.omega[a].eval(p).unwrap(), &d_scaled.eval(p).unwrap()));
            }
            assert!(worst <= 1e-8, "{name} α={}: {worst:e}", a + 1);
        }
    }
}

#[test]
fn flat_omega_two_at_the_origin() {
    let c = shared("flat3");
    let o = PointRef::new(0, vec![0.0; 8]);
    // dx₁∧dx₂ − dy₁∧dy₂ − dφ∧dy₀ + dt∧dx₀
    let want = form(8, &[(&[2, 4], 1.0), (&[3, 5], -1.0), (&[6, 1], -1.0), (&[7, 0], 1.0)]);
    assert!(max_diff(&c.hh.omega[1].eval(&o).unwrap(), &want) < 1e-13);
}

#[test]
fn fiber_coordinate_and_tautological_form_glue() {
    for name in ["cp3", "cotangent"] {
        let c = shared(name);
        assert!(!c.overlaps.is_empty());
        let f = fiber_transition_residual(&c.cone, &c.overlaps).unwrap();
        let t = transition_residual(&c.hh.vartheta.0, &c.overlaps).unwrap().max(transition_residual(&c.hh.vartheta.1, &c.overlaps).unwrap());
        assert!(f <= 1e-8 && t <= 1e-8, "{name}: {f:e} {t:e}");
    }
}

#[test]
fn upsilon_is_exact_and_of_type_two_zero() {
    for name in MODELS {
        let c = shared(name);
        let (ur, ui) = &c.hh.upsilon;
        let (dr, di) = (exterior_derivative(&c.hh.vartheta.0).unwrap(), exterior_derivative(&c.hh.vartheta.1).unwrap());
        let mut worst: f64 = 0.0;
        for p in &c.pts {
            let (re, im, i1) = (ur.eval(p).unwrap(), ui.eval(p).unwrap(), c.hh.i[0].eval(p).unwrap());
            worst = worst.max(max_diff(&re, &dr.eval(p).unwrap())).max(max_diff(&im, &di.eval(p).unwrap()));
            for a in 0..8 {
                let ix = apply(&i1, &unit(8, a));
                for b in 0..8 {
                    let y = unit(8, b);
                    // Υ(I₁X, Y) = iΥ(X, Y)
                    worst = worst.max((bilinear(&re, &ix, &y) + im[a * 8 + b]).abs());
                    worst = worst.max((bilinear(&im, &ix, &y) - re[a * 8 + b]).abs());
                }
            }
        }
        assert!(worst <= 1e-8, "{name}: {worst:e}");
    }
}

#[test]
fn first_cone_structure_is_integrable_and_the_second_is_not_in_general() {
    for name in ["flat3", "cp3"] {
        let c = shared(name);
        let n = nijenhuis_endo(&c.hh.i[0]).unwrap();
        let worst = c.pts.iter().map(|p| max_abs(&n.eval(p).unwrap())).fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{name}: {worst:e}");
    }
    let c = shared("cotangent");
    let n = nijenhuis_endo(&c.hh.i[1]).unwrap();
    let worst = c.pts.iter().map(|p| max_abs(&n.eval(p).unwrap())).fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst:e}");
}

#[test]
fn kahler_form_of_the_first_structure_closes_only_on_cp3() {
    let d_omega = |name: &str| {
        let c = shared(name);
        let dw = exterior_derivative(&c.hh.omega[0]).unwrap();
        c.pts.iter().map(|p| max_abs(&dw.eval(p).unwrap())).fold(0.0, f64::max)
    };
    assert!(d_omega("cp3") <= 1e-8);
    assert!(d_omega("flat3") > 1e-2);
}

#[test]
fn cotangent_tautological_form_is_the_liouville_form() {
    let c = shared("cotangent");
    let r = liouville_residual(&c.cone, &c.hh.vartheta, &c.pts).unwrap();
    assert!(r <= 1e-8, "{r:e}");
}
