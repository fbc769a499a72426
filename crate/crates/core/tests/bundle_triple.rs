mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use common::{apply, bilinear, build, dot, max_abs, max_diff, unit, Built};
use tricontact::bundle::{horizontal_lift, kahler_form};
use tricontact::contact::normalize;
use tricontact::kernel::*;
use tricontact::triple::{fundamental_two_form, normality_tensor, sasaki_conditions, sphere_family};
use tricontact::verifier::calibrate_kappa;
use tricontact::GeomError;

fn shared(name: &str) -> &'static Built {
    static FLAT: OnceLock<Built> = OnceLock::new();
    static CP3: OnceLock<Built> = OnceLock::new();
    static COT: OnceLock<Built> = OnceLock::new();
    let cell = match name {
        "flat3" => &FLAT,
        "cp3" => &CP3,
        _ => &COT,
    };
    cell.get_or_init(|| build(name, 6, 21))
}

fn neg(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

fn covec_endo(eta: &[f64], e: &[f64]) -> Vec<f64> {
    let n = eta.len();
    (0..n).map(|c| (0..n).map(|r| eta[r] * e[r * n + c]).sum()).collect()
}

#[test]
fn flat_hatakeyama_structure() {
    let b = shared("flat3");
    let hs = &b.th.hatakeyama;
    let q = PointRef::new(0, vec![0.2, -0.4, 0.6, 0.1, -0.3, 0.5, 1.3]);
    assert_eq!(hs.eta.eval(&q).unwrap(), unit(7, 6));
    assert_eq!(hs.xi.eval(&q).unwrap(), unit(7, 6));
    assert_eq!(max_abs(&exterior_derivative(&hs.eta).unwrap().eval(&q).unwrap()), 0.0);
    let phi = hs.phi.eval(&q).unwrap();
    assert!(max_diff(&apply(&phi, &unit(7, 2)), &unit(7, 3)) < 1e-15);
    assert!(max_abs(&apply(&phi, &unit(7, 6))) < 1e-15);
    let mut x1 = unit(6, 2);
    assert_eq!(horizontal_lift(&b.bundle, &q, &x1).unwrap(), unit(7, 2));
    x1.push(0.0);
    // [ξ₁, X#] = 0 for a lifted constant field
    let lifted = TensorField::constant(b.bundle.manifold.clone(), Valence::VECTOR, x1);
    assert!(max_abs(&lie_bracket(&hs.xi, &lifted).unwrap().eval(&q).unwrap()) < 1e-15);
}

#[test]
fn horizontal_lifts_project_back_and_are_horizontal() {
    for name in ["cp3", "cotangent"] {
        let b = shared(name);
        for q in &b.q {
            let eta = b.th.hatakeyama.eta.eval(q).unwrap();
            for e in 0..6 {
                let y = unit(6, e);
                let l = horizontal_lift(&b.bundle, q, &y).unwrap();
                assert_eq!(&l[..6], &y[..]);
                assert!(dot(&eta, &l).abs() < 1e-14, "{name}");
            }
        }
    }
}

/// dη₁ = π*ω with ω from the complex Hessian of log h, and the lifts are π-related.
#[test]
fn curvature_of_the_connection_is_the_kahler_form() {
    for name in ["cp3", "cotangent"] {
        let b = shared(name);
        let d_eta = exterior_derivative(&b.th.hatakeyama.eta).unwrap();
        let omega = kahler_form(&b.model.engine);
        let mut worst: f64 = 0.0;
        for q in &b.q {
            let de = d_eta.eval(q).unwrap();
            let w = omega.eval(&b.bundle.project(q)).unwrap();
            let mut padded = vec![0.0; 49];
            for r in 0..6 {
                for c in 0..6 {
                    padded[r * 7 + c] = w[r * 6 + c];
                }
            }
            worst = worst.max(max_diff(&de, &padded));
            let (x, y) = ([0.3, -0.1, 0.7, 0.2, -0.5, 0.4], [-0.6, 0.2, 0.1, 0.9, 0.3, -0.8]);
            let (xl, yl) = (horizontal_lift(&b.bundle, q, &x).unwrap(), horizontal_lift(&b.bundle, q, &y).unwrap());
            worst = worst.max((bilinear(&de, &xl, &yl) - bilinear(&w, &x, &y)).abs());
        }
        assert!(worst <= 1e-8, "{name}: {worst:e}");
    }
}

#[test]
fn hatakeyama_axioms_and_normality() {
    for name in ["flat3", "cp3", "cotangent"] {
        let b = shared(name);
        let hs = &b.th.hatakeyama;
        let n = normality_tensor(&hs.phi, &hs.eta, &hs.xi).unwrap();
        for q in &b.q {
            let (phi, eta, xi) = (hs.phi.eval(q).unwrap(), hs.eta.eval(q).unwrap(), hs.xi.eval(q).unwrap());
            assert!((dot(&eta, &xi) - 1.0).abs() < 1e-15);
            for e in 0..7 {
                let x = unit(7, e);
                let px = apply(&phi, &x);
                // Φ₁ maps into ker η₁
                assert!(dot(&eta, &px).abs() < 1e-14);
                let ppx = apply(&phi, &px);
                let want: Vec<f64> = (0..7).map(|i| -x[i] + eta[e] * xi[i]).collect();
                assert!(max_diff(&ppx, &want) <= 1e-10, "{name}");
            }
            assert!(max_abs(&n.eval(q).unwrap()) <= 1e-6, "{name}: normality");
        }
    }
}

#[test]
fn reeb_field_of_the_connection_is_killing() {
    for name in ["flat3", "cp3", "cotangent"] {
        let b = shared(name);
        let lie = lie_derivative_2(&b.th.hatakeyama.xi, &b.th.triple.g_q.0).unwrap();
        let worst = b.q.iter().map(|q| max_abs(&lie.eval(q).unwrap())).fold(0.0, f64::max);
        assert!(worst <= 1e-7, "{name}: {worst:e}");
    }
}

#[test]
fn flat_values_at_the_origin() {
    let b = shared("flat3");
    let th = &b.th;
    let o = PointRef::new(0, vec![0.0; 7]);
    assert!(max_diff(&th.kobayashi.eta2.eval(&o).unwrap(), &unit(7, 0)) < 1e-15);
    assert!(max_diff(&th.kobayashi.eta3.eval(&o).unwrap(), &unit(7, 1)) < 1e-15);
    assert!(max_diff(&th.psi_xi.xi.eval(&o).unwrap(), &unit(7, 0)) < 1e-13);
    let t = &th.triple;
    assert!(max_diff(&apply(&t.phi[1].eval(&o).unwrap(), &unit(7, 6)), &neg(&unit(7, 1))) < 1e-13);
    assert!(max_diff(&t.xi[2].eval(&o).unwrap(), &unit(7, 1)) < 1e-13);
}

/// Identities of the second and third structures at every sample on every model.
#[test]
fn second_and_third_structure_identities() {
    for name in ["flat3", "cp3", "cotangent"] {
        let b = shared(name);
        let th = &b.th;
        let t = &th.triple;
        let nd = normalize(&b.model.engine, &b.base.points).unwrap();
        let d_eta2 = exterior_derivative(&t.eta[1]).unwrap();
        let mut worst: f64 = 0.0;
        for q in &b.q {
            let ev = |f: &TensorField| f.eval(q).unwrap();
            let (phi1, phi2) = (ev(&t.phi[0]), ev(&t.phi[1]));
            let (xi1, xi2) = (ev(&t.xi[0]), ev(&t.xi[1]));
            let (eta1, eta2) = (ev(&t.eta[0]), ev(&t.eta[1]));
            let psi = ev(&th.psi_xi.psi);
            let g = ev(&t.g_q.0);
            let mut r = vec![
                dot(&eta2, &xi1).abs(),
                dot(&eta1, &xi2).abs(),
                max_abs(&apply(&phi2, &xi1).iter().zip(apply(&phi1, &xi2)).map(|(a, b)| a + b).collect::<Vec<_>>()),
                max_abs(&apply(&phi2, &xi2)),
                max_abs(&covec_endo(&eta1, &phi2).iter().zip(covec_endo(&eta2, &phi1)).map(|(a, b)| a + b).collect::<Vec<_>>()),
                (dot(&eta2, &ev(&th.psi_xi.xi)) - 1.0).abs(),
                max_abs(&apply(&psi, &xi1)),
                max_abs(&apply(&psi, &xi2)),
                max_abs(&covec_endo(&eta2, &psi)),
                max_diff(&ev(&th.third.eta), &ev(&th.kobayashi.eta3)),
                (bilinear(&g, &xi1, &xi1) - 1.0).abs(),
                max_abs(&apply(&ev(&interior(&t.xi[1], &d_eta2).unwrap()), &[])),
            ];
            let phi1_xi2 = apply(&phi1, &xi2);
            for e in 0..7 {
                let y = unit(7, e);
                // (Ψ∘Ψ)(Y) = −Y + η₂(Y)ξ₂ − η₂(Φ₁Y)Φ₁(ξ₂) for horizontal Y
                let h: Vec<f64> = (0..7).map(|i| y[i] - eta1[e] * xi1[i]).collect();
                let lhs = apply(&psi, &apply(&psi, &h));
                let c = dot(&eta2, &apply(&phi1, &h));
                let rhs: Vec<f64> = (0..7).map(|i| -h[i] + dot(&eta2, &h) * xi2[i] - c * phi1_xi2[i]).collect();
                r.push(max_diff(&lhs, &rhs));
                // on all of TQ the vertical part contributes η₁(Y)ξ₁
                let lhs = apply(&psi, &apply(&psi, &y));
                let c = dot(&eta2, &apply(&phi1, &y));
                let rhs: Vec<f64> = (0..7).map(|i| -y[i] + eta1[e] * xi1[i] + eta2[e] * xi2[i] - c * phi1_xi2[i]).collect();
                r.push(max_diff(&lhs, &rhs));
                let ac: Vec<f64> = apply(&phi1, &apply(&psi, &y)).iter().zip(apply(&psi, &apply(&phi1, &y))).map(|(a, b)| a + b).collect();
                r.push(max_abs(&ac));
                r.push((bilinear(&g, &xi2, &y) - eta2[e]).abs());
            }
            // η₂ = cos φ π*u + sin φ π*v, η₃ = sin φ π*u − cos φ π*v
            let base = b.bundle.project(q);
            let (u, v) = (nd.u.eval(&base).unwrap(), nd.v.eval(&base).unwrap());
            let phi = q.coords[6];
            let mut e2: Vec<f64> = (0..6).map(|i| phi.cos() * u[i] + phi.sin() * v[i]).collect();
            let mut e3: Vec<f64> = (0..6).map(|i| phi.sin() * u[i] - phi.cos() * v[i]).collect();
            e2.push(0.0);
            e3.push(0.0);
            r.push(max_diff(&eta2, &e2));
            r.push(max_diff(&ev(&t.eta[2]), &e3));
            // g_Q = π*g_Z + η₁⊗η₁
            let gz = th.amd.g_z.0.eval(&base).unwrap();
            let mut gq = vec![0.0; 49];
            for i in 0..7 {
                for j in 0..7 {
                    gq[i * 7 + j] = if i < 6 && j < 6 { gz[i * 6 + j] } else { 0.0 } + eta1[i] * eta1[j];
                }
            }
            r.push(max_diff(&g, &gq));
            worst = worst.max(r.into_iter().fold(0.0, f64::max));
        }
        assert!(worst <= 1e-8, "{name}: {worst:e}");
    }
}

#[test]
fn flat_contact_metric_condition_with_calibrated_constant() {
    let kappa = calibrate_kappa().unwrap();
    let b = shared("flat3");
    let t = &b.th.triple;
    for a in [1, 2] {
        let d = exterior_derivative(&t.eta[a]).unwrap();
        let nu = fundamental_two_form(&t.phi[a], &t.g_q);
        for q in &b.q {
            let r = max_diff(&d.eval(q).unwrap(), &nu.eval(q).unwrap().iter().map(|v| kappa * v).collect::<Vec<_>>());
            assert!(r <= 1e-8, "α = {} residual {r:e}", a + 1);
        }
    }
}

#[test]
fn sphere_family_basis_and_domain() {
    let b = shared("cp3");
    let t = &b.th.triple;
    let q = &b.q[0];
    for (k, s) in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].into_iter().enumerate() {
        let el = sphere_family(t, s).unwrap();
        assert_eq!(el.phi.eval(q).unwrap(), t.phi[k].eval(q).unwrap());
        assert_eq!(el.xi.eval(q).unwrap(), t.xi[k].eval(q).unwrap());
        assert_eq!(el.eta.eval(q).unwrap(), t.eta[k].eval(q).unwrap());
    }
    assert!(matches!(sphere_family(t, [1.0, 1.0, 0.0]), Err(GeomError::NotUnitSphereParameter(_))));
    assert!(matches!(sphere_family(t, [0.0, 0.0, 0.0]), Err(GeomError::NotUnitSphereParameter(_))));
}

fn unit_sphere() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, th)| {
        let r = (1.0 - z * z).sqrt();
        let s = [r * th.cos(), r * th.sin(), z];
        let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        [s[0] / n, s[1] / n, s[2] / n]
    })
}

fn sphere_element_residual(name: &str, s: [f64; 3]) -> (f64, f64) {
    let b = shared(name);
    let t = &b.th.triple;
    let el = sphere_family(t, s).unwrap();
    let reference = sphere_family(t, [0.0, 1.0, 0.0]).unwrap();
    let top = tricontact::kernel::forms::eta_nu_power(&el.eta, &el.nu).unwrap();
    let top_ref = tricontact::kernel::forms::eta_nu_power(&reference.eta, &reference.nu).unwrap();
    let mut axioms: f64 = 0.0;
    let mut taut: f64 = 0.0;
    for q in b.q.iter().take(6) {
        let (phi, xi, eta, g) = (el.phi.eval(q).unwrap(), el.xi.eval(q).unwrap(), el.eta.eval(q).unwrap(), t.g_q.0.eval(q).unwrap());
        axioms = axioms.max((dot(&eta, &xi) - 1.0).abs());
        for e in 0..7 {
            let x = unit(7, e);
            let ppx = apply(&phi, &apply(&phi, &x));
            let want: Vec<f64> = (0..7).map(|i| -x[i] + eta[e] * xi[i]).collect();
            axioms = axioms.max(max_diff(&ppx, &want));
            axioms = axioms.max((bilinear(&g, &xi, &x) - eta[e]).abs());
            for f in 0..7 {
                let y = unit(7, f);
                let lhs = bilinear(&g, &apply(&phi, &x), &apply(&phi, &y));
                axioms = axioms.max((lhs - g[e * 7 + f] + eta[e] * eta[f]).abs());
            }
        }
        let (a, r) = (top.eval(q).unwrap(), top_ref.eval(q).unwrap());
        taut = taut.max(max_diff(&a, &r) / max_abs(&r));
    }
    (axioms, taut)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sphere_family_is_almost_contact_metric_and_taut(s in unit_sphere()) {
        for name in ["flat3", "cp3"] {
            let (axioms, taut) = sphere_element_residual(name, s);
            prop_assert!(axioms <= 1e-7, "{}: axioms {:e}", name, axioms);
            prop_assert!(taut <= 1e-8, "{}: taut {:e}", name, taut);
        }
    }

    #[test]
    fn cotangent_contact_circle_is_taut(th in 0.0f64..std::f64::consts::TAU) {
        let (axioms, taut) = sphere_element_residual("cotangent", [0.0, th.cos(), th.sin()]);
        prop_assert!(axioms <= 1e-7 && taut <= 1e-7, "{:e} {:e}", axioms, taut);
    }
}

#[test]
fn sasaki_conditions_hold_exactly_on_cp3() {
    let b = shared("cp3");
    let r = sasaki_conditions(&b.th.triple, 2.0, &b.q).unwrap();
    assert!(r.levi_civita <= 1e-5 && r.normality2 <= 1e-5 && r.normality3 <= 1e-5, "{r:?}");
}

#[test]
fn sasaki_conditions_fail_together_elsewhere() {
    for name in ["flat3", "cotangent"] {
        let b = shared(name);
        let r = sasaki_conditions(&b.th.triple, 2.0, &b.q[..4]).unwrap();
        assert!(r.levi_civita > 1e-3 && r.normality2 > 1e-3 && r.normality3 > 1e-3, "{name}: {r:?}");
    }
}
