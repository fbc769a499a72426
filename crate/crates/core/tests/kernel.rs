mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::{form, max_abs, max_diff};
use tricontact::jet::Jet;
use tricontact::kernel::connection::compatibility_residuals;
use tricontact::kernel::*;
use tricontact::GeomError;

fn euclid(dim: usize) -> Arc<ChartedManifold> {
    Arc::new(ChartedManifold::single_chart(dim, Chart::whole("R")))
}

/// sin(a·x + c) as a jet.
fn wave(x: &[Jet], a: &[f64], c: f64) -> Jet {
    let mut s = Jet::constant(x[0].table(), c);
    for (xi, ai) in x.iter().zip(a) {
        s += &(xi * *ai);
    }
    s.sin()
}

/// A 1-form on R^dim with coefficients sin(a_i·x + c_i) + b_i x_i x_{i+1}.
fn random_one_form(m: Arc<ChartedManifold>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> TensorField {
    let dim = m.dim;
    TensorField::from_coords(m, Valence::form(1), move |_ch, x| {
        Ok((0..dim)
            .map(|i| {
                let mut w = wave(x, &a[i * dim..(i + 1) * dim], c[i]);
                w += &(&(&x[i] * &x[(i + 1) % dim]) * b[i]);
                w
            })
            .collect())
    })
}

fn random_vector(m: Arc<ChartedManifold>, a: Vec<f64>, c: Vec<f64>) -> TensorField {
    let dim = m.dim;
    TensorField::from_coords(m, Valence::VECTOR, move |_ch, x| {
        Ok((0..dim).map(|i| &wave(x, &a[i * dim..(i + 1) * dim], c[i]) + &(&x[i] * &x[(i + 2) % dim])).collect())
    })
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, n)
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exterior_derivative_squares_to_zero(a in coeffs(16), b in coeffs(4), c in coeffs(4), x in point(4)) {
        let m = euclid(4);
        let w = random_one_form(m, a, b, c);
        let dw = exterior_derivative(&w).unwrap();
        let ddw = exterior_derivative(&dw).unwrap();
        let p = PointRef::new(0, x);
        prop_assert!(max_abs(&ddw.eval(&p).unwrap()) <= 1e-10);
    }

    #[test]
    fn d_squared_on_two_forms(a in coeffs(16), b in coeffs(4), c in coeffs(4), a2 in coeffs(16), x in point(4)) {
        let m = euclid(4);
        let w1 = random_one_form(m.clone(), a, b.clone(), c.clone());
        let w2 = random_one_form(m, a2, b, c);
        let two = wedge(&w1, &w2).unwrap();
        let dd = exterior_derivative(&exterior_derivative(&two).unwrap()).unwrap();
        prop_assert!(max_abs(&dd.eval(&PointRef::new(0, x)).unwrap()) <= 1e-10);
    }

    #[test]
    fn wedge_is_graded_commutative(a in coeffs(16), a2 in coeffs(16), a3 in coeffs(16), b in coeffs(4), c in coeffs(4), x in point(4)) {
        let m = euclid(4);
        let al = random_one_form(m.clone(), a, b.clone(), c.clone());
        let be = random_one_form(m.clone(), a2, b.clone(), c.clone());
        let ga = random_one_form(m, a3, b, c);
        let p = PointRef::new(0, x);
        // 1-forms anticommute
        let ab = wedge(&al, &be).unwrap().eval(&p).unwrap();
        let ba = wedge(&be, &al).unwrap().eval(&p).unwrap();
        prop_assert!(max_abs(&ab.iter().zip(&ba).map(|(x, y)| x + y).collect::<Vec<_>>()) <= 1e-13);
        // a 1-form commutes with a 2-form
        let two = exterior_derivative(&ga).unwrap();
        let l = wedge(&al, &two).unwrap().eval(&p).unwrap();
        let r = wedge(&two, &al).unwrap().eval(&p).unwrap();
        prop_assert!(max_diff(&l, &r) <= 1e-13);
        // α∧α = 0
        prop_assert!(max_abs(&wedge(&al, &al).unwrap().eval(&p).unwrap()) <= 1e-15);
    }

    #[test]
    fn bracket_is_bilinear_antisymmetric_and_jacobi(a in coeffs(9), a2 in coeffs(9), a3 in coeffs(9), c in coeffs(3), s in -2.0f64..2.0, x in point(3)) {
        let m = euclid(3);
        let xf = random_vector(m.clone(), a, c.clone());
        let yf = random_vector(m.clone(), a2, c.clone());
        let zf = random_vector(m, a3, c);
        let p = PointRef::new(0, x);
        let xy = lie_bracket(&xf, &yf).unwrap().eval(&p).unwrap();
        let yx = lie_bracket(&yf, &xf).unwrap().eval(&p).unwrap();
        prop_assert!(max_abs(&xy.iter().zip(&yx).map(|(u, v)| u + v).collect::<Vec<_>>()) <= 1e-13);
        let comb = yf.scale(s).add(&zf).unwrap();
        let lhs = lie_bracket(&xf, &comb).unwrap().eval(&p).unwrap();
        let xz = lie_bracket(&xf, &zf).unwrap().eval(&p).unwrap();
        let rhs: Vec<f64> = xy.iter().zip(&xz).map(|(u, v)| s * u + v).collect();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12);
        let j1 = lie_bracket(&xf, &lie_bracket(&yf, &zf).unwrap()).unwrap().eval(&p).unwrap();
        let j2 = lie_bracket(&yf, &lie_bracket(&zf, &xf).unwrap()).unwrap().eval(&p).unwrap();
        let j3 = lie_bracket(&zf, &lie_bracket(&xf, &yf).unwrap()).unwrap().eval(&p).unwrap();
        let sum: Vec<f64> = (0..3).map(|i| j1[i] + j2[i] + j3[i]).collect();
        prop_assert!(max_abs(&sum) <= 1e-11);
    }

    #[test]
    fn nijenhuis_is_antisymmetric(a in coeffs(16), c in coeffs(16), x in point(4)) {
        let m = euclid(4);
        let phi = TensorField::from_coords(m, Valence::ENDO, move |_ch, x| {
            Ok((0..16).map(|k| wave(x, &[a[k], -a[15 - k], 0.5 * a[k], a[(k + 3) % 16]], c[k])).collect())
        });
        let n = nijenhuis_endo(&phi).unwrap().eval(&PointRef::new(0, x)).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    worst = worst.max((n[i * 16 + j * 4 + k] + n[i * 16 + k * 4 + j]).abs());
                }
            }
        }
        prop_assert!(worst <= 1e-12);
    }

    #[test]
    fn nijenhuis_conventions_agree_for_complex_structures(a in coeffs(4), b in coeffs(4), x in point(4)) {
        let m = euclid(4);
        let j = variable_complex_structure(m, a, b);
        let p = PointRef::new(0, x);
        prop_assert!(j.square_residual(&p).unwrap() <= 1e-13);
        let n_endo = nijenhuis_endo(&j.field).unwrap().eval(&p).unwrap();
        let n_cx = nijenhuis_complex(&j).unwrap().eval(&p).unwrap();
        prop_assert!(max_diff(&n_endo, &n_cx) <= 1e-11 * (1.0 + max_abs(&n_cx)));
    }

    #[test]
    fn levi_civita_is_compatible_and_torsion_free(a in coeffs(27), c in coeffs(9), eps in 0.0f64..0.3, x in point(3)) {
        let g = wobbly_metric(a, c, eps);
        let (nabla, torsion) = compatibility_residuals(&g, &PointRef::new(0, x)).unwrap();
        prop_assert!(nabla <= 1e-8 && torsion <= 1e-8, "{nabla:e} {torsion:e}");
    }

    #[test]
    fn ricci_is_symmetric_and_scalar_is_its_trace(a in coeffs(27), c in coeffs(9), eps in 0.0f64..0.3, x in point(3)) {
        let g = wobbly_metric(a, c, eps);
        let cv = curvature(&g, &PointRef::new(0, x)).unwrap();
        let ric = DMatrix::from_row_slice(3, 3, &cv.ricci);
        prop_assert!((&ric - ric.transpose()).abs().max() <= 1e-10);
        let ginv = DMatrix::from_row_slice(3, 3, &cv.metric).try_inverse().unwrap();
        let tr = (ginv * ric).trace();
        prop_assert!((tr - cv.scalar).abs() <= 1e-10 * (1.0 + tr.abs()));
    }

    #[test]
    fn jets_match_central_differences(a in -1.5f64..1.5, b in -1.5f64..1.5, c in -1.0f64..1.0, x in point(3)) {
        let m = euclid(3);
        let f = TensorField::from_coords(m, Valence::SCALAR, move |_ch, x| {
            let s = wave(x, &[a, b, 0.0], 0.1);
            let e = (&x[2] * c).exp();
            Ok(vec![&(&s * &e) + &(&(&x[0] * &x[1]) * &(&x[1] * &x[2]))])
        });
        let p = PointRef::new(0, x.clone());
        let ja = eval_jet(&f, &p, 2).unwrap();
        let h = 1e-5;
        let shifted = |i: usize, s: f64| {
            let mut y = x.clone();
            y[i] += s;
            PointRef::new(0, y)
        };
        for i in 0..3 {
            let fd = (f.eval(&shifted(i, h)).unwrap()[0] - f.eval(&shifted(i, -h)).unwrap()[0]) / (2.0 * h);
            let ad = ja.gradient[0][i];
            prop_assert!((ad - fd).abs() / ad.abs().max(1.0) <= 1e-5);
            for k in 0..3 {
                let gp = eval_jet(&f, &shifted(k, h), 1).unwrap().gradient[0][i];
                let gm = eval_jet(&f, &shifted(k, -h), 1).unwrap().gradient[0][i];
                let fd2 = (gp - gm) / (2.0 * h);
                let ad2 = ja.hessian[0][i * 3 + k];
                prop_assert!((ad2 - fd2).abs() / ad2.abs().max(1.0) <= 1e-5);
            }
        }
    }
}

/// J = diag(K(x), K(x)) with K = [[p, q], [−(1+p²)/q, −p]], so J² = −Id.
fn variable_complex_structure(m: Arc<ChartedManifold>, a: Vec<f64>, b: Vec<f64>) -> ComplexStructureField {
    let field = TensorField::from_coords(m, Valence::ENDO, move |_ch, x| {
        let tab = x[0].table();
        let zero = Jet::zero(tab);
        let mut out = vec![zero.clone(); 16];
        for blk in 0..2 {
            let p = wave(x, &a, 0.3 * blk as f64);
            let q = &(&wave(x, &b, 1.0 - blk as f64) * 0.4) + 1.0;
            let one_p2 = &(&p * &p) + 1.0;
            let r = -(&one_p2 / &q);
            let o = 2 * blk;
            out[o * 4 + o] = p.clone();
            out[o * 4 + o + 1] = q;
            out[(o + 1) * 4 + o] = r;
            out[(o + 1) * 4 + o + 1] = -&p;
        }
        Ok(out)
    });
    ComplexStructureField { field, constant_in_charts: false }
}

/// g = Id + ε S(x) with S symmetric and bounded by 1 componentwise.
fn wobbly_metric(a: Vec<f64>, c: Vec<f64>, eps: f64) -> MetricField {
    let m = euclid(3);
    let f = TensorField::from_coords(m, Valence::new(0, 2), move |_ch, x| {
        let tab = x[0].table();
        let mut out = vec![Jet::zero(tab); 9];
        for i in 0..3 {
            for j in i..3 {
                let k = i * 3 + j;
                let mut v = &wave(x, &a[k * 3..k * 3 + 3], c[k]) * (eps / 3.0);
                if i == j {
                    v = &v + 1.0;
                }
                out[i * 3 + j] = v.clone();
                out[j * 3 + i] = v;
            }
        }
        Ok(out)
    });
    MetricField::new(f).unwrap()
}

#[test]
fn form_helper_is_antisymmetric() {
    let w = form(3, &[(&[0, 1, 2], 1.0)]);
    assert_eq!(w[1 * 3 + 2], 1.0);
    assert_eq!(w[1 * 9 + 2], -1.0);
    assert_eq!(w[2 * 9 + 1], 1.0);
    assert_eq!(w.iter().filter(|x| **x != 0.0).count(), 6);
}

#[test]
fn fields_on_different_manifolds_do_not_combine() {
    let a = TensorField::constant(euclid(2), Valence::form(1), vec![1.0, 0.0]);
    let b = TensorField::constant(euclid(2), Valence::form(1), vec![0.0, 1.0]);
    assert!(matches!(wedge(&a, &b), Err(GeomError::ValenceMismatch(_))));
}

#[test]
fn x_times_y_value_and_gradient() {
    let f = TensorField::from_coords(euclid(2), Valence::SCALAR, |_c, x| Ok(vec![&x[0] * &x[1]]));
    let j = eval_jet(&f, &PointRef::new(0, vec![2.0, 3.0]), 1).unwrap();
    assert_eq!(j.values, vec![6.0]);
    assert_eq!(j.gradient[0], vec![3.0, 2.0]);
}

#[test]
fn points_outside_the_chart_are_rejected() {
    let m = Arc::new(ChartedManifold::single_chart(2, Chart::new("half", |x| x[0] > 0.0)));
    let f = TensorField::constant(m, Valence::SCALAR, vec![1.0]);
    assert!(matches!(f.eval(&PointRef::new(0, vec![-1.0, 0.0])), Err(GeomError::DomainViolation { .. })));
}

#[test]
fn zero_top_form_has_zero_magnitude() {
    let m = euclid(2);
    let z = TensorField::constant(m.clone(), Valence::form(2), vec![0.0; 4]);
    let pts = vec![PointRef::new(0, vec![0.1, 0.2]), PointRef::new(0, vec![-0.5, 0.3])];
    assert_eq!(min_topform_magnitude(&z, &pts).unwrap(), 0.0);
    let area = TensorField::constant(m, Valence::form(2), form(2, &[(&[0, 1], 1.0)]));
    assert_eq!(min_topform_magnitude(&area, &pts).unwrap(), 1.0);
    let one = TensorField::constant(euclid(2), Valence::form(1), vec![1.0, 0.0]);
    assert!(matches!(min_topform_magnitude(&one, &pts), Err(GeomError::ValenceMismatch(_))));
}

#[test]
fn constant_field_has_zero_derivatives() {
    let f = TensorField::constant(euclid(3), Valence::ENDO, (0..9).map(f64::from).collect());
    let j = eval_jet(&f, &PointRef::new(0, vec![0.4, -0.1, 2.0]), 2).unwrap();
    assert!(j.gradient.iter().chain(&j.hessian).all(|g| g.iter().all(|v| *v == 0.0)));
}

/// Stereographic chart y ∈ R³ of the unit 3-sphere, p(y) = (2y, |y|² − 1)/(1 + |y|²),
/// with metric 4/(1+|y|²)² δ and the Hopf field x ↦ (−x₂, x₁, −x₄, x₃) pushed to the chart.
#[test]
fn hopf_field_on_round_sphere() {
    let m = euclid(3);
    let g = MetricField::new(TensorField::from_coords(m.clone(), Valence::new(0, 2), |_c, y| {
        let tab = y[0].table();
        let mut r2 = Jet::constant(tab, 1.0);
        for v in y {
            r2 += &(v * v);
        }
        let conf = &(&r2 * &r2).recip() * 4.0;
        let zero = Jet::zero(tab);
        Ok((0..9).map(|k| if k % 4 == 0 { conf.clone() } else { zero.clone() }).collect())
    }))
    .unwrap();
    let hopf = TensorField::from_coords(m, Valence::VECTOR, |_c, y| {
        let tab = y[0].table();
        let mut s = Jet::constant(tab, 1.0);
        for v in y {
            s += &(v * v);
        }
        let inv = s.recip();
        let p: Vec<Jet> = vec![&(&y[0] * 2.0) * &inv, &(&y[1] * 2.0) * &inv, &(&y[2] * 2.0) * &inv, &(&s - 2.0) * &inv];
        let v = [-&p[1], p[0].clone(), -&p[3], p[2].clone()];
        // w = (dp)ᵀ V · (1+|y|²)²/4, dp_a/dy_b = 2δ_ab/s − 4 y_a y_b/s² (a < 3), dp_4/dy_b = 4 y_b/s²
        let inv2 = &inv * &inv;
        let k = &(&s * &s) * 0.25;
        Ok((0..3)
            .map(|b| {
                let mut acc = &(&(&y[b] * &inv2) * 4.0) * &v[3];
                for a in 0..3 {
                    let mut d = &(&(&y[a] * &y[b]) * &inv2) * -4.0;
                    if a == b {
                        d += &(&inv * 2.0);
                    }
                    acc += &(&d * &v[a]);
                }
                &acc * &k
            })
            .collect())
    });
    let nabla = covariant_derivative(&g, &hopf).unwrap();
    for y in [[0.3, -0.2, 0.5], [1.2, 0.4, -0.7], [-0.1, 0.0, 0.05]] {
        let p = PointRef::new(0, y.to_vec());
        let gm = g.0.eval(&p).unwrap();
        let xi = hopf.eval(&p).unwrap();
        assert!((common::bilinear(&gm, &xi, &xi) - 1.0).abs() < 1e-12, "Hopf field is unit");
        // a unit vector orthogonal to ξ
        let mut x = vec![xi[1], -xi[0], 0.0];
        let nx = common::bilinear(&gm, &x, &x).sqrt();
        x.iter_mut().for_each(|v| *v /= nx);
        let nx_xi = common::apply(&nabla.eval(&p).unwrap(), &x);
        assert!((common::bilinear(&gm, &nx_xi, &nx_xi) - 1.0).abs() < 1e-10);
        // ∇_ξ ξ = 0 along the great-circle fibers
        assert!(max_abs(&common::apply(&nabla.eval(&p).unwrap(), &xi)) < 1e-12);
    }
}
