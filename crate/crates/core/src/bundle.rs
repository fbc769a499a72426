//! The circle bundle Q(L) over a complex contact manifold, its IK-connection
//! η₁ = π*σ_i + dφ_i, horizontal lifts and the normal almost contact
//! structure (Φ₁, ξ₁, η₁).
//!
//! Bundle charts carry the base coordinates followed by the fiber angle φ_i.
//! Angles change by φ_j = φ_i + ψ_ij and are stored in [0, 2π).

use std::f64::consts::TAU;
use std::sync::Arc;

use crate::contact::{complex_coords, sigma_components, transition_angle, ContactEngine, Frame, Stage};
use crate::error::{GeomError, Result};
use crate::jet::{table, Jet};
use crate::kernel::manifold::{Chart, ChartedManifold, Overlap, PointRef, SmoothMap};
use crate::kernel::ops::ChartMap;
use crate::kernel::tensor::{standard_j, Tensor, TensorField, Valence};

pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Distance between two angles on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

/// Shift a jet's value into [0, 2π) without touching its derivatives.
fn wrap_jet(mut j: Jet) -> Jet {
    let v = j.value();
    j.set_value(wrap_angle(v));
    j
}

#[derive(Clone)]
pub struct CircleBundleAtlas {
    pub engine: ContactEngine,
    pub manifold: Arc<ChartedManifold>,
    pub projection: ChartMap,
}

impl CircleBundleAtlas {
    pub fn base_dim(&self) -> usize {
        self.engine.dim()
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim
    }

    /// Index of the fiber coordinate.
    pub fn angle_index(&self) -> usize {
        self.base_dim()
    }

    /// A field on Q computed from the base frame and the fiber angle jet.
    pub fn field<F>(&self, valence: Valence, stage: Stage, f: F) -> TensorField
    where
        F: Fn(&Frame, &Jet) -> Result<Vec<Jet>> + Send + Sync + 'static,
    {
        let eng = self.engine.clone();
        let m = self.base_dim();
        let d = m + 1;
        TensorField::new(self.manifold.clone(), valence, move |p, order| {
            let x = Jet::point(&p.coords, order + 1);
            let fr = eng.frame(p.chart, &x[..m], stage)?;
            let phi = x[m].truncate(order);
            Ok(Tensor::from_data(d, valence, f(&fr, &phi)?))
        })
    }

    /// The point of Q over `base` with fiber angle `phi`.
    pub fn point_over(&self, base: &PointRef, phi: f64) -> PointRef {
        let mut c = base.coords.clone();
        c.push(wrap_angle(phi));
        PointRef::new(base.chart, c)
    }

    pub fn project(&self, q: &PointRef) -> PointRef {
        PointRef::new(q.chart, q.coords[..self.base_dim()].to_vec())
    }
}

pub fn build_bundle(engine: &ContactEngine) -> Result<CircleBundleAtlas> {
    let base = engine.atlas.base.clone();
    let m = base.dim;
    let charts = base
        .charts
        .iter()
        .map(|c| {
            let dom = c.domain.clone();
            Chart::new(&format!("{}×S¹", c.name), move |x: &[f64]| x.len() == m + 1 && dom(&x[..m]) && x[m].is_finite())
        })
        .collect();
    let mut overlaps = Vec::new();
    for ov in &base.overlaps {
        let (i, j) = (ov.from, ov.to);
        let dom = ov.domain.clone();
        let (fwd, bwd) = (ov.forward.clone(), ov.backward.clone());
        let (a1, a2) = (engine.atlas.clone(), engine.atlas.clone());
        let (fwd2, bwd2) = (fwd.clone(), bwd.clone());
        overlaps.push(Overlap {
            from: i,
            to: j,
            domain: Arc::new(move |x: &[f64]| dom(&x[..m])),
            forward: SmoothMap::new(m + 1, m + 1, move |x| {
                let mut y = fwd2.apply_jets(&x[..m]);
                let psi = transition_angle(&a1, i, j, &complex_coords(&x[..m])).expect("cocycle on a declared overlap");
                y.push(wrap_jet(&x[m] + &psi));
                y
            }),
            backward: SmoothMap::new(m + 1, m + 1, move |y| {
                let mut x = bwd2.apply_jets(&y[..m]);
                let psi = transition_angle(&a2, j, i, &complex_coords(&y[..m])).expect("cocycle on a declared overlap");
                x.push(wrap_jet(&y[m] + &psi));
                x
            }),
        });
    }
    let manifold = Arc::new(ChartedManifold { dim: m + 1, charts, overlaps });
    let pieces = (0..manifold.charts.len())
        .map(|c| (c, SmoothMap::new(m + 1, m, move |x| x[..m].to_vec())))
        .collect();
    let projection = ChartMap { source: manifold.clone(), target: base, pieces };
    Ok(CircleBundleAtlas { engine: engine.clone(), manifold, projection })
}

/// max over overlap samples of the wrap-aware i → j → i round-trip defect.
pub fn bundle_roundtrip_residual(bundle: &CircleBundleAtlas, samples: &[(PointRef, usize)]) -> Result<f64> {
    let m = bundle.base_dim();
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        let q = bundle.manifold.transition(p, *to)?;
        let back = bundle.manifold.transition(&q, p.chart)?;
        for k in 0..m {
            worst = worst.max((back.coords[k] - p.coords[k]).abs());
        }
        worst = worst.max(angle_distance(back.coords[m], p.coords[m]));
    }
    Ok(worst)
}

/// max over samples of the defect of φ_j = φ_i + arg f_ij (mod 2π), with
/// arg f_ij evaluated directly from the cocycle values.
pub fn angle_transition_residual(bundle: &CircleBundleAtlas, samples: &[(PointRef, usize)]) -> Result<f64> {
    let m = bundle.base_dim();
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        let q = bundle.manifold.transition(p, *to)?;
        let z = complex_coords(&Jet::point(&p.coords[..m], 0));
        let f = bundle.engine.atlas.cocycle_at(p.chart, *to, &z)?;
        let psi = f.im.value().atan2(f.re.value());
        worst = worst.max(angle_distance(q.coords[m], p.coords[m] + psi));
    }
    Ok(worst)
}

/// max over base overlap samples of |σ_j − (σ_i − dψ_ij)|, comparing in chart i.
pub fn gauge_transition_residual(engine: &ContactEngine, samples: &[(PointRef, usize)]) -> Result<f64> {
    let base = &engine.atlas.base;
    let m = base.dim;
    let mut worst: f64 = 0.0;
    for (p, to) in samples {
        let q = base.transition(p, *to)?;
        let ov = base.overlap(p.chart, *to).ok_or(GeomError::UnknownChart(*to))?;
        let (_, jac) = ov.forward.jacobian(&p.coords);
        let si = sigma_at(engine, p)?;
        let sj = sigma_at(engine, &q)?;
        let x = Jet::point(&p.coords, 1);
        let psi = transition_angle(&engine.atlas, p.chart, *to, &complex_coords(&x))?;
        for c in 0..m {
            let pulled: f64 = (0..m).map(|r| jac[r * m + c] * sj[r]).sum();
            worst = worst.max((pulled - (si[c] - psi.d1(c))).abs());
        }
    }
    Ok(worst)
}

fn sigma_at(engine: &ContactEngine, p: &PointRef) -> Result<Vec<f64>> {
    let x = Jet::point(&p.coords, 1);
    let h = engine.weight.h_at(p.chart, &complex_coords(&x))?;
    Ok(sigma_components(&h.ln(), engine.dim()).iter().map(Jet::value).collect())
}

/// η₁ = π*σ_i + dφ_i. Fails with GaugeInconsistency when σ does not obey its
/// transition law on the given overlap samples.
pub fn ik_connection(bundle: &CircleBundleAtlas, overlap_samples: &[(PointRef, usize)], tol: f64) -> Result<TensorField> {
    let r = gauge_transition_residual(&bundle.engine, overlap_samples)?;
    if r > tol {
        return Err(GeomError::GaugeInconsistency(r));
    }
    Ok(eta_one(bundle))
}

pub(crate) fn eta_one(bundle: &CircleBundleAtlas) -> TensorField {
    bundle.field(Valence::form(1), Stage::Omega, |f, phi| {
        let mut e = f.sigma.clone();
        e.push(Jet::constant(phi.table(), 1.0));
        Ok(e)
    })
}

/// ω = i∂∂̄ log h on the base, from the complex Hessian of log h.
pub fn kahler_form(engine: &ContactEngine) -> TensorField {
    let eng = engine.clone();
    let m = engine.dim();
    TensorField::new(engine.atlas.base.clone(), Valence::form(2), move |p, order| {
        if order > 0 {
            return Err(GeomError::ValenceMismatch("kahler_form is evaluated at order 0".into()));
        }
        let x = Jet::point(&p.coords, 2);
        let f = eng.weight.h_at(p.chart, &complex_coords(&x))?.ln();
        let c = m / 2;
        // dz_k, dz̄_k on the real basis (∂x_0, ∂y_0, ...)
        let dz = |k: usize, a: usize| -> (f64, f64) {
            if a == 2 * k {
                (1.0, 0.0)
            } else if a == 2 * k + 1 {
                (0.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        };
        let cm = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
        let conj = |a: (f64, f64)| (a.0, -a.1);
        let tab = table(m, 0);
        let mut out = Tensor::zeros(m, Valence::form(2), m, 0);
        for a in 0..m {
            for b in 0..m {
                let mut acc = (0.0, 0.0);
                for k in 0..c {
                    for l in 0..c {
                        // ∂²f/∂z_k∂z̄_l
                        let ckl = (
                            0.25 * (f.d2(2 * k, 2 * l) + f.d2(2 * k + 1, 2 * l + 1)),
                            0.25 * (f.d2(2 * k, 2 * l + 1) - f.d2(2 * k + 1, 2 * l)),
                        );
                        let w1 = cm(dz(k, a), conj(dz(l, b)));
                        let w2 = cm(dz(k, b), conj(dz(l, a)));
                        let t = cm(ckl, (w1.0 - w2.0, w1.1 - w2.1));
                        acc.0 += t.0;
                        acc.1 += t.1;
                    }
                }
                // ω = i·(∂∂̄f), real because ∂∂̄f is imaginary for real f
                out.set(&[a, b], Jet::constant(tab, -acc.1));
            }
        }
        Ok(out)
    })
}

/// Y# = (Y, −σ(Y)) for a base vector Y at π(q).
pub fn horizontal_lift(bundle: &CircleBundleAtlas, q: &PointRef, y: &[f64]) -> Result<Vec<f64>> {
    bundle.manifold.check(q)?;
    let m = bundle.base_dim();
    if y.len() != m {
        return Err(GeomError::ValenceMismatch(format!("expected a base vector of length {m}")));
    }
    let s = sigma_at(&bundle.engine, &bundle.project(q))?;
    let mut out = y.to_vec();
    out.push(-s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>());
    Ok(out)
}

/// Lift of a base vector field, as a vector field on Q.
pub fn lift_field(bundle: &CircleBundleAtlas, x: &TensorField) -> Result<TensorField> {
    if x.valence != Valence::VECTOR || !Arc::ptr_eq(&x.manifold, &bundle.engine.atlas.base) {
        return Err(GeomError::ValenceMismatch("lift_field needs a vector field on the base".into()));
    }
    let xf = x.clone();
    let m = bundle.base_dim();
    let eng = bundle.engine.clone();
    Ok(TensorField::new(bundle.manifold.clone(), Valence::VECTOR, move |p, order| {
        let xq = Jet::point(&p.coords, order + 1);
        let h = eng.weight.h_at(p.chart, &complex_coords(&xq[..m]))?;
        let sigma = sigma_components(&h.ln(), m);
        // evaluate the base field at order `order` and re-express its jets in Q variables
        let bp = PointRef::new(p.chart, p.coords[..m].to_vec());
        let yb = xf.eval_jet(&bp, order)?;
        let map: Vec<usize> = (0..m).collect();
        let mut data: Vec<Jet> = yb.data.iter().map(|c| c.embed(m + 1, &map)).collect();
        let mut last = Jet::zero(table(m + 1, order));
        for (s, y) in sigma.iter().zip(&data) {
            last -= &(s * y);
        }
        data.push(last);
        Ok(Tensor::from_data(m + 1, Valence::VECTOR, data))
    }))
}

/// (Φ₁, ξ₁, η₁) with Φ₁X = (Jπ_*X)^# and ξ₁ = ∂/∂φ.
#[derive(Clone, Debug)]
pub struct HatakeyamaStructure {
    pub eta: TensorField,
    pub xi: TensorField,
    pub phi: TensorField,
}

/// Components of Φ₁ in a bundle chart: J on the base block, −σ∘J in the φ row.
pub fn phi_one_components(sigma: &[Jet], m: usize) -> Vec<Jet> {
    let d = m + 1;
    let tab = sigma[0].table();
    let j = standard_j(m);
    let mut out = vec![Jet::zero(tab); d * d];
    for r in 0..m {
        for c in 0..m {
            if j[r * m + c] != 0.0 {
                out[r * d + c] = Jet::constant(tab, j[r * m + c]);
            }
        }
    }
    for c in 0..m {
        let mut acc = Jet::zero(tab);
        for k in 0..m {
            if j[k * m + c] != 0.0 {
                acc.axpy(-j[k * m + c], &sigma[k]);
            }
        }
        out[m * d + c] = acc;
    }
    out
}

/// max over samples of |ω(JX,JY) − ω(X,Y)| on coordinate fields.
pub fn curvature_invariance_residual(engine: &ContactEngine, samples: &[PointRef]) -> Result<f64> {
    let om = kahler_form(engine);
    let m = engine.dim();
    let j = standard_j(m);
    let mut worst: f64 = 0.0;
    for p in samples {
        let w = om.eval(p)?;
        for a in 0..m {
            for b in 0..m {
                let mut jj = 0.0;
                for r in 0..m {
                    for s in 0..m {
                        jj += j[r * m + a] * j[s * m + b] * w[r * m + s];
                    }
                }
                worst = worst.max((jj - w[a * m + b]).abs());
            }
        }
    }
    Ok(worst)
}

/// Builds (Φ₁, ξ₁, η₁); fails with NonInvariantCurvature if ω is not J-invariant at the samples.
pub fn hatakeyama(bundle: &CircleBundleAtlas, eta1: &TensorField, samples: &[PointRef], tol: f64) -> Result<HatakeyamaStructure> {
    let r = curvature_invariance_residual(&bundle.engine, samples)?;
    if r > tol {
        return Err(GeomError::NonInvariantCurvature(r));
    }
    let m = bundle.base_dim();
    let d = m + 1;
    let mut xi = vec![0.0; d];
    xi[m] = 1.0;
    Ok(HatakeyamaStructure {
        eta: eta1.clone(),
        xi: TensorField::constant(bundle.manifold.clone(), Valence::VECTOR, xi),
        phi: bundle.field(Valence::ENDO, Stage::Omega, move |f, _phi| Ok(phi_one_components(&f.sigma, m))),
    })
}
