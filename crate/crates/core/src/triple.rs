//! The almost contact metric 3-structure on Q(L): Kobayashi forms η₂, η₃, the
//! tensors Ψ and Ξ = ξ₂, Φ₂, the third structure obtained from Kuo's formulas,
//! the bundle metric g_Q, the 2-sphere of structures, and Sasaki conditions.


use crate::algebra;
use crate::bundle::{eta_one, phi_one_components, CircleBundleAtlas, HatakeyamaStructure};
use crate::contact::{vertical_frame, AssociatedMetricData, Frame, Stage};
use crate::error::{GeomError, Result};
use crate::jet::Jet;
use crate::kernel::connection::covariant_derivative;
use crate::kernel::forms::exterior_derivative;
use crate::kernel::manifold::PointRef;
use crate::kernel::ops::{nijenhuis_endo, pullback};
use crate::kernel::tensor::{MetricField, Tensor, TensorField, Valence};

/// Y# = (Y, −σ(Y)) in jet arithmetic.
pub fn lift_vector(sigma: &[Jet], y: &[Jet]) -> Vec<Jet> {
    let mut out = y.to_vec();
    let mut last = Jet::zero(y[0].table());
    for (s, c) in sigma.iter().zip(y) {
        last -= &(s * c);
    }
    out.push(last);
    out
}

/// The (1,1) tensor X ↦ (E π_*X)^# for a base endomorphism E (row-major m×m).
pub fn lift_endo(sigma: &[Jet], e: &[Jet], m: usize) -> Vec<Jet> {
    let d = m + 1;
    let tab = e[0].table();
    let mut out = vec![Jet::zero(tab); d * d];
    for c in 0..m {
        let col: Vec<Jet> = (0..m).map(|r| e[r * m + c].clone()).collect();
        let lifted = lift_vector(sigma, &col);
        for (r, v) in lifted.into_iter().enumerate() {
            out[r * d + c] = v;
        }
    }
    out
}

fn rotate(c: &Jet, s: &Jet, a: &[Jet], b: &[Jet]) -> Vec<Jet> {
    a.iter().zip(b).map(|(x, y)| &(c * x) + &(s * y)).collect()
}

fn pad(mut v: Vec<Jet>) -> Vec<Jet> {
    let z = Jet::zero(v[0].table());
    v.push(z);
    v
}

#[derive(Clone, Debug)]
pub struct KobayashiForms {
    pub eta2: TensorField,
    pub eta3: TensorField,
}

/// η₂ = cos φ π*u + sin φ π*v and η₃ = sin φ π*u − cos φ π*v.
pub fn kobayashi_contact(bundle: &CircleBundleAtlas) -> KobayashiForms {
    let eta2 = bundle.field(Valence::form(1), Stage::Omega, |f: &Frame, phi: &Jet| {
        Ok(pad(rotate(&phi.cos(), &phi.sin(), &f.u, &f.v)))
    });
    let eta3 = bundle.field(Valence::form(1), Stage::Omega, |f: &Frame, phi: &Jet| {
        Ok(pad(rotate(&phi.sin(), &(-phi.cos()), &f.u, &f.v)))
    });
    KobayashiForms { eta2, eta3 }
}

#[derive(Clone, Debug)]
pub struct PsiXi {
    pub psi: TensorField,
    pub xi: TensorField,
}

/// Ψ(X) = cos φ (G π_*X)^# + sin φ (H π_*X)^# and Ξ = cos φ A^# + sin φ B^#.
pub fn psi_xi(bundle: &CircleBundleAtlas, base_samples: &[PointRef]) -> Result<PsiXi> {
    vertical_frame(&bundle.engine, base_samples)?;
    let m = bundle.base_dim();
    let psi = bundle.field(Valence::ENDO, Stage::Metric, move |f: &Frame, phi: &Jet| {
        let e = rotate(&phi.cos(), &phi.sin(), &f.g_end, &f.h_end);
        Ok(lift_endo(&f.sigma, &e, m))
    });
    let xi = bundle.field(Valence::VECTOR, Stage::Vertical, |f: &Frame, phi: &Jet| {
        Ok(lift_vector(&f.sigma, &rotate(&phi.cos(), &phi.sin(), &f.a, &f.b)))
    });
    Ok(PsiXi { psi, xi })
}

fn jmul(a: &[Jet], b: &[Jet], n: usize) -> Vec<Jet> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = Jet::zero(a[0].table());
            for k in 0..n {
                acc += &(&a[i * n + k] * &b[k * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

fn japply(e: &[Jet], x: &[Jet]) -> Vec<Jet> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut acc = Jet::zero(x[0].table());
            for j in 0..n {
                acc += &(&e[i * n + j] * &x[j]);
            }
            acc
        })
        .collect()
}

fn jcovec(eta: &[Jet], e: &[Jet]) -> Vec<Jet> {
    let n = eta.len();
    (0..n)
        .map(|j| {
            let mut acc = Jet::zero(eta[0].table());
            for i in 0..n {
                acc += &(&eta[i] * &e[i * n + j]);
            }
            acc
        })
        .collect()
}

/// X ↦ η(X) x
fn jrank_one(eta: &[Jet], x: &[Jet]) -> Vec<Jet> {
    let n = x.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(&x[i] * &eta[j]);
        }
    }
    out
}

fn jsub(a: &[Jet], b: &[Jet]) -> Vec<Jet> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Φ₂ = Ψ − η₁ ⊗ Φ₁(ξ₂) − (η₂∘Φ₁) ⊗ ξ₁.
pub fn phi_two(hs: &HatakeyamaStructure, px: &PsiXi, kf: &KobayashiForms) -> TensorField {
    let man = hs.phi.manifold.clone();
    TensorField::combine(
        man,
        Valence::ENDO,
        vec![px.psi.clone(), hs.eta.clone(), hs.phi.clone(), px.xi.clone(), kf.eta2.clone(), hs.xi.clone()],
        |t: &[Tensor]| {
            let (psi, eta1, phi1, xi2, eta2, xi1) = (&t[0].data, &t[1].data, &t[2].data, &t[3].data, &t[4].data, &t[5].data);
            let p1x2 = japply(phi1, xi2);
            let e2p1 = jcovec(eta2, phi1);
            let out = jsub(&jsub(psi, &jrank_one(eta1, &p1x2)), &jrank_one(&e2p1, xi1));
            Ok(out)
        },
    )
}

#[derive(Clone, Debug)]
pub struct ThirdStructure {
    pub phi: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
}

/// Residuals of Kuo's hypotheses at sample points:
/// (|Φ₁ξ₂ + Φ₂ξ₁|, |η₁∘Φ₂ + η₂∘Φ₁|, |η₁(ξ₂)| + |η₂(ξ₁)|, L2 defect).
pub fn kuo_residuals(
    hs: &HatakeyamaStructure,
    phi2: &TensorField,
    xi2: &TensorField,
    eta2: &TensorField,
    samples: &[PointRef],
) -> Result<[f64; 4]> {
    let mut r = [0.0f64; 4];
    for p in samples {
        let (p1, x1, e1) = (hs.phi.eval(p)?, hs.xi.eval(p)?, hs.eta.eval(p)?);
        let (p2, x2, e2) = (phi2.eval(p)?, xi2.eval(p)?, eta2.eval(p)?);
        let n = x1.len();
        r[0] = r[0].max(algebra::max_abs(&algebra::add(&algebra::apply(&p1, &x2), &algebra::apply(&p2, &x1))));
        r[1] = r[1].max(algebra::max_abs(&algebra::add(&algebra::covec_mat(&e1, &p2), &algebra::covec_mat(&e2, &p1))));
        r[2] = r[2].max(algebra::pair(&e1, &x2).abs() + algebra::pair(&e2, &x1).abs());
        let lhs = algebra::sub(&algebra::mat_mul(&p1, &p2, n), &algebra::rank_one(&e2, &x1));
        let rhs = algebra::add(&algebra::scale(&algebra::mat_mul(&p2, &p1, n), -1.0), &algebra::rank_one(&e1, &x2));
        r[3] = r[3].max(algebra::max_diff(&lhs, &rhs));
    }
    Ok(r)
}

/// ξ₃ = Φ₁(ξ₂), η₃ = η₁∘Φ₂, Φ₃ = Φ₁∘Φ₂ − η₂ ⊗ ξ₁, after checking Kuo's hypotheses.
pub fn third_structure(
    hs: &HatakeyamaStructure,
    phi2: &TensorField,
    px: &PsiXi,
    kf: &KobayashiForms,
    samples: &[PointRef],
    tol: f64,
) -> Result<ThirdStructure> {
    let r = kuo_residuals(hs, phi2, &px.xi, &kf.eta2, samples)?;
    let names = ["Φ₁ξ₂ + Φ₂ξ₁", "η₁∘Φ₂ + η₂∘Φ₁", "η₁(ξ₂), η₂(ξ₁)", "Φ₁Φ₂ − η₂⊗ξ₁ + Φ₂Φ₁ − η₁⊗ξ₂"];
    for (name, res) in names.iter().zip(r) {
        if !(res <= tol) {
            return Err(GeomError::KuoHypothesisViolated { name: name.to_string(), residual: res });
        }
    }
    let man = hs.phi.manifold.clone();
    let xi = TensorField::combine(man.clone(), Valence::VECTOR, vec![hs.phi.clone(), px.xi.clone()], |t: &[Tensor]| {
        Ok(japply(&t[0].data, &t[1].data))
    });
    let eta = TensorField::combine(man.clone(), Valence::form(1), vec![hs.eta.clone(), phi2.clone()], |t: &[Tensor]| {
        Ok(jcovec(&t[0].data, &t[1].data))
    });
    let phi = TensorField::combine(
        man,
        Valence::ENDO,
        vec![hs.phi.clone(), phi2.clone(), kf.eta2.clone(), hs.xi.clone()],
        |t: &[Tensor]| {
            let n = t[3].data.len();
            Ok(jsub(&jmul(&t[0].data, &t[1].data, n), &jrank_one(&t[2].data, &t[3].data)))
        },
    );
    Ok(ThirdStructure { phi, xi, eta })
}

/// g_Q = π*g_Z + η₁ ⊗ η₁.
pub fn bundle_metric(bundle: &CircleBundleAtlas, amd: &AssociatedMetricData, eta1: &TensorField) -> Result<MetricField> {
    let pulled = pullback(&bundle.projection, amd.g_z.field())?;
    let ee = TensorField::combine(bundle.manifold.clone(), Valence::form(2), vec![eta1.clone()], |t: &[Tensor]| {
        let e = &t[0].data;
        Ok(jrank_one(e, e))
    });
    MetricField::new(pulled.add(&ee)?)
}

/// (g_Q, Φ_α, ξ_α, η_α) for α = 1, 2, 3.
#[derive(Clone, Debug)]
pub struct AlmostContactTriple {
    pub phi: [TensorField; 3],
    pub xi: [TensorField; 3],
    pub eta: [TensorField; 3],
    pub g_q: MetricField,
}

impl AlmostContactTriple {
    pub fn assemble(hs: &HatakeyamaStructure, phi2: &TensorField, px: &PsiXi, kf: &KobayashiForms, third: &ThirdStructure, g_q: MetricField) -> AlmostContactTriple {
        AlmostContactTriple {
            phi: [hs.phi.clone(), phi2.clone(), third.phi.clone()],
            xi: [hs.xi.clone(), px.xi.clone(), third.xi.clone()],
            eta: [hs.eta.clone(), kf.eta2.clone(), third.eta.clone()],
            g_q,
        }
    }

    pub fn dim(&self) -> usize {
        self.g_q.field().dim()
    }
}

/// ν = g(Φ·, ·) for a (1,1) field Φ.
pub fn fundamental_two_form(phi: &TensorField, g: &MetricField) -> TensorField {
    TensorField::combine(phi.manifold.clone(), Valence::form(2), vec![phi.clone(), g.field().clone()], |t: &[Tensor]| {
        let n = t[0].dim;
        let (e, g) = (&t[0].data, &t[1].data);
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = Jet::zero(e[0].table());
                for c in 0..n {
                    acc += &(&e[c * n + a] * &g[c * n + b]);
                }
                out.push(acc);
            }
        }
        Ok(out)
    })
}

#[derive(Clone, Debug)]
pub struct SphereFamilyElement {
    pub s: [f64; 3],
    pub phi: TensorField,
    pub xi: TensorField,
    pub eta: TensorField,
    pub nu: TensorField,
}

fn mix(f: &[TensorField; 3], s: [f64; 3]) -> Result<TensorField> {
    f[0].scale(s[0]).add(&f[1].scale(s[1]))?.add(&f[2].scale(s[2]))
}

pub fn sphere_family(triple: &AlmostContactTriple, s: [f64; 3]) -> Result<SphereFamilyElement> {
    let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(GeomError::NotUnitSphereParameter(norm));
    }
    let phi = mix(&triple.phi, s)?;
    let nu = fundamental_two_form(&phi, &triple.g_q);
    Ok(SphereFamilyElement { s, xi: mix(&triple.xi, s)?, eta: mix(&triple.eta, s)?, phi, nu })
}

/// The normality tensor [Φ,Φ] + dη⊗ξ. With d taken without the ½ factor this
/// is the classical [Φ,Φ] + 2dη⊗ξ.
pub fn normality_tensor(phi: &TensorField, eta: &TensorField, xi: &TensorField) -> Result<TensorField> {
    let n = nijenhuis_endo(phi)?;
    let de = exterior_derivative(eta)?;
    Ok(TensorField::combine(phi.manifold.clone(), Valence::new(1, 2), vec![n, de, xi.clone()], |t: &[Tensor]| {
        let d = t[2].dim;
        let mut out = t[0].data.clone();
        for i in 0..d {
            for jk in 0..d * d {
                out[i * d * d + jk] += &(&t[1].data[jk] * &t[2].data[i]);
            }
        }
        Ok(out)
    }))
}

/// Residuals for the two conditions of the Sasaki criterion.
#[derive(Clone, Debug)]
pub struct SasakiReport {
    /// max |Φ₁ − κ′∇ξ₁|
    pub levi_civita: f64,
    /// max |[Φ₂,Φ₂] + dη₂⊗ξ₂|
    pub normality2: f64,
    /// max |[Φ₃,Φ₃] + dη₃⊗ξ₃|
    pub normality3: f64,
    pub points: usize,
}

pub fn sasaki_conditions(triple: &AlmostContactTriple, kappa_prime: f64, samples: &[PointRef]) -> Result<SasakiReport> {
    let nabla = covariant_derivative(&triple.g_q, &triple.xi[0])?;
    let n2 = normality_tensor(&triple.phi[1], &triple.eta[1], &triple.xi[1])?;
    let n3 = normality_tensor(&triple.phi[2], &triple.eta[2], &triple.xi[2])?;
    let mut rep = SasakiReport { levi_civita: 0.0, normality2: 0.0, normality3: 0.0, points: samples.len() };
    for p in samples {
        let diff = algebra::sub(&triple.phi[0].eval(p)?, &algebra::scale(&nabla.eval(p)?, kappa_prime));
        rep.levi_civita = rep.levi_civita.max(algebra::max_abs(&diff));
        rep.normality2 = rep.normality2.max(algebra::max_abs(&n2.eval(p)?));
        rep.normality3 = rep.normality3.max(algebra::max_abs(&n3.eval(p)?));
    }
    Ok(rep)
}

/// The full 3-structure construction for one bundle, built in dependency order.
#[derive(Clone, Debug)]
pub struct TheoremOneData {
    pub hatakeyama: HatakeyamaStructure,
    pub kobayashi: KobayashiForms,
    pub psi_xi: PsiXi,
    pub phi2: TensorField,
    pub third: ThirdStructure,
    pub amd: AssociatedMetricData,
    pub triple: AlmostContactTriple,
}

pub fn build_theorem_one(bundle: &CircleBundleAtlas, base_samples: &[PointRef], q_samples: &[PointRef], tol: f64) -> Result<TheoremOneData> {
    let amd = crate::contact::associated_metric(&bundle.engine, base_samples)?;
    let eta1 = eta_one(bundle);
    let hatakeyama = crate::bundle::hatakeyama(bundle, &eta1, base_samples, tol)?;
    let kobayashi = kobayashi_contact(bundle);
    let px = psi_xi(bundle, base_samples)?;
    let phi2 = phi_two(&hatakeyama, &px, &kobayashi);
    let third = third_structure(&hatakeyama, &phi2, &px, &kobayashi, q_samples, tol)?;
    let g_q = bundle_metric(bundle, &amd, &eta1)?;
    let triple = AlmostContactTriple::assemble(&hatakeyama, &phi2, &px, &kobayashi, &third, g_q);
    Ok(TheoremOneData { hatakeyama, kobayashi, psi_xi: px, phi2, third, amd, triple })
}

/// Φ₁ in components for a bundle chart, exposed for oracles.
pub fn phi_one_values(sigma: &[f64]) -> Vec<f64> {
    let tab = crate::jet::table(1, 0);
    let s: Vec<Jet> = sigma.iter().map(|&v| Jet::constant(tab, v)).collect();
    phi_one_components(&s, sigma.len()).iter().map(Jet::value).collect()
}
