//! Holomorphic contact atlases with a Hermitian weight, and the real data
//! derived from them: normalized forms u, v, gauge potentials σ, the
//! Ω-structure (Ĝ, Ĥ), the vertical frame (A, B) and an associated metric g_Z
//! with endomorphisms G, H.
//!
//! Base coordinates are interleaved real parts `(x0, y0, x1, y1, ...)` of the
//! holomorphic coordinates `z_k = x_k + i y_k`, and J is the standard structure
//! `J∂x = ∂y`. Every pointwise quantity is computed from coordinate jets whose
//! first `2(2n+1)` variables are the base coordinates, so the same code serves
//! fields on the base, on the circle bundle and on the cone.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::jet::{table, CJet, Jet};
use crate::kernel::manifold::{ChartedManifold, PointRef};
use crate::kernel::tensor::{standard_j, ComplexStructureField, MetricField, Tensor, TensorField, Valence};
use crate::linalg::{pfaffian_complex, JMat};

pub type ComplexCoeffFn = Arc<dyn Fn(usize, &[CJet]) -> Result<Vec<CJet>> + Send + Sync>;
pub type CocycleFn = Arc<dyn Fn(usize, usize, &[CJet]) -> Result<CJet> + Send + Sync>;
pub type WeightFn = Arc<dyn Fn(usize, &[CJet]) -> Result<Jet> + Send + Sync>;
pub type RealMatrixFn = Arc<dyn Fn(usize, &[Jet]) -> Result<Vec<Jet>> + Send + Sync>;

/// Holomorphic coordinates from interleaved real coordinate jets.
pub fn complex_coords(x: &[Jet]) -> Vec<CJet> {
    x.chunks(2).map(|p| CJet::new(p[0].clone(), p[1].clone())).collect()
}

/// Real components of `Σ a_k dz_k`: (Re θ, Im θ) on (∂x_k, ∂y_k).
pub fn real_parts(a: &[CJet]) -> (Vec<Jet>, Vec<Jet>) {
    let mut re = Vec::with_capacity(2 * a.len());
    let mut im = Vec::with_capacity(2 * a.len());
    for c in a {
        re.push(c.re.clone());
        re.push(-&c.im);
        im.push(c.im.clone());
        im.push(c.re.clone());
    }
    (re, im)
}

/// Local contact forms θ_i = Σ a_k dz_k with their line-bundle cocycle.
pub struct HolomorphicContactAtlas {
    pub base: Arc<ChartedManifold>,
    pub j: ComplexStructureField,
    pub n: usize,
    theta: ComplexCoeffFn,
    cocycle: CocycleFn,
}

impl HolomorphicContactAtlas {
    pub fn new(base: Arc<ChartedManifold>, n: usize, theta: ComplexCoeffFn, cocycle: CocycleFn) -> HolomorphicContactAtlas {
        assert_eq!(base.dim, 2 * (2 * n + 1));
        let j = ComplexStructureField::standard(base.clone());
        HolomorphicContactAtlas { base, j, n, theta, cocycle }
    }

    pub fn real_dim(&self) -> usize {
        self.base.dim
    }

    pub fn theta_at(&self, chart: usize, z: &[CJet]) -> Result<Vec<CJet>> {
        (self.theta)(chart, z)
    }

    /// f_ij at a point given in chart i coordinates.
    pub fn cocycle_at(&self, i: usize, j: usize, z: &[CJet]) -> Result<CJet> {
        (self.cocycle)(i, j, z)
    }

    /// Same atlas with the cocycle on one ordered overlap multiplied by `factor`.
    pub fn with_scaled_cocycle(&self, i: usize, j: usize, factor: f64) -> HolomorphicContactAtlas {
        let old = self.cocycle.clone();
        HolomorphicContactAtlas {
            base: self.base.clone(),
            j: self.j.clone(),
            n: self.n,
            theta: self.theta.clone(),
            cocycle: Arc::new(move |a, b, z| {
                let f = old(a, b, z)?;
                Ok(if (a, b) == (i, j) { f.scale(factor) } else { f })
            }),
        }
    }
}

/// Per-chart weights h_i of the Hermitian metric on L = E⁻¹.
#[derive(Clone)]
pub struct HermitianWeight {
    h: WeightFn,
}

impl HermitianWeight {
    pub fn new(h: WeightFn) -> HermitianWeight {
        HermitianWeight { h }
    }

    pub fn h_at(&self, chart: usize, z: &[CJet]) -> Result<Jet> {
        (self.h)(chart, z)
    }
}

/// g_ij = f_ij⁻¹.
pub fn g_cocycle(atlas: &HolomorphicContactAtlas, i: usize, j: usize, z: &[CJet]) -> Result<CJet> {
    Ok(atlas.cocycle_at(i, j, z)?.recip())
}

/// ψ_ij with t_ij = g_ij/|g_ij| = e^{−iψ_ij}, i.e. ψ_ij = arg f_ij, taken on the
/// principal branch at the base point and continued smoothly in the jet.
pub fn transition_angle(atlas: &HolomorphicContactAtlas, i: usize, j: usize, z: &[CJet]) -> Result<Jet> {
    let f = atlas.cocycle_at(i, j, z)?;
    Ok(Jet::atan2(&f.im, &f.re, 0.0))
}

/// σ = ½ Σ (∂f/∂x_k dy_k − ∂f/∂y_k dx_k) for f = log h, one order below `logh`.
pub fn sigma_components(logh: &Jet, m: usize) -> Vec<Jet> {
    let mut s = Vec::with_capacity(m);
    for k in 0..m / 2 {
        s.push(logh.partial(2 * k + 1).scale(-0.5));
        s.push(logh.partial(2 * k).scale(0.5));
    }
    s
}

/// (dα)_ij = ∂_i α_j − ∂_j α_i for a 1-form given one order higher.
fn d_one_form(a: &[Jet], m: usize) -> Vec<Jet> {
    let tab = table(a[0].nvars(), a[0].order() - 1);
    let mut out = vec![Jet::zero(tab); m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = &a[j].partial(i) - &a[i].partial(j);
            out[j * m + i] = -&v;
            out[i * m + j] = v;
        }
    }
    out
}

fn wedge11(a: &[Jet], b: &[Jet], m: usize) -> Vec<Jet> {
    let tab = a[0].table();
    let mut out = vec![Jet::zero(tab); m * m];
    for i in 0..m {
        for j in (i + 1)..m {
            let v = &(&a[i] * &b[j]) - &(&a[j] * &b[i]);
            out[j * m + i] = -&v;
            out[i * m + j] = v;
        }
    }
    out
}

fn truncate_all(v: &[Jet], order: usize) -> Vec<Jet> {
    v.iter().map(|c| c.truncate(order)).collect()
}

/// How far along the construction chain to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Omega,
    Vertical,
    Metric,
}

/// All pointwise data at one point, as jets one order below the input.
#[derive(Clone, Debug)]
pub struct Frame {
    pub h: Jet,
    pub u: Vec<Jet>,
    pub v: Vec<Jet>,
    pub sigma: Vec<Jet>,
    pub g_hat: Vec<Jet>,
    pub h_hat: Vec<Jet>,
    pub a: Vec<Jet>,
    pub b: Vec<Jet>,
    pub g_z: Vec<Jet>,
    pub g_end: Vec<Jet>,
    pub h_end: Vec<Jet>,
}

/// Singular values of a dense square matrix of values, largest first.
pub fn singular_values(vals: &[f64], m: usize) -> Vec<f64> {
    let mat = DMatrix::from_row_slice(m, m, vals);
    let mut s: Vec<f64> = mat.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Relative threshold separating the rank-2 kernel of Ĝ.
pub const NULLSPACE_TOL: f64 = 1e-6;

/// Evaluates the whole construction chain for one atlas and weight.
#[derive(Clone)]
pub struct ContactEngine {
    pub atlas: Arc<HolomorphicContactAtlas>,
    pub weight: HermitianWeight,
    /// J-hermitian reference metric used to normalize Ĝ on the horizontal space.
    pub reference: Option<RealMatrixFn>,
}

impl ContactEngine {
    pub fn new(atlas: Arc<HolomorphicContactAtlas>, weight: HermitianWeight, reference: Option<RealMatrixFn>) -> ContactEngine {
        ContactEngine { atlas, weight, reference }
    }

    pub fn dim(&self) -> usize {
        self.atlas.real_dim()
    }

    /// Pointwise data from coordinate jets `x` (order ≥ 1); results have order one lower.
    pub fn frame(&self, chart: usize, x: &[Jet], stage: Stage) -> Result<Frame> {
        let m = self.dim();
        let k1 = x[0].order();
        assert!(k1 >= 1, "frame needs coordinate jets of order at least 1");
        let k = k1 - 1;
        let z = complex_coords(&x[..m]);
        let a = self.atlas.theta_at(chart, &z)?;
        let h = self.weight.h_at(chart, &z)?;
        if !(h.value() > 0.0) {
            return Err(GeomError::InvalidWeight(h.value()));
        }
        let s = h.sqrt().recip();
        let (re, im) = real_parts(&a);
        let u1: Vec<Jet> = re.iter().map(|c| c * &s).collect();
        let v1: Vec<Jet> = im.iter().map(|c| -(c * &s)).collect();
        let sigma = sigma_components(&h.ln(), m);
        let u = truncate_all(&u1, k);
        let v = truncate_all(&v1, k);
        let du = d_one_form(&u1, m);
        let dv = d_one_form(&v1, m);
        let sv = wedge11(&sigma, &v, m);
        let su = wedge11(&sigma, &u, m);
        let g_hat: Vec<Jet> = du.iter().zip(&sv).map(|(p, q)| p - q).collect();
        let h_hat: Vec<Jet> = dv.iter().zip(&su).map(|(p, q)| p + q).collect();
        let mut f = Frame {
            h: h.truncate(k),
            u,
            v,
            sigma,
            g_hat,
            h_hat,
            a: Vec::new(),
            b: Vec::new(),
            g_z: Vec::new(),
            g_end: Vec::new(),
            h_end: Vec::new(),
        };
        if stage == Stage::Omega {
            return Ok(f);
        }
        self.vertical(&mut f, m)?;
        if stage == Stage::Vertical {
            return Ok(f);
        }
        let xk = truncate_all(&x[..m], k);
        self.metric(&mut f, chart, &xk, m)?;
        Ok(f)
    }

    fn vertical(&self, f: &mut Frame, m: usize) -> Result<()> {
        let vals: Vec<f64> = f.g_hat.iter().map(Jet::value).collect();
        let sv = singular_values(&vals, m);
        let top = sv[0].max(f64::MIN_POSITIVE);
        if sv[m - 3] <= NULLSPACE_TOL * top || sv[m - 2] > NULLSPACE_TOL * top {
            return Err(GeomError::DegenerateVerticalDistribution(sv));
        }
        // A, B solve (ĜᵀĜ + uuᵀ + vvᵀ) X = u, v; on ker Ĝ this is exactly the dual basis.
        let g = JMat::from_vec(m, m, f.g_hat.clone());
        let mut mm = g.transpose().mul(&g);
        for i in 0..m {
            for j in 0..m {
                let t = &(&f.u[i] * &f.u[j]) + &(&f.v[i] * &f.v[j]);
                *mm.at_mut(i, j) += &t;
            }
        }
        let mut rhs = JMat::zeros(m, 2, g.table());
        for i in 0..m {
            rhs.set(i, 0, f.u[i].clone());
            rhs.set(i, 1, f.v[i].clone());
        }
        let sol = mm.solve(&rhs).map_err(|_| GeomError::DegenerateVerticalDistribution(sv.clone()))?;
        f.a = (0..m).map(|i| sol.at(i, 0).clone()).collect();
        f.b = (0..m).map(|i| sol.at(i, 1).clone()).collect();
        Ok(())
    }

    fn reference_metric(&self, chart: usize, x: &[Jet], m: usize) -> Result<JMat> {
        let tab = x[0].table();
        match &self.reference {
            Some(r) => Ok(JMat::from_vec(m, m, r(chart, x)?)),
            None => Ok(JMat::identity(m, tab)),
        }
    }

    fn metric(&self, f: &mut Frame, chart: usize, x: &[Jet], m: usize) -> Result<()> {
        let tab = f.u[0].table();
        let r = m - 2;
        // P = Id − A⊗u − B⊗v projects onto ℋ = ker u ∩ ker v along 𝒱
        let mut p = JMat::identity(m, tab);
        for i in 0..m {
            for j in 0..m {
                let t = &(&f.a[i] * &f.u[j]) + &(&f.b[i] * &f.v[j]);
                *p.at_mut(i, j) -= &t;
            }
        }
        let cols = pick_columns(&p.values(), m, r);
        let mut bm = JMat::zeros(m, r, tab);
        for (c, &col) in cols.iter().enumerate() {
            for i in 0..m {
                bm.set(i, c, p.at(i, col).clone());
            }
        }
        let bt = bm.transpose();
        let g0 = self.reference_metric(chart, x, m)?;
        let g0b = bt.mul(&g0).mul(&bm);
        let ghat = JMat::from_vec(m, m, f.g_hat.clone());
        let gb = bt.mul(&ghat).mul(&bm);
        let kmat = g0b.solve(&gb).map_err(|_| GeomError::DegenerateHorizontal)?;
        let minus_k2 = kmat.mul(&kmat).scale(-1.0);
        let root = minus_k2.sqrt_positive().map_err(|_| GeomError::DegenerateHorizontal)?;
        let gh = g0b.mul(&root);
        let gh = gh.add(&gh.transpose()).scale(0.5);
        // L maps X to the coordinates of PX in the basis bm
        let l = bt.mul(&bm).solve(&bt.mul(&p))?;
        let mut gz = l.transpose().mul(&gh).mul(&l);
        for i in 0..m {
            for j in 0..m {
                let t = &(&f.u[i] * &f.u[j]) + &(&f.v[i] * &f.v[j]);
                *gz.at_mut(i, j) += &t;
            }
        }
        // Ĝ(X,Y) = g(GX,Y)  ⇔  G = g⁻¹Ĝᵀ = −g⁻¹Ĝ
        let g_end = gz.solve(&ghat)?.scale(-1.0);
        let jm = JMat::constant(m, m, &standard_j(m), tab);
        let h_end = g_end.mul(&jm);
        f.g_z = gz.data;
        f.g_end = g_end.data;
        f.h_end = h_end.data;
        Ok(())
    }

    /// A field on the base whose components are picked out of the frame.
    pub fn base_field<F>(&self, valence: Valence, stage: Stage, pick: F) -> TensorField
    where
        F: Fn(&Frame) -> Vec<Jet> + Send + Sync + 'static,
    {
        let eng = self.clone();
        let m = self.dim();
        TensorField::new(self.atlas.base.clone(), valence, move |p, order| {
            let x = Jet::point(&p.coords, order + 1);
            let f = eng.frame(p.chart, &x, stage)?;
            Ok(Tensor::from_data(m, valence, pick(&f)))
        })
    }
}

/// Greedy column selection (on values) giving a well-conditioned basis of the column space.
fn pick_columns(vals: &[f64], m: usize, r: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(r);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    for _ in 0..r {
        let mut best = (0, -1.0);
        let mut best_vec = Vec::new();
        for c in 0..m {
            if chosen.contains(&c) {
                continue;
            }
            let mut w: Vec<f64> = (0..m).map(|i| vals[i * m + c]).collect();
            for e in &basis {
                let d: f64 = w.iter().zip(e).map(|(a, b)| a * b).sum();
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= d * ei;
                }
            }
            let nrm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nrm > best.1 {
                best = (c, nrm);
                best_vec = w;
            }
        }
        chosen.push(best.0);
        let nrm = best.1.max(f64::MIN_POSITIVE);
        basis.push(best_vec.iter().map(|a| a / nrm).collect());
    }
    chosen
}

/// Sample points used by atlas-level checks.
#[derive(Clone, Debug, Default)]
pub struct AtlasSamples {
    pub points: Vec<PointRef>,
    /// (point in chart i, target chart j)
    pub overlaps: Vec<(PointRef, usize)>,
    /// (point in chart i, j, k) lying in all three charts
    pub triples: Vec<(PointRef, usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct AtlasReport {
    /// max |θ_i − f_ij θ_j| over overlap samples
    pub cocycle: f64,
    /// max |f_ij f_jk − f_ik| over triple samples
    pub cocycle_identity: f64,
    /// max |h_j − h_i |g_ij|²| over overlap samples
    pub weight: f64,
    /// min |coefficient of θ_i∧(dθ_i)^n|
    pub min_volume: f64,
    pub points: usize,
}

fn cvals(z: &[CJet]) -> Vec<(f64, f64)> {
    z.iter().map(|c| (c.re.value(), c.im.value())).collect()
}

/// Holomorphic coefficient of θ∧(dθ)^n against dz_0∧…∧dz_{2n} at `p`.
pub fn contact_volume(atlas: &HolomorphicContactAtlas, p: &PointRef) -> Result<(f64, f64)> {
    atlas.base.check(p)?;
    let x = Jet::point(&p.coords, 1);
    let a = atlas.theta_at(p.chart, &complex_coords(&x))?;
    let c = a.len();
    // holomorphic coefficients: ∂a_l/∂z_k = ∂a_l/∂x_k
    let mut dth = vec![(0.0, 0.0); c * c];
    for k in 0..c {
        for l in 0..c {
            let re = a[l].re.d1(2 * k) - a[k].re.d1(2 * l);
            let im = a[l].im.d1(2 * k) - a[k].im.d1(2 * l);
            dth[k * c + l] = (re, im);
        }
    }
    Ok(complex_top_coefficient(&cvals(&a), &dth, c))
}

/// Coefficient of η∧ν^m against the complex volume in complex dimension 2m+1
/// (m!·Pf of the bordered matrix).
pub fn complex_top_coefficient(eta: &[(f64, f64)], nu: &[(f64, f64)], dim: usize) -> (f64, f64) {
    let nb = dim + 1;
    let mut b = vec![(0.0, 0.0); nb * nb];
    for i in 0..dim {
        b[i + 1] = eta[i];
        b[(i + 1) * nb] = (-eta[i].0, -eta[i].1);
        for j in 0..dim {
            b[(i + 1) * nb + j + 1] = nu[i * dim + j];
        }
    }
    let fact: f64 = (1..=(dim - 1) / 2).map(|v| v as f64).product();
    let (re, im) = pfaffian_complex(&b, nb);
    (fact * re, fact * im)
}

fn cabs(z: (f64, f64)) -> f64 {
    z.0.hypot(z.1)
}

/// Components of θ_j (given at the image point) pulled back to chart i, as (Re, Im) forms.
fn pulled_theta(atlas: &HolomorphicContactAtlas, p: &PointRef, to: usize) -> Result<(Vec<f64>, Vec<f64>, PointRef)> {
    let base = &atlas.base;
    let m = base.dim;
    let q = base.transition(p, to)?;
    let ov = base.overlap(p.chart, to).ok_or(GeomError::UnknownChart(to))?;
    let (_, jac) = ov.forward.jacobian(&p.coords);
    let aj = atlas.theta_at(to, &complex_coords(&Jet::point(&q.coords, 0)))?;
    let (re, im) = real_parts(&aj);
    let pull = |w: &[Jet]| -> Vec<f64> { (0..m).map(|c| (0..m).map(|r| jac[r * m + c] * w[r].value()).sum()).collect() };
    Ok((pull(&re), pull(&im), q))
}

/// max |θ_i − f_ij θ_j| over components at `p` (chart i), θ_j pulled back to chart i.
pub fn cocycle_defect(atlas: &HolomorphicContactAtlas, p: &PointRef, to: usize) -> Result<f64> {
    let m = atlas.real_dim();
    let zi = complex_coords(&Jet::point(&p.coords, 0));
    let (re_i, im_i) = real_parts(&atlas.theta_at(p.chart, &zi)?);
    let (re_j, im_j, _) = pulled_theta(atlas, p, to)?;
    let f = atlas.cocycle_at(p.chart, to, &zi)?;
    let (fr, fi) = (f.re.value(), f.im.value());
    let mut worst: f64 = 0.0;
    for c in 0..m {
        let r = fr * re_j[c] - fi * im_j[c];
        let i = fr * im_j[c] + fi * re_j[c];
        worst = worst.max((re_i[c].value() - r).abs()).max((im_i[c].value() - i).abs());
    }
    Ok(worst)
}

pub fn validate_atlas(atlas: &HolomorphicContactAtlas, w: &HermitianWeight, samples: &AtlasSamples) -> Result<AtlasReport> {
    let mut cocycle: f64 = 0.0;
    let mut weight: f64 = 0.0;
    for (p, to) in &samples.overlaps {
        let zi = complex_coords(&Jet::point(&p.coords, 0));
        cocycle = cocycle.max(cocycle_defect(atlas, p, *to)?);
        let q = atlas.base.transition(p, *to)?;
        let f = atlas.cocycle_at(p.chart, *to, &zi)?;
        let hi = w.h_at(p.chart, &zi)?.value();
        let hj = w.h_at(*to, &complex_coords(&Jet::point(&q.coords, 0)))?.value();
        let g = f.recip().norm_sqr().value();
        weight = weight.max((hj - hi * g).abs() / hj.abs().max(1.0));
    }
    let mut ident: f64 = 0.0;
    for (p, j, k) in &samples.triples {
        let zi = complex_coords(&Jet::point(&p.coords, 0));
        let q = atlas.base.transition(p, *j)?;
        let zj = complex_coords(&Jet::point(&q.coords, 0));
        let fij = atlas.cocycle_at(p.chart, *j, &zi)?;
        let fjk = atlas.cocycle_at(*j, *k, &zj)?;
        let fik = atlas.cocycle_at(p.chart, *k, &zi)?;
        let prod = &fij * &fjk;
        ident = ident.max(cabs((prod.re.value() - fik.re.value(), prod.im.value() - fik.im.value())));
    }
    let mut min_volume = f64::INFINITY;
    for p in &samples.points {
        min_volume = min_volume.min(cabs(contact_volume(atlas, p)?));
    }
    if samples.points.is_empty() {
        min_volume = 0.0;
    }
    Ok(AtlasReport {
        cocycle,
        cocycle_identity: ident,
        weight,
        min_volume,
        points: samples.points.len() + samples.overlaps.len() + samples.triples.len(),
    })
}

/// u_i, v_i with ϖ_i = θ_i/√h_i = u_i − i v_i.
#[derive(Clone, Debug)]
pub struct NormalizedContactData {
    pub u: TensorField,
    pub v: TensorField,
}

impl NormalizedContactData {
    /// (Re ϖ, Im ϖ) = (u, −v).
    pub fn varpi(&self) -> (TensorField, TensorField) {
        (self.u.clone(), self.v.scale(-1.0))
    }
}

pub fn normalize(engine: &ContactEngine, samples: &[PointRef]) -> Result<NormalizedContactData> {
    for p in samples {
        let z = complex_coords(&Jet::point(&p.coords, 0));
        let h = engine.weight.h_at(p.chart, &z)?.value();
        if !(h > 0.0) {
            return Err(GeomError::InvalidWeight(h));
        }
    }
    Ok(NormalizedContactData {
        u: engine.base_field(Valence::form(1), Stage::Omega, |f| f.u.clone()),
        v: engine.base_field(Valence::form(1), Stage::Omega, |f| f.v.clone()),
    })
}

/// σ_i from the weight alone.
pub fn gauge(base: Arc<ChartedManifold>, w: &HermitianWeight) -> TensorField {
    let w = w.clone();
    let m = base.dim;
    TensorField::new(base, Valence::form(1), move |p, order| {
        let x = Jet::point(&p.coords, order + 1);
        let h = w.h_at(p.chart, &complex_coords(&x))?;
        if !(h.value() > 0.0) {
            return Err(GeomError::InvalidWeight(h.value()));
        }
        Ok(Tensor::from_data(m, Valence::form(1), sigma_components(&h.ln(), m)))
    })
}

/// σ_i, and Ω_i = dϖ_i − iσ_i∧ϖ_i through Ĝ = Re Ω, Ĥ = −Im Ω.
#[derive(Clone, Debug)]
pub struct OmegaStructure {
    pub sigma: TensorField,
    pub g_hat: TensorField,
    pub h_hat: TensorField,
}

impl OmegaStructure {
    /// (Re Ω, Im Ω).
    pub fn omega(&self) -> (TensorField, TensorField) {
        (self.g_hat.clone(), self.h_hat.scale(-1.0))
    }
}

pub fn omega_structure(engine: &ContactEngine) -> OmegaStructure {
    OmegaStructure {
        sigma: engine.base_field(Valence::form(1), Stage::Omega, |f| f.sigma.clone()),
        g_hat: engine.base_field(Valence::form(2), Stage::Omega, |f| f.g_hat.clone()),
        h_hat: engine.base_field(Valence::form(2), Stage::Omega, |f| f.h_hat.clone()),
    }
}

/// The vertical frame: ker Ĝ = span(A, B) with u(A) = v(B) = 1, u(B) = v(A) = 0.
#[derive(Clone, Debug)]
pub struct VerticalFrame {
    pub a: TensorField,
    pub b: TensorField,
}

/// Fails with DegenerateVerticalDistribution at the first sample where ker Ĝ is not 2-dimensional.
pub fn vertical_frame(engine: &ContactEngine, samples: &[PointRef]) -> Result<VerticalFrame> {
    for p in samples {
        engine.frame(p.chart, &Jet::point(&p.coords, 1), Stage::Vertical)?;
    }
    Ok(VerticalFrame {
        a: engine.base_field(Valence::VECTOR, Stage::Vertical, |f| f.a.clone()),
        b: engine.base_field(Valence::VECTOR, Stage::Vertical, |f| f.b.clone()),
    })
}

/// g_Z with G = g_Z⁻¹Ĝ (index raised so that Ĝ(X,Y) = g_Z(GX,Y)) and H = G∘J.
#[derive(Clone, Debug)]
pub struct AssociatedMetricData {
    pub g_z: MetricField,
    pub g: TensorField,
    pub h: TensorField,
}

/// Builds g_Z = u² + v² + g_ℋ where, on ℋ, g_ℋ = g₀|K| for K = g₀⁻¹Ĝ|ℋ, the
/// polar part of Ĝ relative to the reference metric g₀. Then G|ℋ = |K|⁻¹K
/// squares to −Id, and g_Z is unchanged under Ĝ ↦ cos ψ Ĝ − sin ψ Ĥ, so the
/// chart-wise constructions glue.
pub fn associated_metric(engine: &ContactEngine, samples: &[PointRef]) -> Result<AssociatedMetricData> {
    for p in samples {
        engine.frame(p.chart, &Jet::point(&p.coords, 1), Stage::Metric)?;
    }
    let g_z = MetricField::new(engine.base_field(Valence::form(2), Stage::Metric, |f| f.g_z.clone()))?;
    Ok(AssociatedMetricData {
        g_z,
        g: engine.base_field(Valence::ENDO, Stage::Metric, |f| f.g_end.clone()),
        h: engine.base_field(Valence::ENDO, Stage::Metric, |f| f.h_end.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::manifold::Chart;

    /// θ = dz0 + z1 dz2 on C³ with h = e^{c|z|²} (c = 0 gives the flat weight).
    fn flat_engine(c: f64) -> ContactEngine {
        let base = Arc::new(ChartedManifold::single_chart(6, Chart::whole("C3")));
        let theta: ComplexCoeffFn = Arc::new(|_c, z| {
            let t = z[0].table();
            Ok(vec![CJet::constant(t, 1.0, 0.0), CJet::zero(t), z[1].clone()])
        });
        let cocycle: CocycleFn = Arc::new(|_i, _j, z| Ok(CJet::constant(z[0].table(), 1.0, 0.0)));
        let atlas = Arc::new(HolomorphicContactAtlas::new(base, 1, theta, cocycle));
        let w = HermitianWeight::new(Arc::new(move |_c, z| {
            let mut r = Jet::zero(z[0].table());
            for zk in z {
                r += &zk.norm_sqr();
            }
            Ok(r.scale(c).exp())
        }));
        ContactEngine::new(atlas, w, None)
    }

    #[test]
    fn flat_origin_values() {
        let e = flat_engine(0.0);
        let f = e.frame(0, &Jet::point(&[0.0; 6], 1), Stage::Metric).unwrap();
        let val = |v: &[Jet]| v.iter().map(Jet::value).collect::<Vec<_>>();
        assert_eq!(val(&f.u), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(val(&f.v), vec![0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let a = val(&f.a);
        let b = val(&f.b);
        assert!((a[0] - 1.0).abs() < 1e-14 && a[1..].iter().all(|x| x.abs() < 1e-14));
        assert!((b[1] + 1.0).abs() < 1e-14 && b[0].abs() < 1e-14 && b[2..].iter().all(|x| x.abs() < 1e-14));
        // g_Z is Euclidean at the origin
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((f.g_z[i * 6 + j].value() - want).abs() < 1e-12, "{i} {j}");
            }
        }
    }

    #[test]
    fn gaussian_weight_sigma() {
        // h = e^{|z|²}: f = |z|², σ = ½(2x dy − 2y dx) per complex coordinate
        let e = flat_engine(1.0);
        let x = [0.3, -0.2, 0.1, 0.5, -0.4, 0.7];
        let f = e.frame(0, &Jet::point(&x, 1), Stage::Omega).unwrap();
        for k in 0..3 {
            assert!((f.sigma[2 * k].value() + x[2 * k + 1]).abs() < 1e-14);
            assert!((f.sigma[2 * k + 1].value() - x[2 * k]).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_contact_volume_is_one() {
        let e = flat_engine(0.0);
        let v = contact_volume(&e.atlas, &PointRef::new(0, vec![0.2, 0.1, -0.3, 0.4, 0.5, 0.6])).unwrap();
        assert!((v.0 - 1.0).abs() < 1e-15 && v.1.abs() < 1e-15);
    }

    #[test]
    fn relation_one_on_curved_weight() {
        let e = flat_engine(0.3);
        let x = [0.3, -0.2, 0.1, 0.5, -0.4, 0.7];
        let f = e.frame(0, &Jet::point(&x, 1), Stage::Metric).unwrap();
        let g: Vec<f64> = f.g_end.iter().map(Jet::value).collect();
        let (u, v, a, b) = (
            f.u.iter().map(Jet::value).collect::<Vec<_>>(),
            f.v.iter().map(Jet::value).collect::<Vec<_>>(),
            f.a.iter().map(Jet::value).collect::<Vec<_>>(),
            f.b.iter().map(Jet::value).collect::<Vec<_>>(),
        );
        for i in 0..6 {
            for j in 0..6 {
                let gg: f64 = (0..6).map(|k| g[i * 6 + k] * g[k * 6 + j]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                let r = gg + id - a[i] * u[j] - b[i] * v[j];
                assert!(r.abs() < 1e-10, "{i} {j} {r}");
            }
        }
    }

    #[test]
    fn scaled_cocycle_only_touches_one_pair() {
        let e = flat_engine(0.0);
        let bad = e.atlas.with_scaled_cocycle(0, 1, 2.0);
        let z = complex_coords(&Jet::point(&[0.0; 6], 0));
        assert_eq!(bad.cocycle_at(0, 1, &z).unwrap().re.value(), 2.0);
        assert_eq!(bad.cocycle_at(1, 0, &z).unwrap().re.value(), 1.0);
    }
}
