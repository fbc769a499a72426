//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function of `n`
//! chart coordinates around a base point, up to a fixed total degree. Every
//! arithmetic operation propagates all coefficients exactly (up to round-off),
//! so derivatives of any stored order are available without differencing.
//!
//! Coefficients are kept in graded order: degree 0, then degree 1, and so on,
//! with a fixed ordering inside each degree. That ordering does not depend on
//! the truncation order, so a lower-order jet is a prefix of a higher-order one.

use std::collections::HashMap;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::{Mutex, OnceLock};

/// Monomial bookkeeping for `nvars` variables truncated at total degree `order`.
#[derive(Debug)]
pub struct Table {
    pub nvars: usize,
    pub order: usize,
    exps: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// (a, b, a+b) for every pair whose product survives truncation.
    mul: Vec<(u32, u32, u32)>,
    /// For monomial k > 0: (index of k − e_j, j) for its first nonzero j.
    parent: Vec<(u32, u32)>,
    /// partials[j] lists (src, dst, factor) mapping into the order−1 table.
    partials: Vec<Vec<(u32, u32, f64)>>,
}

fn graded_monomials(nvars: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![0u8; nvars]];
    let mut prev: Vec<Vec<u8>> = vec![vec![0u8; nvars]];
    for _deg in 1..=order {
        let mut next: Vec<Vec<u8>> = Vec::new();
        // Extend each monomial of the previous degree by one variable at or
        // after its last used variable; this enumerates each monomial once.
        for m in &prev {
            let last = m.iter().rposition(|&e| e > 0).unwrap_or(0);
            for j in last..nvars {
                let mut e = m.clone();
                e[j] += 1;
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        prev = next;
    }
    out
}

fn degree(e: &[u8]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

impl Table {
    fn build(nvars: usize, order: usize) -> Table {
        let exps = graded_monomials(nvars, order);
        let index: HashMap<Vec<u8>, usize> =
            exps.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mut mul = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            let da = degree(ea);
            for (b, eb) in exps.iter().enumerate() {
                if da + degree(eb) > order {
                    continue;
                }
                let s: Vec<u8> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                mul.push((a as u32, b as u32, index[&s] as u32));
            }
        }
        let mut parent = vec![(0u32, 0u32); exps.len()];
        for (k, e) in exps.iter().enumerate().skip(1) {
            let j = e.iter().position(|&x| x > 0).unwrap();
            let mut p = e.clone();
            p[j] -= 1;
            parent[k] = (index[&p] as u32, j as u32);
        }
        let mut partials = Vec::new();
        if order > 0 {
            for j in 0..nvars {
                let mut v = Vec::new();
                for (k, e) in exps.iter().enumerate() {
                    if e[j] == 0 {
                        continue;
                    }
                    let mut p = e.clone();
                    p[j] -= 1;
                    // p has degree ≤ order−1 and the same graded position as in
                    // the lower table.
                    v.push((k as u32, index[&p] as u32, e[j] as f64));
                }
                partials.push(v);
            }
        }
        Table { nvars, order, exps, index, mul, parent, partials }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self, k: usize) -> &[u8] {
        &self.exps[k]
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Number of monomials of total degree ≤ `d` (a prefix length).
    pub fn prefix_len(&self, d: usize) -> usize {
        self.exps.iter().take_while(|e| degree(e) <= d).count()
    }
}

/// Shared, leaked table for (nvars, order). Tables are tiny and few.
pub fn table(nvars: usize, order: usize) -> &'static Table {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static Table>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&(nvars, order)) {
        return t;
    }
    let built: &'static Table = Box::leak(Box::new(Table::build(nvars, order)));
    let mut guard = cache.lock().unwrap();
    guard.entry((nvars, order)).or_insert(built)
}

/// Taylor jet of a scalar function around a base point.
#[derive(Clone, Debug)]
pub struct Jet {
    tab: &'static Table,
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(tab: &'static Table, v: f64) -> Jet {
        let mut c = vec![0.0; tab.len()];
        c[0] = v;
        Jet { tab, c }
    }

    pub fn zero(tab: &'static Table) -> Jet {
        Jet { tab, c: vec![0.0; tab.len()] }
    }

    /// The coordinate function `x_i` expanded around `x0`.
    pub fn var(tab: &'static Table, i: usize, x0: f64) -> Jet {
        let mut j = Jet::constant(tab, x0);
        if tab.order > 0 {
            let mut e = vec![0u8; tab.nvars];
            e[i] = 1;
            j.c[tab.index[&e]] = 1.0;
        }
        j
    }

    /// Coordinate jets for a whole point.
    pub fn point(x: &[f64], order: usize) -> Vec<Jet> {
        let tab = table(x.len(), order);
        x.iter().enumerate().map(|(i, &v)| Jet::var(tab, i, v)).collect()
    }

    pub fn from_coeffs(tab: &'static Table, c: Vec<f64>) -> Jet {
        assert_eq!(c.len(), tab.len());
        Jet { tab, c }
    }

    pub fn table(&self) -> &'static Table {
        self.tab
    }

    pub fn order(&self) -> usize {
        self.tab.order
    }

    pub fn nvars(&self) -> usize {
        self.tab.nvars
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn set_value(&mut self, v: f64) {
        self.c[0] = v;
    }

    /// First partial derivative at the base point.
    pub fn d1(&self, i: usize) -> f64 {
        if self.tab.order == 0 {
            return 0.0;
        }
        let mut e = vec![0u8; self.tab.nvars];
        e[i] = 1;
        self.c[self.tab.index[&e]]
    }

    /// Second partial derivative at the base point.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        if self.tab.order < 2 {
            return 0.0;
        }
        let mut e = vec![0u8; self.tab.nvars];
        e[i] += 1;
        e[j] += 1;
        let k = self.tab.index[&e];
        if i == j {
            2.0 * self.c[k]
        } else {
            self.c[k]
        }
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.tab.nvars).map(|i| self.d1(i)).collect()
    }

    /// The partial derivative ∂_j as a jet of one lower order.
    pub fn partial(&self, j: usize) -> Jet {
        assert!(self.tab.order > 0, "partial of an order-0 jet");
        let lower = table(self.tab.nvars, self.tab.order - 1);
        let mut c = vec![0.0; lower.len()];
        for &(src, dst, f) in &self.tab.partials[j] {
            c[dst as usize] += f * self.c[src as usize];
        }
        Jet { tab: lower, c }
    }

    /// Drop coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.tab.order);
        let tab = table(self.tab.nvars, order);
        Jet { tab, c: self.c[..tab.len()].to_vec() }
    }

    /// Re-express in a larger variable set: variable `i` of `self` becomes
    /// variable `map[i]` of the target. Unmapped target variables are absent.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Jet {
        let tab = table(nvars, self.tab.order);
        let mut c = vec![0.0; tab.len()];
        let mut e = vec![0u8; nvars];
        for (k, ek) in self.tab.exps.iter().enumerate() {
            if self.c[k] == 0.0 {
                continue;
            }
            e.iter_mut().for_each(|x| *x = 0);
            for (i, &p) in ek.iter().enumerate() {
                e[map[i]] += p;
            }
            c[tab.index[&e]] += self.c[k];
        }
        Jet { tab, c }
    }

    /// Substitute jets for the variables: returns P(y0 + (Y − y0)) where P is
    /// `self` expanded around y0 and `inner[i]` are jets with values y0_i.
    pub fn compose(&self, inner: &[Jet]) -> Jet {
        assert_eq!(inner.len(), self.tab.nvars);
        let tab = inner[0].tab;
        let deltas: Vec<Jet> = inner.iter().map(|y| y - y.value()).collect();
        let mut powers: Vec<Jet> = Vec::with_capacity(self.tab.len());
        powers.push(Jet::constant(tab, 1.0));
        let mut acc = Jet::constant(tab, self.c[0]);
        for k in 1..self.tab.len() {
            let (p, j) = self.tab.parent[k];
            let m = &powers[p as usize] * &deltas[j as usize];
            if self.c[k] != 0.0 {
                acc.axpy(self.c[k], &m);
            }
            powers.push(m);
        }
        acc
    }

    /// self += a * x
    pub fn axpy(&mut self, a: f64, x: &Jet) {
        debug_assert!(std::ptr::eq(self.tab, x.tab));
        for (s, v) in self.c.iter_mut().zip(&x.c) {
            *s += a * v;
        }
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet { tab: self.tab, c: self.c.iter().map(|v| a * v).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Apply a univariate function given its Taylor coefficients
    /// `f(a) , f'(a), f''(a)/2, ...` at the current value `a`.
    fn apply_series(&self, series: &[f64]) -> Jet {
        let k = self.tab.order;
        let delta = self - self.value();
        let mut r = Jet::constant(self.tab, series[k]);
        for m in (0..k).rev() {
            r = &r * &delta;
            r.c[0] += series[m];
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let k = self.tab.order;
        // 1/(a+δ) = Σ (−1)^m δ^m / a^{m+1}
        let series: Vec<f64> = (0..=k).map(|m| (-1f64).powi(m as i32) / a.powi(m as i32 + 1)).collect();
        self.apply_series(&series)
    }

    pub fn sqrt(&self) -> Jet {
        let a = self.value();
        let k = self.tab.order;
        let mut series = Vec::with_capacity(k + 1);
        // binomial(1/2, m) a^{1/2 − m}
        let mut binom = 1.0;
        for m in 0..=k {
            series.push(binom * a.powf(0.5 - m as f64));
            binom *= (0.5 - m as f64) / (m as f64 + 1.0);
        }
        self.apply_series(&series)
    }

    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let k = self.tab.order;
        let mut series = Vec::with_capacity(k + 1);
        let mut binom = 1.0;
        for m in 0..=k {
            series.push(binom * a.powf(p - m as f64));
            binom *= (p - m as f64) / (m as f64 + 1.0);
        }
        self.apply_series(&series)
    }

    pub fn exp(&self) -> Jet {
        let a = self.value().exp();
        let k = self.tab.order;
        let mut series = Vec::with_capacity(k + 1);
        let mut fact = 1.0;
        for m in 0..=k {
            if m > 0 {
                fact *= m as f64;
            }
            series.push(a / fact);
        }
        self.apply_series(&series)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let k = self.tab.order;
        let mut series = vec![a.ln()];
        for m in 1..=k {
            series.push((-1f64).powi(m as i32 + 1) / (m as f64 * a.powi(m as i32)));
        }
        self.apply_series(&series)
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.apply_series(&trig_series(s, c, self.tab.order))
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        // cos(a+δ) = sin(a + π/2 + δ)
        self.apply_series(&trig_series(c, -s, self.tab.order))
    }

    /// Angle of the vector (x, y), continued smoothly from `atan2(y0, x0) + offset`.
    pub fn atan2(y: &Jet, x: &Jet, offset: f64) -> Jet {
        let (x0, y0) = (x.value(), y.value());
        let base = y0.atan2(x0) + offset;
        // atan2(y,x) − atan2(y0,x0) = atan(s), s = (x0 y − y0 x)/(x0 x + y0 y), s(0) = 0
        let num = &y.scale(x0) - &x.scale(y0);
        let den = &x.scale(x0) + &y.scale(y0);
        let s = &num * &den.recip();
        let k = s.tab.order;
        let mut series = vec![0.0; k + 1];
        for (m, v) in series.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = if (m / 2) % 2 == 0 { 1.0 / m as f64 } else { -1.0 / m as f64 };
            }
        }
        let mut r = s.apply_series(&series);
        r.c[0] += base;
        r
    }
}

fn trig_series(s: f64, c: f64, k: usize) -> Vec<f64> {
    // derivatives of sin at a: s, c, −s, −c, ...
    let cyc = [s, c, -s, -c];
    let mut fact = 1.0;
    (0..=k)
        .map(|m| {
            if m > 0 {
                fact *= m as f64;
            }
            cyc[m % 4] / fact
        })
        .collect()
}

fn same(a: &Jet, b: &Jet) {
    debug_assert!(
        std::ptr::eq(a.tab, b.tab),
        "jet tables differ: ({}, {}) vs ({}, {})",
        a.tab.nvars,
        a.tab.order,
        b.tab.nvars,
        b.tab.order
    );
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        same(self, o);
        Jet { tab: self.tab, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        same(self, o);
        Jet { tab: self.tab, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        same(self, o);
        let mut c = vec![0.0; self.tab.len()];
        if self.tab.order == 0 {
            c[0] = self.c[0] * o.c[0];
            return Jet { tab: self.tab, c };
        }
        for &(a, b, s) in &self.tab.mul {
            c[s as usize] += self.c[a as usize] * o.c[b as usize];
        }
        Jet { tab: self.tab, c }
    }
}

impl Div<&Jet> for &Jet {
    type Output = Jet;
    fn div(self, o: &Jet) -> Jet {
        self * &o.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, v: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += v;
        r
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, v: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] -= v;
        r
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, v: f64) -> Jet {
        self.scale(v)
    }
}

macro_rules! owned_binops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet { (&self).$m(&o) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet { (&self).$m(o) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet { self.$m(&o) }
        }
        impl $tr<f64> for Jet {
            type Output = Jet;
            fn $m(self, o: f64) -> Jet { (&self).$m(o) }
        }
    )*};
}
owned_binops!(Add add, Sub sub, Mul mul);

impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        &self / &o
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, o: &Jet) {
        same(self, o);
        for (s, v) in self.c.iter_mut().zip(&o.c) {
            *s += v;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, o: &Jet) {
        same(self, o);
        for (s, v) in self.c.iter_mut().zip(&o.c) {
            *s -= v;
        }
    }
}

impl MulAssign<f64> for Jet {
    fn mul_assign(&mut self, v: f64) {
        self.c.iter_mut().for_each(|s| *s *= v);
    }
}

/// Complex-valued jet as a pair of real jets.
#[derive(Clone, Debug)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> CJet {
        CJet { re, im }
    }

    pub fn real(re: Jet) -> CJet {
        let im = Jet::zero(re.table());
        CJet { re, im }
    }

    pub fn constant(tab: &'static Table, re: f64, im: f64) -> CJet {
        CJet { re: Jet::constant(tab, re), im: Jet::constant(tab, im) }
    }

    pub fn zero(tab: &'static Table) -> CJet {
        CJet::constant(tab, 0.0, 0.0)
    }

    pub fn table(&self) -> &'static Table {
        self.re.table()
    }

    pub fn conj(&self) -> CJet {
        CJet { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> Jet {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn recip(&self) -> CJet {
        let n = self.norm_sqr().recip();
        CJet { re: &self.re * &n, im: -(&self.im * &n) }
    }

    pub fn scale(&self, a: f64) -> CJet {
        CJet { re: self.re.scale(a), im: self.im.scale(a) }
    }

    /// Multiply by i.
    pub fn times_i(&self) -> CJet {
        CJet { re: -&self.im, im: self.re.clone() }
    }

    pub fn mul_real(&self, r: &Jet) -> CJet {
        CJet { re: &self.re * r, im: &self.im * r }
    }
}

impl Add<&CJet> for &CJet {
    type Output = CJet;
    fn add(self, o: &CJet) -> CJet {
        CJet { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub<&CJet> for &CJet {
    type Output = CJet;
    fn sub(self, o: &CJet) -> CJet {
        CJet { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul<&CJet> for &CJet {
    type Output = CJet;
    fn mul(self, o: &CJet) -> CJet {
        CJet {
            re: &(&self.re * &o.re) - &(&self.im * &o.im),
            im: &(&self.re * &o.im) + &(&self.im * &o.re),
        }
    }
}

impl Neg for &CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        CJet { re: -&self.re, im: -&self.im }
    }
}

impl Add<CJet> for CJet {
    type Output = CJet;
    fn add(self, o: CJet) -> CJet {
        &self + &o
    }
}

impl Sub<CJet> for CJet {
    type Output = CJet;
    fn sub(self, o: CJet) -> CJet {
        &self - &o
    }
}

impl Mul<CJet> for CJet {
    type Output = CJet;
    fn mul(self, o: CJet) -> CJet {
        &self * &o
    }
}
