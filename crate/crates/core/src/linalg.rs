//! Small dense matrices with jet entries, plus a few f64 helpers.
//!
//! Pivoting decisions are made on values only, so every routine is a fixed
//! algebraic formula near the base point and its jets differentiate exactly.

use crate::error::{GeomError, Result};
use crate::jet::{Jet, Table};

#[derive(Clone, Debug)]
pub struct JMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Jet>,
}

impl JMat {
    pub fn zeros(rows: usize, cols: usize, tab: &'static Table) -> JMat {
        JMat { rows, cols, data: vec![Jet::zero(tab); rows * cols] }
    }

    pub fn identity(n: usize, tab: &'static Table) -> JMat {
        let mut m = JMat::zeros(n, n, tab);
        for i in 0..n {
            m.data[i * n + i] = Jet::constant(tab, 1.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Jet>) -> JMat {
        assert_eq!(data.len(), rows * cols);
        JMat { rows, cols, data }
    }

    /// Constant matrix from f64 entries (row-major).
    pub fn constant(rows: usize, cols: usize, vals: &[f64], tab: &'static Table) -> JMat {
        JMat { rows, cols, data: vals.iter().map(|&v| Jet::constant(tab, v)).collect() }
    }

    pub fn table(&self) -> &'static Table {
        self.data[0].table()
    }

    pub fn at(&self, r: usize, c: usize) -> &Jet {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Jet {
        &mut self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Jet) {
        self.data[r * self.cols + c] = v;
    }

    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn transpose(&self) -> JMat {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.at(r, c).clone());
            }
        }
        JMat { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, o: &JMat) -> JMat {
        assert_eq!(self.cols, o.rows);
        let tab = self.table();
        let mut out = JMat::zeros(self.rows, o.cols, tab);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.max_abs() == 0.0 {
                    continue;
                }
                for c in 0..o.cols {
                    let p = a * o.at(k, c);
                    *out.at_mut(r, c) += &p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Jet]) -> Vec<Jet> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                let mut acc = Jet::zero(self.table());
                for (c, vc) in v.iter().enumerate() {
                    acc += &(self.at(r, c) * vc);
                }
                acc
            })
            .collect()
    }

    /// Row vector times matrix: (vᵀ M)_c = Σ_r v_r M_rc.
    pub fn vec_mul(&self, v: &[Jet]) -> Vec<Jet> {
        self.transpose().mul_vec(v)
    }

    pub fn add(&self, o: &JMat) -> JMat {
        JMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &JMat) -> JMat {
        JMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> JMat {
        JMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn scale_jet(&self, s: &Jet) -> JMat {
        JMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> Jet {
        let mut t = Jet::zero(self.table());
        for i in 0..self.rows.min(self.cols) {
            t += self.at(i, i);
        }
        t
    }

    pub fn max_abs_value(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.value().abs()))
    }

    pub fn truncate(&self, order: usize) -> JMat {
        JMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.truncate(order)).collect() }
    }

    /// Solve self · X = rhs by Gaussian elimination with partial pivoting on values.
    pub fn solve(&self, rhs: &JMat) -> Result<JMat> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.rows, self.rows);
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs_value().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a.at(i, k).value().abs().total_cmp(&a.at(j, k).value().abs()))
                .unwrap();
            if a.at(p, k).value().abs() <= 1e-14 * scale {
                return Err(GeomError::SingularMetric);
            }
            if p != k {
                for c in 0..n {
                    a.data.swap(k * n + c, p * n + c);
                }
                for c in 0..m {
                    b.data.swap(k * m + c, p * m + c);
                }
            }
            let inv = a.at(k, k).recip();
            for i in (k + 1)..n {
                let f = a.at(i, k) * &inv;
                if f.max_abs() == 0.0 {
                    continue;
                }
                for c in k..n {
                    let t = &f * a.at(k, c);
                    *a.at_mut(i, c) -= &t;
                }
                for c in 0..m {
                    let t = &f * b.at(k, c);
                    *b.at_mut(i, c) -= &t;
                }
            }
        }
        let mut x = JMat::zeros(n, m, self.table());
        for c in 0..m {
            for i in (0..n).rev() {
                let mut s = b.at(i, c).clone();
                for j in (i + 1)..n {
                    s -= &(a.at(i, j) * x.at(j, c));
                }
                x.set(i, c, &s / a.at(i, i));
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<JMat> {
        self.solve(&JMat::identity(self.rows, self.table()))
    }

    pub fn solve_vec(&self, v: &[Jet]) -> Result<Vec<Jet>> {
        let rhs = JMat::from_vec(v.len(), 1, v.to_vec());
        Ok(self.solve(&rhs)?.data)
    }

    /// Principal square root of a matrix with positive eigenvalues
    /// (Denman–Beavers iteration, run in jet arithmetic).
    pub fn sqrt_positive(&self) -> Result<JMat> {
        let n = self.rows;
        let tab = self.table();
        let c = self.trace().scale(1.0 / n as f64);
        if c.value() <= 0.0 {
            return Err(GeomError::SingularMetric);
        }
        let mut y = self.scale_jet(&c.recip());
        let mut z = JMat::identity(n, tab);
        let mut settled = 0;
        for _ in 0..60 {
            let yi = y.inverse()?;
            let zi = z.inverse()?;
            let y2 = y.add(&zi).scale(0.5);
            let z2 = z.add(&yi).scale(0.5);
            let change = y2.sub(&y).data.iter().fold(0.0f64, |m, a| m.max(a.max_abs()));
            y = y2;
            z = z2;
            if change < 1e-15 {
                settled += 1;
                if settled > 2 {
                    break;
                }
            }
        }
        Ok(y.scale_jet(&c.sqrt()))
    }
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = Jet::zero(a[0].table());
    for (x, y) in a.iter().zip(b) {
        acc += &(x * y);
    }
    acc
}

pub fn outer(a: &[Jet], b: &[Jet]) -> JMat {
    let mut data = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            data.push(x * y);
        }
    }
    JMat { rows: a.len(), cols: b.len(), data }
}

/// Pfaffian of a real skew matrix (row-major n×n), by skew Gaussian elimination.
pub fn pfaffian(a: &[f64], n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.to_vec();
    let mut pf = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let kp = (k + 1..n).max_by(|&i, &j| m[k * n + i].abs().total_cmp(&m[k * n + j].abs())).unwrap();
        if kp != k + 1 {
            for c in 0..n {
                m.swap((k + 1) * n + c, kp * n + c);
            }
            for r in 0..n {
                m.swap(r * n + k + 1, r * n + kp);
            }
            pf = -pf;
        }
        let piv = m[k * n + k + 1];
        if piv == 0.0 {
            return 0.0;
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[k * n + j] / piv).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| m[i * n + k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[i * n + j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Pfaffian of a complex skew matrix by cofactor expansion (n ≤ 8 in practice).
pub fn pfaffian_complex(a: &[(f64, f64)], n: usize) -> (f64, f64) {
    fn rec(a: &[(f64, f64)], n: usize, idx: &[usize]) -> (f64, f64) {
        if idx.is_empty() {
            return (1.0, 0.0);
        }
        let i0 = idx[0];
        let mut acc = (0.0, 0.0);
        for (pos, &j) in idx.iter().enumerate().skip(1) {
            let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != i0 && k != j).collect();
            let sub = rec(a, n, &rest);
            let e = a[i0 * n + j];
            let prod = (e.0 * sub.0 - e.1 * sub.1, e.0 * sub.1 + e.1 * sub.0);
            let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
            acc.0 += sign * prod.0;
            acc.1 += sign * prod.1;
        }
        acc
    }
    if n % 2 == 1 {
        return (0.0, 0.0);
    }
    let idx: Vec<usize> = (0..n).collect();
    rec(a, n, &idx)
}
