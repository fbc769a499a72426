//! Small dense f64 helpers for pointwise residuals. Matrices are row-major n×n,
//! endomorphisms act as `(E x)^i = E[i][j] x^j`.

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// E x
pub fn apply(e: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| e[i * n + j] * x[j]).sum()).collect()
}

/// η∘E as a covector
pub fn covec_mat(eta: &[f64], e: &[f64]) -> Vec<f64> {
    let n = eta.len();
    (0..n).map(|j| (0..n).map(|i| eta[i] * e[i * n + j]).sum()).collect()
}

pub fn pair(eta: &[f64], x: &[f64]) -> f64 {
    eta.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// The endomorphism X ↦ η(X) x, i.e. `η ⊗ x` in the usual notation.
pub fn rank_one(eta: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = x[i] * eta[j];
        }
    }
    out
}

/// g(E·,·) as a bilinear form: ν_ab = E^c_a g_cb.
pub fn lower_first(e: &[f64], g: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = (0..n).map(|c| e[c * n + a] * g[c * n + b]).sum();
        }
    }
    out
}

/// g(x, ·)
pub fn lower(g: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|b| (0..n).map(|a| x[a] * g[a * n + b]).sum()).collect()
}

pub fn bilinear(g: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += x[a] * g[a * n + b] * y[b];
        }
    }
    s
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}
