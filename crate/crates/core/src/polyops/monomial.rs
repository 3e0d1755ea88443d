//! Scaled monomials `m_a(x) = ((x - x_E) / h_E)^a`, ordered by total degree
//! and then by decreasing power of the first variable.

use super::Vec2;
use nalgebra::{DMatrix, DVector};

/// Number of monomials of total degree at most `n`; zero for negative `n`.
pub fn dim(n: i32) -> usize {
    if n < 0 {
        0
    } else {
        let n = n as usize;
        (n + 1) * (n + 2) / 2
    }
}

pub fn index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

pub fn exponents(n: i32) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(dim(n));
    if n < 0 {
        return out;
    }
    for d in 0..=n as usize {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Exponent of the monomial at position `i`.
pub fn exponent_of(i: usize) -> (usize, usize) {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= i {
        d += 1;
    }
    let b = i - d * (d + 1) / 2;
    (d - b, b)
}

pub fn degree_of(i: usize) -> usize {
    let (a, b) = exponent_of(i);
    a + b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMonomials {
    pub center: Vec2,
    pub h: f64,
}

fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    let mut v = 1.0;
    for _ in 0..=n {
        p.push(v);
        v *= x;
    }
    p
}

impl ScaledMonomials {
    pub fn new(center: Vec2, h: f64) -> Self {
        Self { center, h }
    }

    pub fn local(&self, x: &Vec2) -> (f64, f64) {
        ((x.x - self.center.x) / self.h, (x.y - self.center.y) / self.h)
    }

    pub fn values(&self, n: i32, x: &Vec2) -> Vec<f64> {
        let mut out = Vec::with_capacity(dim(n));
        if n < 0 {
            return out;
        }
        let (s, t) = self.local(x);
        let ps = powers(s, n as usize);
        let pt = powers(t, n as usize);
        for (a, b) in exponents(n) {
            out.push(ps[a] * pt[b]);
        }
        out
    }

    pub fn gradients(&self, n: i32, x: &Vec2) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(dim(n));
        if n < 0 {
            return out;
        }
        let (s, t) = self.local(x);
        let ps = powers(s, n as usize);
        let pt = powers(t, n as usize);
        for (a, b) in exponents(n) {
            let gx = if a > 0 { a as f64 * ps[a - 1] * pt[b] } else { 0.0 };
            let gy = if b > 0 { b as f64 * ps[a] * pt[b - 1] } else { 0.0 };
            out.push([gx / self.h, gy / self.h]);
        }
        out
    }

    /// Second derivatives `[xx, xy, yy]`.
    pub fn hessians(&self, n: i32, x: &Vec2) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(dim(n));
        if n < 0 {
            return out;
        }
        let (s, t) = self.local(x);
        let ps = powers(s, n as usize);
        let pt = powers(t, n as usize);
        let h2 = self.h * self.h;
        for (a, b) in exponents(n) {
            let (af, bf) = (a as f64, b as f64);
            let xx = if a > 1 { af * (af - 1.0) * ps[a - 2] * pt[b] } else { 0.0 };
            let xy = if a > 0 && b > 0 { af * bf * ps[a - 1] * pt[b - 1] } else { 0.0 };
            let yy = if b > 1 { bf * (bf - 1.0) * ps[a] * pt[b - 2] } else { 0.0 };
            out.push([xx / h2, xy / h2, yy / h2]);
        }
        out
    }

    /// Evaluates the polynomial with coefficient vector `c` at `x`.
    pub fn eval(&self, c: &[f64], x: &Vec2) -> f64 {
        let n = degree_for_len(c.len());
        self.values(n, x).iter().zip(c).map(|(m, c)| m * c).sum()
    }
}

/// Largest degree whose monomial count equals `len`.
pub fn degree_for_len(len: usize) -> i32 {
    let mut n = -1;
    while dim(n + 1) <= len {
        n += 1;
        if dim(n) == len {
            return n;
        }
    }
    panic!("{len} is not a monomial count")
}

/// Coefficient map of `d/dx_dir` from `P_n` into `P_{n-1}`, including the
/// `1/h` chain-rule factor.
pub fn derivative_matrix(n: i32, dir: usize, h: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(dim(n - 1), dim(n));
    for (j, (a, b)) in exponents(n).into_iter().enumerate() {
        if dir == 0 && a > 0 {
            d[(index(a - 1, b), j)] = a as f64 / h;
        } else if dir == 1 && b > 0 {
            d[(index(a, b - 1), j)] = b as f64 / h;
        }
    }
    d
}

/// Coefficient map of the Laplacian from `P_n` into `P_{n-2}`.
pub fn laplacian_matrix(n: i32, h: f64) -> DMatrix<f64> {
    let dx = derivative_matrix(n, 0, h);
    let dxx = derivative_matrix(n - 1, 0, h) * &dx;
    let dy = derivative_matrix(n, 1, h);
    let dyy = derivative_matrix(n - 1, 1, h) * &dy;
    dxx + dyy
}

/// Coefficients of the product of `m_(a,b)` with the polynomial `c` of
/// degree `n`, as a polynomial of degree `n + a + b`.
pub fn shift(c: &DVector<f64>, n: i32, a: usize, b: usize) -> DVector<f64> {
    let m = n + (a + b) as i32;
    let mut out = DVector::zeros(dim(m));
    for (j, (p, q)) in exponents(n).into_iter().enumerate() {
        out[index(p + a, q + b)] += c[j];
    }
    out
}

/// Zero-padded copy of `c` with length `dim(n)`.
pub fn embed(c: &DVector<f64>, n: i32) -> DVector<f64> {
    let mut out = DVector::zeros(dim(n));
    let k = c.len().min(out.len());
    out.rows_mut(0, k).copy_from(&c.rows(0, k));
    out
}
