//! `[P_n]^2 = h grad P_{n+1} (+) m_perp P_{n-1}` with `m_perp = (m_(0,1), -m_(1,0))`.

use super::monomial::{dim, exponent_of, exponents, index};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct VectorDecomposition {
    pub n: i32,
    /// Columns are the split basis written in stacked monomial coefficients
    /// `[x-component; y-component]`.
    pub to_monomial: DMatrix<f64>,
    pub from_monomial: DMatrix<f64>,
}

impl VectorDecomposition {
    pub fn new(n: i32) -> Self {
        let d = dim(n);
        let mut c = DMatrix::zeros(2 * d, 2 * d);
        let mut col = 0;
        for (a, b) in exponents(n + 1).into_iter().skip(1) {
            if a > 0 {
                c[(index(a - 1, b), col)] = a as f64;
            }
            if b > 0 {
                c[(d + index(a, b - 1), col)] = b as f64;
            }
            col += 1;
        }
        for (a, b) in exponents(n - 1) {
            c[(index(a, b + 1), col)] = 1.0;
            c[(d + index(a + 1, b), col)] = -1.0;
            col += 1;
        }
        let from_monomial = c.clone().try_inverse().expect("decomposition basis is invertible");
        Self { n, to_monomial: c, from_monomial }
    }

    /// Number of gradient components `h grad m_a`, `1 <= |a| <= n + 1`.
    pub fn grad_count(&self) -> usize {
        dim(self.n + 1) - 1
    }

    pub fn perp_count(&self) -> usize {
        dim(self.n - 1)
    }

    /// Monomial index (into `P_{n+1}`) of gradient component `i`.
    pub fn grad_monomial(&self, i: usize) -> usize {
        i + 1
    }

    pub fn perp_exponent(&self, j: usize) -> (usize, usize) {
        exponent_of(j)
    }

    /// Split coefficients `[grad; perp]` of the vector polynomial `p`.
    pub fn split(&self, p: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let c = &self.from_monomial * p;
        let g = self.grad_count();
        (c.rows(0, g).into_owned(), c.rows(g, self.perp_count()).into_owned())
    }
}
