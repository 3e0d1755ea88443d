//! Small dense helpers.

use nalgebra::storage::RawStorage;
use nalgebra::{DMatrix, Dim, Matrix};

/// Solves `a x = b` by LU with partial pivoting; `None` when `a` is singular
/// to working precision.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let lu = a.clone().lu();
    let scale = a.amax();
    let u = lu.u();
    let min_pivot = (0..u.nrows()).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-13 * scale) {
        return None;
    }
    lu.solve(b)
}

/// Block-diagonal matrix with `copies` copies of `a`, each scaled by the
/// corresponding weight.
pub fn block_diag(a: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let m = weights.len();
    let mut out = DMatrix::zeros(n * m, n * m);
    for (i, w) in weights.iter().enumerate() {
        out.view_mut((i * n, i * n), (n, n)).copy_from(&(a * *w));
    }
    out
}

/// `scale * (I - d p)^T (I - d p)`.
pub fn dofi_stabilization(d: &DMatrix<f64>, p: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let n = p.ncols();
    let r = DMatrix::<f64>::identity(n, n) - d * p;
    r.transpose() * r * scale
}

/// `m[r, :] += a * x[0, :]`.
pub fn add_row<R: Dim, C: Dim, S: RawStorage<f64, R, C>>(
    m: &mut DMatrix<f64>,
    r: usize,
    a: f64,
    x: &Matrix<f64, R, C, S>,
) {
    for j in 0..x.ncols() {
        m[(r, j)] += a * x[(0, j)];
    }
}
