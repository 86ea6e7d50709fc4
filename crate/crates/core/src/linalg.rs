//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{SymmetricEigen, SVD};

use crate::{Matrix, Vector};

/// Infinity norm (max absolute row sum).
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `|| M - M^T ||_inf`.
pub fn asymmetry(m: &Matrix) -> f64 {
    inf_norm(&(m - m.transpose()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues in ascending
/// order; the columns of the returned matrix are the matching eigenvectors.
pub fn symmetric_eigen(m: &Matrix) -> (Vector, Matrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vector::zeros(0), Matrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = Vector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vecs = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Orthonormal basis (as columns) of the null space of `rows`, a `k x n`
/// matrix. Singular values at or below `tol * max(1, sigma_max)` count as zero.
pub fn null_space(rows: &Matrix, tol: f64) -> Matrix {
    let n = rows.ncols();
    let k = rows.nrows();
    if k == 0 {
        return Matrix::identity(n, n);
    }
    // Pad the transpose to a square matrix so that the SVD returns a full U.
    let width = n.max(k);
    let mut padded = Matrix::zeros(n, width);
    padded.view_mut((0, 0), (n, k)).copy_from(&rows.transpose());
    let svd = SVD::new(padded, true, false);
    let u = svd.u.expect("requested U");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol * sigma_max.max(1.0);
    let keep: Vec<usize> = (0..n)
        .filter(|&c| svd.singular_values[c] <= cut)
        .collect();
    let mut basis = Matrix::zeros(n, keep.len());
    for (col, &c) in keep.iter().enumerate() {
        basis.set_column(col, &u.column(c));
    }
    basis
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn least_squares(a: &Matrix, b: &Vector) -> Vector {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vector::zeros(a.ncols());
    }
    let svd = SVD::new(a.clone(), true, true);
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-13 * sigma_max.max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| Vector::zeros(a.ncols()))
}

/// Solve a symmetric positive (semi)definite system, falling back to a
/// least-squares solve when the Cholesky factorization fails.
pub fn solve_spd(h: &Matrix, rhs: &Vector) -> Vector {
    match h.clone().cholesky() {
        Some(ch) => ch.solve(rhs),
        None => least_squares(h, rhs),
    }
}

/// Max absolute entry of a vector (0 for empty vectors).
pub fn max_abs(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
