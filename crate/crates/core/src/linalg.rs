//! Thin wrappers over the dense eigen/SVD backend that return sorted results.

use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

/// Eigenvalues ascending with matching eigenvector columns.
pub fn sym_eigen(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = matrix.nrows();
    let eig = SymmetricEigen::new(matrix);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Singular values descending with matching left/right singular vectors.
pub fn svd(matrix: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (rows, cols) = matrix.shape();
    let k = rows.min(cols);
    let svd = matrix.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = DMatrix::from_fn(rows, k, |r, c| u[(r, order[c])]);
    let right = DMatrix::from_fn(cols, k, |r, c| vt[(order[c], r)]);
    (values, left, right)
}
