//! Thin wrappers around nalgebra decompositions.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::matrix::ComplexMatrix;
use crate::scalar::Scalar;

/// Eigen-decomposition of the hermitian part of `m`, eigenvalues in
/// descending order with eigenvectors as the matching columns.
pub fn hermitian_eigen<T: Scalar>(m: &ComplexMatrix<T>) -> (Vec<T>, ComplexMatrix<T>) {
    assert!(m.is_square());
    let n = m.rows();
    let eig = SymmetricEigen::new(m.hermitian_part().to_dmatrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues<T: Scalar>(m: &ComplexMatrix<T>) -> Vec<T> {
    let mut values: Vec<T> = SymmetricEigen::new(m.hermitian_part().to_dmatrix())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    values
}

/// Solves the symmetric positive-definite system `a x = b`; `None` when the
/// Cholesky factorisation breaks down.
pub fn solve_spd<T: Scalar>(a: DMatrix<T>, b: &[T]) -> Option<Vec<T>> {
    let chol = a.cholesky()?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(b));
    Some(x.iter().copied().collect())
}
