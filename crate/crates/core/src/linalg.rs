//! Dense symmetric linear algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Convergence threshold handed to the symmetric eigen-solver.
pub const EIGEN_TOL: f64 = 1e-12;

/// Eigen-decomposition of a symmetric matrix. Eigenvalues come back sorted
/// ascending, with eigenvector columns permuted to match.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_TOL, 0)
        .unwrap_or_else(|| SymmetricEigen::new(m.clone()));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, idx.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in idx.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0[0]
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let (vals, _) = sym_eigen(m);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Rebuilds `V diag(f(λ)) Vᵀ` and symmetrizes the result entrywise.
pub fn spectral_map(
    values: &DVector<f64>,
    vectors: &DMatrix<f64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let n = values.len();
    let mut scaled = vectors.clone();
    for j in 0..n {
        let w = f(values[j]);
        scaled.column_mut(j).scale_mut(w);
    }
    symmetrize(&(scaled * vectors.transpose()))
}

/// `(A + Aᵀ) / 2`, which is exactly symmetric in floating point.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub fn is_exactly_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Symmetric positive-definite inverse square root, or `None` when some
/// eigenvalue is not positive.
pub fn spd_inv_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let (vals, vecs) = sym_eigen(m);
    if vals.iter().any(|&v| v <= 0.0) {
        return None;
    }
    Some(spectral_map(&vals, &vecs, |v| 1.0 / v.sqrt()))
}

/// Largest absolute entry; used for divergence detection because it cannot
/// overflow the way a sum of squares can.
pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigenvalues_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert_relative_eq!(vals[0], 2.0, epsilon = 1e-14);
        assert_relative_eq!(vals[1], 4.0, epsilon = 1e-14);
        let back = spectral_map(&vals, &vecs, |v| v);
        assert_relative_eq!(back, m, epsilon = 1e-14);
    }

    #[test]
    fn inv_sqrt_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = spd_inv_sqrt(&m).unwrap();
        assert_relative_eq!(r[(0, 0)], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r[(1, 1)], 1.0 / 3.0, epsilon = 1e-15);
        assert!(spd_inv_sqrt(&DMatrix::from_element(1, 1, -1.0)).is_none());
    }

    #[test]
    fn symmetrize_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1 + 0.2, 0.3, 1.0]);
        assert!(is_exactly_symmetric(&symmetrize(&m)));
        assert!(!is_exactly_symmetric(&m));
    }
}
