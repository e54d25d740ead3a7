use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    // Fill row by row so the draw order does not depend on storage layout.
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = rng.sample::<f64, _>(StandardNormal);
        }
    }
    m
}

/// Haar-ish random orthogonal matrix: Q factor of a Gaussian matrix with the
/// column signs fixed by the diagonal of R.
pub(crate) fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let qr = gaussian_matrix(rng, n).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Uniform point in the Euclidean ball of the given radius.
pub(crate) fn sample_in_ball<R: Rng>(rng: &mut R, n: usize, radius: f64) -> DVector<f64> {
    loop {
        let dir = gaussian_vector(rng, n);
        let norm = dir.norm();
        if norm > 0.0 {
            let u: f64 = rng.random();
            return dir * (radius * u.powf(1.0 / n as f64) / norm);
        }
    }
}
