use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sampling::{gaussian_matrix, gaussian_vector, random_orthogonal};
use super::{ProblemError, ProblemInstance, QuadraticComponent};
use crate::linalg;

/// The canned instances.
#[derive(Debug, Clone, PartialEq)]
pub enum ExampleSpec {
    /// Two components `x²/20` in one dimension (`c = 1/5`), where the
    /// stepsize `1/k` is badly tuned.
    SlowConv,
    /// `(l/2)(x − 1)²` and `(l/2)(x + 1)²` in one dimension.
    LowerPair { l: f64 },
    /// Eight planar least-squares terms `½(c_iᵀx + 1)²` whose cyclic order
    /// cancels the first- and second-order error terms.
    Octet,
    /// Random strongly convex quadratics that all share one minimizer.
    SharedMin { n: usize, m: usize, seed: u64 },
    /// Random convex quadratics whose sum has `λ_min = c` and whose spectral
    /// norms add up to `l`.
    Random {
        n: usize,
        m: usize,
        c: f64,
        l: f64,
        seed: u64,
    },
}

/// The octet direction vectors, in processing order.
pub(crate) const OCTET_DIRECTIONS: [[f64; 2]; 8] = [
    [-1.0, 0.0],
    [1.0, 0.0],
    [0.0, -1.0],
    [0.0, 1.0],
    [1.0, 0.0],
    [-1.0, 0.0],
    [0.0, 1.0],
    [0.0, -1.0],
];

pub fn make_example(spec: &ExampleSpec) -> Result<ProblemInstance, ProblemError> {
    let components = match *spec {
        ExampleSpec::SlowConv => vec![scalar(0.1, 0.0, 0.0)?, scalar(0.1, 0.0, 0.0)?],
        ExampleSpec::LowerPair { l } => {
            if !(l > 0.0 && l.is_finite()) {
                return Err(ProblemError::BadParams(format!("L must be positive, got {l}")));
            }
            vec![scalar(l, l, 0.5 * l)?, scalar(l, -l, 0.5 * l)?]
        }
        ExampleSpec::Octet => octet()?,
        ExampleSpec::SharedMin { n, m, seed } => shared_min(n, m, seed)?,
        ExampleSpec::Random { n, m, c, l, seed } => random(n, m, c, l, seed)?,
    };
    ProblemInstance::from_quadratics(components)
}

fn scalar(p: f64, q: f64, r: f64) -> Result<QuadraticComponent, ProblemError> {
    QuadraticComponent::new(DMatrix::from_element(1, 1, p), DVector::from_element(1, q), r)
}

fn octet() -> Result<Vec<QuadraticComponent>, ProblemError> {
    OCTET_DIRECTIONS
        .iter()
        .map(|d| {
            let c = DVector::from_column_slice(d);
            QuadraticComponent::new(&c * c.transpose(), -c, 0.5)
        })
        .collect()
}

fn check_sizes(n: usize, m: usize) -> Result<(), ProblemError> {
    if n == 0 || m == 0 {
        return Err(ProblemError::BadParams(format!(
            "n and m must be at least 1, got n={n}, m={m}"
        )));
    }
    Ok(())
}

fn shared_min(n: usize, m: usize, seed: u64) -> Result<Vec<QuadraticComponent>, ProblemError> {
    check_sizes(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_shared = gaussian_vector(&mut rng, n);
    (0..m)
        .map(|_| {
            let basis = random_orthogonal(&mut rng, n);
            let eig = DVector::from_fn(n, |_, _| rng.random_range(0.5..1.5));
            let p = linalg::spectral_map(&eig, &basis, |v| v);
            let q = &p * &x_shared;
            let r = 0.5 * x_shared.dot(&q);
            QuadraticComponent::new(p, q, r)
        })
        .collect()
}

fn random(
    n: usize,
    m: usize,
    c: f64,
    l: f64,
    seed: u64,
) -> Result<Vec<QuadraticComponent>, ProblemError> {
    check_sizes(n, m)?;
    if !(c > 0.0 && c.is_finite() && l.is_finite()) {
        return Err(ProblemError::BadParams(format!(
            "need finite c > 0 and finite L, got c={c}, L={l}"
        )));
    }
    if c > l {
        return Err(ProblemError::BadParams(format!("c={c} exceeds L={l}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = random_orthogonal(&mut rng, n);
    let mut spread: Vec<f64> = (0..n.saturating_sub(2)).map(|_| rng.random()).collect();
    spread.sort_by(f64::total_cmp);

    // Random PSD split of the identity: W_i = S^{-1/2} A_i S^{-1/2}, S = ΣA_i.
    let raw: Vec<DMatrix<f64>> = (0..m)
        .map(|_| {
            let g = gaussian_matrix(&mut rng, n);
            &g * g.transpose()
        })
        .collect();
    let total = raw.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + a);
    let inv_sqrt = linalg::spd_inv_sqrt(&linalg::symmetrize(&total))
        .ok_or_else(|| ProblemError::BadParams("degenerate random draw".into()))?;
    let splits: Vec<DMatrix<f64>> = raw
        .iter()
        .map(|a| linalg::symmetrize(&(&inv_sqrt * a * &inv_sqrt)))
        .collect();

    let qs: Vec<DVector<f64>> = (0..m).map(|_| gaussian_vector(&mut rng, n)).collect();
    let rs: Vec<f64> = (0..m).map(|_| rng.sample(rand_distr::StandardNormal)).collect();

    // Sum spectrum c = μ_1 ≤ … ≤ μ_n = θ; θ is tuned so Σ‖P_i‖ = L.
    let components_for = |theta: f64| -> Vec<DMatrix<f64>> {
        let mu = DVector::from_fn(n, |i, _| match i {
            0 => c,
            i if i == n - 1 => theta,
            i => c + (theta - c) * spread[i - 1],
        });
        let root = linalg::spectral_map(&mu, &basis, f64::sqrt);
        splits
            .iter()
            .map(|w| linalg::symmetrize(&(&root * w * &root)))
            .collect()
    };
    let norm_sum = |ps: &[DMatrix<f64>]| ps.iter().map(linalg::spectral_norm).sum::<f64>();

    let at_c = norm_sum(&components_for(c));
    if n == 1 && (l - c).abs() > 1e-12 * l {
        return Err(ProblemError::BadParams(format!(
            "in one dimension convex components force L = c, got c={c}, L={l}"
        )));
    }
    if at_c > l * (1.0 + 1e-12) {
        return Err(ProblemError::BadParams(format!(
            "L={l} is below the smallest reachable sum of norms {at_c} for this draw"
        )));
    }

    // Σ‖P_i(θ)‖ is nondecreasing in θ and ≥ θ, so [c, L] brackets the root.
    let (mut lo, mut hi) = (c, l);
    let mut best = (f64::INFINITY, c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let val = norm_sum(&components_for(mid));
        if (val - l).abs() < best.0 {
            best = ((val - l).abs(), mid);
        }
        if val < l {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    for theta in [lo, hi] {
        let val = norm_sum(&components_for(theta));
        if (val - l).abs() < best.0 {
            best = ((val - l).abs(), theta);
        }
    }

    components_for(best.1)
        .into_iter()
        .zip(qs)
        .zip(rs)
        .map(|((p, q), r)| QuadraticComponent::new(p, q, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn octet_first_direction() {
        let prob = make_example(&ExampleSpec::Octet).unwrap();
        let q = prob.quadratics().unwrap();
        // q_1 = −c_1 with c_1 = [−1, 0]
        assert_eq!(q[0].q().as_slice(), &[1.0, 0.0]);
        assert_eq!(q[0].p()[(0, 0)], 1.0);
    }

    #[test]
    fn octet_symmetry_sums() {
        let mut sum = [0.0; 2];
        let mut outer = DMatrix::<f64>::zeros(2, 2);
        for d in OCTET_DIRECTIONS {
            sum[0] += d[0];
            sum[1] += d[1];
            let c = DVector::from_column_slice(&d);
            outer += &c * c.transpose();
        }
        assert_eq!(sum, [0.0, 0.0]);
        assert_eq!(outer, DMatrix::identity(2, 2) * 4.0);
    }

    #[test]
    fn lower_pair_minimizer_and_curvature() {
        let prob = make_example(&ExampleSpec::LowerPair { l: 1.0 }).unwrap();
        assert_eq!(prob.minimizer().unwrap()[0], 0.0);
        assert_eq!(prob.constants().unwrap().c_strong, 2.0);
        assert!(make_example(&ExampleSpec::LowerPair { l: 0.0 }).is_err());
    }

    #[test]
    fn shared_min_gradients_vanish() {
        let prob = make_example(&ExampleSpec::SharedMin { n: 3, m: 4, seed: 1 }).unwrap();
        let xs = prob.minimizer().unwrap();
        for c in prob.components() {
            assert!(c.gradient(&xs).norm() <= 1e-12);
        }
        assert!(prob.has_shared_minimizer().unwrap());
    }

    #[test]
    fn random_hits_c_and_l() {
        for (n, m, c, l, seed) in [(5, 4, 1.0, 10.0, 7), (4, 3, 1.0, 10.0, 3), (2, 6, 0.5, 3.0, 9)] {
            let prob = make_example(&ExampleSpec::Random { n, m, c, l, seed }).unwrap();
            let k = prob.constants().unwrap();
            assert_relative_eq!(k.c_strong, c, max_relative = 1e-10);
            assert_relative_eq!(k.l_sum, l, max_relative = 1e-10);
            for q in prob.quadratics().unwrap() {
                assert!(linalg::lambda_min(q.p()) >= -1e-12, "component not convex");
            }
        }
    }

    #[test]
    fn random_single_component_and_scalar() {
        let prob = make_example(&ExampleSpec::Random { n: 3, m: 1, c: 2.0, l: 5.0, seed: 0 }).unwrap();
        let k = prob.constants().unwrap();
        assert_relative_eq!(k.c_strong, 2.0, max_relative = 1e-10);
        assert_relative_eq!(k.l_sum, 5.0, max_relative = 1e-10);
        assert!(make_example(&ExampleSpec::Random { n: 1, m: 3, c: 1.0, l: 2.0, seed: 0 }).is_err());
        assert!(make_example(&ExampleSpec::Random { n: 1, m: 3, c: 1.0, l: 1.0, seed: 0 }).is_ok());
    }

    #[test]
    fn random_rejects_bad_params() {
        for (c, l) in [(2.0, 1.0), (0.0, 1.0), (-1.0, 1.0)] {
            let err = make_example(&ExampleSpec::Random { n: 3, m: 2, c, l, seed: 0 });
            assert!(matches!(err, Err(ProblemError::BadParams(_))));
        }
    }

    #[test]
    fn random_is_deterministic() {
        let spec = ExampleSpec::Random { n: 4, m: 3, c: 1.0, l: 10.0, seed: 3 };
        let a = make_example(&spec).unwrap();
        let b = make_example(&spec).unwrap();
        for (x, y) in a.quadratics().unwrap().iter().zip(b.quadratics().unwrap()) {
            assert_eq!(*x, y);
        }
    }
}
