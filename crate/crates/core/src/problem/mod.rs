//! Component oracles, exact quadratic instances and the closed-form
//! constants that the rate bounds are stated in.

mod examples;
mod io;
mod oracle;
mod quadratic;
pub(crate) mod sampling;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg;

pub use examples::{make_example, ExampleSpec};
pub use io::{parse_instance, write_instance};
pub use oracle::{check_oracle_consistency, ComponentOracle, OracleReport, ORACLE_RELERR_THRESHOLD};
pub use quadratic::QuadraticComponent;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("a problem needs at least one component")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("P is not exactly symmetric")]
    NotSymmetric,
    #[error("operation requires every component to be quadratic")]
    NonQuadratic,
    #[error("sum of Hessians is not positive definite (smallest eigenvalue {lambda_min:e})")]
    SingularSum { lambda_min: f64 },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Relative threshold below which `λ_min(ΣP_i)` is treated as zero.
const SINGULAR_REL_TOL: f64 = 1e-13;

/// Cached closed-form data of an all-quadratic instance.
#[derive(Debug, Clone)]
struct QuadraticSummary {
    p_sum: DMatrix<f64>,
    q_sum: DVector<f64>,
    lambda_min: f64,
    p_sum_norm: f64,
    component_norms: Vec<f64>,
    x_star: Option<DVector<f64>>,
}

/// Exact constants of a strongly convex quadratic instance, in the
/// component order the instance was built with.
#[derive(Debug, Clone)]
pub struct Constants {
    pub x_star: DVector<f64>,
    /// `λ_min(ΣP_i)`.
    pub c_strong: f64,
    /// `Σ‖P_i‖`.
    pub l_sum: f64,
    /// `∇²f(x*) = ΣP_i`.
    pub h_star: DMatrix<f64>,
    /// `‖Σ_{i<j} P_j ∇f_i(x*)‖`.
    pub m: f64,
    /// `Σ‖H*^{-1/2} ∇f_i(x*)‖`.
    pub b: f64,
}

/// A finite sum of component oracles sharing one dimension. Immutable after
/// construction; clones share the components.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    components: Vec<Arc<dyn ComponentOracle>>,
    dim: usize,
    quadratic: Option<QuadraticSummary>,
}

impl ProblemInstance {
    pub fn new(components: Vec<Arc<dyn ComponentOracle>>) -> Result<Self, ProblemError> {
        let first = components.first().ok_or(ProblemError::Empty)?;
        let dim = first.dim();
        if dim == 0 {
            return Err(ProblemError::BadParams("dimension must be at least 1".into()));
        }
        if let Some(bad) = components.iter().find(|c| c.dim() != dim) {
            return Err(ProblemError::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let quads: Option<Vec<&QuadraticComponent>> =
            components.iter().map(|c| c.as_quadratic()).collect();
        let quadratic = quads.map(|qs| summarize(&qs, dim));
        Ok(Self {
            components,
            dim,
            quadratic,
        })
    }

    pub fn from_quadratics(components: Vec<QuadraticComponent>) -> Result<Self, ProblemError> {
        Self::new(
            components
                .into_iter()
                .map(|c| Arc::new(c) as Arc<dyn ComponentOracle>)
                .collect(),
        )
    }

    /// Number of components `m`.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Arc<dyn ComponentOracle>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &dyn ComponentOracle {
        self.components[i].as_ref()
    }

    pub fn is_quadratic(&self) -> bool {
        self.quadratic.is_some()
    }

    pub fn quadratics(&self) -> Option<Vec<&QuadraticComponent>> {
        self.components.iter().map(|c| c.as_quadratic()).collect()
    }

    fn summary(&self) -> Result<&QuadraticSummary, ProblemError> {
        self.quadratic.as_ref().ok_or(ProblemError::NonQuadratic)
    }

    pub fn p_sum(&self) -> Result<&DMatrix<f64>, ProblemError> {
        Ok(&self.summary()?.p_sum)
    }

    pub fn q_sum(&self) -> Result<&DVector<f64>, ProblemError> {
        Ok(&self.summary()?.q_sum)
    }

    /// `Σ‖P_i‖`, the Lipschitz constant of the sum used throughout.
    pub fn l_sum(&self) -> Result<f64, ProblemError> {
        Ok(self.summary()?.component_norms.iter().sum())
    }

    /// `‖ΣP_i‖`.
    pub fn p_sum_norm(&self) -> Result<f64, ProblemError> {
        Ok(self.summary()?.p_sum_norm)
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.components.iter().map(|c| c.value(x)).sum()
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut total = DVector::zeros(self.dim);
        let mut g = DVector::zeros(self.dim);
        for c in &self.components {
            c.gradient_into(x, &mut g);
            total += &g;
        }
        total
    }

    /// Unique minimizer `x* = (ΣP_i)^{-1} Σq_i`.
    pub fn minimizer(&self) -> Result<DVector<f64>, ProblemError> {
        let s = self.summary()?;
        s.x_star.clone().ok_or(ProblemError::SingularSum {
            lambda_min: s.lambda_min,
        })
    }

    pub fn constants(&self) -> Result<Constants, ProblemError> {
        let s = self.summary()?;
        let x_star = self.minimizer()?;
        let identity: Vec<usize> = (0..self.len()).collect();
        let m = self.m_constant(&identity)?;
        let b = self.b_constant()?;
        Ok(Constants {
            x_star,
            c_strong: s.lambda_min,
            l_sum: s.component_norms.iter().sum(),
            h_star: s.p_sum.clone(),
            m,
            b,
        })
    }

    /// `‖Σ_{i<j} P_{σ(j)} ∇f_{σ(i)}(x*)‖` for the processing order `σ`
    /// (0-based permutation). The identity order gives the usual `M`.
    pub fn m_constant(&self, order: &[usize]) -> Result<f64, ProblemError> {
        let quads = self.quadratics().ok_or(ProblemError::NonQuadratic)?;
        check_permutation(order, self.len())?;
        let x_star = self.minimizer()?;
        let mut prefix = DVector::zeros(self.dim);
        let mut total = DVector::zeros(self.dim);
        for &j in order {
            let pj = quads[j].p();
            total.gemv(1.0, pj, &prefix, 1.0);
            prefix += quads[j].gradient(&x_star);
        }
        Ok(total.norm())
    }

    /// `Σ‖H*^{-1/2} ∇f_i(x*)‖` with `H* = ΣP_i`.
    pub fn b_constant(&self) -> Result<f64, ProblemError> {
        let s = self.summary()?;
        let x_star = self.minimizer()?;
        let inv_sqrt = linalg::spd_inv_sqrt(&s.p_sum).ok_or(ProblemError::SingularSum {
            lambda_min: s.lambda_min,
        })?;
        Ok(self
            .components
            .iter()
            .map(|c| (&inv_sqrt * c.gradient(&x_star)).norm())
            .sum())
    }

    /// Largest component gradient norm at `x*`; zero exactly when every
    /// component shares the minimizer.
    pub fn max_component_gradient_at_min(&self) -> Result<f64, ProblemError> {
        let x_star = self.minimizer()?;
        Ok(self
            .components
            .iter()
            .map(|c| c.gradient(&x_star).norm())
            .fold(0.0, f64::max))
    }

    /// The same quadratic instance in coordinates `y = x − center`:
    /// `f_i(y + center)` for every component. Runs that must resolve
    /// distances far below the magnitude of `x*` use coordinates centered
    /// near `x*`, where doubles are dense.
    pub fn recentered(&self, center: &DVector<f64>) -> Result<ProblemInstance, ProblemError> {
        let quads = self.quadratics().ok_or(ProblemError::NonQuadratic)?;
        if center.len() != self.dim {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dim,
                found: center.len(),
            });
        }
        let shifted = quads
            .iter()
            .map(|c| {
                let q = c.q() - c.p() * center;
                QuadraticComponent::new(c.p().clone(), q, c.value(center))
            })
            .collect::<Result<Vec<_>, _>>()?;
        ProblemInstance::from_quadratics(shifted)
    }

    /// True when `∇f_i(x*) ≈ 0` for every component.
    pub fn has_shared_minimizer(&self) -> Result<bool, ProblemError> {
        let scale = 1.0 + self.q_sum()?.norm();
        Ok(self.max_component_gradient_at_min()? <= 1e-10 * scale)
    }

    /// `G` estimated as the largest component gradient norm over `x*` and
    /// `samples` seeded points of the ball of `radius` around it.
    pub fn gradient_bound_in_ball(
        &self,
        radius: f64,
        samples: usize,
        seed: u64,
    ) -> Result<f64, ProblemError> {
        let x_star = self.minimizer()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DVector::zeros(self.dim);
        let mut best = 0.0_f64;
        let mut probe = |x: &DVector<f64>, best: &mut f64| {
            for c in &self.components {
                c.gradient_into(x, &mut g);
                *best = best.max(g.norm());
            }
        };
        probe(&x_star, &mut best);
        for _ in 0..samples {
            let x = &x_star + sampling::sample_in_ball(&mut rng, self.dim, radius);
            probe(&x, &mut best);
        }
        Ok(best)
    }

    /// `M̃ = L·G·m` for a given gradient bound `G`.
    pub fn m_tilde(&self, g: f64) -> Result<f64, ProblemError> {
        Ok(self.l_sum()? * g * self.len() as f64)
    }
}

pub(crate) fn check_permutation(order: &[usize], m: usize) -> Result<(), ProblemError> {
    let mut seen = vec![false; m];
    if order.len() != m {
        return Err(ProblemError::BadParams(format!(
            "order has {} entries, expected {m}",
            order.len()
        )));
    }
    for &i in order {
        if i >= m || seen[i] {
            return Err(ProblemError::BadParams(format!(
                "order {order:?} is not a permutation of 0..{m}"
            )));
        }
        seen[i] = true;
    }
    Ok(())
}

fn summarize(quads: &[&QuadraticComponent], dim: usize) -> QuadraticSummary {
    let mut p_sum = DMatrix::zeros(dim, dim);
    let mut q_sum = DVector::zeros(dim);
    for q in quads {
        p_sum += q.p();
        q_sum += q.q();
    }
    let (vals, vecs) = linalg::sym_eigen(&p_sum);
    let lambda_min = vals[0];
    let p_sum_norm = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let component_norms = quads.iter().map(|q| linalg::spectral_norm(q.p())).collect();
    let x_star = (lambda_min > SINGULAR_REL_TOL * p_sum_norm.max(f64::MIN_POSITIVE))
        .then(|| solve_spd(&p_sum, &q_sum, &vals, &vecs));
    QuadraticSummary {
        p_sum,
        q_sum,
        lambda_min,
        p_sum_norm,
        component_norms,
        x_star,
    }
}

/// Cholesky solve with one step of iterative refinement; falls back to the
/// eigen-decomposition when the factorization rejects a barely definite
/// matrix.
fn solve_spd(
    p: &DMatrix<f64>,
    rhs: &DVector<f64>,
    vals: &DVector<f64>,
    vecs: &DMatrix<f64>,
) -> DVector<f64> {
    let solve = |b: &DVector<f64>| -> DVector<f64> {
        match p.clone().cholesky() {
            Some(ch) => ch.solve(b),
            None => {
                let coords = vecs.transpose() * b;
                let scaled = DVector::from_fn(coords.len(), |i, _| coords[i] / vals[i]);
                vecs * scaled
            }
        }
    };
    let mut x = solve(rhs);
    let resid = rhs - p * &x;
    x += solve(&resid);
    x
}
