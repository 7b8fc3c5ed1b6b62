//! Builders for the three concrete problem families: least squares with an
//! l1 penalty (Lasso), a general smooth term with an l1 penalty, and the
//! Poisson linear inverse problem with a Kullback-Leibler objective over the
//! nonnegative orthant.

use crate::linalg::{lambda_max_gram, lambda_max_sym, Matrix, Vector};
use crate::oracles::{CompositeProblem, ExtendedReal, ProxOracle, SmoothOracle};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("penalty parameter must be positive")]
    NonPositiveMu,
    #[error("matrix entry ({0},{1}) is negative")]
    NegativeEntry(usize, usize),
    #[error("matrix row {0} is zero")]
    ZeroRow(usize),
    #[error("right-hand side entry {0} is not strictly positive")]
    NonPositiveRhs(usize),
}

/// `min 0.5 ||A x - b||^2 + mu ||x||_1`
#[derive(Debug, Clone)]
pub struct LassoInstance {
    a: Matrix,
    b: Vector,
    mu: f64,
}

impl LassoInstance {
    pub fn new(a: Matrix, b: Vector, mu: f64) -> Result<Self, ProblemError> {
        if a.rows() != b.len() {
            return Err(ProblemError::Dimension(format!(
                "matrix has {} rows, right-hand side has {}",
                a.rows(),
                b.len()
            )));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ProblemError::NonPositiveMu);
        }
        Ok(Self { a, b, mu })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// `min sum_i b_i log(b_i / (Ax)_i) + (Ax)_i - b_i` over `x >= 0`, optionally
/// with an added `mu_l1 <e, x>` term (the l1 penalty restricted to the
/// orthant, folded into the smooth part).
#[derive(Debug, Clone)]
pub struct PoissonInstance {
    a: Matrix,
    b: Vector,
    mu_l1: Option<f64>,
}

impl PoissonInstance {
    pub fn new(a: Matrix, b: Vector) -> Result<Self, ProblemError> {
        if a.rows() != b.len() {
            return Err(ProblemError::Dimension(format!(
                "matrix has {} rows, right-hand side has {}",
                a.rows(),
                b.len()
            )));
        }
        for i in 0..a.rows() {
            let mut row_max = 0.0f64;
            for (j, &v) in a.row(i).iter().enumerate() {
                if v < 0.0 {
                    return Err(ProblemError::NegativeEntry(i, j));
                }
                row_max = row_max.max(v);
            }
            if row_max == 0.0 {
                return Err(ProblemError::ZeroRow(i));
            }
        }
        if let Some(i) = (0..b.len()).find(|&i| b[i] <= 0.0) {
            return Err(ProblemError::NonPositiveRhs(i));
        }
        Ok(Self { a, b, mu_l1: None })
    }

    /// Adds `mu * <e, x>` to the smooth term, the orthant form of an l1 penalty.
    pub fn with_l1(mut self, mu: f64) -> Result<Self, ProblemError> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(ProblemError::NonPositiveMu);
        }
        self.mu_l1 = Some(mu);
        Ok(self)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }

    /// Columns that are identically zero. The build succeeds, but the
    /// solution set is unbounded along those coordinates, so front ends
    /// surface them as a warning.
    pub fn zero_columns(&self) -> Vec<usize> {
        (0..self.a.cols())
            .filter(|&j| (0..self.a.rows()).all(|i| self.a.get(i, j) == 0.0))
            .collect()
    }
}

// Power-iteration budget for Lipschitz constants. Generous relative to the
// 200-iteration baseline so clustered spectra still resolve, and the result
// is inflated so the step-size floor stays valid when the estimate is low.
const POWER_ITERS: usize = 500;
const POWER_TOL: f64 = 1e-12;
const LIPSCHITZ_INFLATION: f64 = 1.0 + 1e-6;

/// Assembles the Lasso composite: `f = 0.5 ||Ax-b||^2` with its exact
/// gradient and an inflated `lambda_max(A^T A)` Lipschitz constant,
/// `g = mu ||.||_1`.
pub fn build_lasso(inst: &LassoInstance) -> CompositeProblem {
    let a = Arc::new(inst.a.clone());
    let b = Arc::new(inst.b.clone());
    let lip = lambda_max_gram(&inst.a, POWER_ITERS, POWER_TOL) * LIPSCHITZ_INFLATION;
    let (ae, be) = (a.clone(), b.clone());
    let f = SmoothOracle::new(
        move |x: &Vector| {
            let r = ae.matvec(x).sub(&be);
            ExtendedReal::finite(0.5 * r.dot(&r))
        },
        move |x: &Vector| a.tr_matvec(&a.matvec(x).sub(&b)),
    )
    .with_lipschitz(lip);
    CompositeProblem::new(f, ProxOracle::l1(inst.mu), inst.a.cols())
}

/// Composite for a caller-supplied smooth term with an l1 penalty.
pub fn build_l1_smooth(f: SmoothOracle, mu: f64, dimension: usize) -> CompositeProblem {
    assert!(mu > 0.0 && mu.is_finite());
    CompositeProblem::new(f, ProxOracle::l1(mu), dimension)
}

/// Assembles the Poisson-KL composite. The smooth term is finite exactly
/// where `Ax > 0` componentwise and returns positive infinity elsewhere;
/// no global Lipschitz constant exists for its gradient.
pub fn build_poisson(inst: &PoissonInstance) -> CompositeProblem {
    let a = Arc::new(inst.a.clone());
    let b = Arc::new(inst.b.clone());
    let mu = inst.mu_l1;
    let (ae, be) = (a.clone(), b.clone());
    let f = SmoothOracle::new(
        move |x: &Vector| {
            let y = ae.matvec(x);
            if y.iter().any(|&v| v <= 0.0) {
                return ExtendedReal::PosInfinity;
            }
            let mut s = 0.0;
            for i in 0..y.len() {
                s += be[i] * (be[i] / y[i]).ln() + y[i] - be[i];
            }
            if let Some(m) = mu {
                s += m * x.iter().sum::<f64>();
            }
            ExtendedReal::from(s)
        },
        move |x: &Vector| {
            let y = a.matvec(x);
            let r = Vector::raw(y.iter().zip(b.iter()).map(|(&yi, &bi)| 1.0 - bi / yi).collect());
            let g = a.tr_matvec(&r);
            match mu {
                Some(m) => Vector::raw(g.iter().map(|v| v + m).collect()),
                None => g,
            }
        },
    );
    CompositeProblem::new(f, ProxOracle::nonnegative(), inst.a.cols())
}

/// Smooth quadratic `f = 0.5 x^T Q x + c^T x` for a symmetric positive
/// semidefinite `Q`, with `lambda_max(Q)` as the Lipschitz constant.
pub fn quadratic_oracle(q: &Matrix, c: &Vector) -> SmoothOracle {
    assert_eq!(q.rows(), q.cols(), "quadratic term must be square");
    assert_eq!(q.rows(), c.len(), "linear term length must match");
    for i in 0..q.rows() {
        for j in (i + 1)..q.cols() {
            assert!(
                (q.get(i, j) - q.get(j, i)).abs() <= 1e-12 * (1.0 + q.get(i, j).abs()),
                "quadratic term must be symmetric"
            );
        }
    }
    let lip = lambda_max_sym(q, POWER_ITERS, POWER_TOL) * LIPSCHITZ_INFLATION;
    let q = Arc::new(q.clone());
    let c = Arc::new(c.clone());
    let (qe, ce) = (q.clone(), c.clone());
    SmoothOracle::new(
        move |x: &Vector| ExtendedReal::finite(0.5 * qe.matvec(x).dot(x) + ce.dot(x)),
        move |x: &Vector| q.matvec(x).add_scaled(1.0, &c),
    )
    .with_lipschitz(lip)
}
