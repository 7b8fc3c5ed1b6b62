//! Post-solve analysis: active sets, uniqueness certificates for l1-penalized
//! least squares, strong-subregularity checks, and convergence-rate
//! estimation from solver logs.

mod rates;
mod subregularity;
mod uniqueness;

pub use rates::{
    estimate_rate, estimate_rate_from_errors, theoretical_q, RateBound, RateEstimate, RateMetric,
};
pub use subregularity::{
    check_strong_subregularity_l1, graphical_derivative_membership, ConeConstraint,
    SubregularityCertificate,
};
pub use uniqueness::{check_uniqueness, solution_polytope_oracle, UniquenessReport};

use crate::linalg::{LinalgError, Vector};
use crate::problems::LassoInstance;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("component {index} is in the support but its correlation is inactive; the point is not optimal to tolerance")]
    InconsistentOptimality { index: usize },
    #[error("not enough usable points to estimate a rate")]
    InsufficientData,
    #[error("the log has no recorded distances; re-solve with a reference point configured")]
    MissingDistances,
    #[error("objective-gap rates need a reference objective value")]
    MissingReferenceObjective,
    #[error("the supplied vector is not a subgradient of the l1 term (component {0})")]
    NotASubgradient(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Default relative tolerance deciding `|s_j| = mu`.
pub const DEFAULT_TOL_MAG: f64 = 1e-6;
/// Default relative tolerance deciding `x*_j = 0`.
pub const DEFAULT_TOL_SUPP: f64 = 1e-8;

/// Index sets attached to a candidate solution of an l1-penalized least
/// squares instance, from the correlation vector `s = A^T (A x* - b)`.
#[derive(Debug, Clone)]
pub struct ActiveSets {
    /// Correlation vector `A^T (A x* - b)`.
    pub s: Vector,
    /// Indices with `|s_j| = mu` to tolerance (sorted).
    pub active: Vec<usize>,
    /// Active indices carrying nonzero weight: the support of `x*`.
    pub support: Vec<usize>,
    /// Active indices with `x*_j = 0`.
    pub zero_active: Vec<usize>,
    /// Diagonal of the sign matrix over `zero_active`, entries in {-1, +1}.
    pub q_signs: Vec<f64>,
    /// Positions in `zero_active` whose sign argument was exactly zero; the
    /// sign was taken as +1 and the instance should be treated as degenerate.
    pub degenerate_signs: Vec<usize>,
    /// Indices whose membership decisions sit within a factor of ten of the
    /// classification thresholds; verdicts may be tolerance-sensitive there.
    pub near_threshold: Vec<usize>,
}

impl ActiveSets {
    pub fn is_degenerate(&self) -> bool {
        !self.degenerate_signs.is_empty()
    }
}

/// Classifies indices of a candidate optimum `x_star`.
///
/// `tol_mag` is the relative slack on the activity test
/// `|s_j| >= mu (1 - tol_mag)`; `tol_supp` scales the support test
/// `|x*_j| > tol_supp * max(1, ||x*||_inf)`. A supported index whose
/// correlation is inactive means `x_star` is not optimal to tolerance.
pub fn active_sets(
    inst: &LassoInstance,
    x_star: &Vector,
    tol_mag: f64,
    tol_supp: f64,
) -> Result<ActiveSets, AnalysisError> {
    let a = inst.matrix();
    let n = a.cols();
    if x_star.len() != n {
        return Err(AnalysisError::Dimension(format!(
            "candidate point has length {}, instance has {n} variables",
            x_star.len()
        )));
    }
    let mu = inst.mu();
    let residual = a.matvec(x_star).sub(inst.rhs());
    let s = a.tr_matvec(&residual);

    let supp_threshold = tol_supp * x_star.norm_inf().max(1.0);
    let active_threshold = mu * (1.0 - tol_mag);

    let mut active = Vec::new();
    let mut support = Vec::new();
    let mut zero_active = Vec::new();
    let mut near = Vec::new();
    for j in 0..n {
        let is_active = s[j].abs() >= active_threshold;
        let is_supported = x_star[j].abs() > supp_threshold;
        // On the support, optimality pins s_j to -mu * sign(x*_j); a missing
        // magnitude or a flipped sign both disqualify the candidate.
        if is_supported && (!is_active || s[j] * x_star[j] > 0.0) {
            return Err(AnalysisError::InconsistentOptimality { index: j });
        }
        if is_active {
            active.push(j);
            if is_supported {
                support.push(j);
            } else {
                zero_active.push(j);
            }
        }
        let mag_band = s[j].abs() >= mu * (1.0 - 10.0 * tol_mag) && s[j].abs() < active_threshold;
        let supp_band = is_active
            && !is_supported
            && x_star[j].abs() > supp_threshold / 10.0;
        if mag_band || supp_band {
            near.push(j);
        }
    }

    // Sign matrix over the zero-active set, from A_K^T (A_J x*_J - b).
    let fit = if support.is_empty() {
        inst.rhs().scale(-1.0)
    } else {
        let aj = a.select_columns(&support);
        let xj = Vector::raw(support.iter().map(|&j| x_star[j]).collect());
        aj.matvec(&xj).sub(inst.rhs())
    };
    let mut q_signs = Vec::with_capacity(zero_active.len());
    let mut degenerate = Vec::new();
    for (pos, &k) in zero_active.iter().enumerate() {
        let w = a.col(k).dot(&fit);
        if w == 0.0 {
            q_signs.push(1.0);
            degenerate.push(pos);
        } else {
            q_signs.push(w.signum());
        }
    }

    Ok(ActiveSets {
        s,
        active,
        support,
        zero_active,
        q_signs,
        degenerate_signs: degenerate,
        near_threshold: near,
    })
}
