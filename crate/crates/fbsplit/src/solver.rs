//! The forward-backward splitting driver.
//!
//! Each iteration runs the backtracking line search warm-started from the
//! previous step size (so the accepted steps are nonincreasing), takes the
//! forward-backward point, and logs the step, objective, prox-gradient
//! residual and the two per-iteration certificates:
//!
//! * descent: `F(x_{k+1}) - F(x_k) <= -||x_{k+1}-x_k||^2 / (2 alpha_k)`
//! * Fejer, against a reference point `u`:
//!   `||x_k-u||^2 - ||x_{k+1}-u||^2 >= 2 alpha_k [F(x_{k+1}) - F(u)]`
//!
//! Both are stored as slacks (left side minus right side reordered so that a
//! valid certificate is nonnegative up to rounding).

use crate::linalg::{Matrix, Vector};
use crate::linesearch::{search, LineSearchConfig, LineSearchError};
use crate::oracles::{CompositeProblem, OracleError};
use crate::problems::{build_lasso, build_poisson, LassoInstance, PoissonInstance, ProblemError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("starting point has an infinite objective value")]
    InfeasibleStart,
    #[error("starting point violates the problem preconditions: {0}")]
    Usage(String),
    #[error(transparent)]
    LineSearch(#[from] LineSearchError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial trial step (the warm start for iteration 0).
    pub sigma: f64,
    /// Line-search shrink factor in (0,1).
    pub theta: f64,
    /// Stop when the prox-gradient residual `||x_k - x_{k+1}|| / alpha_k`
    /// falls to this value. The residual vanishes exactly at fixed points of
    /// the forward-backward map, i.e. at solutions.
    pub tol: f64,
    pub max_iter: usize,
    /// Record the Fejer certificate when a reference point is available.
    pub record_certificates: bool,
    /// Reference point for Fejer slacks and distance tracking.
    pub reference_point: Option<Vector>,
    /// Norm threshold that classifies a run as diverging. The solution set
    /// being empty is undecidable from oracles, so this is a proxy.
    pub divergence_norm: f64,
    /// Restart every line search at `sigma` instead of warm-starting from the
    /// previous step. Off by default: the step-size floor and the rate
    /// guarantees are proved for the warm-started rule.
    pub reset_each_iteration: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            theta: 0.5,
            tol: 1e-10,
            max_iter: 100_000,
            record_certificates: true,
            reference_point: None,
            divergence_norm: 1e12,
            reset_each_iteration: false,
        }
    }
}

impl SolverConfig {
    fn validate(&self) {
        assert!(self.sigma > 0.0 && self.sigma.is_finite());
        assert!(self.theta > 0.0 && self.theta < 1.0);
        assert!(self.tol > 0.0);
        assert!(self.max_iter >= 1);
        assert!(self.divergence_norm > 0.0);
    }
}

/// One logged transition `x_k -> x_{k+1}`.
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub k: usize,
    /// Accepted step at iteration k; nonincreasing under the warm-start rule.
    pub alpha: f64,
    /// `F(x_k)`.
    pub objective: f64,
    /// `||x_k - x_{k+1}|| / alpha_k`.
    pub residual: f64,
    /// Slack of the descent certificate; nonnegative up to rounding.
    pub descent_certificate: f64,
    /// Slack of the Fejer certificate at the reference point, when recorded.
    pub fejer_certificate: Option<f64>,
    /// `||x_k - reference||`, when a reference point is configured.
    pub distance_to_reference: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Final residual at or below `tol`.
    Converged,
    MaxIterations,
    /// Iterate norm crossed `divergence_norm`; consistent with an empty
    /// solution set, where the iterates provably escape to infinity.
    Diverging,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub final_point: Vector,
    pub final_objective: f64,
    pub log: Vec<IterateRecord>,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.log.len()
    }
}

/// Runs forward-backward splitting from `x0`.
pub fn solve(
    p: &CompositeProblem,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    cfg.validate();
    if x0.len() != p.dimension() {
        return Err(SolveError::Usage(format!(
            "starting point has length {}, problem dimension is {}",
            x0.len(),
            p.dimension()
        )));
    }
    let mut fx = p.objective(x0).finite_value().ok_or(SolveError::InfeasibleStart)?;

    let reference = cfg.reference_point.as_ref().map(|u| {
        let fu = p.objective(u).finite_value();
        (u.clone(), fu)
    });
    let ls_cfg = LineSearchConfig { theta: cfg.theta, ..Default::default() };

    let mut x = x0.clone();
    let mut warm = cfg.sigma;
    let mut log = Vec::new();

    for k in 0..cfg.max_iter {
        let start = if cfg.reset_each_iteration { cfg.sigma } else { warm };
        let out = search(p, &x, start, &ls_cfg)?;
        let alpha = out.alpha;
        let x_next = out.trial_point;
        let f_next = p
            .objective(&x_next)
            .finite_value()
            .expect("forward-backward point left the domain");

        let step = x_next.sub(&x);
        let step_sq = step.dot(&step);
        let residual = step_sq.sqrt() / alpha;
        let descent = (fx - f_next) - step_sq / (2.0 * alpha);
        let (fejer, dist_ref) = match &reference {
            Some((u, fu)) => {
                let dist = x.dist(u);
                let fejer = match (cfg.record_certificates, fu) {
                    (true, Some(fu)) => {
                        let dn = x_next.dist(u);
                        Some(dist * dist - dn * dn - 2.0 * alpha * (f_next - fu))
                    }
                    _ => None,
                };
                (fejer, Some(dist))
            }
            None => (None, None),
        };
        log.push(IterateRecord {
            k,
            alpha,
            objective: fx,
            residual,
            descent_certificate: descent,
            fejer_certificate: fejer,
            distance_to_reference: dist_ref,
        });

        if residual <= cfg.tol {
            return Ok(SolveResult {
                status: SolveStatus::Converged,
                final_point: x_next,
                final_objective: f_next,
                log,
            });
        }
        if x_next.norm() > cfg.divergence_norm {
            return Ok(SolveResult {
                status: SolveStatus::Diverging,
                final_point: x_next,
                final_objective: f_next,
                log,
            });
        }
        x = x_next;
        fx = f_next;
        warm = alpha;
    }

    Ok(SolveResult {
        status: SolveStatus::MaxIterations,
        final_point: x,
        final_objective: fx,
        log,
    })
}

/// Iterative shrinkage-thresholding: forward-backward splitting on the Lasso
/// composite, with the Lipschitz constant precomputed from `A`.
pub fn ista_solve(
    a: &Matrix,
    b: &Vector,
    mu: f64,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let inst = LassoInstance::new(a.clone(), b.clone(), mu)?;
    let p = build_lasso(&inst);
    solve(&p, x0, cfg)
}

/// Forward-backward splitting on the Poisson-KL composite. Requires a
/// feasible start: `x0 >= 0` with `A x0 > 0` componentwise.
pub fn poisson_solve(
    a: &Matrix,
    b: &Vector,
    x0: &Vector,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let inst = PoissonInstance::new(a.clone(), b.clone())?;
    if x0.iter().any(|&v| v < 0.0) {
        return Err(SolveError::Usage("x0 must be nonnegative".into()));
    }
    let y = a.matvec(x0);
    if y.iter().any(|&v| v <= 0.0) {
        return Err(SolveError::Usage("A x0 must be strictly positive".into()));
    }
    let p = build_poisson(&inst);
    solve(&p, x0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{ExtendedReal, ProxOracle, SmoothOracle};
    use approx::assert_relative_eq;

    fn lasso_1d() -> (Matrix, Vector) {
        (Matrix::from_rows(&[&[1.0]]), Vector::from_slice(&[1.0]))
    }

    #[test]
    fn one_dimensional_lasso_converges_to_soft_threshold() {
        let (a, b) = lasso_1d();
        let cfg = SolverConfig { tol: 1e-10, ..Default::default() };
        let r = ista_solve(&a, &b, 0.5, &Vector::from_slice(&[0.0]), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.final_point[0] - 0.5).abs() <= 1e-8);
        assert_relative_eq!(r.final_objective, 0.375, epsilon = 1e-12);
    }

    #[test]
    fn optimal_start_converges_immediately() {
        let (a, b) = lasso_1d();
        let cfg = SolverConfig::default();
        let r = ista_solve(&a, &b, 0.5, &Vector::from_slice(&[0.5]), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.iterations() <= 1);
        assert_eq!(r.final_point[0], 0.5);
    }

    #[test]
    fn exp_objective_diverges_with_vanishing_gap() {
        // f = e^x has an empty solution set; inf F = 0. The iterates drift to
        // minus infinity, so divergence is flagged by the norm threshold.
        let f = SmoothOracle::new(
            |x: &Vector| ExtendedReal::from(x[0].exp()),
            |x: &Vector| Vector::raw(vec![x[0].exp()]),
        );
        let p = CompositeProblem::new(f, ProxOracle::zero(), 1);
        let cfg = SolverConfig {
            tol: 1e-12,
            divergence_norm: 10.0,
            max_iter: 100_000,
            ..Default::default()
        };
        let r = solve(&p, &Vector::from_slice(&[0.0]), &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Diverging);
        assert!(r.final_point[0] < -10.0);
        assert!(r.final_objective < 1e-3 && r.final_objective > 0.0);
        // F decreases along the run.
        for w in r.log.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-15);
        }
    }

    #[test]
    fn separable_lasso_thresholds_each_coordinate() {
        let a = Matrix::identity(2);
        let b = Vector::from_slice(&[1.0, 0.0]);
        let r = ista_solve(&a, &b, 0.5, &Vector::zeros(2), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.final_point[0] - 0.5).abs() <= 1e-8);
        assert!(r.final_point[1].abs() <= 1e-10);
    }

    #[test]
    fn large_penalty_yields_zero() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = Vector::from_slice(&[1.0, 1.0]);
        // ||A^T b||_inf = 6, so mu = 6 makes the origin optimal.
        let r = ista_solve(&a, &b, 6.0, &Vector::zeros(2), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.final_point.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn underdetermined_lasso_lands_on_the_solution_segment() {
        let a = Matrix::from_rows(&[&[1.0, 1.0]]);
        let b = Vector::from_slice(&[2.0]);
        let r = ista_solve(&a, &b, 0.5, &Vector::zeros(2), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        let x = r.final_point;
        assert!((x[0] + x[1] - 1.5).abs() <= 1e-8);
        assert!(x[0] >= -1e-10 && x[1] >= -1e-10);
    }

    #[test]
    fn poisson_one_dimensional_minimizer() {
        let a = Matrix::from_rows(&[&[1.0]]);
        let b = Vector::from_slice(&[2.0]);
        let r = poisson_solve(&a, &b, &Vector::from_slice(&[1.0]), &SolverConfig::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.final_point[0] - 2.0).abs() <= 1e-6);
    }

    #[test]
    fn poisson_separable_identity() {
        let a = Matrix::identity(2);
        let b = Vector::from_slice(&[1.0, 3.0]);
        let r = poisson_solve(&a, &b, &Vector::from_slice(&[1.0, 1.0]), &SolverConfig::default())
            .unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.final_point[0] - 1.0).abs() <= 1e-6);
        assert!((r.final_point[1] - 3.0).abs() <= 1e-6);
    }

    #[test]
    fn poisson_optimal_start_is_immediate() {
        let a = Matrix::identity(2);
        let b = Vector::from_slice(&[1.0, 3.0]);
        let r = poisson_solve(&a, &b, &b, &SolverConfig::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!(r.iterations() <= 1);
        assert_eq!(r.final_point, b);
    }

    #[test]
    fn poisson_rejects_infeasible_starts() {
        let a = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let b = Vector::from_slice(&[1.0, 1.0]);
        let err =
            poisson_solve(&a, &b, &Vector::from_slice(&[1.0, 0.0]), &SolverConfig::default())
                .unwrap_err();
        assert!(matches!(err, SolveError::Usage(_)));
        let err =
            poisson_solve(&a, &b, &Vector::from_slice(&[-1.0, 1.0]), &SolverConfig::default())
                .unwrap_err();
        assert!(matches!(err, SolveError::Usage(_)));
    }

    #[test]
    fn infinite_start_is_rejected() {
        let inst = PoissonInstance::new(
            Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]),
            Vector::from_slice(&[1.0, 1.0]),
        )
        .unwrap();
        let p = build_poisson(&inst);
        let err = solve(&p, &Vector::from_slice(&[1.0, 0.0]), &SolverConfig::default())
            .unwrap_err();
        assert_eq!(err, SolveError::InfeasibleStart);
    }

    #[test]
    fn steps_are_monotone_and_floored_by_the_lipschitz_constant() {
        let a = Matrix::from_rows(&[&[2.0, 0.5], &[0.0, 1.5], &[-1.0, 1.0]]);
        let b = Vector::from_slice(&[1.0, -0.5, 0.25]);
        let inst = LassoInstance::new(a.clone(), b.clone(), 0.3).unwrap();
        let p = build_lasso(&inst);
        let lip = p.f.lipschitz_constant().unwrap();
        for sigma in [0.1, 1.0, 10.0] {
            for theta in [0.3, 0.5, 0.9] {
                let cfg = SolverConfig { sigma, theta, tol: 1e-10, ..Default::default() };
                let r = solve(&p, &Vector::zeros(2), &cfg).unwrap();
                assert_eq!(r.status, SolveStatus::Converged);
                let floor = sigma.min(theta / lip);
                let mut prev = f64::INFINITY;
                for rec in &r.log {
                    assert!(rec.alpha <= prev + 1e-15, "steps must be nonincreasing");
                    prev = rec.alpha;
                    assert!(rec.alpha >= floor * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn certificates_are_nonnegative_up_to_rounding() {
        let (a, b) = lasso_1d();
        let first = ista_solve(&a, &b, 0.5, &Vector::from_slice(&[-3.0]), &SolverConfig::default())
            .unwrap();
        let cfg = SolverConfig {
            reference_point: Some(first.final_point.clone()),
            ..Default::default()
        };
        let r = ista_solve(&a, &b, 0.5, &Vector::from_slice(&[-3.0]), &cfg).unwrap();
        let mut prev_obj = f64::INFINITY;
        for rec in &r.log {
            assert!(rec.descent_certificate >= -1e-9 * (1.0 + rec.objective.abs()));
            assert!(rec.objective <= prev_obj + 1e-15);
            prev_obj = rec.objective;
            let d = rec.distance_to_reference.unwrap();
            assert!(rec.fejer_certificate.unwrap() >= -1e-9 * (1.0 + d * d));
        }
    }

    #[test]
    fn reset_flag_restarts_the_trial_step() {
        let a = Matrix::from_rows(&[&[4.0]]);
        let b = Vector::from_slice(&[1.0]);
        let inst = LassoInstance::new(a, b, 0.1).unwrap();
        let p = build_lasso(&inst);
        let cfg = SolverConfig {
            sigma: 2.0,
            reset_each_iteration: true,
            tol: 1e-8,
            ..Default::default()
        };
        let r = solve(&p, &Vector::from_slice(&[1.0]), &cfg).unwrap();
        // Every accepted step is derived from sigma afresh.
        for rec in &r.log {
            let j = (rec.alpha / 2.0).ln() / 0.5f64.ln();
            assert!((j - j.round()).abs() < 1e-9);
        }
    }
}
