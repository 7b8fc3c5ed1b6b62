//! Backtracking line search for the forward-backward step.
//!
//! Starting from a trial step `sigma`, the step is shrunk by `theta` until
//! the quadratic upper-bound test holds at the forward-backward point
//! `J(x, alpha) = prox_{alpha g}(x - alpha grad f(x))`:
//!
//! ```text
//! f(J) <= f(x) + <grad f(x), J - x> + ||x - J||^2 / (2 alpha)
//! ```
//!
//! An infinite `f(J)` counts as a violated test, which is exactly what makes
//! the search work for objectives with open domains. Termination after
//! finitely many trials is guaranteed for convex problems, so hitting the
//! trial cap signals a broken oracle rather than a hard instance.

use crate::linalg::Vector;
use crate::oracles::{prox_of, CompositeProblem, OracleError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineSearchError {
    #[error("line search did not accept a step within {trials} trials")]
    Stalled { trials: usize },
    #[error("f is not finite at the search point")]
    InfiniteValue,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone)]
pub struct LineSearchConfig {
    /// Shrink factor in (0, 1).
    pub theta: f64,
    /// Trial cap; the search stalls only on contract violations.
    pub max_trials: usize,
    /// Relative slack added to the acceptance test so exact-arithmetic
    /// equality cases (quadratics at the exact Lipschitz step) are not pushed
    /// into an infinite shrink by rounding.
    pub relative_slack: f64,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self { theta: 0.5, max_trials: 200, relative_slack: 1e-12 }
    }
}

impl LineSearchConfig {
    fn validate(&self) {
        assert!(self.theta > 0.0 && self.theta < 1.0, "theta must lie in (0,1)");
        assert!(self.max_trials >= 1);
        assert!(self.relative_slack >= 0.0);
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchOutcome {
    /// Accepted step, `sigma * theta^(trials_used - 1)`.
    pub alpha: f64,
    /// The forward-backward point at the accepted step.
    pub trial_point: Vector,
    pub trials_used: usize,
}

/// `J(x, alpha) = prox_{alpha g}(x - alpha grad f(x))`.
pub fn forward_backward_point(
    p: &CompositeProblem,
    x: &Vector,
    alpha: f64,
) -> Result<Vector, OracleError> {
    assert!(alpha > 0.0);
    let g = p.f.grad(x)?;
    prox_of(&p.g, &x.add_scaled(-alpha, &g), alpha)
}

/// Runs the backtracking search at `x`, starting from trial step `sigma`.
pub fn search(
    p: &CompositeProblem,
    x: &Vector,
    sigma: f64,
    cfg: &LineSearchConfig,
) -> Result<LineSearchOutcome, LineSearchError> {
    assert!(sigma > 0.0, "sigma must be positive");
    cfg.validate();

    let fx = p.f.eval(x).finite_value().ok_or(LineSearchError::InfiniteValue)?;
    let grad = p.f.grad(x)?;
    let slack = cfg.relative_slack * (1.0 + fx.abs());

    let mut alpha = sigma;
    for trial in 1..=cfg.max_trials {
        let j = prox_of(&p.g, &x.add_scaled(-alpha, &grad), alpha)?;
        if let Some(fj) = p.f.eval(&j).finite_value() {
            let step = j.sub(x);
            let bound = fx + grad.dot(&step) + step.dot(&step) / (2.0 * alpha);
            if fj <= bound + slack {
                return Ok(LineSearchOutcome { alpha, trial_point: j, trials_used: trial });
            }
        }
        alpha *= cfg.theta;
    }
    Err(LineSearchError::Stalled { trials: cfg.max_trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{ExtendedReal, ProxOracle, SmoothOracle};
    use approx::assert_relative_eq;

    fn quadratic_1d(curvature: f64) -> CompositeProblem {
        // f = (curvature/2) x^2, g = 0
        let f = SmoothOracle::new(
            move |x: &Vector| ExtendedReal::finite(0.5 * curvature * x[0] * x[0]),
            move |x: &Vector| Vector::raw(vec![curvature * x[0]]),
        )
        .with_lipschitz(curvature);
        CompositeProblem::new(f, ProxOracle::zero(), 1)
    }

    #[test]
    fn forward_backward_point_on_quadratic() {
        let p = quadratic_1d(1.0);
        let j = forward_backward_point(&p, &Vector::from_slice(&[1.0]), 1.0).unwrap();
        assert_eq!(j[0], 0.0);
    }

    #[test]
    fn forward_backward_point_fixes_solutions() {
        // 1D Lasso at its solution x = 0.5: prox(0.5 - a*(-0.5+0.5*sign)) stays put.
        let p = crate::problems::build_lasso(
            &crate::problems::LassoInstance::new(
                crate::linalg::Matrix::from_rows(&[&[1.0]]),
                Vector::from_slice(&[1.0]),
                0.5,
            )
            .unwrap(),
        );
        for alpha in [0.3, 1.0, 2.5] {
            let j = forward_backward_point(&p, &Vector::from_slice(&[0.5]), alpha).unwrap();
            assert_relative_eq!(j[0], 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn forward_backward_point_lasso_step_from_zero() {
        let p = crate::problems::build_lasso(
            &crate::problems::LassoInstance::new(
                crate::linalg::Matrix::from_rows(&[&[1.0]]),
                Vector::from_slice(&[1.0]),
                0.5,
            )
            .unwrap(),
        );
        let j = forward_backward_point(&p, &Vector::from_slice(&[0.0]), 1.0).unwrap();
        assert_eq!(j[0], 0.5);
    }

    #[test]
    fn accepts_unit_step_on_unit_quadratic() {
        let p = quadratic_1d(1.0);
        let out = search(&p, &Vector::from_slice(&[1.0]), 1.0, &LineSearchConfig::default())
            .unwrap();
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.trials_used, 1);
        assert_eq!(out.trial_point[0], 0.0);
    }

    #[test]
    fn accepts_immediately_at_a_solution() {
        let p = quadratic_1d(1.0);
        let out = search(&p, &Vector::from_slice(&[0.0]), 2.0, &LineSearchConfig::default())
            .unwrap();
        assert_eq!(out.alpha, 2.0);
        assert_eq!(out.trial_point[0], 0.0);
    }

    #[test]
    fn shrinks_to_the_descent_step_on_stiff_quadratic() {
        // f = 2 x^2 has L = 4; the test first holds at alpha = 0.25.
        let p = quadratic_1d(4.0);
        let out = search(&p, &Vector::from_slice(&[1.0]), 1.0, &LineSearchConfig::default())
            .unwrap();
        assert_eq!(out.trials_used, 3);
        assert_relative_eq!(out.alpha, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn infinite_trial_values_force_shrinking() {
        // f = -log(x) on x > 0; from x = 0.5 a unit step leaves the domain.
        let f = SmoothOracle::new(
            |x: &Vector| {
                if x[0] > 0.0 {
                    ExtendedReal::finite(-x[0].ln())
                } else {
                    ExtendedReal::PosInfinity
                }
            },
            |x: &Vector| Vector::raw(vec![-1.0 / x[0]]),
        );
        let p = CompositeProblem::new(f, ProxOracle::zero(), 1);
        let out = search(&p, &Vector::from_slice(&[0.5]), 1.0, &LineSearchConfig::default())
            .unwrap();
        assert!(out.trials_used > 1, "step into the boundary must be rejected");
        assert!(out.trial_point[0] > 0.0);
    }

    #[test]
    fn accepted_step_is_sigma_times_theta_power() {
        let p = quadratic_1d(7.3);
        for sigma in [0.4, 1.0, 9.0] {
            let out =
                search(&p, &Vector::from_slice(&[-2.0]), sigma, &LineSearchConfig::default())
                    .unwrap();
            let expected = sigma * 0.5f64.powi(out.trials_used as i32 - 1);
            assert_relative_eq!(out.alpha, expected, epsilon = 1e-15);
            assert!(out.alpha <= sigma);
        }
    }

    #[test]
    fn floor_from_lipschitz_constant() {
        // Accepted alpha >= min(sigma, theta / L) and the trial count is bounded.
        for curvature in [0.5, 1.0, 4.0, 16.0] {
            let p = quadratic_1d(curvature);
            for sigma in [0.1, 1.0, 10.0] {
                for theta in [0.3, 0.5, 0.9] {
                    let cfg = LineSearchConfig { theta, ..Default::default() };
                    let out = search(&p, &Vector::from_slice(&[1.0]), sigma, &cfg).unwrap();
                    let floor = sigma.min(theta / curvature);
                    assert!(
                        out.alpha >= floor * (1.0 - 1e-12),
                        "alpha {} below floor {floor}",
                        out.alpha
                    );
                    let max_trials =
                        ((floor / sigma).ln() / theta.ln()).ceil() as usize + 1;
                    assert!(out.trials_used <= max_trials);
                }
            }
        }
    }

    #[test]
    fn stalls_on_a_broken_oracle() {
        // "Gradient" of the wrong sign violates convexity; the search gives up.
        let f = SmoothOracle::new(
            |x: &Vector| ExtendedReal::finite(x[0] * x[0]),
            |_x: &Vector| Vector::raw(vec![500.0]),
        );
        let p = CompositeProblem::new(f, ProxOracle::zero(), 1);
        let cfg = LineSearchConfig { max_trials: 40, ..Default::default() };
        let err = search(&p, &Vector::from_slice(&[-3.0]), 1.0, &cfg).unwrap_err();
        assert_eq!(err, LineSearchError::Stalled { trials: 40 });
    }
}
