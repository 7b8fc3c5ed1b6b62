//! Empirical convergence-rate estimation from solver logs, and the
//! closed-form theoretical contraction factors for comparison.

use super::AnalysisError;
use crate::solver::IterateRecord;

/// Error sequence to fit: distances to a reference point, or objective gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMetric {
    IterateDistance,
    ObjectiveGap,
}

/// Which closed-form contraction factor to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBound {
    /// Distance to the solution set under subregularity: `1/sqrt(1+ak)`.
    SetDistance,
    /// Iterate distance under subregularity: `1/sqrt(1+ak/4)`.
    IterateSubregular,
    /// Objective gap under subregularity.
    ObjectiveSubregular,
    /// Iterate distance under strong subregularity: `1/sqrt(1+ak)`.
    IterateStrong,
    /// Objective gap under strong subregularity.
    ObjectiveStrong,
}

#[derive(Debug, Clone)]
pub struct RateEstimate {
    /// First log index inside the fitted tail window.
    pub window_start: usize,
    /// Geometric mean of consecutive error ratios over the tail.
    pub fitted_q: f64,
    /// Maximum consecutive ratio over the tail; a value below one certifies
    /// per-step contraction across the whole window.
    pub monotone_q: f64,
    /// Slot for a closed-form factor to compare against, filled by callers
    /// with a modulus in hand.
    pub theoretical_q: Option<f64>,
    pub metric: RateMetric,
}

/// Errors below this are indistinguishable from rounding noise and are
/// excluded from ratio fitting.
const NOISE_FLOOR: f64 = 1e-13;
const MIN_TAIL_POINTS: usize = 5;

/// Fits tail contraction ratios of a raw error sequence. The window is the
/// last half of the sequence; points at or below the noise floor are dropped.
pub fn estimate_rate_from_errors(
    errors: &[f64],
    metric: RateMetric,
) -> Result<RateEstimate, AnalysisError> {
    let window_start = errors.len() / 2;
    let tail = &errors[window_start..];
    let usable = tail.iter().filter(|&&e| e > NOISE_FLOOR).count();
    if usable < MIN_TAIL_POINTS {
        return Err(AnalysisError::InsufficientData);
    }
    let mut log_sum = 0.0;
    let mut count = 0usize;
    let mut monotone: f64 = 0.0;
    for w in tail.windows(2) {
        if w[0] > NOISE_FLOOR && w[1] > NOISE_FLOOR {
            let r = w[1] / w[0];
            log_sum += r.ln();
            monotone = monotone.max(r);
            count += 1;
        }
    }
    if count == 0 {
        return Err(AnalysisError::InsufficientData);
    }
    Ok(RateEstimate {
        window_start,
        fitted_q: (log_sum / count as f64).exp(),
        monotone_q: monotone,
        theoretical_q: None,
        metric,
    })
}

/// Extracts the error sequence from a solver log and fits its tail.
///
/// `IterateDistance` reads the distances recorded during the solve (configure
/// a reference point on the solver for that); `ObjectiveGap` needs the
/// reference objective value.
pub fn estimate_rate(
    log: &[IterateRecord],
    metric: RateMetric,
    reference_objective: Option<f64>,
) -> Result<RateEstimate, AnalysisError> {
    if log.len() < 10 {
        return Err(AnalysisError::InsufficientData);
    }
    let errors: Vec<f64> = match metric {
        RateMetric::IterateDistance => log
            .iter()
            .map(|r| r.distance_to_reference.ok_or(AnalysisError::MissingDistances))
            .collect::<Result<_, _>>()?,
        RateMetric::ObjectiveGap => {
            let fstar = reference_objective.ok_or(AnalysisError::MissingReferenceObjective)?;
            log.iter().map(|r| r.objective - fstar).collect()
        }
    };
    estimate_rate_from_errors(&errors, metric)
}

/// Closed-form contraction factor for step `alpha` and subregularity modulus
/// `kappa`; every variant maps into (0, 1) for positive arguments.
pub fn theoretical_q(alpha: f64, kappa: f64, variant: RateBound) -> f64 {
    assert!(alpha > 0.0 && kappa > 0.0);
    let ak = alpha * kappa;
    match variant {
        RateBound::SetDistance | RateBound::IterateStrong => 1.0 / (1.0 + ak).sqrt(),
        RateBound::IterateSubregular => 1.0 / (1.0 + ak / 4.0).sqrt(),
        RateBound::ObjectiveSubregular => {
            let s = (1.0 + ak / 4.0).sqrt();
            (s + 1.0) / (2.0 * s)
        }
        RateBound::ObjectiveStrong => {
            let s = (1.0 + ak).sqrt();
            (s + 1.0) / (2.0 * s)
        }
    }
}
