//! Built-in desk-scale instance generators and reproduction suites.
//!
//! The suites are shared between the `bench` subcommand and the acceptance
//! tests: seeded generation, a solve, and a property check per instance.
//! Everything is deterministic given the seed.

use crate::analysis::{
    active_sets, check_uniqueness, estimate_rate, AnalysisError, RateMetric, DEFAULT_TOL_MAG,
    DEFAULT_TOL_SUPP,
};
use crate::linalg::{column_rank, Matrix, Vector, DEFAULT_RANK_TOL};
use crate::problems::{build_poisson, LassoInstance, PoissonInstance};
use crate::solver::{ista_solve, solve, SolveResult, SolveStatus, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of one suite run: case count and human-readable failures.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The three small instances used as fixed regression anchors: a scalar
/// problem, a flat instance with a non-unique solution segment, and a
/// separable two-dimensional one.
pub fn hand_instances() -> Vec<LassoInstance> {
    vec![
        LassoInstance::new(Matrix::from_rows(&[&[1.0]]), Vector::from_slice(&[1.0]), 0.5)
            .unwrap(),
        LassoInstance::new(Matrix::from_rows(&[&[1.0, 1.0]]), Vector::from_slice(&[2.0]), 0.5)
            .unwrap(),
        LassoInstance::new(Matrix::identity(2), Vector::from_slice(&[1.0, 0.0]), 0.5).unwrap(),
    ]
}

/// Random l1-penalized least-squares instances: up to 5x8, integer entries
/// in {-2,...,2}, penalty from {0.3, 0.5, 1.0}.
pub fn random_lasso_instances(seed: u64, count: usize) -> Vec<LassoInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa076_1d64_78bd_642f);
    let mus = [0.3, 0.5, 1.0];
    (0..count)
        .map(|_| {
            let m = rng.random_range(1..=5);
            let n = rng.random_range(2..=8);
            let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(-2i32..=2) as f64).collect();
            let a = Matrix::new(m, n, data).unwrap();
            let b = Vector::raw((0..m).map(|_| rng.random_range(-3.0..3.0)).collect());
            let mu = mus[rng.random_range(0..mus.len())];
            LassoInstance::new(a, b, mu).unwrap()
        })
        .collect()
}

/// Random Poisson-KL instances with nonnegative entries, no zero rows, and a
/// strictly positive measurement vector.
pub fn random_poisson_instances(seed: u64, count: usize) -> Vec<PoissonInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xe703_7ed1_a0b4_28db);
    (0..count)
        .map(|_| {
            let m = rng.random_range(2..=4);
            let n = rng.random_range(2..=5);
            let mut data: Vec<f64> = (0..m * n)
                .map(|_| {
                    if rng.random_bool(0.35) {
                        0.0
                    } else {
                        rng.random_range(0.1..2.0)
                    }
                })
                .collect();
            for i in 0..m {
                if data[i * n..(i + 1) * n].iter().all(|&v| v == 0.0) {
                    let j = rng.random_range(0..n);
                    data[i * n + j] = rng.random_range(0.5..1.5);
                }
            }
            let a = Matrix::new(m, n, data).unwrap();
            let b = Vector::raw((0..m).map(|_| rng.random_range(0.5..3.0)).collect());
            PoissonInstance::new(a, b).unwrap()
        })
        .collect()
}

/// Fixed 3x4 Poisson instance used for the sublinear-decay check.
pub fn sublinear_poisson_instance() -> PoissonInstance {
    PoissonInstance::new(
        Matrix::from_rows(&[
            &[1.0, 0.5, 0.0, 0.2],
            &[0.3, 1.2, 0.7, 0.0],
            &[0.0, 0.4, 1.1, 0.9],
        ]),
        Vector::from_slice(&[1.0, 2.0, 1.5]),
    )
    .unwrap()
}

fn solve_lasso(inst: &LassoInstance, cfg: &SolverConfig) -> Result<SolveResult, String> {
    ista_solve(
        inst.matrix(),
        inst.rhs(),
        inst.mu(),
        &Vector::zeros(inst.matrix().cols()),
        cfg,
    )
    .map_err(|e| e.to_string())
}

/// Uniqueness equivalence harness: on the hand instances plus `instances`
/// random ones, the three uniqueness conditions and the LP polytope oracle
/// must agree, and the classical sufficient conditions must imply a unique
/// verdict.
pub fn uniqueness_equivalence_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut all = hand_instances();
    all.extend(random_lasso_instances(seed, instances));
    let mut failures = Vec::new();
    let cases = all.len();

    for (idx, inst) in all.iter().enumerate() {
        let cfg = SolverConfig { tol: 1e-10, max_iter: 200_000, ..Default::default() };
        let r = match solve_lasso(inst, &cfg) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("instance {idx}: solve failed: {e}"));
                continue;
            }
        };
        if r.status != SolveStatus::Converged {
            failures.push(format!("instance {idx}: no convergence within budget"));
            continue;
        }
        let report = match check_uniqueness(inst, &r.final_point) {
            Ok(rep) => rep,
            Err(e) => {
                failures.push(format!("instance {idx}: uniqueness check failed: {e}"));
                continue;
            }
        };
        if !report.consistent {
            failures.push(format!(
                "instance {idx}: verdicts disagree (ii={}, iii={}, iv={}, oracle={:?})",
                report.condition_ii, report.condition_iii, report.condition_iv,
                report.oracle_unique
            ));
            continue;
        }
        let sets =
            match active_sets(inst, &r.final_point, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("instance {idx}: active sets failed: {e}"));
                    continue;
                }
            };
        // Sufficient condition: no zero-active indices and a full-rank support.
        if sets.zero_active.is_empty() && report.a_j_full_rank && !report.unique() {
            failures.push(format!("instance {idx}: full-rank sufficiency violated"));
        }
        // Sufficient condition: full-rank active block.
        if !sets.active.is_empty() {
            let ae = inst.matrix().select_columns(&sets.active);
            if column_rank(&ae, DEFAULT_RANK_TOL) == sets.active.len() && !report.unique() {
                failures.push(format!("instance {idx}: active-block sufficiency violated"));
            }
        }
    }

    SuiteReport { name: "uniqueness".into(), cases, failures }
}

/// Tail contraction on random unique instances: every fitted tail must
/// contract per step (`monotone_q < 1`) and on geometric average
/// (`fitted_q < 0.999`). Instances whose runs are too short to fit a tail
/// are skipped until `instances` fitted cases accumulate.
pub fn lasso_qlinear_suite(seed: u64, instances: usize) -> SuiteReport {
    let candidates = random_lasso_instances(seed ^ 0x5851_f42d_4c95_7f2d, instances * 20);
    let mut failures = Vec::new();
    let mut fitted = 0usize;

    for (idx, inst) in candidates.iter().enumerate() {
        if fitted >= instances {
            break;
        }
        let tight = SolverConfig { tol: 1e-13, max_iter: 60_000, ..Default::default() };
        let Ok(reference) = solve_lasso(inst, &tight) else { continue };
        if reference.status != SolveStatus::Converged {
            continue;
        }
        let unique = match check_uniqueness(inst, &reference.final_point) {
            Ok(rep) => {
                if !rep.consistent {
                    failures.push(format!("instance {idx}: verdicts disagree"));
                    continue;
                }
                rep.unique()
            }
            Err(_) => continue,
        };
        if !unique {
            continue;
        }
        let cfg = SolverConfig {
            tol: 1e-11,
            max_iter: 60_000,
            reference_point: Some(reference.final_point.clone()),
            ..Default::default()
        };
        let Ok(run) = solve_lasso(inst, &cfg) else { continue };
        if run.status != SolveStatus::Converged {
            continue;
        }
        match estimate_rate(&run.log, RateMetric::IterateDistance, None) {
            Ok(est) => {
                fitted += 1;
                if est.monotone_q >= 1.0 {
                    failures.push(format!(
                        "instance {idx}: tail not contracting per step (monotone_q={})",
                        est.monotone_q
                    ));
                }
                if est.fitted_q >= 0.999 {
                    failures.push(format!(
                        "instance {idx}: fitted tail rate too close to 1 ({})",
                        est.fitted_q
                    ));
                }
            }
            Err(AnalysisError::InsufficientData) => continue,
            Err(e) => failures.push(format!("instance {idx}: rate fit failed: {e}")),
        }
    }

    if fitted < instances {
        failures.push(format!(
            "only {fitted} of {instances} unique instances produced a fittable tail"
        ));
    }
    SuiteReport { name: "lasso-qlinear".into(), cases: fitted, failures }
}

/// Sublinear decay check on the fixed 3x4 instance: the weighted gaps
/// `k * (F(x_k) - F*)` over the last 10% of the run must fall below 10% of
/// their run maximum, with `F*` taken from a solve at `tol = 1e-13`.
pub fn poisson_sublinear_check() -> Result<(), String> {
    let inst = sublinear_poisson_instance();
    let p = build_poisson(&inst);
    let x0 = Vector::ones(4);
    let tight = SolverConfig { tol: 1e-13, max_iter: 200_000, ..Default::default() };
    let reference = solve(&p, &x0, &tight).map_err(|e| format!("reference failed: {e}"))?;
    if reference.status != SolveStatus::Converged {
        return Err(format!("reference did not converge (status {:?})", reference.status));
    }
    let fstar = reference.final_objective;
    let cfg = SolverConfig { tol: 1e-11, max_iter: 200_000, ..Default::default() };
    let run = solve(&p, &x0, &cfg).map_err(|e| format!("main run failed: {e}"))?;
    if run.status != SolveStatus::Converged {
        return Err(format!("main run did not converge (status {:?})", run.status));
    }
    let weighted: Vec<f64> = run.log.iter().map(|r| r.k as f64 * (r.objective - fstar)).collect();
    let max = weighted.iter().fold(0.0f64, |a, &b| a.max(b));
    if max <= 0.0 {
        return Err("run too short to observe decay".into());
    }
    let tail_start = run.log.len() - (run.log.len() / 10).max(1);
    if let Some(bad) = weighted[tail_start..].iter().find(|&&w| w > 0.1 * max) {
        return Err(format!("tail value {bad} above 10% of maximum {max}"));
    }
    Ok(())
}

/// Per-step tail contraction on random Poisson instances, with the reference
/// point taken from a 100x tighter solve of the same trajectory.
pub fn poisson_qlinear_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut failures = Vec::new();
    let candidates = random_poisson_instances(seed ^ 0x1405_7b7e_f767_814f, instances * 20);
    let mut fitted = 0usize;
    for (idx, inst) in candidates.iter().enumerate() {
        if fitted >= instances {
            break;
        }
        let p = build_poisson(inst);
        let x0 = Vector::ones(inst.matrix().cols());
        let tight = SolverConfig { tol: 1e-11, max_iter: 200_000, ..Default::default() };
        let Ok(reference) = solve(&p, &x0, &tight) else { continue };
        if reference.status != SolveStatus::Converged {
            continue;
        }
        let cfg = SolverConfig {
            tol: 1e-9,
            max_iter: 200_000,
            reference_point: Some(reference.final_point.clone()),
            ..Default::default()
        };
        let Ok(run) = solve(&p, &x0, &cfg) else { continue };
        if run.status != SolveStatus::Converged {
            continue;
        }
        match estimate_rate(&run.log, RateMetric::IterateDistance, None) {
            Ok(est) => {
                fitted += 1;
                if est.monotone_q >= 1.0 {
                    failures.push(format!(
                        "poisson instance {idx}: tail not contracting (monotone_q={})",
                        est.monotone_q
                    ));
                }
            }
            Err(AnalysisError::InsufficientData) => continue,
            Err(e) => failures.push(format!("poisson instance {idx}: rate fit failed: {e}")),
        }
    }
    if fitted < instances {
        failures.push(format!(
            "only {fitted} of {instances} poisson instances produced a fittable tail"
        ));
    }
    SuiteReport { name: "poisson-qlinear".into(), cases: fitted, failures }
}

/// Poisson-KL rates: the sublinear decay check on the fixed instance plus
/// the per-step tail contraction on `instances` random instances.
pub fn poisson_rate_suite(seed: u64, instances: usize) -> SuiteReport {
    let mut report = poisson_qlinear_suite(seed, instances);
    report.name = "poisson-rates".into();
    report.cases += 1;
    if let Err(e) = poisson_sublinear_check() {
        report.failures.push(format!("sublinear: {e}"));
    }
    report
}
