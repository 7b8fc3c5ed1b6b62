//! Command-line front end: `solve`, `analyze`, and `bench` subcommands over
//! CSV instance files.
//!
//! Exit codes are a stable contract:
//! 0 success (converged / consistent / all suites pass), 1 usage or parse
//! error, 2 iteration budget exhausted, 3 divergence detected, 4 analysis
//! cross-check disagreement, 5 analyze called on a non-optimal point,
//! 6 bench suite failure.

use crate::analysis::{
    active_sets, check_uniqueness, check_strong_subregularity_l1, estimate_rate, AnalysisError,
    RateMetric, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP,
};
use crate::io::{format_value, read_matrix, read_vector, write_iterate_log, write_vector};
use crate::linesearch::forward_backward_point;
use crate::oracles::CompositeProblem;
use crate::problems::{
    build_l1_smooth, build_lasso, build_poisson, quadratic_oracle, LassoInstance,
    PoissonInstance,
};
use crate::solver::{solve, SolveStatus, SolverConfig};
use crate::suite::{lasso_qlinear_suite, poisson_rate_suite, uniqueness_equivalence_suite, SuiteReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITERATIONS: i32 = 2;
pub const EXIT_DIVERGING: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;
pub const EXIT_NOT_OPTIMAL: i32 = 5;
pub const EXIT_SUITE_FAILURE: i32 = 6;

#[derive(Parser)]
#[command(
    name = "fbsplit",
    about = "Forward-backward splitting solver with backtracking line search",
    disable_version_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance loaded from CSV files.
    Solve(SolveArgs),
    /// Analyze a solved instance: active sets, uniqueness, curvature, rates.
    Analyze(AnalyzeArgs),
    /// Run the built-in reproduction suites.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemKind {
    /// 0.5 ||Ax-b||^2 + mu ||x||_1 (A from --matrix, b from --rhs)
    Lasso,
    /// 0.5 x'Qx + c'x + mu ||x||_1 (Q from --matrix, c from --rhs)
    L1smooth,
    /// Kullback-Leibler fit of Ax to b over x >= 0; --mu adds mu <e, x>
    Poisson,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    /// Matrix CSV: one row per line, comma-separated, no header.
    #[arg(long)]
    matrix: PathBuf,
    /// Vector CSV: one value per line, no header.
    #[arg(long)]
    rhs: PathBuf,
    /// Penalty weight; required for lasso and l1smooth.
    #[arg(long)]
    mu: Option<f64>,
    /// Initial trial step size.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Line-search shrink factor in (0,1).
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Residual stopping threshold.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Starting point CSV; defaults to zeros (lasso, l1smooth) or ones (poisson).
    #[arg(long)]
    point: Option<PathBuf>,
    /// Where to write the final point (one-column CSV).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the iterate log CSV.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    problem: ProblemKind,
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long)]
    mu: Option<f64>,
    /// Candidate solution point CSV.
    #[arg(long)]
    point: PathBuf,
    /// Where to write the JSON report; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Which suite to run; all of them when omitted.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Override the per-suite instance counts.
    #[arg(long)]
    instances: Option<usize>,
    /// Where to write the summary CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses arguments (the first item is the program name) and runs the
/// requested command, returning the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(a).unwrap_or_else(|e| usage(&e)),
        Command::Analyze(a) => cmd_analyze(a).unwrap_or_else(|e| usage(&e)),
        Command::Bench(a) => cmd_bench(a).unwrap_or_else(|e| usage(&e)),
    }
}

fn usage(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

struct LoadedProblem {
    problem: CompositeProblem,
    default_start: crate::linalg::Vector,
}

fn load_problem(
    kind: ProblemKind,
    matrix: &PathBuf,
    rhs: &PathBuf,
    mu: Option<f64>,
) -> Result<LoadedProblem, String> {
    let a = read_matrix(matrix).map_err(|e| e.to_string())?;
    let b = read_vector(rhs).map_err(|e| e.to_string())?;
    match kind {
        ProblemKind::Lasso => {
            let mu = mu.ok_or("--mu is required for lasso")?;
            let inst = LassoInstance::new(a, b, mu).map_err(|e| e.to_string())?;
            let n = inst.matrix().cols();
            Ok(LoadedProblem {
                problem: build_lasso(&inst),
                default_start: crate::linalg::Vector::zeros(n),
            })
        }
        ProblemKind::L1smooth => {
            let mu = mu.ok_or("--mu is required for l1smooth")?;
            if a.rows() != a.cols() {
                return Err("l1smooth needs a square quadratic term".into());
            }
            if a.cols() != b.len() {
                return Err("linear term length must match the quadratic term".into());
            }
            for i in 0..a.rows() {
                for j in (i + 1)..a.cols() {
                    if (a.get(i, j) - a.get(j, i)).abs() > 1e-12 * (1.0 + a.get(i, j).abs()) {
                        return Err("quadratic term must be symmetric".into());
                    }
                }
            }
            let n = a.cols();
            let f = quadratic_oracle(&a, &b);
            Ok(LoadedProblem {
                problem: build_l1_smooth(f, mu, n),
                default_start: crate::linalg::Vector::zeros(n),
            })
        }
        ProblemKind::Poisson => {
            let mut inst = PoissonInstance::new(a, b).map_err(|e| e.to_string())?;
            if let Some(mu) = mu {
                inst = inst.with_l1(mu).map_err(|e| e.to_string())?;
            }
            let zeros = inst.zero_columns();
            if !zeros.is_empty() {
                eprintln!(
                    "note: columns {zeros:?} are zero; the solution set is unbounded along them"
                );
            }
            let n = inst.matrix().cols();
            Ok(LoadedProblem {
                problem: build_poisson(&inst),
                default_start: crate::linalg::Vector::ones(n),
            })
        }
    }
}

fn cmd_solve(a: SolveArgs) -> Result<i32, String> {
    let loaded = load_problem(a.problem, &a.matrix, &a.rhs, a.mu)?;
    let x0 = match &a.point {
        Some(p) => read_vector(p).map_err(|e| e.to_string())?,
        None => loaded.default_start.clone(),
    };
    let cfg = SolverConfig {
        sigma: a.sigma,
        theta: a.theta,
        tol: a.tol,
        max_iter: a.max_iter,
        ..Default::default()
    };
    let params_ok = a.sigma > 0.0 && a.theta > 0.0 && a.theta < 1.0 && a.tol > 0.0
        && a.max_iter >= 1;
    if !params_ok {
        return Err("invalid solver parameters (need sigma>0, 0<theta<1, tol>0, max-iter>=1)"
            .into());
    }
    let result = solve(&loaded.problem, &x0, &cfg).map_err(|e| e.to_string())?;
    if let Some(log_path) = &a.log {
        write_iterate_log(log_path, &result.log).map_err(|e| e.to_string())?;
    }
    if let Some(out_path) = &a.out {
        write_vector(out_path, &result.final_point).map_err(|e| e.to_string())?;
    }
    let status = match result.status {
        SolveStatus::Converged => "Converged",
        SolveStatus::MaxIterations => "MaxIterations",
        SolveStatus::Diverging => "Diverging",
    };
    println!("status: {status}");
    println!("iterations: {}", result.iterations());
    println!("objective: {}", format_value(result.final_objective));
    if let Some(last) = result.log.last() {
        println!("residual: {}", format_value(last.residual));
    }
    Ok(match result.status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterations => EXIT_MAX_ITERATIONS,
        SolveStatus::Diverging => EXIT_DIVERGING,
    })
}

#[derive(Serialize)]
struct ActiveSetsJson {
    #[serde(rename = "E")]
    e: Vec<usize>,
    #[serde(rename = "J")]
    j: Vec<usize>,
    #[serde(rename = "K")]
    k: Vec<usize>,
    signs: Vec<f64>,
    degenerate: Vec<usize>,
    near_threshold: Vec<usize>,
}

#[derive(Serialize)]
struct UniquenessJson {
    ii: bool,
    iii: bool,
    iv: bool,
    a_j_full_rank: bool,
    oracle: Option<bool>,
    consistent: bool,
    slater_point: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct SubregularityJson {
    holds: bool,
    active: Vec<usize>,
    modulus_estimate: Option<f64>,
}

#[derive(Serialize)]
struct RateJson {
    window_start: usize,
    fitted_q: f64,
    monotone_q: f64,
    metric: String,
}

#[derive(Serialize)]
struct AnalyzeJson {
    active_sets: ActiveSetsJson,
    uniqueness: UniquenessJson,
    subregularity: SubregularityJson,
    rate: Option<RateJson>,
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<i32, String> {
    if a.problem != ProblemKind::Lasso {
        return Err("analyze currently supports --problem lasso".into());
    }
    let mat = read_matrix(&a.matrix).map_err(|e| e.to_string())?;
    let rhs = read_vector(&a.rhs).map_err(|e| e.to_string())?;
    let mu = a.mu.ok_or("--mu is required for lasso")?;
    let inst = LassoInstance::new(mat.clone(), rhs.clone(), mu).map_err(|e| e.to_string())?;
    let x_star = read_vector(&a.point).map_err(|e| e.to_string())?;
    if x_star.len() != mat.cols() {
        return Err(format!(
            "point has length {}, instance has {} variables",
            x_star.len(),
            mat.cols()
        ));
    }

    // Optimality screen: prox-gradient residual at the Lipschitz step.
    let p = build_lasso(&inst);
    let alpha = match p.f.lipschitz_constant() {
        Some(l) if l > 0.0 => 1.0 / l,
        _ => 1.0,
    };
    let fb = forward_backward_point(&p, &x_star, alpha).map_err(|e| e.to_string())?;
    let residual = x_star.dist(&fb) / alpha;
    if residual > 1e-6 {
        eprintln!(
            "error: point is not optimal to tolerance (prox-gradient residual {})",
            format_value(residual)
        );
        return Ok(EXIT_NOT_OPTIMAL);
    }

    let sets = match active_sets(&inst, &x_star, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP) {
        Ok(s) => s,
        Err(AnalysisError::InconsistentOptimality { index }) => {
            eprintln!(
                "error: point is not optimal to tolerance (inconsistent support at {index})"
            );
            return Ok(EXIT_NOT_OPTIMAL);
        }
        Err(e) => return Err(e.to_string()),
    };
    let uniq = check_uniqueness(&inst, &x_star).map_err(|e| e.to_string())?;
    let gram = mat.gram();
    let grad = mat.tr_matvec(&mat.matvec(&x_star).sub(&rhs));
    let sub = check_strong_subregularity_l1(&gram, &grad, &x_star, mu)
        .map_err(|e| e.to_string())?;

    // Empirical tail rate of a fresh run against the supplied point.
    let cfg = SolverConfig {
        tol: 1e-11,
        max_iter: 200_000,
        reference_point: Some(x_star.clone()),
        ..Default::default()
    };
    let rate = solve(&p, &crate::linalg::Vector::zeros(mat.cols()), &cfg)
        .ok()
        .and_then(|run| estimate_rate(&run.log, RateMetric::IterateDistance, None).ok())
        .map(|est| RateJson {
            window_start: est.window_start,
            fitted_q: est.fitted_q,
            monotone_q: est.monotone_q,
            metric: "iterate_distance".into(),
        });

    let report = AnalyzeJson {
        active_sets: ActiveSetsJson {
            e: sets.active.clone(),
            j: sets.support.clone(),
            k: sets.zero_active.clone(),
            signs: sets.q_signs.clone(),
            degenerate: sets.degenerate_signs.clone(),
            near_threshold: sets.near_threshold.clone(),
        },
        uniqueness: UniquenessJson {
            ii: uniq.condition_ii,
            iii: uniq.condition_iii,
            iv: uniq.condition_iv,
            a_j_full_rank: uniq.a_j_full_rank,
            oracle: uniq.oracle_unique,
            consistent: uniq.consistent,
            slater_point: uniq.slater_point.as_ref().map(|v| v.as_slice().to_vec()),
        },
        subregularity: SubregularityJson {
            holds: sub.holds,
            active: sub.active.clone(),
            modulus_estimate: sub.modulus_lower_bound,
        },
        rate,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    match &a.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| e.to_string())?,
        None => println!("{json}"),
    }
    Ok(if uniq.consistent { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn cmd_bench(a: BenchArgs) -> Result<i32, String> {
    let which = a.suite.as_deref().unwrap_or("all");
    let mut reports: Vec<SuiteReport> = Vec::new();
    match which {
        "all" => {
            reports.push(uniqueness_equivalence_suite(a.seed, a.instances.unwrap_or(100)));
            reports.push(lasso_qlinear_suite(a.seed, a.instances.unwrap_or(20)));
            reports.push(poisson_rate_suite(a.seed, a.instances.unwrap_or(5)));
        }
        "uniqueness" => {
            reports.push(uniqueness_equivalence_suite(a.seed, a.instances.unwrap_or(100)))
        }
        "lasso-qlinear" => {
            reports.push(lasso_qlinear_suite(a.seed, a.instances.unwrap_or(20)))
        }
        "poisson-rates" => reports.push(poisson_rate_suite(a.seed, a.instances.unwrap_or(5))),
        other => {
            return Err(format!(
                "unknown suite {other:?} (expected all, uniqueness, lasso-qlinear, poisson-rates)"
            ))
        }
    }

    let mut csv = String::from("suite,cases,failures,status\n");
    for r in &reports {
        let status = if r.passed() { "pass" } else { "fail" };
        let line = format!("{},{},{},{}", r.name, r.cases, r.failures.len(), status);
        println!("{line}");
        csv.push_str(&line);
        csv.push('\n');
    }
    if let Some(path) = &a.out {
        std::fs::write(path, csv).map_err(|e| e.to_string())?;
    }

    let mut failed = false;
    for r in &reports {
        for f in &r.failures {
            eprintln!("suite {} failed: {f}", r.name);
            failed = true;
        }
    }
    Ok(if failed { EXIT_SUITE_FAILURE } else { EXIT_OK })
}
