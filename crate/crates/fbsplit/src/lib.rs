//! Forward-backward splitting for composite convex minimization
//! `min F = f + g`, with the backtracking line search that keeps the method
//! convergent when the gradient of `f` is not globally Lipschitz, plus an
//! analysis toolkit: per-iteration certificates, empirical and closed-form
//! linear-rate estimates, and full uniqueness certificates for l1-penalized
//! least squares.
//!
//! The `examples/` directory is the guided tour; each file is a runnable
//! demonstration of one capability:
//!
//! ```bash
//! cargo run --example lasso_ista
//! cargo run --example poisson_inverse
//! cargo run --example line_search
//! cargo run --example custom_problem
//! cargo run --example divergence
//! cargo run --example uniqueness
//! cargo run --example subregularity
//! cargo run --example rates
//! ```
//!
//! A quick solve:
//!
//! ```
//! use fbsplit::linalg::{Matrix, Vector};
//! use fbsplit::solver::{ista_solve, SolverConfig, SolveStatus};
//!
//! let a = Matrix::from_rows(&[&[1.0]]);
//! let b = Vector::from_slice(&[1.0]);
//! let r = ista_solve(&a, &b, 0.5, &Vector::zeros(1), &SolverConfig::default()).unwrap();
//! assert_eq!(r.status, SolveStatus::Converged);
//! assert!((r.final_point[0] - 0.5).abs() < 1e-8);
//! ```
//!
//! The thin `fbsplit` binary exposes the same machinery over CSV files with
//! `solve`, `analyze`, and `bench` subcommands.

pub mod analysis;
pub mod cli;
pub mod io;
pub mod linalg;
pub mod linesearch;
pub mod oracles;
pub mod problems;
pub mod solver;
pub mod suite;

pub use linalg::{Matrix, Vector};
pub use oracles::{CompositeProblem, ExtendedReal, ProxOracle, SmoothOracle};
pub use solver::{solve, IterateRecord, SolveResult, SolveStatus, SolverConfig};
