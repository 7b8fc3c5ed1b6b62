//! Uniqueness certificates for l1-penalized least squares.
//!
//! Three equivalent finite-dimensional conditions are decided, plus an
//! independent LP oracle over the solution polytope:
//!
//! * positive system: the homogeneous system `A_J u - A_K Q_K w = 0`,
//!   `w >= 0` admits only the zero solution (and `A_J` has full column rank);
//! * positive linear independence: the kernel of
//!   `A_J A_J^+ A_K Q_K - A_K Q_K` meets the nonnegative orthant only at 0;
//! * Slater form: some `y` satisfies `(Q_K A_K^T A_J A_J^+ - Q_K A_K^T) y < 0`
//!   strictly.
//!
//! All three share the active sets computed from the candidate point, so the
//! verdicts are comparable; disagreement indicates a numerical failure, not a
//! modeling choice.

use super::{active_sets, ActiveSets, AnalysisError, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP};
use crate::linalg::{
    column_rank, least_squares, lp_solve, LinalgError, LpFeasibilityResult, LpProblem, LpStatus,
    VarBounds, Vector, DEFAULT_RANK_TOL,
};
use crate::problems::LassoInstance;

/// Margin above which an LP optimum counts as a nontrivial cone element.
const CONE_TOL: f64 = 1e-9;
/// Coordinate spread above which the solution polytope is not a singleton.
const GAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    /// The homogeneous sign-constrained system has only the zero solution.
    pub condition_ii: bool,
    /// Positive linear independence of the projected columns.
    pub condition_iii: bool,
    /// A strict Slater point exists.
    pub condition_iv: bool,
    pub a_j_full_rank: bool,
    /// Witness for the Slater condition, when one was found.
    pub slater_point: Option<Vector>,
    /// Verdict of the independent solution-polytope oracle.
    pub oracle_unique: Option<bool>,
    /// All computed verdicts agree.
    pub consistent: bool,
}

impl UniquenessReport {
    pub fn unique(&self) -> bool {
        self.condition_ii
    }
}

fn expect_optimal(r: LpFeasibilityResult) -> Result<(Vector, f64), AnalysisError> {
    match (r.status, r.point, r.objective_value) {
        (LpStatus::Optimal, Some(p), Some(v)) => Ok((p, v)),
        _ => Err(AnalysisError::Linalg(LinalgError::NumericalFailure)),
    }
}

fn support_full_rank(inst: &LassoInstance, sets: &ActiveSets) -> bool {
    if sets.support.is_empty() {
        return true;
    }
    let aj = inst.matrix().select_columns(&sets.support);
    column_rank(&aj, DEFAULT_RANK_TOL) == sets.support.len()
}

// Decides whether `A_J u - A_K Q_K w = 0, w in [0,1]^K` admits w != 0,
// by maximizing the mass of w.
fn positive_system_nontrivial(
    inst: &LassoInstance,
    sets: &ActiveSets,
) -> Result<bool, AnalysisError> {
    let a = inst.matrix();
    let nj = sets.support.len();
    let nk = sets.zero_active.len();
    let mut rows = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let mut coef = vec![0.0; nj + nk];
        for (jj, &j) in sets.support.iter().enumerate() {
            coef[jj] = a.get(i, j);
        }
        for (kk, &k) in sets.zero_active.iter().enumerate() {
            coef[nj + kk] = -sets.q_signs[kk] * a.get(i, k);
        }
        rows.push((Vector::from_slice(&coef), 0.0));
    }
    let mut objective = vec![0.0; nj + nk];
    objective[nj..].fill(1.0);
    let mut bounds = vec![VarBounds::free(); nj];
    bounds.extend(vec![VarBounds::boxed(0.0, 1.0); nk]);
    let p = LpProblem::from_rows(Vector::from_slice(&objective), rows, bounds)
        .map_err(AnalysisError::Linalg)?;
    let (_, value) = expect_optimal(lp_solve(&p)?)?;
    Ok(value > CONE_TOL)
}

// Columns of `A_J A_J^+ A_K Q_K - A_K Q_K`, one per zero-active index.
fn projected_kernel_columns(
    inst: &LassoInstance,
    sets: &ActiveSets,
) -> Result<Vec<Vector>, AnalysisError> {
    let a = inst.matrix();
    let mut cols = Vec::with_capacity(sets.zero_active.len());
    if sets.support.is_empty() {
        for (kk, &k) in sets.zero_active.iter().enumerate() {
            cols.push(a.col(k).scale(-sets.q_signs[kk]));
        }
        return Ok(cols);
    }
    let aj = a.select_columns(&sets.support);
    for (kk, &k) in sets.zero_active.iter().enumerate() {
        let c = a.col(k).scale(sets.q_signs[kk]);
        let z = least_squares(&aj, &c).map_err(AnalysisError::Linalg)?;
        cols.push(aj.matvec(&z).sub(&c));
    }
    Ok(cols)
}

// ker(M) meets the nonnegative orthant nontrivially iff max 1.w over
// `M w = 0, 0 <= w <= 1` is positive.
fn cone_kernel_nontrivial(m_cols: &[Vector]) -> Result<bool, AnalysisError> {
    let nk = m_cols.len();
    let m = m_cols[0].len();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let coef: Vec<f64> = m_cols.iter().map(|c| c[i]).collect();
        rows.push((Vector::from_slice(&coef), 0.0));
    }
    let p = LpProblem::from_rows(
        Vector::ones(nk),
        rows,
        vec![VarBounds::boxed(0.0, 1.0); nk],
    )
    .map_err(AnalysisError::Linalg)?;
    let (_, value) = expect_optimal(lp_solve(&p)?)?;
    Ok(value > CONE_TOL)
}

// Maximize t subject to `M^T y + t 1 <= 0, t <= 1`; a positive optimum
// certifies a strict Slater point.
fn slater_search(m_cols: &[Vector]) -> Result<Option<Vector>, AnalysisError> {
    let nk = m_cols.len();
    let m = m_cols[0].len();
    let nvars = m + 1 + nk; // y, t, slacks
    let mut rows = Vec::with_capacity(nk);
    for (kk, col) in m_cols.iter().enumerate() {
        let mut coef = vec![0.0; nvars];
        for i in 0..m {
            coef[i] = col[i];
        }
        coef[m] = 1.0;
        coef[m + 1 + kk] = 1.0;
        rows.push((Vector::from_slice(&coef), 0.0));
    }
    let mut objective = vec![0.0; nvars];
    objective[m] = 1.0;
    let mut bounds = vec![VarBounds::free(); m];
    bounds.push(VarBounds { lower: None, upper: Some(1.0) });
    bounds.extend(vec![VarBounds::nonnegative(); nk]);
    let p = LpProblem::from_rows(Vector::from_slice(&objective), rows, bounds)
        .map_err(AnalysisError::Linalg)?;
    let (point, value) = expect_optimal(lp_solve(&p)?)?;
    if value > CONE_TOL {
        Ok(Some(Vector::from_slice(&point.as_slice()[..m])))
    } else {
        Ok(None)
    }
}

fn polytope_is_singleton(
    inst: &LassoInstance,
    sets: &ActiveSets,
    x_star: &Vector,
) -> Result<bool, AnalysisError> {
    let ne = sets.active.len();
    if ne == 0 {
        return Ok(true);
    }
    let a = inst.matrix();
    let ae = a.select_columns(&sets.active);
    let xe = Vector::raw(sets.active.iter().map(|&j| x_star[j]).collect());
    let rhs = ae.matvec(&xe);
    let rows: Vec<(Vector, f64)> = (0..a.rows())
        .map(|i| (Vector::from_slice(ae.row(i)), rhs[i]))
        .collect();
    // Every solution keeps the sign pattern s_j x_j <= 0 on the active set.
    let bounds: Vec<VarBounds> = sets
        .active
        .iter()
        .map(|&j| {
            if sets.s[j] < 0.0 {
                VarBounds::nonnegative()
            } else if sets.s[j] > 0.0 {
                VarBounds::nonpositive()
            } else {
                VarBounds::free()
            }
        })
        .collect();

    for pos in 0..ne {
        let mut hi = vec![0.0; ne];
        hi[pos] = 1.0;
        let p_hi = LpProblem::from_rows(Vector::from_slice(&hi), rows.clone(), bounds.clone())
            .map_err(AnalysisError::Linalg)?;
        let r_hi = lp_solve(&p_hi)?;
        if r_hi.status == LpStatus::Unbounded {
            return Ok(false);
        }
        let mut lo = vec![0.0; ne];
        lo[pos] = -1.0;
        let p_lo = LpProblem::from_rows(Vector::from_slice(&lo), rows.clone(), bounds.clone())
            .map_err(AnalysisError::Linalg)?;
        let r_lo = lp_solve(&p_lo)?;
        if r_lo.status == LpStatus::Unbounded {
            return Ok(false);
        }
        let (_, vmax) = expect_optimal(r_hi)?;
        let (_, vneg) = expect_optimal(r_lo)?;
        if vmax + vneg > GAP_TOL {
            // max x_j - min x_j = vmax - (-vneg)
            return Ok(false);
        }
    }
    Ok(true)
}

/// Decides uniqueness of the optimal solution for the instance, given an
/// (approximately) optimal point, via the three equivalent conditions and an
/// independent LP oracle over the solution polytope.
pub fn check_uniqueness(
    inst: &LassoInstance,
    x_star: &Vector,
) -> Result<UniquenessReport, AnalysisError> {
    let sets = active_sets(inst, x_star, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP)?;
    check_uniqueness_with_sets(inst, x_star, &sets)
}

pub(crate) fn check_uniqueness_with_sets(
    inst: &LassoInstance,
    x_star: &Vector,
    sets: &ActiveSets,
) -> Result<UniquenessReport, AnalysisError> {
    let full_rank = support_full_rank(inst, sets);

    let (ii, iii, iv, slater) = if !full_rank {
        (false, false, false, None)
    } else if sets.zero_active.is_empty() {
        (true, true, true, None)
    } else {
        let ii = !positive_system_nontrivial(inst, sets)?;
        let cols = projected_kernel_columns(inst, sets)?;
        let iii = !cone_kernel_nontrivial(&cols)?;
        let slater = slater_search(&cols)?;
        let iv = slater.is_some();
        (ii, iii, iv, slater)
    };

    let oracle = polytope_is_singleton(inst, sets, x_star)?;
    let consistent = ii == iii && iii == iv && oracle == ii;
    Ok(UniquenessReport {
        condition_ii: ii,
        condition_iii: iii,
        condition_iv: iv,
        a_j_full_rank: full_rank,
        slater_point: slater,
        oracle_unique: Some(oracle),
        consistent,
    })
}

/// Independent uniqueness oracle: for each active coordinate, the spread of
/// `x_j` over the solution polytope is computed by a pair of LPs; the
/// solution set is a singleton iff every spread is below tolerance.
pub fn solution_polytope_oracle(
    inst: &LassoInstance,
    x_star: &Vector,
) -> Result<bool, AnalysisError> {
    let sets = active_sets(inst, x_star, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP)?;
    polytope_is_singleton(inst, &sets, x_star)
}
