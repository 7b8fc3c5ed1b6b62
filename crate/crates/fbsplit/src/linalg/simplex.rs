//! Two-phase dense simplex with Bland's anti-cycling rule.
//!
//! The problems solved here are tiny (tens of variables), produced by the
//! uniqueness and cone-kernel tests. Everything is kept in one dense tableau.

use super::{LinalgError, Matrix, Vector};

const PIVOT_TOL: f64 = 1e-9;
const PIVOT_LIMIT: usize = 20_000;

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VarBounds {
    pub fn free() -> Self {
        Self { lower: None, upper: None }
    }

    pub fn nonnegative() -> Self {
        Self { lower: Some(0.0), upper: None }
    }

    pub fn nonpositive() -> Self {
        Self { lower: None, upper: Some(0.0) }
    }

    pub fn boxed(lower: f64, upper: f64) -> Self {
        Self { lower: Some(lower), upper: Some(upper) }
    }
}

/// Small dense linear program: maximize `objective . x` subject to equality
/// rows and per-variable bounds.
#[derive(Debug, Clone)]
pub struct LpProblem {
    objective: Vector,
    equalities: Vec<(Vector, f64)>,
    bounds: Vec<VarBounds>,
}

impl LpProblem {
    /// Spec-shaped constructor with the equalities as a matrix/vector pair.
    pub fn new(
        objective: Vector,
        eq_lhs: Matrix,
        eq_rhs: Vector,
        bounds: Vec<VarBounds>,
    ) -> Result<Self, LinalgError> {
        if eq_lhs.cols() != objective.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "equality matrix has {} columns for {} variables",
                eq_lhs.cols(),
                objective.len()
            )));
        }
        if eq_lhs.rows() != eq_rhs.len() {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} equality rows but {} right-hand sides",
                eq_lhs.rows(),
                eq_rhs.len()
            )));
        }
        let rows = (0..eq_lhs.rows())
            .map(|i| (Vector::from_slice(eq_lhs.row(i)), eq_rhs[i]))
            .collect();
        Self::from_rows(objective, rows, bounds)
    }

    /// Row-wise constructor; permits a problem with no equality rows.
    pub fn from_rows(
        objective: Vector,
        equalities: Vec<(Vector, f64)>,
        bounds: Vec<VarBounds>,
    ) -> Result<Self, LinalgError> {
        let n = objective.len();
        if bounds.len() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} bounds for {n} variables",
                bounds.len()
            )));
        }
        for (i, (row, _)) in equalities.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::DimensionMismatch(format!(
                    "equality row {i} has {} coefficients for {n} variables",
                    row.len()
                )));
            }
        }
        for (j, b) in bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (b.lower, b.upper) {
                if l > u {
                    return Err(LinalgError::InvalidBounds(j));
                }
            }
        }
        Ok(Self { objective, equalities, bounds })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpFeasibilityResult {
    pub status: LpStatus,
    pub point: Option<Vector>,
    pub objective_value: Option<f64>,
}

// How an original variable maps into the nonnegative standard form.
enum VarMap {
    // x = offset + y[col]
    Shift { col: usize, offset: f64 },
    // x = offset - y[col]
    Flip { col: usize, offset: f64 },
    // x = y[pos] - y[neg]
    Split { pos: usize, neg: usize },
}

/// Solves the LP by two-phase simplex with Bland's rule.
pub fn lp_solve(p: &LpProblem) -> Result<LpFeasibilityResult, LinalgError> {
    let n_orig = p.num_vars();

    // Standard form: maximize c.y subject to Ay = b, y >= 0.
    let mut maps = Vec::with_capacity(n_orig);
    let mut n_std = 0usize;
    // (column of the shifted variable, range length) for boxed variables.
    let mut box_rows: Vec<(usize, f64)> = Vec::new();
    for b in &p.bounds {
        match (b.lower, b.upper) {
            (Some(l), None) => {
                maps.push(VarMap::Shift { col: n_std, offset: l });
                n_std += 1;
            }
            (Some(l), Some(u)) => {
                maps.push(VarMap::Shift { col: n_std, offset: l });
                box_rows.push((n_std, u - l));
                n_std += 1;
            }
            (None, Some(u)) => {
                maps.push(VarMap::Flip { col: n_std, offset: u });
                n_std += 1;
            }
            (None, None) => {
                maps.push(VarMap::Split { pos: n_std, neg: n_std + 1 });
                n_std += 2;
            }
        }
    }
    let n_slack = box_rows.len();
    let n_cols = n_std + n_slack;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (coef, b0) in &p.equalities {
        let mut row = vec![0.0; n_cols];
        let mut b = *b0;
        for j in 0..n_orig {
            let c = coef[j];
            if c == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    row[col] += c;
                    b -= c * offset;
                }
                VarMap::Flip { col, offset } => {
                    row[col] -= c;
                    b -= c * offset;
                }
                VarMap::Split { pos, neg } => {
                    row[pos] += c;
                    row[neg] -= c;
                }
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    for (k, &(col, range)) in box_rows.iter().enumerate() {
        let mut row = vec![0.0; n_cols];
        row[col] = 1.0;
        row[n_std + k] = 1.0;
        rows.push(row);
        rhs.push(range);
    }

    let mut c_std = vec![0.0; n_cols];
    let mut c_const = 0.0;
    for (j, map) in maps.iter().enumerate() {
        let c = p.objective[j];
        match *map {
            VarMap::Shift { col, offset } => {
                c_std[col] += c;
                c_const += c * offset;
            }
            VarMap::Flip { col, offset } => {
                c_std[col] -= c;
                c_const += c * offset;
            }
            VarMap::Split { pos, neg } => {
                c_std[pos] += c;
                c_std[neg] -= c;
            }
        }
    }

    let std_result = simplex_standard(rows, rhs, &c_std)?;
    Ok(match std_result {
        StdOutcome::Infeasible => LpFeasibilityResult {
            status: LpStatus::Infeasible,
            point: None,
            objective_value: None,
        },
        StdOutcome::Unbounded => LpFeasibilityResult {
            status: LpStatus::Unbounded,
            point: None,
            objective_value: None,
        },
        StdOutcome::Optimal(y) => {
            let mut x = vec![0.0; n_orig];
            for (j, map) in maps.iter().enumerate() {
                x[j] = match *map {
                    VarMap::Shift { col, offset } => offset + y[col],
                    VarMap::Flip { col, offset } => offset - y[col],
                    VarMap::Split { pos, neg } => y[pos] - y[neg],
                };
            }
            let value = c_const + c_std.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>();
            LpFeasibilityResult {
                status: LpStatus::Optimal,
                point: Some(Vector::raw(x)),
                objective_value: Some(value),
            }
        }
    })
}

enum StdOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

// maximize c.y subject to rows . y = rhs, y >= 0
fn simplex_standard(
    mut rows: Vec<Vec<f64>>,
    mut rhs: Vec<f64>,
    c: &[f64],
) -> Result<StdOutcome, LinalgError> {
    let n = c.len();
    let m = rows.len();
    if m == 0 {
        // Only nonnegativity: unbounded iff some coefficient rewards growth.
        if c.iter().any(|&cj| cj > PIVOT_TOL) {
            return Ok(StdOutcome::Unbounded);
        }
        return Ok(StdOutcome::Optimal(vec![0.0; n]));
    }

    for i in 0..m {
        if rhs[i] < 0.0 {
            for v in rows[i].iter_mut() {
                *v = -*v;
            }
            rhs[i] = -rhs[i];
        }
    }

    // Append artificial columns; initial basis is the artificial identity.
    let total = n + m;
    let mut t: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        let mut full = vec![0.0; total + 1];
        full[..n].copy_from_slice(row);
        full[n + i] = 1.0;
        full[total] = rhs[i];
        t.push(full);
    }
    let mut basis: Vec<usize> = (n..total).collect();

    // Phase 1: maximize -sum(artificials). Reduced costs start as column sums.
    let mut z = vec![0.0; total + 1];
    for col in 0..=total {
        z[col] = t.iter().map(|row| row[col]).sum();
    }
    for item in z.iter_mut().take(total).skip(n) {
        *item = 0.0;
    }
    let feas_scale = 1.0 + rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut pivots = 0usize;
    run_simplex(&mut t, &mut z, &mut basis, total, total, &mut pivots)?;
    if z[total] > PIVOT_TOL * feas_scale {
        return Ok(StdOutcome::Infeasible);
    }

    // Drive artificials out of the basis; rows that cannot pivot are redundant.
    let mut dead_rows: Vec<usize> = Vec::new();
    for i in 0..m {
        if basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL) {
            Some(j) => pivot(&mut t, &mut z, &mut basis, i, j),
            None => dead_rows.push(i),
        }
    }
    for &i in dead_rows.iter().rev() {
        t.remove(i);
        basis.remove(i);
    }

    // Phase 2: rebuild reduced costs for the true objective.
    let mut z2 = vec![0.0; total + 1];
    z2[..n].copy_from_slice(c);
    for (i, row) in t.iter().enumerate() {
        let cb = if basis[i] < n { c[basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for col in 0..=total {
                z2[col] -= cb * row[col];
            }
        }
    }
    for (i, _) in t.iter().enumerate() {
        debug_assert!(z2[basis[i]].abs() < 1e-6);
        z2[basis[i]] = 0.0;
    }
    // z2[total] currently holds -objective; keep that convention while pivoting.
    z2[total] = -z2[total];
    let unbounded = run_simplex(&mut t, &mut z2, &mut basis, n, total, &mut pivots)?;
    if unbounded {
        return Ok(StdOutcome::Unbounded);
    }

    let mut y = vec![0.0; n];
    for (i, row) in t.iter().enumerate() {
        if basis[i] < n {
            y[basis[i]] = row[total].max(0.0);
        }
    }
    Ok(StdOutcome::Optimal(y))
}

// Bland's rule loop. Columns >= `eligible` are excluded from entering.
// Returns true if the objective is unbounded.
fn run_simplex(
    t: &mut [Vec<f64>],
    z: &mut [f64],
    basis: &mut [usize],
    eligible: usize,
    total: usize,
    pivots: &mut usize,
) -> Result<bool, LinalgError> {
    loop {
        let entering = (0..eligible).find(|&j| z[j] > PIVOT_TOL);
        let Some(e) = entering else {
            return Ok(false);
        };
        let mut leave: Option<(usize, f64)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[e] > PIVOT_TOL {
                let ratio = row[total] / row[e];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - PIVOT_TOL
                            || (ratio < lr + PIVOT_TOL && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(true);
        };
        pivot(t, z, basis, r, e);
        *pivots += 1;
        if *pivots > PIVOT_LIMIT {
            return Err(LinalgError::NumericalFailure);
        }
    }
}

fn pivot(t: &mut [Vec<f64>], z: &mut [f64], basis: &mut [usize], r: usize, e: usize) {
    let p = t[r][e];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r || row[e] == 0.0 {
            continue;
        }
        let f = row[e];
        for (v, pv) in row.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        row[e] = 0.0;
    }
    if z[e] != 0.0 {
        let f = z[e];
        for (v, pv) in z.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
        z[e] = 0.0;
    }
    basis[r] = e;
}
