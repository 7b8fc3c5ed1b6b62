//! Second-order certificates for l1-penalized smooth problems.
//!
//! At a candidate optimum the active Hessian block `H_E` must be nonsingular
//! over the cone of directions that keep the active zero coordinates on the
//! descent side of their gradient signs. The kernel-cone intersection is
//! decided exactly (rank test on the free block plus one LP over the signed
//! block); the curvature modulus over the cone is only estimated by sampling,
//! since certifying a minimum over a cone is a copositivity problem.

use super::{AnalysisError, DEFAULT_TOL_MAG, DEFAULT_TOL_SUPP};
use crate::linalg::{
    column_rank, lp_solve, LinalgError, LpProblem, LpStatus, Matrix, VarBounds, Vector,
    DEFAULT_RANK_TOL,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONE_TOL: f64 = 1e-9;
const MODULUS_SAMPLES: usize = 10_000;

/// Sign constraint a cone places on one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeConstraint {
    Free,
    NonNegative,
    NonPositive,
}

#[derive(Debug, Clone)]
pub struct SubregularityCertificate {
    /// Indices where the gradient magnitude reaches the penalty weight.
    pub active: Vec<usize>,
    /// Hessian block over the active set; `None` when the set is empty.
    pub h_active: Option<Matrix>,
    /// Per-active-index sign constraints describing the test cone.
    pub cone: Vec<ConeConstraint>,
    /// Kernel of the active Hessian block meets the cone only at zero.
    pub holds: bool,
    /// Sampled lower estimate of the curvature modulus over the cone;
    /// an estimate, not a certificate.
    pub modulus_lower_bound: Option<f64>,
}

/// Checks the second-order uniqueness/rate certificate for
/// `min f + mu ||.||_1` at `x_star`, from the gradient and Hessian of `f`.
pub fn check_strong_subregularity_l1(
    hessian: &Matrix,
    gradient: &Vector,
    x_star: &Vector,
    mu: f64,
) -> Result<SubregularityCertificate, AnalysisError> {
    let n = x_star.len();
    assert!(mu > 0.0 && mu.is_finite());
    if gradient.len() != n || hessian.rows() != n || hessian.cols() != n {
        return Err(AnalysisError::Dimension(format!(
            "hessian {}x{}, gradient {}, point {n}",
            hessian.rows(),
            hessian.cols(),
            gradient.len()
        )));
    }

    let supp_threshold = DEFAULT_TOL_SUPP * x_star.norm_inf().max(1.0);
    let active_threshold = mu * (1.0 - DEFAULT_TOL_MAG);
    let active: Vec<usize> = (0..n).filter(|&j| gradient[j].abs() >= active_threshold).collect();
    let ne = active.len();
    if ne == 0 {
        // The candidate sits strictly inside the subdifferential ball; the
        // certificate is vacuously true.
        return Ok(SubregularityCertificate {
            active,
            h_active: None,
            cone: Vec::new(),
            holds: true,
            modulus_lower_bound: None,
        });
    }

    let mut cone = Vec::with_capacity(ne);
    let mut free_pos = Vec::new();
    let mut signed_pos = Vec::new();
    for (pos, &j) in active.iter().enumerate() {
        if x_star[j].abs() > supp_threshold {
            cone.push(ConeConstraint::Free);
            free_pos.push(pos);
        } else {
            // u_j * grad_j <= 0
            cone.push(if gradient[j] > 0.0 {
                ConeConstraint::NonPositive
            } else {
                ConeConstraint::NonNegative
            });
            signed_pos.push(pos);
        }
    }

    let mut h_e = Matrix::zeros(ne, ne);
    for (pi, &i) in active.iter().enumerate() {
        for (pj, &j) in active.iter().enumerate() {
            h_e.set(pi, pj, hessian.get(i, j));
        }
    }

    // Kernel vectors supported on the free block.
    let rank_ok = if free_pos.is_empty() {
        true
    } else {
        let h_free = h_e.select_columns(&free_pos);
        column_rank(&h_free, DEFAULT_RANK_TOL) == free_pos.len()
    };

    // Kernel vectors with mass on the signed block, found by LP.
    let signed_nontrivial = if signed_pos.is_empty() || !rank_ok {
        false
    } else {
        let nf = free_pos.len();
        let nk = signed_pos.len();
        let mut rows = Vec::with_capacity(ne);
        for r in 0..ne {
            let mut coef = vec![0.0; nf + nk];
            for (c, &pos) in free_pos.iter().enumerate() {
                coef[c] = h_e.get(r, pos);
            }
            for (c, &pos) in signed_pos.iter().enumerate() {
                let dir = match cone[pos] {
                    ConeConstraint::NonPositive => -1.0,
                    ConeConstraint::NonNegative => 1.0,
                    ConeConstraint::Free => unreachable!(),
                };
                coef[nf + c] = dir * h_e.get(r, pos);
            }
            rows.push((Vector::from_slice(&coef), 0.0));
        }
        let mut objective = vec![0.0; nf + nk];
        objective[nf..].fill(1.0);
        let mut bounds = vec![VarBounds::free(); nf];
        bounds.extend(vec![VarBounds::boxed(0.0, 1.0); nk]);
        let p = LpProblem::from_rows(Vector::from_slice(&objective), rows, bounds)
            .map_err(AnalysisError::Linalg)?;
        let r = lp_solve(&p)?;
        match (r.status, r.objective_value) {
            (LpStatus::Optimal, Some(v)) => v > CONE_TOL,
            _ => return Err(AnalysisError::Linalg(LinalgError::NumericalFailure)),
        }
    };

    let holds = rank_ok && !signed_nontrivial;

    let modulus_lower_bound = if holds {
        let est = sample_modulus(&h_e, &cone);
        if est > 0.0 {
            Some(est)
        } else {
            None
        }
    } else {
        None
    };

    Ok(SubregularityCertificate { active, h_active: Some(h_e), cone, holds, modulus_lower_bound })
}

// Minimum Rayleigh quotient of H over the cone, estimated from random cone
// samples plus the coordinate extreme rays.
fn sample_modulus(h: &Matrix, cone: &[ConeConstraint]) -> f64 {
    let ne = cone.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x517cc1b727220a95);
    let mut best = f64::INFINITY;
    let mut probe = |u: &Vector| {
        let nrm = u.norm();
        if nrm > 1e-12 {
            let q = h.matvec(u).dot(u) / (nrm * nrm);
            if q < best {
                best = q;
            }
        }
    };
    for (pos, c) in cone.iter().enumerate() {
        let mut ray = vec![0.0; ne];
        match c {
            ConeConstraint::Free => {
                ray[pos] = 1.0;
                probe(&Vector::raw(ray.clone()));
                ray[pos] = -1.0;
                probe(&Vector::raw(ray));
            }
            ConeConstraint::NonNegative => {
                ray[pos] = 1.0;
                probe(&Vector::raw(ray));
            }
            ConeConstraint::NonPositive => {
                ray[pos] = -1.0;
                probe(&Vector::raw(ray));
            }
        }
    }
    for _ in 0..MODULUS_SAMPLES {
        let u: Vec<f64> = cone
            .iter()
            .map(|c| match c {
                ConeConstraint::Free => rng.random_range(-1.0..1.0),
                ConeConstraint::NonNegative => rng.random_range(0.0..1.0),
                ConeConstraint::NonPositive => -rng.random_range(0.0..1.0),
            })
            .collect();
        probe(&Vector::raw(u));
    }
    best
}

/// Membership test for the graphical derivative of `mu * d||.||_1` at
/// `(x_star, s_bar)`: decides whether `v` is a derivative value at direction
/// `u`. Comparisons use an absolute tolerance of 1e-12.
pub fn graphical_derivative_membership(
    x_star: &Vector,
    s_bar: &Vector,
    mu: f64,
    u: &Vector,
    v: &Vector,
) -> Result<bool, AnalysisError> {
    const TOL: f64 = 1e-12;
    let n = x_star.len();
    assert!(mu > 0.0 && mu.is_finite());
    if s_bar.len() != n || u.len() != n || v.len() != n {
        return Err(AnalysisError::Dimension(format!(
            "point {n}, subgradient {}, direction {}, value {}",
            s_bar.len(),
            u.len(),
            v.len()
        )));
    }
    // s_bar must be a subgradient: |s_j| <= mu, with equality of the signed
    // value mu*sign(x_j) wherever x_j is nonzero.
    for j in 0..n {
        if s_bar[j].abs() > mu + TOL {
            return Err(AnalysisError::NotASubgradient(j));
        }
        if x_star[j] != 0.0 && (s_bar[j] - mu * x_star[j].signum()).abs() > TOL {
            return Err(AnalysisError::NotASubgradient(j));
        }
    }

    for j in 0..n {
        let active = s_bar[j].abs() >= mu - TOL;
        if !active {
            // Inactive index: the direction must vanish; the value is free.
            if u[j].abs() > TOL {
                return Ok(false);
            }
            continue;
        }
        if x_star[j] != 0.0 {
            // Supported index: the value must vanish.
            if v[j].abs() > TOL {
                return Ok(false);
            }
        } else {
            // Active zero index: domain condition on u, complementarity on v.
            if u[j] * s_bar[j] < -TOL {
                return Ok(false);
            }
            if (u[j] * v[j]).abs() > TOL || s_bar[j] * v[j] > TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_instance_holds_with_rank_deficient_block() {
        // f = 0.5 (x1+x2)^2 + x1 + x2, mu = 1 at the origin: the active block
        // is the all-ones matrix (rank 1), yet the certificate holds because
        // the kernel direction (1,-1) leaves the nonpositive cone.
        let h = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let g = Vector::from_slice(&[1.0, 1.0]);
        let cert =
            check_strong_subregularity_l1(&h, &g, &Vector::zeros(2), 1.0).unwrap();
        assert_eq!(cert.active, vec![0, 1]);
        assert_eq!(cert.cone, vec![ConeConstraint::NonPositive, ConeConstraint::NonPositive]);
        assert!(cert.holds);
        assert_eq!(column_rank(cert.h_active.as_ref().unwrap(), 1e-10), 1);
        // Over the nonpositive cone the quotient (u1+u2)^2 / ||u||^2 attains
        // its minimum 1 on the coordinate rays.
        let c = cert.modulus_lower_bound.unwrap();
        assert!((c - 1.0).abs() <= 1e-9, "modulus estimate {c}");
    }

    #[test]
    fn positive_definite_block_always_holds() {
        let h = Matrix::identity(2);
        let g = Vector::from_slice(&[1.0, -1.0]);
        let cert =
            check_strong_subregularity_l1(&h, &g, &Vector::zeros(2), 1.0).unwrap();
        assert!(cert.holds);
        let c = cert.modulus_lower_bound.unwrap();
        assert!(c > 0.9 && c <= 1.0 + 1e-12);
    }

    #[test]
    fn zero_block_with_nontrivial_cone_fails() {
        let h = Matrix::zeros(2, 2);
        let g = Vector::from_slice(&[1.0, 1.0]);
        let cert =
            check_strong_subregularity_l1(&h, &g, &Vector::zeros(2), 1.0).unwrap();
        assert!(!cert.holds);
        assert!(cert.modulus_lower_bound.is_none());
    }

    #[test]
    fn zero_block_on_the_support_fails_by_rank() {
        let h = Matrix::zeros(1, 1);
        let g = Vector::from_slice(&[1.0]);
        let cert =
            check_strong_subregularity_l1(&h, &g, &Vector::from_slice(&[2.0]), 1.0).unwrap();
        assert_eq!(cert.cone, vec![ConeConstraint::Free]);
        assert!(!cert.holds);
    }

    #[test]
    fn inactive_gradient_is_vacuously_certified() {
        let h = Matrix::identity(2);
        let g = Vector::from_slice(&[0.2, -0.1]);
        let cert =
            check_strong_subregularity_l1(&h, &g, &Vector::zeros(2), 1.0).unwrap();
        assert!(cert.holds);
        assert!(cert.active.is_empty());
        assert!(cert.h_active.is_none());
    }

    #[test]
    fn membership_examples() {
        let mu = 1.0;
        // Supported index: v must vanish there.
        assert!(graphical_derivative_membership(
            &Vector::from_slice(&[1.0]),
            &Vector::from_slice(&[mu]),
            mu,
            &Vector::from_slice(&[1.0]),
            &Vector::from_slice(&[0.0]),
        )
        .unwrap());
        // Active zero index with u pointing against the subgradient sign:
        // outside the domain of the derivative.
        assert!(!graphical_derivative_membership(
            &Vector::from_slice(&[0.0]),
            &Vector::from_slice(&[mu]),
            mu,
            &Vector::from_slice(&[-1.0]),
            &Vector::from_slice(&[0.3]),
        )
        .unwrap());
        // Zero direction with a compatible value.
        assert!(graphical_derivative_membership(
            &Vector::from_slice(&[1.0, 0.0]),
            &Vector::from_slice(&[mu, mu]),
            mu,
            &Vector::from_slice(&[0.0, 0.0]),
            &Vector::from_slice(&[0.0, -0.5]),
        )
        .unwrap());
    }

    #[test]
    fn membership_rejects_non_subgradients() {
        let err = graphical_derivative_membership(
            &Vector::from_slice(&[1.0]),
            &Vector::from_slice(&[-1.0]),
            1.0,
            &Vector::from_slice(&[0.0]),
            &Vector::from_slice(&[0.0]),
        )
        .unwrap_err();
        assert_eq!(err, AnalysisError::NotASubgradient(0));
        let err = graphical_derivative_membership(
            &Vector::from_slice(&[0.0]),
            &Vector::from_slice(&[1.5]),
            1.0,
            &Vector::from_slice(&[0.0]),
            &Vector::from_slice(&[0.0]),
        )
        .unwrap_err();
        assert_eq!(err, AnalysisError::NotASubgradient(0));
    }

    #[test]
    fn membership_is_positively_homogeneous() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mu = 0.8;
        let x = Vector::from_slice(&[1.0, 0.0, 0.0, -2.0]);
        let s = Vector::from_slice(&[mu, mu, 0.3, -mu]);
        for _ in 0..200 {
            let u = Vector::raw((0..4).map(|_| {
                let r: f64 = rng.random_range(-1.0..1.0);
                if rng.random_bool(0.3) { 0.0 } else { r }
            }).collect());
            let v = Vector::raw((0..4).map(|_| {
                let r: f64 = rng.random_range(-1.0..1.0);
                if rng.random_bool(0.3) { 0.0 } else { r }
            }).collect());
            let base = graphical_derivative_membership(&x, &s, mu, &u, &v).unwrap();
            for t in [0.5, 2.0, 7.0] {
                let scaled =
                    graphical_derivative_membership(&x, &s, mu, &u.scale(t), &v.scale(t))
                        .unwrap();
                assert_eq!(base, scaled, "homogeneity violated at t={t}");
            }
        }
    }
}
