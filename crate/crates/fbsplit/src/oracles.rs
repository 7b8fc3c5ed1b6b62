//! Oracle contracts for the smooth term `f` and the prox-friendly term `g`.
//!
//! Values are extended reals: `f` returns positive infinity outside its
//! domain, which is how the line search detects domain violations for
//! problems whose gradient is not globally Lipschitz (the Kullback-Leibler
//! objective is the motivating case). NaN is never a legal value.

use crate::linalg::Vector;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("gradient queried at a point where f is not finite")]
    GradientOutsideDomain,
    #[error("gradient oracle returned a non-finite entry")]
    NonFiniteGradient,
    #[error("prox oracle returned a non-finite entry")]
    NonFiniteProx,
    #[error("oracle output has length {found}, expected {expected}")]
    WrongDimension { expected: usize, found: usize },
}

/// A real number or positive infinity. Negative infinity and NaN are rejected
/// at construction: proper convex functions never produce them.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite(), "ExtendedReal::finite called with {v}");
        ExtendedReal::Finite(v)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite_value(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::PosInfinity => None,
        }
    }

    /// Collapses to `f64`, mapping the infinite case to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            assert!(v.is_finite(), "extended real cannot hold {v}");
            ExtendedReal::Finite(v)
        }
    }
}

impl std::ops::Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::from(a + b),
            _ => ExtendedReal::PosInfinity,
        }
    }
}

type EvalFn = Box<dyn Fn(&Vector) -> ExtendedReal + Send + Sync>;
type GradFn = Box<dyn Fn(&Vector) -> Vector + Send + Sync>;
type ProxFn = Box<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;

/// Smooth term: extended-real value, gradient on the interior of the domain,
/// and an optional global Lipschitz constant for the gradient.
pub struct SmoothOracle {
    eval: EvalFn,
    grad: GradFn,
    lipschitz: Option<f64>,
}

impl SmoothOracle {
    pub fn new(
        eval: impl Fn(&Vector) -> ExtendedReal + Send + Sync + 'static,
        grad: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Box::new(eval), grad: Box::new(grad), lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        assert!(l >= 0.0 && l.is_finite());
        self.lipschitz = Some(l);
        self
    }

    pub fn eval(&self, x: &Vector) -> ExtendedReal {
        (self.eval)(x)
    }

    /// Gradient with the domain contract enforced: querying where `eval` is
    /// not finite is an error, as is a gradient with non-finite entries.
    pub fn grad(&self, x: &Vector) -> Result<Vector, OracleError> {
        if !self.eval(x).is_finite() {
            return Err(OracleError::GradientOutsideDomain);
        }
        let g = (self.grad)(x);
        if g.len() != x.len() {
            return Err(OracleError::WrongDimension { expected: x.len(), found: g.len() });
        }
        Ok(g)
    }

    pub fn lipschitz_constant(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Prox-friendly term: extended-real value plus the proximal map
/// `prox_{alpha g}(z) = argmin_x g(x) + ||x - z||^2 / (2 alpha)`.
pub struct ProxOracle {
    eval: EvalFn,
    prox: ProxFn,
}

impl ProxOracle {
    pub fn new(
        eval: impl Fn(&Vector) -> ExtendedReal + Send + Sync + 'static,
        prox: impl Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Box::new(eval), prox: Box::new(prox) }
    }

    /// `g = mu * ||.||_1` with the soft-threshold prox.
    pub fn l1(mu: f64) -> Self {
        assert!(mu >= 0.0 && mu.is_finite());
        Self::new(
            move |x| ExtendedReal::finite(mu * x.norm1()),
            move |z, alpha| soft_threshold(z, alpha * mu),
        )
    }

    /// Indicator of the nonnegative orthant with the clamp prox.
    pub fn nonnegative() -> Self {
        Self::new(
            |x| {
                if x.iter().all(|&v| v >= 0.0) {
                    ExtendedReal::finite(0.0)
                } else {
                    ExtendedReal::PosInfinity
                }
            },
            |z, _alpha| project_nonneg(z),
        )
    }

    /// `g = 0`, whose prox is the identity.
    pub fn zero() -> Self {
        Self::new(|_| ExtendedReal::finite(0.0), |z, _alpha| z.clone())
    }

    pub fn eval(&self, x: &Vector) -> ExtendedReal {
        (self.eval)(x)
    }
}

/// Componentwise minimizer of `(x - z_j)^2 / 2 + lambda |x|`:
/// `sign(z_j) * max(|z_j| - lambda, 0)`.
pub fn soft_threshold(z: &Vector, lambda: f64) -> Vector {
    assert!(lambda >= 0.0, "soft_threshold needs a nonnegative threshold");
    Vector::raw(
        z.iter()
            .map(|&v| {
                let m = v.abs() - lambda;
                if m > 0.0 {
                    v.signum() * m
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Componentwise clamp onto the nonnegative orthant.
pub fn project_nonneg(z: &Vector) -> Vector {
    Vector::raw(z.iter().map(|&v| v.max(0.0)).collect())
}

/// Dispatches to the oracle's prox and validates the output.
pub fn prox_of(g: &ProxOracle, z: &Vector, alpha: f64) -> Result<Vector, OracleError> {
    assert!(alpha > 0.0, "prox_of needs a positive step");
    let p = (g.prox)(z, alpha);
    if p.len() != z.len() {
        return Err(OracleError::WrongDimension { expected: z.len(), found: p.len() });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::NonFiniteProx);
    }
    Ok(p)
}

/// The problem `min F = f + g` with both oracles and the ambient dimension.
pub struct CompositeProblem {
    pub f: SmoothOracle,
    pub g: ProxOracle,
    dimension: usize,
}

impl CompositeProblem {
    pub fn new(f: SmoothOracle, g: ProxOracle, dimension: usize) -> Self {
        assert!(dimension >= 1);
        Self { f, g, dimension }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// `F(x) = f(x) + g(x)` in extended-real arithmetic.
    pub fn objective(&self, x: &Vector) -> ExtendedReal {
        self.f.eval(x) + self.g.eval(x)
    }
}
