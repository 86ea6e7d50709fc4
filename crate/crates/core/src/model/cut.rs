use crate::error::{Error, Result};
use crate::Vector;

/// `B(center, sqrt(rho))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vector,
    /// Squared radius.
    pub rho: f64,
}

impl Ball {
    pub fn new(center: Vector, rho: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::InvalidCut(format!("squared radius must be finite and nonnegative, got {rho}")));
        }
        Ok(Self { center, rho })
    }

    pub fn point(center: Vector) -> Self {
        Self { center, rho: 0.0 }
    }

    pub fn radius(&self) -> f64 {
        self.rho.sqrt()
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains_strictly(&self, x: &Vector) -> bool {
        (x - &self.center).norm_squared() < self.rho
    }
}

/// Where a cut came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Linearization { anchor: Vector },
    LiftedFirstOrder { anchor: Vector, facet: usize, alpha: f64 },
    Ball(Ball),
    Paraboloid { anchor: Vector, facet: usize, alpha: f64 },
    /// `a_i' x <= b_i`, valid because it holds on the complement of `P`.
    ComplementHalfspace { facet: usize },
    External,
}

/// `delta q - 2 beta' x >= beta0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub delta: f64,
    pub beta: Vector,
    pub beta0: f64,
    pub provenance: Provenance,
}

impl Cut {
    /// Tangent plane of `q = ||x||^2` at `y`: `q >= 2 y' x - ||y||^2`.
    pub fn linearization(y: &Vector) -> Self {
        Self {
            delta: 1.0,
            beta: y.clone(),
            beta0: -y.norm_squared(),
            provenance: Provenance::Linearization { anchor: y.clone() },
        }
    }

    /// `q >= 2 mu' x - ||mu||^2 + rho`; violated by `(x, ||x||^2)` iff
    /// `x` is in the interior of the ball.
    pub fn from_ball(ball: &Ball) -> Self {
        Self {
            delta: 1.0,
            beta: ball.center.clone(),
            beta0: ball.rho - ball.center.norm_squared(),
            provenance: Provenance::Ball(ball.clone()),
        }
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// `delta q - 2 beta' x - beta0`; nonnegative when satisfied.
    pub fn evaluate(&self, x: &Vector, q: f64) -> f64 {
        self.delta * q - 2.0 * self.beta.dot(x) - self.beta0
    }

    /// `beta0 + 2 beta' x - delta q`; positive when `(x, q)` is cut off.
    pub fn violation(&self, x: &Vector, q: f64) -> f64 {
        -self.evaluate(x, q)
    }

    /// Scales so that `delta` is 0 or 1.
    pub fn normalized(&self) -> Result<Self> {
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidCut(format!("negative q coefficient {}", self.delta)));
        }
        if self.delta == 0.0 || self.delta == 1.0 {
            return Ok(self.clone());
        }
        Ok(Self {
            delta: 1.0,
            beta: &self.beta / self.delta,
            beta0: self.beta0 / self.delta,
            provenance: self.provenance.clone(),
        })
    }

    /// For `delta = 1`, the cut is violated by `(x, ||x||^2)` exactly on
    /// `int B(beta, sqrt(||beta||^2 + beta0))`. Returns center and the
    /// (possibly negative) squared radius.
    pub fn violating_ball(&self) -> Option<(Vector, f64)> {
        if self.delta != 1.0 {
            return None;
        }
        Some((self.beta.clone(), self.beta.norm_squared() + self.beta0))
    }

    /// Coefficient-wise comparison.
    pub fn same_coefficients(&self, other: &Cut, tol: f64) -> bool {
        self.beta.len() == other.beta.len()
            && (self.delta - other.delta).abs() <= tol
            && (self.beta0 - other.beta0).abs() <= tol
            && self.beta.iter().zip(other.beta.iter()).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Paraboloid-complement cut `q >= x_coeff' x + w_coeff w + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaboloidCut {
    /// `2 y - alpha a_i`.
    pub x_coeff: Vector,
    /// `alpha`.
    pub w_coeff: f64,
    /// `alpha b_i - ||y||^2`.
    pub constant: f64,
    pub anchor: Vector,
    pub facet: usize,
    /// Facet whose lifting bound is attained, when there is one.
    pub binding: Option<usize>,
    pub alpha: f64,
}

impl ParaboloidCut {
    pub fn dim(&self) -> usize {
        self.x_coeff.len()
    }

    /// Right-hand side `x_coeff' x + w_coeff w + constant`.
    pub fn rhs(&self, x: &Vector, w: f64) -> f64 {
        self.x_coeff.dot(x) + self.w_coeff * w + self.constant
    }

    /// `q - rhs`; nonnegative when satisfied.
    pub fn evaluate(&self, x: &Vector, w: f64, q: f64) -> f64 {
        q - self.rhs(x, w)
    }

    pub fn violation(&self, x: &Vector, w: f64, q: f64) -> f64 {
        -self.evaluate(x, w, q)
    }

    /// The same inequality in the `delta q - 2 beta' (x, w) >= beta0` form
    /// over the stacked variable `(x, w)`.
    pub fn to_cut(&self) -> Cut {
        let d = self.dim();
        let mut beta = Vector::zeros(d + 1);
        beta.rows_mut(0, d).copy_from(&(&self.x_coeff * 0.5));
        beta[d] = 0.5 * self.w_coeff;
        Cut {
            delta: 1.0,
            beta,
            beta0: self.constant,
            provenance: Provenance::Paraboloid {
                anchor: self.anchor.clone(),
                facet: self.facet,
                alpha: self.alpha,
            },
        }
    }
}

/// A cut produced by one of the separators.
#[derive(Debug, Clone, PartialEq)]
pub enum SeparatedCut {
    Standard(Cut),
    Paraboloid(ParaboloidCut),
}

impl SeparatedCut {
    /// Violation at `(x, w, q)`; `w` is ignored by standard cuts.
    pub fn violation(&self, x: &Vector, w: Option<f64>, q: f64) -> f64 {
        match self {
            SeparatedCut::Standard(c) => c.violation(x, q),
            SeparatedCut::Paraboloid(c) => c.violation(x, w.unwrap_or(0.0), q),
        }
    }

    pub fn as_standard(&self) -> Option<&Cut> {
        match self {
            SeparatedCut::Standard(c) => Some(c),
            SeparatedCut::Paraboloid(_) => None,
        }
    }

    pub fn as_paraboloid(&self) -> Option<&ParaboloidCut> {
        match self {
            SeparatedCut::Paraboloid(c) => Some(c),
            SeparatedCut::Standard(_) => None,
        }
    }
}

pub fn linearization_cut(y: &Vector) -> Cut {
    Cut::linearization(y)
}

pub fn ball_cut(ball: &Ball) -> Cut {
    Cut::from_ball(ball)
}

pub fn evaluate_cut(cut: &Cut, x: &Vector, q: f64) -> f64 {
    cut.evaluate(x, q)
}
