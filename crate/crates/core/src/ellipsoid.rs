//! Separation for an ellipsoid `P = { x : x'Ax - 2c'x + b <= 0 }` with `A`
//! positive definite.
//!
//! `B(mu, sqrt(rho))` lies in `P` iff for some `tau > lambda_max`
//!
//! ```text
//!     h(tau) = -sum_j v_j^2 / (tau - lambda_j) - mu'A mu + 2 c'mu - b - rho tau >= 0,
//! ```
//!
//! with `v = U'(c - A mu)` and `A = U diag(lambda) U'`. The best ball cut at
//! squared radius `rho` has violation
//! `theta(rho) = rho - ||x* - mu*||^2 - q* + ||x*||^2` where `mu*` is the
//! feasible center nearest `x*`; `theta` is concave on `[0, rho_max]` when
//! `x*` lies in `P`, so the outer search is golden-section.

use crate::error::{Error, Result};
use crate::model::{Ball, Certificate, Cut, Diagnostics, Ellipsoid, Query, SeparatedCut, SeparationReport};
use crate::solver::{solve_fixed_rho, FixedRhoSolution, SolveStatus};
use crate::Vector;

/// Multiplier and auxiliary values that certify (or refute) containment.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentCertificate {
    /// S-lemma multiplier; `+inf` for a zero-radius ball.
    pub tau: f64,
    /// `U'(c - A mu)`.
    pub v: Vector,
    /// `y_j = v_j^2 / (tau - lambda_j)` (zero where `v_j = 0`).
    pub y: Vector,
    /// `h(tau)`; nonnegative certifies containment.
    pub slack: f64,
}

impl ContainmentCertificate {
    pub fn certifies(&self) -> bool {
        self.slack >= -1e-8
    }
}

/// `sup_tau h(tau)` and the certificate at the maximizer.
pub fn containment_margin(e: &Ellipsoid, ball: &Ball) -> Result<(f64, ContainmentCertificate)> {
    e.require_bounded()?;
    if ball.dim() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: ball.dim() });
    }
    let lambda = e.eigenvalues();
    let u = e.eigenvectors();
    let d = e.dim();
    let lambda_max = e.lambda_max();
    let v = u.transpose() * (e.linear() - e.matrix() * &ball.center);
    let constant = -e.value(&ball.center);
    let rho = ball.rho;

    let tau = if rho == 0.0 { f64::INFINITY } else { best_tau(lambda, lambda_max, &v, rho) };

    let mut y = Vector::zeros(d);
    let mut margin = constant;
    if tau.is_finite() {
        margin -= rho * tau;
        for j in 0..d {
            if v[j] != 0.0 {
                y[j] = v[j] * v[j] / (tau - lambda[j]);
                margin -= y[j];
            }
        }
    }
    Ok((margin, ContainmentCertificate { tau, v, y, slack: margin }))
}

/// Maximizer of the concave `h` over `tau >= lambda_max`, found as the root
/// of `phi(s) = sum_j v_j^2 / (s + gap_j)^2 - rho` in `s = tau - lambda_max`.
fn best_tau(lambda: &Vector, lambda_max: f64, v: &Vector, rho: f64) -> f64 {
    let gaps: Vec<f64> = lambda.iter().map(|l| lambda_max - l).collect();
    let phi = |s: f64| -> (f64, f64) {
        let mut f = -rho;
        let mut df = 0.0;
        for (g, vj) in gaps.iter().zip(v.iter()) {
            if *vj == 0.0 {
                continue;
            }
            let t = s + g;
            f += vj * vj / (t * t);
            df -= 2.0 * vj * vj / (t * t * t);
        }
        (f, df)
    };

    // tau = lambda_max is admissible when no top-eigenvalue component of v
    // is nonzero and h is already nonincreasing there.
    let top_active = gaps.iter().zip(v.iter()).any(|(g, vj)| *g == 0.0 && *vj != 0.0);
    if !top_active && phi(0.0).0 <= 0.0 {
        return lambda_max;
    }

    let vv = v.norm_squared();
    let (mut lo, mut hi) = (0.0, (vv / rho).sqrt());
    let mut s = 0.5 * hi;
    for _ in 0..200 {
        let (f, df) = phi(s);
        if f > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        if hi - lo <= 1e-15 * hi || f == 0.0 {
            break;
        }
        let newton = s - f / df;
        s = if newton > lo && newton < hi && df < 0.0 { newton } else { 0.5 * (lo + hi) };
    }
    lambda_max + s
}

/// Best ball cut at a fixed squared radius.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRhoOutcome {
    /// `rho - ||x* - mu||^2 - q* + ||x*||^2`.
    pub theta: f64,
    pub mu: Vector,
    pub certificate: ContainmentCertificate,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Whether every barrier centering step met its tolerance. The center is
    /// strictly feasible either way.
    pub converged: bool,
}

/// `theta(rho)` with its maximizing center, or `Error::Infeasible` when no
/// ball of squared radius `rho` fits.
pub fn fixed_rho_separate(e: &Ellipsoid, x_star: &Vector, q_star: f64, rho: f64) -> Result<FixedRhoOutcome> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidCut(format!("squared radius must be finite and nonnegative, got {rho}")));
    }
    if x_star.len() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: x_star.len() });
    }
    let out = solve_fixed_rho(e, x_star, rho)?;
    match out.status {
        SolveStatus::Infeasible => return Err(Error::Infeasible { rho }),
        SolveStatus::Optimal | SolveStatus::IterationLimit => {}
        status => {
            return Err(Error::SolverFailure { context: format!("fixed squared radius {rho}"), status });
        }
    }
    let sol = FixedRhoSolution::from_outcome(&out);
    if !sol.mu.iter().all(|m| m.is_finite()) {
        return Err(Error::SolverFailure {
            context: format!("fixed squared radius {rho}: non-finite center"),
            status: out.status,
        });
    }
    let ball = Ball { center: sol.mu.clone(), rho };
    let (_, certificate) = containment_margin(e, &ball)?;
    let theta = rho - (x_star - &sol.mu).norm_squared() - q_star + x_star.norm_squared();
    Ok(FixedRhoOutcome {
        theta,
        mu: sol.mu,
        certificate,
        iterations: out.iterations,
        kkt_residual: out.residuals.max(),
        converged: out.status == SolveStatus::Optimal,
    })
}

/// Whether some ball of squared radius `rho` fits. The S-lemma margin is
/// concave in the center and symmetric about `A^{-1} c`, so the center decides.
fn rho_fits(e: &Ellipsoid, rho: f64) -> Result<bool> {
    let (margin, _) = containment_margin(e, &Ball { center: e.center(), rho })?;
    Ok(margin >= 0.0)
}

/// Largest squared radius of an inscribed ball, by bisection to `1e-9`
/// relative. The returned value is always feasible.
pub fn max_inscribed_rho(e: &Ellipsoid) -> Result<f64> {
    e.require_bounded()?;
    let level = e.center_level();
    if !(level > 0.0) {
        return Err(Error::InvalidRegion("ellipsoid has empty interior".into()));
    }
    // Every inscribed ball fits inside the largest semi-axis.
    let mut hi = level / e.lambda_min();
    if rho_fits(e, hi)? {
        return Ok(hi);
    }
    let mut lo = 0.0;
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if rho_fits(e, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximally violated ball cut, or the linearization at `x*` when `x*` is
/// not in the interior of `P` (then no ball cut can do better).
pub fn separate_ellipsoid(e: &Ellipsoid, x_star: &Vector, q_star: f64) -> Result<SeparationReport> {
    e.require_bounded()?;
    if x_star.len() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), found: x_star.len() });
    }
    let query = Query::new(x_star.clone(), q_star);
    if !e.in_interior(x_star) {
        let cut = Cut::linearization(x_star);
        let violation = cut.violation(x_star, q_star);
        return Ok(SeparationReport {
            query,
            cut: SeparatedCut::Standard(cut),
            violation,
            certificate: Certificate::Linearization { anchor: x_star.clone() },
            diagnostics: Diagnostics::default(),
        });
    }

    let rho_max = max_inscribed_rho(e)?;
    let mut diagnostics = Diagnostics::default();
    let eval = |rho: f64, diag: &mut Diagnostics| -> Result<(f64, FixedRhoOutcome)> {
        let out = fixed_rho_separate(e, x_star, q_star, rho)?;
        diag.iterations += out.iterations;
        diag.subproblems += 1;
        Ok((rho, out))
    };

    let mut best = eval(0.0, &mut diagnostics)?;
    let top = eval(rho_max, &mut diagnostics)?;
    if top.1.theta > best.1.theta {
        best = top;
    }
    let (mut a, mut b) = (0.0, rho_max);
    let mut c = b - INV_PHI * (b - a);
    let mut dpt = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut diagnostics)?;
    let mut fd = eval(dpt, &mut diagnostics)?;
    while b - a > 1e-8 * rho_max {
        if fc.1.theta >= fd.1.theta {
            b = dpt;
            dpt = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut diagnostics)?;
        } else {
            a = c;
            c = dpt;
            fc = fd;
            dpt = a + INV_PHI * (b - a);
            fd = eval(dpt, &mut diagnostics)?;
        }
    }
    for cand in [fc, fd] {
        if cand.1.theta > best.1.theta {
            best = cand;
        }
    }

    let (rho, out) = best;
    diagnostics.kkt_residual = out.kkt_residual;
    diagnostics.rho = Some(rho);
    let ball = Ball { center: out.mu, rho };
    let cut = Cut::from_ball(&ball);
    let violation = cut.violation(x_star, q_star);
    Ok(SeparationReport {
        query,
        cut: SeparatedCut::Standard(cut),
        violation,
        certificate: Certificate::Ball { ball, containment: Some(out.certificate) },
        diagnostics,
    })
}
