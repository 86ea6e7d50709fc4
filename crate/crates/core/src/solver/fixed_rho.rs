//! `min ||x* - mu||^2  s.t.  B(mu, sqrt(rho)) inside an ellipsoid`, written
//! with the S-lemma multiplier `tau` as the jointly concave constraint
//!
//! ```text
//!     g(mu, tau) = - sum_j v_j^2 / (tau - lambda_j) - mu'A mu + 2 c'mu - b - rho tau >= 0,
//!     v = U'(c - A mu),   tau > lambda_max.
//! ```
//!
//! Everything is computed in the eigenbasis `u = U' mu`, where the Hessian
//! of `g` has arrow structure.

use crate::error::Result;
use crate::model::Ellipsoid;
use crate::solver::barrier::{barrier_minimize, BarrierProblem, BarrierSettings};
use crate::solver::kkt::KktResiduals;
use crate::solver::{SolveOutcome, SolveStatus};
use crate::{Matrix, Vector};

/// Decoded `(mu, tau)` from a fixed-radius solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRhoSolution {
    pub mu: Vector,
    /// `+inf` when `rho = 0` (the S-lemma supremum is approached as
    /// `tau -> inf`).
    pub tau: f64,
}

impl FixedRhoSolution {
    pub fn from_outcome(out: &SolveOutcome) -> Self {
        let d = out.primal.len() - 1;
        Self { mu: out.primal.rows(0, d).into_owned(), tau: out.primal[d] }
    }
}

struct Eigen<'a> {
    lambda: &'a Vector,
    uc: Vector,
    ustar: Vector,
    b: f64,
}

/// Variables `(u, tau)`; constraints `g >= 0` and `tau - lambda_max >= 0`.
struct WithRadius<'a> {
    eig: Eigen<'a>,
    rho: f64,
}

/// `rho = 0`: variables `u`, constraint `-(u'L u - 2 uc'u + b) >= 0`.
struct PointOnly<'a> {
    eig: Eigen<'a>,
}

fn distance_objective(u: &Vector, ustar: &Vector, n: usize) -> (f64, Vector, Matrix) {
    let d = ustar.len();
    let diff = u.rows(0, d) - ustar;
    let mut grad = Vector::zeros(n);
    grad.rows_mut(0, d).copy_from(&(&diff * 2.0));
    let mut hess = Matrix::zeros(n, n);
    for k in 0..d {
        hess[(k, k)] = 2.0;
    }
    (diff.norm_squared(), grad, hess)
}

impl BarrierProblem for WithRadius<'_> {
    fn dim(&self) -> usize {
        self.eig.lambda.len() + 1
    }

    fn num_constraints(&self) -> usize {
        2
    }

    fn objective(&self, z: &Vector) -> (f64, Vector, Matrix) {
        distance_objective(z, &self.eig.ustar, self.dim())
    }

    fn constraints(&self, z: &Vector) -> Option<Vec<(f64, Vector, Matrix)>> {
        let d = self.eig.lambda.len();
        let lambda = self.eig.lambda;
        let tau = z[d];
        let lambda_max = lambda[d - 1];
        if !(tau > lambda_max) || !tau.is_finite() {
            return None;
        }
        let mut g = -self.eig.b - self.rho * tau;
        let mut grad = Vector::zeros(d + 1);
        let mut hess = Matrix::zeros(d + 1, d + 1);
        grad[d] = -self.rho;
        for j in 0..d {
            let u = z[j];
            let s = tau - lambda[j];
            let v = self.eig.uc[j] - lambda[j] * u;
            g += -v * v / s - lambda[j] * u * u + 2.0 * self.eig.uc[j] * u;
            grad[j] = 2.0 * v * tau / s;
            grad[d] += v * v / (s * s);
            hess[(j, j)] = -2.0 * lambda[j] * tau / s;
            let cross = -2.0 * lambda[j] * v / (s * s);
            hess[(j, d)] = cross;
            hess[(d, j)] = cross;
            hess[(d, d)] -= 2.0 * v * v / (s * s * s);
        }
        let mut tau_grad = Vector::zeros(d + 1);
        tau_grad[d] = 1.0;
        Some(vec![(g, grad, hess), (tau - lambda_max, tau_grad, Matrix::zeros(d + 1, d + 1))])
    }
}

impl BarrierProblem for PointOnly<'_> {
    fn dim(&self) -> usize {
        self.eig.lambda.len()
    }

    fn num_constraints(&self) -> usize {
        1
    }

    fn objective(&self, z: &Vector) -> (f64, Vector, Matrix) {
        distance_objective(z, &self.eig.ustar, self.dim())
    }

    fn constraints(&self, z: &Vector) -> Option<Vec<(f64, Vector, Matrix)>> {
        let d = self.dim();
        let lambda = self.eig.lambda;
        let mut g = -self.eig.b;
        let mut grad = Vector::zeros(d);
        let mut hess = Matrix::zeros(d, d);
        for j in 0..d {
            let v = self.eig.uc[j] - lambda[j] * z[j];
            g += -lambda[j] * z[j] * z[j] + 2.0 * self.eig.uc[j] * z[j];
            grad[j] = 2.0 * v;
            hess[(j, j)] = -2.0 * lambda[j];
        }
        Some(vec![(g, grad, hess)])
    }
}

/// Solves the fixed-radius subproblem. The status is `Infeasible` when no
/// ball of squared radius `rho` fits in `e`.
///
/// The largest S-lemma margin over all centers is attained at the ellipsoid
/// center `A^{-1} c` (the margin is concave and symmetric about it), where it
/// equals `c'A^{-1}c - b - rho lambda_max`; that value decides feasibility
/// and the center is the strictly feasible start for the barrier path.
pub fn solve_fixed_rho(e: &Ellipsoid, x_star: &Vector, rho: f64) -> Result<SolveOutcome> {
    e.require_bounded()?;
    let d = e.dim();
    let u = e.eigenvectors();
    let lambda = e.eigenvalues();
    let lambda_max = e.lambda_max();
    let eig = Eigen { lambda, uc: u.transpose() * e.linear(), ustar: u.transpose() * x_star, b: e.constant() };
    let u_center = Vector::from_fn(d, |j, _| eig.uc[j] / lambda[j]);
    let level = e.center_level();
    let best_margin = level - rho * lambda_max;
    let tol = 1e-12 * (1.0 + level.abs());

    let outcome = |status, mu_u: &Vector, tau: f64, duals: Vector, residuals, iterations| {
        let mu = u * mu_u;
        let objective = (x_star - &mu).norm_squared();
        let mut primal = Vector::zeros(d + 1);
        primal.rows_mut(0, d).copy_from(&mu);
        primal[d] = tau;
        SolveOutcome {
            status,
            primal,
            eq_duals: Vector::zeros(0),
            ineq_duals: duals,
            residuals,
            iterations,
            objective,
            ray: None,
        }
    };

    if best_margin < -tol {
        return Ok(outcome(
            SolveStatus::Infeasible,
            &u_center,
            lambda_max,
            Vector::zeros(2),
            KktResiduals { primal: -best_margin, ..KktResiduals::default() },
            0,
        ));
    }
    if rho > 0.0 && best_margin <= tol {
        // Only the center admits a ball of this size; the feasible set is a
        // point, so stationarity over its tangent cone holds trivially.
        return Ok(outcome(
            SolveStatus::Optimal,
            &u_center,
            lambda_max,
            Vector::zeros(2),
            KktResiduals { primal: (-best_margin).max(0.0), ..KktResiduals::default() },
            0,
        ));
    }

    let settings = BarrierSettings::default();
    if rho == 0.0 {
        let problem = PointOnly { eig };
        let r = barrier_minimize(&problem, u_center, &settings);
        let status = if r.converged { SolveStatus::Optimal } else { SolveStatus::IterationLimit };
        let residuals = KktResiduals {
            stationarity: r.stationarity,
            primal: 0.0,
            complementarity: r.complementarity,
            dual: 0.0,
        };
        let mut duals = Vector::zeros(2);
        duals[0] = r.duals[0];
        return Ok(outcome(status, &r.z, f64::INFINITY, duals, residuals, r.iterations));
    }

    let tau0 = 0.5 * (lambda_max + level / rho);
    let mut z0 = Vector::zeros(d + 1);
    z0.rows_mut(0, d).copy_from(&u_center);
    z0[d] = tau0;
    let problem = WithRadius { eig, rho };
    let r = barrier_minimize(&problem, z0, &settings);
    let status = if r.converged { SolveStatus::Optimal } else { SolveStatus::IterationLimit };
    let residuals = KktResiduals {
        stationarity: r.stationarity,
        primal: 0.0,
        complementarity: r.complementarity,
        dual: 0.0,
    };
    let mu_u = r.z.rows(0, d).into_owned();
    Ok(outcome(status, &mu_u, r.z[d], r.duals, residuals, r.iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_disk() -> Ellipsoid {
        Ellipsoid::new(Matrix::identity(2, 2), Vector::zeros(2), -1.0).unwrap()
    }

    #[test]
    fn centered_query_stays_at_origin() {
        let out = solve_fixed_rho(&unit_disk(), &Vector::zeros(2), 0.25).unwrap();
        assert!(out.is_optimal());
        let sol = FixedRhoSolution::from_outcome(&out);
        assert!(sol.mu.norm() <= 1e-9);
    }

    #[test]
    fn far_query_projects_onto_shrunken_disk() {
        let x = Vector::from_row_slice(&[2.0, 0.0]);
        let out = solve_fixed_rho(&unit_disk(), &x, 0.25).unwrap();
        assert!(out.is_optimal());
        let sol = FixedRhoSolution::from_outcome(&out);
        assert_abs_diff_eq!(sol.mu[0], 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.mu[1], 0.0, epsilon = 1e-8);
        // tau = 1 + ||mu|| / sqrt(rho)
        assert_abs_diff_eq!(sol.tau, 2.0, epsilon = 1e-6);
        assert!(out.residuals.max() <= 1e-8, "{:?}", out.residuals);
    }

    #[test]
    fn oversized_radius_is_infeasible() {
        let out = solve_fixed_rho(&unit_disk(), &Vector::zeros(2), 1.5).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn maximal_radius_forces_center() {
        let x = Vector::from_row_slice(&[0.3, -0.2]);
        let out = solve_fixed_rho(&unit_disk(), &x, 1.0).unwrap();
        assert!(out.is_optimal());
        assert!(FixedRhoSolution::from_outcome(&out).mu.norm() <= 1e-12);
    }

    #[test]
    fn zero_radius_projects_onto_ellipsoid() {
        let x = Vector::from_row_slice(&[3.0, 4.0]);
        let out = solve_fixed_rho(&unit_disk(), &x, 0.0).unwrap();
        let sol = FixedRhoSolution::from_outcome(&out);
        assert_abs_diff_eq!(sol.mu[0], 0.6, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.mu[1], 0.8, epsilon = 1e-8);
        assert!(sol.tau.is_infinite());
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let e = Ellipsoid::new(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]), Vector::zeros(2), -1.0).unwrap();
        assert!(solve_fixed_rho(&e, &Vector::zeros(2), 0.1).is_err());
    }
}
