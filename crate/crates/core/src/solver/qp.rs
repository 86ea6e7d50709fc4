//! Primal active-set method for
//!
//! ```text
//!     minimize     1/2 z' H z + g' z
//!     subject to   E z  = e
//!                  C z >= c
//! ```
//!
//! with `H` positive semidefinite. A feasible start comes from an elastic
//! phase-1 LP solved by the same routine. Zero-curvature directions of the
//! reduced Hessian are followed until a constraint blocks; if none does the
//! problem is reported unbounded together with the ray.

use crate::linalg::{inf_norm, least_squares, max_abs, null_space, symmetric_eigen};
use crate::solver::kkt::audit_kkt;
use crate::solver::{SolveOutcome, SolveStatus};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub h: Matrix,
    pub g: Vector,
    pub eq_mat: Matrix,
    pub eq_rhs: Vector,
    pub ineq_mat: Matrix,
    pub ineq_rhs: Vector,
}

impl QpProblem {
    pub fn new(h: Matrix, g: Vector) -> Self {
        let n = g.len();
        Self {
            h,
            g,
            eq_mat: Matrix::zeros(0, n),
            eq_rhs: Vector::zeros(0),
            ineq_mat: Matrix::zeros(0, n),
            ineq_rhs: Vector::zeros(0),
        }
    }

    pub fn with_equalities(mut self, mat: Matrix, rhs: Vector) -> Self {
        self.eq_mat = mat;
        self.eq_rhs = rhs;
        self
    }

    pub fn with_inequalities(mut self, mat: Matrix, rhs: Vector) -> Self {
        self.ineq_mat = mat;
        self.ineq_rhs = rhs;
        self
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn objective(&self, z: &Vector) -> f64 {
        0.5 * z.dot(&(&self.h * z)) + self.g.dot(z)
    }

    /// Dimension, symmetry and semidefiniteness checks.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.dim();
        if self.h.nrows() != n || self.h.ncols() != n {
            return Err(format!("H is {}x{}, expected {n}x{n}", self.h.nrows(), self.h.ncols()));
        }
        if self.eq_mat.ncols() != n || self.eq_mat.nrows() != self.eq_rhs.len() {
            return Err("equality block has inconsistent dimensions".into());
        }
        if self.ineq_mat.ncols() != n || self.ineq_mat.nrows() != self.ineq_rhs.len() {
            return Err("inequality block has inconsistent dimensions".into());
        }
        let asym = inf_norm(&(&self.h - self.h.transpose()));
        if asym > 1e-10 {
            return Err(format!("H is not symmetric (asymmetry {asym:e})"));
        }
        if n > 0 {
            let (vals, _) = symmetric_eigen(&self.h);
            if vals[0] < -1e-10 * vals[n - 1].abs().max(1.0) {
                return Err(format!("H is not positive semidefinite (eigenvalue {:e})", vals[0]));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpSettings {
    /// Iteration cap for each phase.
    pub max_iter: usize,
    pub feas_tol: f64,
    pub opt_tol: f64,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self { max_iter: 200, feas_tol: 1e-9, opt_tol: 1e-8 }
    }
}

/// Solves a convex QP. Panics if the problem fails [`QpProblem::validate`].
pub fn solve_qp(p: &QpProblem, settings: &QpSettings) -> SolveOutcome {
    if let Err(msg) = p.validate() {
        panic!("invalid QP: {msg}");
    }
    let n = p.dim();
    let n_ineq = p.ineq_mat.nrows();

    // Equality-consistent start.
    let z0 = if p.eq_mat.nrows() > 0 { least_squares(&p.eq_mat, &p.eq_rhs) } else { Vector::zeros(n) };
    if p.eq_mat.nrows() > 0 {
        let resid = &p.eq_rhs - &p.eq_mat * &z0;
        if max_abs(&resid) > settings.feas_tol * (1.0 + max_abs(&p.eq_rhs)) {
            // e - E z0 is orthogonal to range(E): lambda = resid gives E'lambda = 0, e'lambda > 0.
            let eq_duals = resid;
            return finish(p, SolveStatus::Infeasible, z0, eq_duals, Vector::zeros(n_ineq), 0, None);
        }
    }

    let violated: Vec<usize> = (0..n_ineq)
        .filter(|&k| p.ineq_rhs[k] - p.ineq_mat.row(k).dot(&z0.transpose()) > settings.feas_tol)
        .collect();

    let (start, phase1_iters) = if violated.is_empty() {
        (z0, 0)
    } else {
        match phase_one(p, &z0, &violated, settings) {
            PhaseOne::Feasible(z, iters) => (z, iters),
            PhaseOne::Infeasible { z, eq_duals, ineq_duals, iters } => {
                return finish(p, SolveStatus::Infeasible, z, eq_duals, ineq_duals, iters, None);
            }
            PhaseOne::Failed(z, iters) => {
                return finish(
                    p,
                    SolveStatus::IterationLimit,
                    z,
                    Vector::zeros(p.eq_mat.nrows()),
                    Vector::zeros(n_ineq),
                    iters,
                    None,
                );
            }
        }
    };

    let run = active_set(p, start, settings);
    finish(p, run.status, run.z, run.eq_duals, run.ineq_duals, phase1_iters + run.iters, run.ray)
}

fn finish(
    p: &QpProblem,
    status: SolveStatus,
    z: Vector,
    eq_duals: Vector,
    ineq_duals: Vector,
    iterations: usize,
    ray: Option<Vector>,
) -> SolveOutcome {
    let residuals = audit_kkt(p, &z, &eq_duals, &ineq_duals);
    SolveOutcome {
        status,
        objective: p.objective(&z),
        primal: z,
        eq_duals,
        ineq_duals,
        residuals,
        iterations,
        ray,
    }
}

enum PhaseOne {
    Feasible(Vector, usize),
    Infeasible { z: Vector, eq_duals: Vector, ineq_duals: Vector, iters: usize },
    Failed(Vector, usize),
}

/// `min sum t_k  s.t.  E z = e,  C_k z + t_k >= c_k (k violated at z0),
/// C_k z >= c_k (otherwise),  t >= 0`.
fn phase_one(p: &QpProblem, z0: &Vector, violated: &[usize], settings: &QpSettings) -> PhaseOne {
    let n = p.dim();
    let nv = violated.len();
    let n_ineq = p.ineq_mat.nrows();
    let n_eq = p.eq_mat.nrows();
    let nn = n + nv;

    let mut eq_mat = Matrix::zeros(n_eq, nn);
    eq_mat.view_mut((0, 0), (n_eq, n)).copy_from(&p.eq_mat);
    let mut ineq_mat = Matrix::zeros(n_ineq + nv, nn);
    let mut ineq_rhs = Vector::zeros(n_ineq + nv);
    ineq_mat.view_mut((0, 0), (n_ineq, n)).copy_from(&p.ineq_mat);
    ineq_rhs.rows_mut(0, n_ineq).copy_from(&p.ineq_rhs);
    let mut start = Vector::zeros(nn);
    start.rows_mut(0, n).copy_from(z0);
    for (slot, &k) in violated.iter().enumerate() {
        ineq_mat[(k, n + slot)] = 1.0;
        ineq_mat[(n_ineq + slot, n + slot)] = 1.0;
        start[n + slot] = p.ineq_rhs[k] - p.ineq_mat.row(k).dot(&z0.transpose());
    }
    let mut g = Vector::zeros(nn);
    g.rows_mut(n, nv).fill(1.0);
    let elastic = QpProblem::new(Matrix::zeros(nn, nn), g)
        .with_equalities(eq_mat, p.eq_rhs.clone())
        .with_inequalities(ineq_mat, ineq_rhs);

    let run = active_set(&elastic, start, settings);
    let z = run.z.rows(0, n).into_owned();
    if run.status != SolveStatus::Optimal {
        return PhaseOne::Failed(z, run.iters);
    }
    let total: f64 = run.z.rows(n, nv).sum();
    let scale = 1.0 + max_abs(&p.ineq_rhs) + max_abs(&p.eq_rhs);
    if total > settings.feas_tol * scale {
        // The z-stationarity of the elastic LP reads E'lambda + C'u = 0 and
        // its optimal value e'lambda + c'u equals the total violation.
        let ineq_duals = run.ineq_duals.rows(0, n_ineq).into_owned();
        return PhaseOne::Infeasible { z, eq_duals: run.eq_duals, ineq_duals, iters: run.iters };
    }
    PhaseOne::Feasible(z, run.iters)
}

struct ActiveSetRun {
    status: SolveStatus,
    z: Vector,
    eq_duals: Vector,
    ineq_duals: Vector,
    iters: usize,
    ray: Option<Vector>,
}

/// Primal active-set iterations from a feasible `z`.
fn active_set(p: &QpProblem, mut z: Vector, settings: &QpSettings) -> ActiveSetRun {
    let n = p.dim();
    let n_eq = p.eq_mat.nrows();
    let n_ineq = p.ineq_mat.nrows();
    let h_scale = inf_norm(&p.h).max(1.0);
    let mut working: Vec<usize> = Vec::new();

    for iter in 0..settings.max_iter {
        let rows = working_rows(p, &working);
        let grad = &p.h * &z + &p.g;
        let grad_scale = 1.0 + max_abs(&grad);
        let basis = null_space(&rows, 1e-10);

        let (step, ray_like) = if basis.ncols() == 0 {
            (Vector::zeros(n), false)
        } else {
            let reduced_h = basis.transpose() * &p.h * &basis;
            let reduced_g = basis.transpose() * &grad;
            let (vals, vecs) = symmetric_eigen(&reduced_h);
            let mut newton = Vector::zeros(basis.ncols());
            let mut flat = Vector::zeros(basis.ncols());
            let mut has_flat = false;
            for k in 0..vals.len() {
                let col = vecs.column(k);
                let coeff = col.dot(&reduced_g);
                if vals[k] > 1e-10 * h_scale {
                    newton -= col * (coeff / vals[k]);
                } else if coeff.abs() > 1e-11 * grad_scale {
                    flat -= col * coeff;
                    has_flat = true;
                }
            }
            if has_flat {
                (&basis * flat, true)
            } else if max_abs(&reduced_g) <= 1e-11 * grad_scale {
                // Stationary on the working face. With a nearly singular
                // reduced Hessian the Newton step would only amplify rounding.
                (Vector::zeros(n), false)
            } else {
                (&basis * newton, false)
            }
        };

        if !ray_like && max_abs(&step) <= 1e-12 * (1.0 + max_abs(&z)) {
            let multipliers = if rows.nrows() > 0 {
                least_squares(&rows.transpose(), &grad)
            } else {
                Vector::zeros(0)
            };
            let mut worst: Option<(usize, f64)> = None;
            for (slot, _) in working.iter().enumerate() {
                let m = multipliers[n_eq + slot];
                if m < -1e-2 * settings.opt_tol * grad_scale && worst.is_none_or(|(_, w)| m < w) {
                    worst = Some((slot, m));
                }
            }
            match worst {
                Some((slot, _)) => {
                    working.remove(slot);
                    continue;
                }
                None => {
                    let eq_duals = multipliers.rows(0, n_eq).into_owned();
                    let mut ineq_duals = Vector::zeros(n_ineq);
                    for (slot, &k) in working.iter().enumerate() {
                        ineq_duals[k] = multipliers[n_eq + slot];
                    }
                    return ActiveSetRun {
                        status: SolveStatus::Optimal,
                        z,
                        eq_duals,
                        ineq_duals,
                        iters: iter + 1,
                        ray: None,
                    };
                }
            }
        }

        let step_norm = step.norm();
        let mut length = if ray_like { f64::INFINITY } else { 1.0 };
        let mut blocking = None;
        for k in 0..n_ineq {
            if working.contains(&k) {
                continue;
            }
            let row = p.ineq_mat.row(k);
            let rate = row.dot(&step.transpose());
            if rate < -1e-13 * row.norm() * step_norm {
                let slack = (row.dot(&z.transpose()) - p.ineq_rhs[k]).max(0.0);
                let t = slack / -rate;
                if t < length {
                    length = t;
                    blocking = Some(k);
                }
            }
        }
        if length.is_infinite() {
            let ray = &step / step_norm;
            return ActiveSetRun {
                status: SolveStatus::Unbounded,
                z,
                eq_duals: Vector::zeros(n_eq),
                ineq_duals: Vector::zeros(n_ineq),
                iters: iter + 1,
                ray: Some(ray),
            };
        }
        z += &step * length;
        if let Some(k) = blocking {
            working.push(k);
        }
    }

    ActiveSetRun {
        status: SolveStatus::IterationLimit,
        z,
        eq_duals: Vector::zeros(n_eq),
        ineq_duals: Vector::zeros(n_ineq),
        iters: settings.max_iter,
        ray: None,
    }
}

fn working_rows(p: &QpProblem, working: &[usize]) -> Matrix {
    let n = p.dim();
    let n_eq = p.eq_mat.nrows();
    let mut rows = Matrix::zeros(n_eq + working.len(), n);
    if n_eq > 0 {
        rows.view_mut((0, 0), (n_eq, n)).copy_from(&p.eq_mat);
    }
    for (slot, &k) in working.iter().enumerate() {
        rows.set_row(n_eq + slot, &p.ineq_mat.row(k));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::kkt::farkas_certificate_gap;
    use approx::assert_abs_diff_eq;

    #[test]
    fn projection_onto_hyperplane() {
        // min ||z||^2 s.t. z1 = 1
        let p = QpProblem::new(Matrix::identity(3, 3) * 2.0, Vector::zeros(3))
            .with_equalities(Matrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]), Vector::from_element(1, 1.0));
        let out = solve_qp(&p, &QpSettings::default());
        assert!(out.is_optimal());
        assert_abs_diff_eq!((&out.primal - Vector::from_row_slice(&[1.0, 0.0, 0.0])).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.objective, 1.0, epsilon = 1e-12);
        assert!(out.residuals.max() <= 1e-8);
    }

    #[test]
    fn unbounded_linear_objective() {
        // min -z s.t. z >= 0
        let p = QpProblem::new(Matrix::zeros(1, 1), Vector::from_element(1, -1.0))
            .with_inequalities(Matrix::from_element(1, 1, 1.0), Vector::zeros(1));
        let out = solve_qp(&p, &QpSettings::default());
        assert_eq!(out.status, SolveStatus::Unbounded);
        let ray = out.ray.unwrap();
        assert!(ray[0] > 0.0);
    }

    #[test]
    fn infeasible_with_farkas_certificate() {
        // z1 + z2 >= 2, -z1 >= 0, -z2 >= 0
        let p = QpProblem::new(Matrix::identity(2, 2), Vector::zeros(2)).with_inequalities(
            Matrix::from_row_slice(3, 2, &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            Vector::from_row_slice(&[2.0, 0.0, 0.0]),
        );
        let out = solve_qp(&p, &QpSettings::default());
        assert_eq!(out.status, SolveStatus::Infeasible);
        let gap = farkas_certificate_gap(&p, &out.eq_duals, &out.ineq_duals);
        assert!(gap.combination <= 1e-9, "{gap:?}");
        assert!(gap.bound > 1e-6, "{gap:?}");
        assert!(gap.min_multiplier >= -1e-12, "{gap:?}");
    }

    #[test]
    fn inconsistent_equalities() {
        let p = QpProblem::new(Matrix::identity(2, 2), Vector::zeros(2)).with_equalities(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
            Vector::from_row_slice(&[0.0, 1.0]),
        );
        let out = solve_qp(&p, &QpSettings::default());
        assert_eq!(out.status, SolveStatus::Infeasible);
        let gap = farkas_certificate_gap(&p, &out.eq_duals, &out.ineq_duals);
        assert!(gap.combination <= 1e-9 && gap.bound > 0.0);
    }

    #[test]
    fn small_lp_vertex() {
        // min -z1 - z2 s.t. z1 + 2 z2 <= 4, 3 z1 + z2 <= 6, z >= 0  -> (1.6, 1.2)
        let p = QpProblem::new(Matrix::zeros(2, 2), Vector::from_row_slice(&[-1.0, -1.0])).with_inequalities(
            Matrix::from_row_slice(4, 2, &[-1.0, -2.0, -3.0, -1.0, 1.0, 0.0, 0.0, 1.0]),
            Vector::from_row_slice(&[-4.0, -6.0, 0.0, 0.0]),
        );
        let out = solve_qp(&p, &QpSettings::default());
        assert!(out.is_optimal());
        assert_abs_diff_eq!(out.primal[0], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(out.primal[1], 1.2, epsilon = 1e-12);
        assert!(out.residuals.max() <= 1e-8);
    }

    #[test]
    fn semidefinite_with_flat_direction_bounded_by_constraint() {
        // min z1^2 - z2 s.t. z2 <= 3
        let mut h = Matrix::zeros(2, 2);
        h[(0, 0)] = 2.0;
        let p = QpProblem::new(h, Vector::from_row_slice(&[0.0, -1.0]))
            .with_inequalities(Matrix::from_row_slice(1, 2, &[0.0, -1.0]), Vector::from_element(1, -3.0));
        let out = solve_qp(&p, &QpSettings::default());
        assert!(out.is_optimal());
        assert_abs_diff_eq!(out.primal[1], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.ineq_duals[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    #[should_panic(expected = "invalid QP")]
    fn indefinite_hessian_panics() {
        let h = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        solve_qp(&QpProblem::new(h, Vector::zeros(2)), &QpSettings::default());
    }
}
