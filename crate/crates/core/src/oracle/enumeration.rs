//! Reference QP solver: tries every active set. Exponential, for tests with
//! a handful of inequalities only.

use crate::solver::QpProblem;
use crate::{Matrix, Vector};

/// Minimizer of a strictly convex QP by enumerating active sets, or `None`
/// when no active set yields a feasible stationary point (infeasible
/// problem). Feasibility is checked to `tol`.
pub fn enumerate_qp(p: &QpProblem, tol: f64) -> Option<(Vector, f64)> {
    let n = p.dim();
    let n_eq = p.eq_mat.nrows();
    let n_ineq = p.ineq_mat.nrows();
    assert!(n_ineq <= 16, "enumeration over {n_ineq} inequalities");
    let mut best: Option<(Vector, f64)> = None;
    for mask in 0u32..(1 << n_ineq) {
        let active: Vec<usize> = (0..n_ineq).filter(|k| mask & (1 << k) != 0).collect();
        let rows = n_eq + active.len();
        if rows > n {
            continue;
        }
        // [H A'; A 0] [z; -lambda] = [-g; rhs]
        let size = n + rows;
        let mut kkt = Matrix::zeros(size, size);
        let mut rhs = Vector::zeros(size);
        kkt.view_mut((0, 0), (n, n)).copy_from(&p.h);
        rhs.rows_mut(0, n).copy_from(&(-&p.g));
        for r in 0..rows {
            let (row, b) = if r < n_eq {
                (p.eq_mat.row(r).transpose(), p.eq_rhs[r])
            } else {
                let k = active[r - n_eq];
                (p.ineq_mat.row(k).transpose(), p.ineq_rhs[k])
            };
            kkt.view_mut((n + r, 0), (1, n)).copy_from(&row.transpose());
            kkt.view_mut((0, n + r), (n, 1)).copy_from(&row);
            rhs[n + r] = b;
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if !sol.iter().all(|v| v.is_finite()) {
            continue;
        }
        let z = sol.rows(0, n).into_owned();
        let scale = 1.0 + z.amax();
        let eq_ok = (0..n_eq).all(|r| (p.eq_mat.row(r).dot(&z.transpose()) - p.eq_rhs[r]).abs() <= tol * scale);
        let ineq_ok = (0..n_ineq).all(|k| p.ineq_mat.row(k).dot(&z.transpose()) >= p.ineq_rhs[k] - tol * scale);
        if !(eq_ok && ineq_ok) {
            continue;
        }
        let value = p.objective(&z);
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((z, value));
        }
    }
    best
}
