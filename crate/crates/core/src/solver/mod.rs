//! Small dense solvers backing the separators: a primal active-set method
//! for convex QPs and a log-barrier Newton method for the fixed-radius
//! ellipsoid subproblem.

mod barrier;
mod fixed_rho;
mod kkt;
mod qp;

pub use barrier::{barrier_minimize, BarrierProblem, BarrierResult, BarrierSettings};
pub use fixed_rho::{solve_fixed_rho, FixedRhoSolution};
pub use kkt::{audit_kkt, farkas_certificate_gap, FarkasGap, KktResiduals};
pub use qp::{solve_qp, QpProblem, QpSettings};

use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub primal: Vector,
    /// Multipliers of the equality rows. For `Infeasible` outcomes these and
    /// `ineq_duals` form a Farkas certificate.
    pub eq_duals: Vector,
    /// Multipliers of the inequality rows (nonnegative at optimality).
    pub ineq_duals: Vector,
    pub residuals: KktResiduals,
    pub iterations: usize,
    pub objective: f64,
    /// Direction of unbounded descent for `Unbounded` outcomes.
    pub ray: Option<Vector>,
}

impl SolveOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}
