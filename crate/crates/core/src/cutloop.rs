//! Outer-approximation loop: minimize a linear objective over a box and the
//! cuts found so far, separate the minimizer, repeat.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::model::{Cut, Query, Region, SeparatedCut};
use crate::poly::SeparationOptions;
use crate::solver::{solve_qp, QpProblem, QpSettings};
use crate::{Matrix, Vector};

/// Minimize `c_x' x + c_q q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub c_x: Vector,
    pub c_q: f64,
}

impl Objective {
    /// `min q`.
    pub fn min_q(d: usize) -> Self {
        Self { c_x: Vector::zeros(d), c_q: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct LoopOptions {
    pub max_rounds: usize,
    /// Cuts violated by at most this much are not added.
    pub violation_tol: f64,
    /// Weight of the `||(x, q)||^2 / 2` term added to the objective.
    pub regularization: f64,
    /// Cuts closer than this coefficient-wise count as repeats.
    pub duplicate_tol: f64,
    pub separation: SeparationOptions,
}

impl Default for LoopOptions {
    fn default() -> Self {
        Self {
            max_rounds: 200,
            violation_tol: 1e-6,
            regularization: 1e-9,
            duplicate_tol: 1e-10,
            separation: SeparationOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    /// Value of the regularized relaxation; a lower bound up to the
    /// regularization term.
    pub bound: f64,
    /// Linear objective at the minimizer.
    pub objective: f64,
    pub point: Vector,
    pub q: f64,
    /// Best violation found at the minimizer (may be negative).
    pub violation: f64,
    /// The cut added in this round.
    pub cut: Option<Cut>,
}

/// The round cap was reached while the last minimizer was still cut off.
#[derive(Debug, Clone, PartialEq)]
pub struct NonconvergenceWarning {
    pub rounds: usize,
    pub last_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopStatus {
    /// The minimizer is violated by no more than the tolerance.
    Converged,
    /// Separation returned a cut that is already in the relaxation.
    RepeatedCut,
    RoundLimit(NonconvergenceWarning),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopLog {
    pub rounds: Vec<Round>,
    pub cuts: Vec<Cut>,
    pub status: LoopStatus,
}

impl LoopLog {
    /// `bound` never decreases by more than `1e-9 (1 + |bound|)`.
    pub fn is_monotone(&self) -> bool {
        self.rounds.windows(2).all(|w| w[1].bound >= w[0].bound - 1e-9 * (1.0 + w[0].bound.abs()))
    }

    /// No two cuts in the relaxation share coefficients to `tol`.
    pub fn has_repeats(&self, tol: f64) -> bool {
        self.cuts
            .iter()
            .enumerate()
            .any(|(k, a)| self.cuts[..k].iter().any(|b| a.same_coefficients(b, tol)))
    }

    pub fn final_bound(&self) -> Option<f64> {
        self.rounds.last().map(|r| r.bound)
    }

    pub fn warning(&self) -> Option<&NonconvergenceWarning> {
        match &self.status {
            LoopStatus::RoundLimit(w) => Some(w),
            _ => None,
        }
    }
}

fn relaxation(d: usize, obj: &Objective, lo: &Vector, hi: &Vector, q_lo: f64, q_hi: f64, cuts: &[Cut], reg: f64) -> QpProblem {
    let n = d + 1;
    let rows = 2 * n + cuts.len();
    let mut c = Matrix::zeros(rows, n);
    let mut rhs = Vector::zeros(rows);
    for k in 0..d {
        c[(2 * k, k)] = 1.0;
        rhs[2 * k] = lo[k];
        c[(2 * k + 1, k)] = -1.0;
        rhs[2 * k + 1] = -hi[k];
    }
    c[(2 * d, d)] = 1.0;
    rhs[2 * d] = q_lo;
    c[(2 * d + 1, d)] = -1.0;
    rhs[2 * d + 1] = -q_hi;
    for (r, cut) in cuts.iter().enumerate() {
        let row = 2 * n + r;
        for k in 0..d {
            c[(row, k)] = -2.0 * cut.beta[k];
        }
        c[(row, d)] = cut.delta;
        rhs[row] = cut.beta0;
    }
    let mut g = Vector::zeros(n);
    g.rows_mut(0, d).copy_from(&obj.c_x);
    g[d] = obj.c_q;
    QpProblem::new(Matrix::identity(n, n) * reg, g).with_inequalities(c, rhs)
}

/// Runs the loop on a polyhedral or ellipsoidal instance with bounds.
pub fn demo_loop(inst: &Instance, obj: &Objective, opts: &LoopOptions) -> Result<LoopLog> {
    if matches!(inst.region, Region::ParaboloidComplement(_)) {
        return Err(Error::InvalidRegion("the cut loop supports polyhedra and ellipsoids only".into()));
    }
    let bounds = inst.bounds.as_ref().ok_or_else(|| Error::InvalidRegion("the cut loop needs bounds".into()))?;
    let d = inst.dim();
    if obj.c_x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: obj.c_x.len() });
    }
    let settings = QpSettings { max_iter: 2000, ..QpSettings::default() };
    let mut cuts: Vec<Cut> = Vec::new();
    let mut rounds = Vec::new();
    loop {
        let qp = relaxation(d, obj, &bounds.lo, &bounds.hi, bounds.q_lo, bounds.q_hi, &cuts, opts.regularization);
        let out = solve_qp(&qp, &settings);
        if !out.is_optimal() {
            return Err(Error::SolverFailure { context: format!("relaxation with {} cuts", cuts.len()), status: out.status });
        }
        let x = out.primal.rows(0, d).into_owned();
        let q = out.primal[d];
        let report = inst.separate_at(&Query::new(x.clone(), q), &opts.separation)?;
        let objective = obj.c_x.dot(&x) + obj.c_q * q;
        let mut round = Round { bound: out.objective, objective, point: x, q, violation: report.violation, cut: None };
        if report.violation <= opts.violation_tol {
            rounds.push(round);
            return Ok(LoopLog { rounds, cuts, status: LoopStatus::Converged });
        }
        let cut = match report.cut {
            SeparatedCut::Standard(c) => c,
            SeparatedCut::Paraboloid(_) => unreachable!("paraboloid regions are rejected above"),
        };
        if cuts.iter().any(|c| c.same_coefficients(&cut, opts.duplicate_tol)) {
            rounds.push(round);
            return Ok(LoopLog { rounds, cuts, status: LoopStatus::RepeatedCut });
        }
        if cuts.len() == opts.max_rounds {
            let warning = NonconvergenceWarning { rounds: cuts.len(), last_violation: report.violation };
            rounds.push(round);
            return Ok(LoopLog { rounds, cuts, status: LoopStatus::RoundLimit(warning) });
        }
        round.cut = Some(cut.clone());
        cuts.push(cut);
        rounds.push(round);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Bounds;
    use crate::model::{Ellipsoid, Polyhedron, QuadraticForm};

    fn square_instance() -> Instance {
        let p = Polyhedron::cube(2, 0.0, 1.0).unwrap();
        Instance::new(QuadraticForm::squared_norm(2), Region::Polyhedron(p), Query::new(Vector::zeros(2), 0.0))
            .unwrap()
            .with_bounds(Bounds {
                lo: Vector::from_element(2, -1.0),
                hi: Vector::from_element(2, 2.0),
                q_lo: -10.0,
                q_hi: 20.0,
            })
            .unwrap()
    }

    #[test]
    fn square_loop_is_monotone_and_converges() {
        let log = demo_loop(&square_instance(), &Objective::min_q(2), &LoopOptions::default()).unwrap();
        assert!(log.is_monotone());
        assert!(!log.has_repeats(1e-10));
        // min q over conv(S) is 0, attained at x = 0 outside the open square.
        assert!(log.final_bound().unwrap().abs() < 1e-4, "{:?}", log.final_bound());
    }

    #[test]
    fn one_round_cap_adds_one_cut() {
        let opts = LoopOptions { max_rounds: 1, ..LoopOptions::default() };
        let obj = Objective { c_x: Vector::from_row_slice(&[-1.0, -1.0]), c_q: 1.0 };
        let log = demo_loop(&square_instance(), &obj, &opts).unwrap();
        assert_eq!(log.cuts.len(), 1);
        assert!(log.warning().is_some());
    }

    #[test]
    fn feasible_minimizer_adds_nothing() {
        // Minimizing q with q bounded below by 5 lands at points already in
        // conv(S) for the disk (Q <= 4 on the box).
        let e = Ellipsoid::ball(&Vector::zeros(2), 1.0).unwrap();
        let inst = Instance::new(QuadraticForm::squared_norm(2), Region::Ellipsoid(e), Query::new(Vector::zeros(2), 0.0))
            .unwrap()
            .with_bounds(Bounds { lo: Vector::from_element(2, -2.0), hi: Vector::from_element(2, 2.0), q_lo: 5.0, q_hi: 9.0 })
            .unwrap();
        let log = demo_loop(&inst, &Objective::min_q(2), &LoopOptions::default()).unwrap();
        assert_eq!(log.cuts.len(), 0);
        assert_eq!(log.status, LoopStatus::Converged);
    }

    #[test]
    fn disk_loop_bound_approaches_one() {
        // min q over conv(S) for the unit disk is 1.
        let e = Ellipsoid::ball(&Vector::zeros(2), 1.0).unwrap();
        let inst = Instance::new(QuadraticForm::squared_norm(2), Region::Ellipsoid(e), Query::new(Vector::zeros(2), 0.0))
            .unwrap()
            .with_bounds(Bounds { lo: Vector::from_element(2, -2.0), hi: Vector::from_element(2, 2.0), q_lo: -5.0, q_hi: 9.0 })
            .unwrap();
        let log = demo_loop(&inst, &Objective::min_q(2), &LoopOptions::default()).unwrap();
        assert!(log.is_monotone());
        assert!((log.final_bound().unwrap() - 1.0).abs() < 1e-4, "{:?}", log.final_bound());
    }
}
