//! Lifted first-order cuts for a polyhedron `P = { x : a_i' x >= b_i }`.
//!
//! For an anchor `y` on facet `i` the cut
//!
//! ```text
//!     q >= 2 y'x - ||y||^2 + 2 alpha (a_i'x - b_i)
//! ```
//!
//! is violated by `(x, ||x||^2)` exactly on `int B(y + alpha a_i, alpha ||a_i||)`,
//! so it is valid while that ball stays in `P`. Facet `j` allows
//! `alpha <= p_ij' y + q_ij`, an affine function of `y`.

use std::thread;

use crate::error::{Error, Result};
use crate::model::{
    Certificate, Cut, Diagnostics, Polyhedron, Provenance, Query, SeparatedCut, SeparationReport,
    SkippedSubproblem, GEOM_TOL,
};
use crate::solver::{solve_qp, QpProblem, QpSettings, SolveStatus};
use crate::{Matrix, Vector};

/// Upper bound on the lifting coefficient imposed by one facet.
#[derive(Debug, Clone, PartialEq)]
pub enum LiftingBound {
    /// `alpha <= p' y + q`.
    Bounded { p: Vector, q: f64 },
    /// The facet never limits the lifting.
    Unbounded,
}

impl LiftingBound {
    pub fn eval(&self, y: &Vector) -> f64 {
        match self {
            LiftingBound::Bounded { p, q } => p.dot(y) + q,
            LiftingBound::Unbounded => f64::INFINITY,
        }
    }
}

/// Bound from the distance condition `a_j'(y + alpha a_i) - b_j >= alpha ||a_i|| ||a_j||`.
pub fn lifting_bound(p: &Polyhedron, i: usize, j: usize) -> Result<LiftingBound> {
    p.check_facet(i)?;
    p.check_facet(j)?;
    if i == j {
        return Err(Error::SamePairIndex(i));
    }
    let (ai, aj) = (p.normal(i), p.normal(j));
    let scale = p.normal_norm(i) * p.normal_norm(j);
    let denom = scale - aj.dot(ai);
    if denom <= 1e-12 * scale {
        return Ok(LiftingBound::Unbounded);
    }
    Ok(LiftingBound::Bounded { p: aj / denom, q: -p.offset(j) / denom })
}

/// Wedge geometry of a non-parallel facet pair, kept to cross-check the
/// affine bound against the inscribed-circle formula
/// `alpha = tan(phi) / ||a_i|| * omega_ij'(y - N_i + O_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetGeometry {
    pub i: usize,
    pub j: usize,
    /// Unit vector in `H_i`, orthogonal to `H_ij`, pointing into `a_j'x >= b_j`.
    pub omega_ij: Vector,
    /// Same for the pair `(j, i)`.
    pub omega_ji: Vector,
    /// Half the wedge angle between `omega_ij` and `omega_ji`.
    pub phi: f64,
    /// Projection of the origin onto `H_i`.
    pub o_i: Vector,
    /// Projection of `O_i` onto `H_ij`.
    pub n_i: Vector,
    pub bound: LiftingBound,
}

impl FacetGeometry {
    /// `None` when `a_i` and `a_j` are parallel (no `H_ij` to speak of).
    pub fn new(p: &Polyhedron, i: usize, j: usize) -> Result<Option<Self>> {
        let bound = lifting_bound(p, i, j)?;
        let (ai, aj) = (p.normal(i), p.normal(j));
        let (bi, bj) = (p.offset(i), p.offset(j));
        let (Some(omega_ij), Some(omega_ji)) = (wedge_direction(ai, aj), wedge_direction(aj, ai)) else {
            return Ok(None);
        };
        let phi = 0.5 * omega_ij.dot(&omega_ji).clamp(-1.0, 1.0).acos();
        let o_i = ai * (bi / ai.norm_squared());
        // O_i + A'(AA')^{-1}(b - A O_i) with A = [a_i'; a_j'].
        let gram = Matrix::from_row_slice(2, 2, &[ai.dot(ai), ai.dot(aj), aj.dot(ai), aj.dot(aj)]);
        let resid = Vector::from_row_slice(&[bi - ai.dot(&o_i), bj - aj.dot(&o_i)]);
        let coef = gram.lu().solve(&resid).expect("non-parallel normals");
        let n_i = &o_i + ai * coef[0] + aj * coef[1];
        Ok(Some(Self { i, j, omega_ij, omega_ji, phi, o_i, n_i, bound }))
    }

    /// Inscribed-circle form of the lifting bound for `y` on facet `i`.
    pub fn tan_phi_bound(&self, p: &Polyhedron, y: &Vector) -> f64 {
        let along = self.omega_ij.dot(&(y - &self.n_i + &self.o_i));
        self.phi.tan() / p.normal_norm(self.i) * along
    }
}

fn wedge_direction(ai: &Vector, aj: &Vector) -> Option<Vector> {
    let w = aj - ai * (aj.dot(ai) / ai.norm_squared());
    let n = w.norm();
    if n <= 1e-12 * aj.norm() {
        None
    } else {
        Some(w / n)
    }
}

fn check_on_facet(p: &Polyhedron, y: &Vector, i: usize) -> Result<()> {
    p.check_facet(i)?;
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: y.len() });
    }
    let on = p.slack(i, y);
    if on.abs() > GEOM_TOL {
        return Err(Error::NotOnFacet { facet: i, residual: on });
    }
    for j in 0..p.num_facets() {
        let s = p.slack(j, y);
        if s < -GEOM_TOL {
            return Err(Error::NotOnFacet { facet: i, residual: s });
        }
    }
    Ok(())
}

/// `min_j (p_ij' y + q_ij)` with the minimizing facet, without checks.
fn bound_at(bounds: &[LiftingBound], y: &Vector, i: usize) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for (j, b) in bounds.iter().enumerate() {
        if j == i {
            continue;
        }
        let v = b.eval(y);
        if v < best.0 {
            best = (v, Some(j));
        }
    }
    (best.0.max(0.0), best.1)
}

fn facet_bounds(p: &Polyhedron, i: usize) -> Vec<LiftingBound> {
    (0..p.num_facets())
        .map(|j| if j == i { LiftingBound::Unbounded } else { lifting_bound(p, i, j).expect("valid pair") })
        .collect()
}

/// Largest valid lifting coefficient at `y` on facet `i`, with the facet
/// that attains it (`None` when unbounded).
pub fn max_alpha_with_binding(p: &Polyhedron, y: &Vector, i: usize) -> Result<(f64, Option<usize>)> {
    check_on_facet(p, y, i)?;
    Ok(bound_at(&facet_bounds(p, i), y, i))
}

/// Largest valid lifting coefficient at `y` on facet `i`; `+inf` when no
/// facet limits it.
pub fn max_alpha(p: &Polyhedron, y: &Vector, i: usize) -> Result<f64> {
    Ok(max_alpha_with_binding(p, y, i)?.0)
}

/// `beta = y + alpha a_i`, `beta0 = -||y||^2 - 2 alpha b_i`.
pub fn lifted_cut(p: &Polyhedron, y: &Vector, i: usize, alpha: f64) -> Result<Cut> {
    let max = max_alpha(p, y, i)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidCut(format!("lifting coefficient must be nonnegative, got {alpha}")));
    }
    if alpha > max + 1e-8 {
        return Err(Error::AlphaTooLarge { alpha, max });
    }
    Ok(unchecked_lifted_cut(p, y, i, alpha))
}

fn unchecked_lifted_cut(p: &Polyhedron, y: &Vector, i: usize, alpha: f64) -> Cut {
    Cut {
        delta: 1.0,
        beta: y + p.normal(i) * alpha,
        beta0: -y.norm_squared() - 2.0 * alpha * p.offset(i),
        provenance: Provenance::LiftedFirstOrder { anchor: y.clone(), facet: i, alpha },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationOptions {
    /// Worker threads for the per-facet subproblems.
    pub threads: usize,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

/// Evaluates `f` on every facet index, in order, on up to `threads`
/// scoped worker threads.
pub(crate) fn map_facets<T, F>(m: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, m.max(1));
    if threads == 1 {
        return (0..m).map(f).collect();
    }
    let chunk = m.div_ceil(threads);
    let f = &f;
    thread::scope(|s| {
        let handles: Vec<_> = (0..m)
            .step_by(chunk)
            .map(|start| s.spawn(move || (start..(start + chunk).min(m)).map(f).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("facet worker panicked")).collect()
    })
}

/// Optimal lifted cut anchored on one facet.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetSolution {
    pub facet: usize,
    pub anchor: Vector,
    pub alpha: f64,
    pub binding: Option<usize>,
    /// `-objective - q*`.
    pub violation: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
}

impl FacetSolution {
    pub fn cut(&self, p: &Polyhedron) -> Cut {
        unchecked_lifted_cut(p, &self.anchor, self.facet, self.alpha)
    }
}

/// The facet-`i` separation QP over `z = (y, alpha)`:
///
/// ```text
///     min  ||y||^2 - 2 y'x* - 2 alpha (a_i'x* - b_i)
///     s.t. a_i'y = b_i,  a_j'y >= b_j,  alpha >= 0,  alpha <= p_ij'y + q_ij.
/// ```
pub fn facet_qp(p: &Polyhedron, x_star: &Vector, i: usize) -> Result<QpProblem> {
    p.check_facet(i)?;
    if x_star.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x_star.len() });
    }
    Ok(build_facet_qp(p, &facet_bounds(p, i), x_star, i))
}

fn build_facet_qp(p: &Polyhedron, bounds: &[LiftingBound], x_star: &Vector, i: usize) -> QpProblem {
    let d = p.dim();
    let m = p.num_facets();
    let n = d + 1;
    let mut h = Matrix::zeros(n, n);
    for k in 0..d {
        h[(k, k)] = 2.0;
    }
    let mut g = Vector::zeros(n);
    g.rows_mut(0, d).copy_from(&(x_star * -2.0));
    g[d] = -2.0 * p.slack(i, x_star);

    let mut eq = Matrix::zeros(1, n);
    eq.view_mut((0, 0), (1, d)).copy_from(&p.normal(i).transpose());
    let eq_rhs = Vector::from_element(1, p.offset(i));

    let mut rows: Vec<(Vector, f64)> = Vec::new();
    for j in (0..m).filter(|&j| j != i) {
        let mut r = Vector::zeros(n);
        r.rows_mut(0, d).copy_from(p.normal(j));
        rows.push((r, p.offset(j)));
    }
    let mut r = Vector::zeros(n);
    r[d] = 1.0;
    rows.push((r, 0.0));
    for (j, b) in bounds.iter().enumerate() {
        if let (false, LiftingBound::Bounded { p: pj, q }) = (j == i, b) {
            let mut r = Vector::zeros(n);
            r.rows_mut(0, d).copy_from(pj);
            r[d] = -1.0;
            rows.push((r, -q));
        }
    }
    let mut ineq = Matrix::zeros(rows.len(), n);
    let mut ineq_rhs = Vector::zeros(rows.len());
    for (k, (r, c)) in rows.iter().enumerate() {
        ineq.set_row(k, &r.transpose());
        ineq_rhs[k] = *c;
    }
    QpProblem::new(h, g).with_equalities(eq, eq_rhs).with_inequalities(ineq, ineq_rhs)
}

enum FacetResult {
    Solved(FacetSolution),
    Skipped(SkippedSubproblem),
}

fn solve_facet(p: &Polyhedron, x_star: &Vector, q_star: f64, i: usize) -> Result<FacetResult> {
    let d = p.dim();
    let bounds = facet_bounds(p, i);
    let qp = build_facet_qp(p, &bounds, x_star, i);
    let out = solve_qp(&qp, &QpSettings::default());
    match out.status {
        SolveStatus::Optimal => {}
        SolveStatus::Unbounded => {
            return Ok(FacetResult::Skipped(SkippedSubproblem {
                facet: i,
                reason: Error::UnboundedDirection { facet: i }.to_string(),
            }))
        }
        SolveStatus::Infeasible => {
            return Ok(FacetResult::Skipped(SkippedSubproblem {
                facet: i,
                reason: format!("facet {i} does not meet the region (redundant inequality)"),
            }))
        }
        status => return Err(Error::SolverFailure { context: format!("facet {i}"), status }),
    }
    let anchor = out.primal.rows(0, d).into_owned();
    let (cap, binding) = bound_at(&bounds, &anchor, i);
    // The solver meets the bound to its feasibility tolerance; never exceed it.
    let alpha = out.primal[d].clamp(0.0, cap);
    let binding = if alpha > 0.0 && alpha >= cap - 1e-9 * (1.0 + cap) { binding } else { None };
    let cut = unchecked_lifted_cut(p, &anchor, i, alpha);
    Ok(FacetResult::Solved(FacetSolution {
        facet: i,
        violation: cut.violation(x_star, q_star),
        anchor,
        alpha,
        binding,
        iterations: out.iterations,
        kkt_residual: out.residuals.max(),
    }))
}

/// Solves the facet-`i` subproblem alone.
pub fn separate_facet(p: &Polyhedron, x_star: &Vector, q_star: f64, i: usize) -> Result<FacetSolution> {
    p.check_facet(i)?;
    if x_star.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x_star.len() });
    }
    match solve_facet(p, x_star, q_star, i)? {
        FacetResult::Solved(s) => Ok(s),
        FacetResult::Skipped(s) if s.reason.contains("unbounded") => Err(Error::UnboundedDirection { facet: i }),
        FacetResult::Skipped(_) => Err(Error::SolverFailure { context: format!("facet {i}"), status: SolveStatus::Infeasible }),
    }
}

pub fn separate_poly(p: &Polyhedron, x_star: &Vector, q_star: f64) -> Result<SeparationReport> {
    separate_poly_with(p, x_star, q_star, &SeparationOptions::default())
}

/// Most violated lifted first-order cut over all facets; lowest facet index
/// wins ties. When `x*` is outside `int P` the linearization at `x*` is also
/// a candidate (and is never beaten then).
pub fn separate_poly_with(
    p: &Polyhedron,
    x_star: &Vector,
    q_star: f64,
    options: &SeparationOptions,
) -> Result<SeparationReport> {
    if x_star.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: x_star.len() });
    }
    if !x_star.iter().all(|v| v.is_finite()) || !q_star.is_finite() {
        return Err(Error::InvalidRegion("query must be finite".into()));
    }
    let results = map_facets(p.num_facets(), options.threads, |i| solve_facet(p, x_star, q_star, i));

    let mut diagnostics = Diagnostics::default();
    let mut best: Option<FacetSolution> = None;
    for r in results {
        match r? {
            FacetResult::Solved(sol) => {
                diagnostics.iterations += sol.iterations;
                diagnostics.subproblems += 1;
                diagnostics.kkt_residual = diagnostics.kkt_residual.max(sol.kkt_residual);
                // Violations within rounding of each other count as ties.
                if best.as_ref().is_none_or(|b| sol.violation > b.violation + 1e-12 * (1.0 + b.violation.abs())) {
                    best = Some(sol);
                }
            }
            FacetResult::Skipped(s) => diagnostics.skipped.push(s),
        }
    }

    let query = Query::new(x_star.clone(), q_star);
    let mut report = best.map(|b| SeparationReport {
        query: query.clone(),
        cut: SeparatedCut::Standard(b.cut(p)),
        violation: b.violation,
        certificate: Certificate::Facet { facet: b.facet, anchor: b.anchor, alpha: b.alpha, binding: b.binding },
        diagnostics: Diagnostics::default(),
    });

    if !p.in_interior(x_star) {
        let cut = Cut::linearization(x_star);
        let violation = cut.violation(x_star, q_star);
        if report.as_ref().is_none_or(|r| violation > r.violation) {
            report = Some(SeparationReport {
                query: query.clone(),
                cut: SeparatedCut::Standard(cut),
                violation,
                certificate: Certificate::Linearization { anchor: x_star.clone() },
                diagnostics: Diagnostics::default(),
            });
        }
    } else if let Some(skip) = diagnostics.skipped.iter().find(|s| s.reason.contains("unbounded")) {
        // x* is interior and facet i can be lifted without limit: the
        // complement halfspace a_i'x <= b_i cuts it off.
        let i = skip.facet;
        let cut = Cut {
            delta: 0.0,
            beta: p.normal(i) * 0.5,
            beta0: -p.offset(i),
            provenance: Provenance::ComplementHalfspace { facet: i },
        };
        let violation = cut.violation(x_star, q_star);
        if report.as_ref().is_none_or(|r| r.violation <= 0.0) {
            report = Some(SeparationReport {
                query: query.clone(),
                cut: SeparatedCut::Standard(cut),
                violation,
                certificate: Certificate::Halfspace { facet: i },
                diagnostics: Diagnostics::default(),
            });
        }
    }

    let mut report = report.ok_or_else(|| Error::SolverFailure {
        context: "no facet subproblem produced a cut".into(),
        status: SolveStatus::Infeasible,
    })?;
    report.diagnostics = diagnostics;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn square() -> Polyhedron {
        Polyhedron::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[0.0, 0.0, -1.0, -1.0])
            .unwrap()
    }

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_row_slice(&[a, b])
    }

    #[test]
    fn adjacent_and_opposite_bounds() {
        let p = square();
        match lifting_bound(&p, 0, 1).unwrap() {
            LiftingBound::Bounded { p: pj, q } => {
                assert_abs_diff_eq!(pj[0], 0.0);
                assert_abs_diff_eq!(pj[1], 1.0);
                assert_abs_diff_eq!(q, 0.0);
            }
            LiftingBound::Unbounded => panic!("adjacent facets bound the lifting"),
        }
        let opposite = lifting_bound(&p, 0, 2).unwrap();
        assert_abs_diff_eq!(opposite.eval(&v2(0.0, 0.3)), 0.5);
        assert!(matches!(lifting_bound(&p, 1, 1), Err(Error::SamePairIndex(1))));
    }

    #[test]
    fn tan_phi_form_agrees_on_square() {
        let p = square();
        let g = FacetGeometry::new(&p, 0, 1).unwrap().unwrap();
        assert_abs_diff_eq!(g.phi, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        let y = v2(0.0, 0.37);
        assert_abs_diff_eq!(g.tan_phi_bound(&p, &y), 0.37, epsilon = 1e-12);
        assert!(FacetGeometry::new(&p, 0, 2).unwrap().is_none());
    }

    #[test]
    fn max_alpha_examples() {
        let p = square();
        assert_abs_diff_eq!(max_alpha(&p, &v2(0.0, 0.5), 0).unwrap(), 0.5);
        assert_eq!(max_alpha(&p, &v2(0.0, 0.0), 0).unwrap(), 0.0);
        let half = Polyhedron::from_rows(&[&[1.0, 0.0]], &[0.0]).unwrap();
        assert!(max_alpha(&half, &v2(0.0, 0.0), 0).unwrap().is_infinite());
        assert!(matches!(max_alpha(&p, &v2(0.1, 0.5), 0), Err(Error::NotOnFacet { .. })));
    }

    #[test]
    fn lifted_cut_examples() {
        let p = square();
        let y = v2(0.0, 0.5);
        let cut = lifted_cut(&p, &y, 0, 0.5).unwrap();
        assert_abs_diff_eq!(cut.beta[0], 0.5);
        assert_abs_diff_eq!(cut.beta[1], 0.5);
        assert_abs_diff_eq!(cut.beta0, -0.25);
        let zero = lifted_cut(&p, &y, 0, 0.0).unwrap();
        assert!(zero.same_coefficients(&Cut::linearization(&y), 0.0));
        assert!(matches!(lifted_cut(&p, &y, 0, 0.6), Err(Error::AlphaTooLarge { .. })));
    }

    #[test]
    fn square_center_query() {
        let p = square();
        let r = separate_poly(&p, &v2(0.5, 0.5), 0.5).unwrap();
        assert_abs_diff_eq!(r.violation, 0.25, epsilon = 1e-9);
        let cut = r.cut.as_standard().unwrap();
        assert_abs_diff_eq!(cut.beta[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(cut.beta[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(cut.beta0, -0.25, epsilon = 1e-9);
        match r.certificate {
            Certificate::Facet { facet, .. } => assert_eq!(facet, 0),
            ref c => panic!("unexpected certificate {c:?}"),
        }
    }

    #[test]
    fn feasible_and_high_queries_are_not_separated() {
        let p = square();
        assert!(separate_poly(&p, &v2(2.0, 0.5), 4.25).unwrap().violation <= 1e-12);
        assert!(separate_poly(&p, &v2(0.5, 0.5), 10.0).unwrap().violation <= 0.0);
    }

    #[test]
    fn threads_do_not_change_the_answer() {
        let p = square();
        let a = separate_poly(&p, &v2(0.3, 0.6), 0.1).unwrap();
        let b = separate_poly_with(&p, &v2(0.3, 0.6), 0.1, &SeparationOptions { threads: 3 }).unwrap();
        assert_eq!(a.cut, b.cut);
        assert_eq!(a.violation, b.violation);
    }

    #[test]
    fn halfspace_interior_query_gets_complement_cut() {
        let half = Polyhedron::from_rows(&[&[1.0, 0.0]], &[0.0]).unwrap();
        let r = separate_poly(&half, &v2(1.0, 0.0), 5.0).unwrap();
        assert_eq!(r.certificate, Certificate::Halfspace { facet: 0 });
        assert_abs_diff_eq!(r.violation, 1.0);
        assert_eq!(r.diagnostics.skipped.len(), 1);
    }
}
