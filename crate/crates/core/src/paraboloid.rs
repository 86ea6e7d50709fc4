//! Lifted cuts for `P = { (x, w) : a_i'x - w <= b_i }`, whose complement is
//! `w <= max_i (a_i'x - b_i)`.
//!
//! The cut anchored at `y` (with `w = a_i'y - b_i`) on facet `i` is
//!
//! ```text
//!     q >= (2y - alpha a_i)'x + alpha w + alpha b_i - ||y||^2.
//! ```
//!
//! It holds on the halfspace of facet `i` for every `alpha >= 0` and on that
//! of facet `j` iff `alpha <= 4 ((a_i - a_j)'y - b_i + b_j) / ||a_i - a_j||^2`.

use crate::error::{Error, Result};
use crate::model::{
    Certificate, Diagnostics, ParaboloidComplement, ParaboloidCut, Query, SeparatedCut, SeparationReport,
    SkippedSubproblem,
};
use crate::poly::{map_facets, SeparationOptions};
use crate::solver::{solve_qp, QpProblem, QpSettings, SolveStatus};
use crate::{Matrix, Vector};

const SAME_NORMAL_TOL: f64 = 1e-12;

fn same_normals(r: &ParaboloidComplement, i: usize, j: usize) -> bool {
    (r.normal(i) - r.normal(j)).norm() <= SAME_NORMAL_TOL
}

/// `4 ((a_i - a_j)'x - b_i + b_j) / ||a_i - a_j||^2` without checks.
fn alpha_bound(r: &ParaboloidComplement, x: &Vector, i: usize, j: usize) -> f64 {
    let diff = r.normal(i) - r.normal(j);
    4.0 * (r.level(i, x) - r.level(j, x)) / diff.norm_squared()
}

/// The nonzero root of `alpha (l_i - l_j) - alpha^2 ||a_i - a_j||^2 / 4`
/// with `l_k = a_k'x* - b_k`. Requires `(x*, a_i'x* - b_i)` to lie in the
/// relative interior of facet `i`.
pub fn paraboloid_alpha(r: &ParaboloidComplement, x_star: &Vector, i: usize, j: usize) -> Result<f64> {
    r.check_facet(i)?;
    r.check_facet(j)?;
    if i == j {
        return Err(Error::SamePairIndex(i));
    }
    if x_star.len() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: x_star.len() });
    }
    if same_normals(r, i, j) {
        return Err(Error::IdenticalNormals { i, j });
    }
    let top = r.level(i, x_star);
    for k in (0..r.num_facets()).filter(|&k| k != i) {
        if r.level(k, x_star) >= top - 1e-10 {
            return Err(Error::NotRelativeInterior { facet: i, other: k });
        }
    }
    Ok(alpha_bound(r, x_star, i, j))
}

/// `alpha (l_i - l_j) - alpha^2 ||a_i - a_j||^2 / 4`, whose roots are 0 and
/// the lifting bound.
pub fn lifting_quadratic(r: &ParaboloidComplement, x_star: &Vector, i: usize, j: usize, alpha: f64) -> f64 {
    let diff = r.normal(i) - r.normal(j);
    alpha * (r.level(i, x_star) - r.level(j, x_star)) - 0.25 * alpha * alpha * diff.norm_squared()
}

/// `min ||x||^2 - (2y - alpha a_i)'x - alpha w  s.t.  a_j'x - w = b_j`, from
/// the stationary point `x = y - (alpha/2) a_i + (alpha/2) a_j`.
pub fn subproblem_value(r: &ParaboloidComplement, y: &Vector, i: usize, j: usize, alpha: f64) -> f64 {
    let (x, w) = stationary_point(r, y, i, j, alpha);
    let coeff = y * 2.0 - r.normal(i) * alpha;
    x.norm_squared() - coeff.dot(&x) - alpha * w
}

/// Point of facet `j` where the cut anchored at `y` on facet `i` with
/// lifting `alpha` is tightest.
pub fn stationary_point(r: &ParaboloidComplement, y: &Vector, i: usize, j: usize, alpha: f64) -> (Vector, f64) {
    let x = y - r.normal(i) * (0.5 * alpha) + r.normal(j) * (0.5 * alpha);
    let w = r.level(j, &x);
    (x, w)
}

/// Smallest lifting bound over the other facets with the facet attaining
/// it. Facets with the same normal and a larger offset never bind; a
/// negative value means `y` is not on facet `i`.
fn min_bound(r: &ParaboloidComplement, y: &Vector, i: usize) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for j in (0..r.num_facets()).filter(|&j| j != i) {
        let v = if same_normals(r, i, j) {
            if r.offset(j) >= r.offset(i) {
                continue;
            }
            f64::NEG_INFINITY
        } else {
            alpha_bound(r, y, i, j)
        };
        if v < best.0 {
            best = (v, Some(j));
        }
    }
    best
}

/// Largest valid lifting at `y` on facet `i` (`+inf` if unbounded).
pub fn paraboloid_max_alpha(r: &ParaboloidComplement, y: &Vector, i: usize) -> Result<(f64, Option<usize>)> {
    r.check_facet(i)?;
    if y.len() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: y.len() });
    }
    let (v, j) = min_bound(r, y, i);
    if v < -1e-10 {
        return Err(Error::NotRelativeInterior { facet: i, other: j.expect("some facet binds") });
    }
    Ok((v.max(0.0), j))
}

fn build_cut(r: &ParaboloidComplement, y: &Vector, i: usize, alpha: f64, binding: Option<usize>) -> ParaboloidCut {
    ParaboloidCut {
        x_coeff: y * 2.0 - r.normal(i) * alpha,
        w_coeff: alpha,
        constant: alpha * r.offset(i) - y.norm_squared(),
        anchor: y.clone(),
        facet: i,
        binding,
        alpha,
    }
}

/// The cut anchored at `y` on facet `i`; `binding` records the facet whose
/// bound `alpha` attains.
pub fn paraboloid_cut(r: &ParaboloidComplement, y: &Vector, i: usize, alpha: f64) -> Result<ParaboloidCut> {
    let (max, j) = paraboloid_max_alpha(r, y, i)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidCut(format!("lifting coefficient must be nonnegative, got {alpha}")));
    }
    if alpha > max + 1e-8 {
        return Err(Error::AlphaTooLarge { alpha, max });
    }
    let binding = if alpha > 0.0 && alpha >= max - 1e-8 { j } else { None };
    Ok(build_cut(r, y, i, alpha, binding))
}

enum FacetResult {
    Solved { cut: ParaboloidCut, violation: f64, iterations: usize, residual: f64 },
    Skipped(SkippedSubproblem),
}

/// QP over `(y, alpha)`:
///
/// ```text
///     min  ||y||^2 - 2 y'x* + alpha (a_i'x* - w* - b_i)
///     s.t. alpha >= 0,  alpha <= 4 ((a_i - a_j)'y - b_i + b_j) / ||a_i - a_j||^2.
/// ```
///
/// `None` when facet `i` lies strictly under another facet with the same
/// normal and so never touches the complement boundary.
pub fn paraboloid_facet_qp(r: &ParaboloidComplement, x_star: &Vector, w_star: f64, i: usize) -> Option<QpProblem> {
    let d = r.dim();
    let n = d + 1;
    let mut h = Matrix::zeros(n, n);
    for k in 0..d {
        h[(k, k)] = 2.0;
    }
    let mut g = Vector::zeros(n);
    g.rows_mut(0, d).copy_from(&(x_star * -2.0));
    g[d] = r.level(i, x_star) - w_star;

    let mut rows: Vec<(Vector, f64)> = Vec::new();
    let mut r0 = Vector::zeros(n);
    r0[d] = 1.0;
    rows.push((r0, 0.0));
    for j in (0..r.num_facets()).filter(|&j| j != i) {
        if same_normals(r, i, j) {
            if r.offset(j) < r.offset(i) {
                return None;
            }
            continue;
        }
        let diff = r.normal(i) - r.normal(j);
        let scale = 4.0 / diff.norm_squared();
        let mut row = Vector::zeros(n);
        row.rows_mut(0, d).copy_from(&(&diff * scale));
        row[d] = -1.0;
        rows.push((row, scale * (r.offset(i) - r.offset(j))));
    }
    let mut ineq = Matrix::zeros(rows.len(), n);
    let mut rhs = Vector::zeros(rows.len());
    for (k, (row, c)) in rows.iter().enumerate() {
        ineq.set_row(k, &row.transpose());
        rhs[k] = *c;
    }
    Some(QpProblem::new(h, g).with_inequalities(ineq, rhs))
}

fn solve_facet(r: &ParaboloidComplement, x_star: &Vector, w_star: f64, q_star: f64, i: usize) -> Result<FacetResult> {
    let d = r.dim();
    let Some(qp) = paraboloid_facet_qp(r, x_star, w_star, i) else {
        return Ok(FacetResult::Skipped(SkippedSubproblem {
            facet: i,
            reason: format!("facet {i} is shadowed by a facet with the same normal"),
        }));
    };
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
                reason: format!("facet {i} never attains the envelope"),
            }))
        }
        status => return Err(Error::SolverFailure { context: format!("facet {i}"), status }),
    }
    let y = out.primal.rows(0, d).into_owned();
    let (cap, j) = min_bound(r, &y, i);
    let alpha = out.primal[d].clamp(0.0, cap.max(0.0));
    let binding = if alpha > 0.0 && alpha >= cap - 1e-9 * (1.0 + cap.abs()) { j } else { None };
    let cut = build_cut(r, &y, i, alpha, binding);
    Ok(FacetResult::Solved {
        violation: cut.violation(x_star, w_star, q_star),
        cut,
        iterations: out.iterations,
        residual: out.residuals.max(),
    })
}

pub fn separate_paraboloid(r: &ParaboloidComplement, x_star: &Vector, w_star: f64, q_star: f64) -> Result<SeparationReport> {
    separate_paraboloid_with(r, x_star, w_star, q_star, &SeparationOptions::default())
}

/// Most violated paraboloid cut over all facets (lowest index wins ties).
pub fn separate_paraboloid_with(
    r: &ParaboloidComplement,
    x_star: &Vector,
    w_star: f64,
    q_star: f64,
    options: &SeparationOptions,
) -> Result<SeparationReport> {
    if x_star.len() != r.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: x_star.len() });
    }
    if !x_star.iter().all(|v| v.is_finite()) || !w_star.is_finite() || !q_star.is_finite() {
        return Err(Error::InvalidRegion("query must be finite".into()));
    }
    let results = map_facets(r.num_facets(), options.threads, |i| solve_facet(r, x_star, w_star, q_star, i));
    let mut diagnostics = Diagnostics::default();
    let mut best: Option<(ParaboloidCut, f64)> = None;
    for res in results {
        match res? {
            FacetResult::Solved { cut, violation, iterations, residual } => {
                diagnostics.iterations += iterations;
                diagnostics.subproblems += 1;
                diagnostics.kkt_residual = diagnostics.kkt_residual.max(residual);
                if best.as_ref().is_none_or(|(_, v)| violation > v + 1e-12 * (1.0 + v.abs())) {
                    best = Some((cut, violation));
                }
            }
            FacetResult::Skipped(s) => diagnostics.skipped.push(s),
        }
    }
    let Some((cut, violation)) = best else {
        let facet = diagnostics.skipped.first().map_or(0, |s| s.facet);
        return Err(Error::UnboundedDirection { facet });
    };
    Ok(SeparationReport {
        query: Query::with_w(x_star.clone(), w_star, q_star),
        certificate: Certificate::Paraboloid {
            facet: cut.facet,
            anchor: cut.anchor.clone(),
            alpha: cut.alpha,
            binding: cut.binding,
        },
        cut: SeparatedCut::Paraboloid(cut),
        violation,
        diagnostics,
    })
}
