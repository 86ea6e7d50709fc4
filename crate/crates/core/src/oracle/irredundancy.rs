use crate::model::Polyhedron;
use crate::solver::{solve_qp, QpProblem, QpSettings, SolveStatus};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetStatus {
    FacetDefining,
    Redundant,
}

/// Point of `H_i` maximizing the smallest distance `t <= 1` to the other
/// facets, with that distance. `None` if the LP fails.
pub fn facet_center(p: &Polyhedron, i: usize) -> Option<(Vector, f64)> {
    let d = p.dim();
    let m = p.num_facets();
    let n = d + 1;
    let mut eq = Matrix::zeros(1, n);
    eq.view_mut((0, 0), (1, d)).copy_from(&p.normal(i).transpose());
    let mut ineq = Matrix::zeros(m, n);
    let mut rhs = Vector::zeros(m);
    let mut row = 0;
    for j in (0..m).filter(|&j| j != i) {
        ineq.view_mut((row, 0), (1, d)).copy_from(&p.normal(j).transpose());
        ineq[(row, d)] = -p.normal_norm(j);
        rhs[row] = p.offset(j);
        row += 1;
    }
    ineq[(row, d)] = -1.0;
    rhs[row] = -1.0;
    let mut g = Vector::zeros(n);
    g[d] = -1.0;
    let qp = QpProblem::new(Matrix::zeros(n, n), g)
        .with_equalities(eq, Vector::from_element(1, p.offset(i)))
        .with_inequalities(ineq, rhs);
    let out = solve_qp(&qp, &QpSettings { max_iter: 50 * (n + m + 1), ..QpSettings::default() });
    match out.status {
        SolveStatus::Optimal => Some((out.primal.rows(0, d).into_owned(), out.primal[d])),
        _ => None,
    }
}

/// Facet `i` defines a facet iff some point of `H_i` is strictly inside
/// every other halfspace (by more than `1e-8`).
pub fn check_irredundancy(p: &Polyhedron) -> Vec<FacetStatus> {
    (0..p.num_facets())
        .map(|i| match facet_center(p, i) {
            Some((_, t)) if t > 1e-8 => FacetStatus::FacetDefining,
            _ => FacetStatus::Redundant,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let sq = Polyhedron::cube(2, 0.0, 1.0).unwrap();
        assert!(check_irredundancy(&sq).iter().all(|s| *s == FacetStatus::FacetDefining));
        let extra = Polyhedron::from_rows(
            &[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0], &[2.0, 0.0]],
            &[0.0, 0.0, -1.0, -1.0, -0.5],
        )
        .unwrap();
        let status = check_irredundancy(&extra);
        assert_eq!(status[4], FacetStatus::Redundant);
        assert!(status[..4].iter().all(|s| *s == FacetStatus::FacetDefining));
        let half = Polyhedron::from_rows(&[&[1.0, 0.0]], &[0.0]).unwrap();
        assert_eq!(check_irredundancy(&half), vec![FacetStatus::FacetDefining]);
    }
}
