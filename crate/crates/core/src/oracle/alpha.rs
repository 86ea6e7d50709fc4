use crate::error::{Error, Result};
use crate::model::{Ball, Polyhedron, Region, GEOM_TOL};
use crate::oracle::containment::check_ball_containment_tol;
use crate::Vector;

/// Largest `alpha` with `B(y + alpha a_i, alpha ||a_i||) ⊆ P`, by doubling and
/// bisection to `1e-10`. Returns `+inf` if `alpha = 1e9` still fits.
pub fn brute_force_alpha(p: &Polyhedron, y: &Vector, i: usize) -> Result<f64> {
    p.check_facet(i)?;
    if y.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: y.len() });
    }
    for j in 0..p.num_facets() {
        let s = p.slack(j, y);
        if (j == i && s.abs() > GEOM_TOL) || s < -GEOM_TOL {
            return Err(Error::NotOnFacet { facet: i, residual: s });
        }
    }
    let a = p.normal(i);
    let region = Region::Polyhedron(p.clone());
    // y sits on H_i only up to rounding; allow the ball that much slack.
    let base_tol = (-p.slack(i, y) / p.normal_norm(i)).max(0.0);
    let fits = |alpha: f64| {
        let center = y + a * alpha;
        let tol = base_tol + 1e-13 * (1.0 + center.norm());
        let ball = Ball { center, rho: alpha * alpha * a.norm_squared() };
        check_ball_containment_tol(&region, &ball, tol).is_contained()
    };

    if fits(1e9) {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while fits(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn examples() {
        let sq = Polyhedron::cube(2, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(brute_force_alpha(&sq, &Vector::from_row_slice(&[0.0, 0.5]), 0).unwrap(), 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(brute_force_alpha(&sq, &Vector::zeros(2), 0).unwrap(), 0.0, epsilon = 1e-10);
        let half = Polyhedron::from_rows(&[&[1.0, 0.0]], &[0.0]).unwrap();
        assert!(brute_force_alpha(&half, &Vector::from_row_slice(&[0.0, 3.0]), 0).unwrap().is_infinite());
    }
}
