use crate::error::{Error, Result};
use crate::model::cut::{Cut, Provenance};
use crate::model::region::{Polyhedron, GEOM_TOL};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutClass {
    /// `delta = 0`: a linear inequality valid on the complement of `P`.
    TrivialComplementValid,
    /// Violating ball has radius zero.
    Linearization,
    /// Violating ball is inscribed in `P` and touches a facet.
    LiftedFirstOrder,
    /// A strictly stronger lifted cut exists; it is returned as witness.
    Dominated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: CutClass,
    /// The cut itself, or the dominating cut for [`CutClass::Dominated`].
    pub witness: Cut,
}

/// Places a valid cut in the lifted first-order taxonomy.
pub fn classify_cut(cut: &Cut, p: &Polyhedron) -> Result<Classification> {
    if cut.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: cut.dim() });
    }
    let cut = cut.normalized()?;
    if cut.delta == 0.0 {
        return Ok(Classification { class: CutClass::TrivialComplementValid, witness: cut });
    }
    let (center, rho) = cut.violating_ball().expect("delta is 1");
    let radius = rho.max(0.0).sqrt();
    let (depth, nearest) = nearest_facet(p, &center);

    if radius <= GEOM_TOL {
        if rho >= -GEOM_TOL * GEOM_TOL {
            let witness = Cut {
                provenance: Provenance::Linearization { anchor: center },
                ..cut
            };
            return Ok(Classification { class: CutClass::Linearization, witness });
        }
        // Empty violating set: weaker than some tangent plane or ball cut.
        let witness = if depth > GEOM_TOL {
            lifted(p, &center, depth, nearest)
        } else {
            Cut::linearization(&center)
        };
        return Ok(Classification { class: CutClass::Dominated, witness });
    }

    if depth < radius - GEOM_TOL {
        return Err(Error::InvalidCut(format!(
            "violating ball of radius {radius} leaves the region through facet {nearest} (distance {depth})"
        )));
    }

    let tangent = (0..p.num_facets())
        .map(|j| (j, (p.distance(j, &center) - radius).abs()))
        .filter(|&(_, gap)| gap <= GEOM_TOL)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match tangent {
        Some((j, _)) => {
            let witness = Cut { provenance: lifted_provenance(p, &center, radius, j), ..cut };
            Ok(Classification { class: CutClass::LiftedFirstOrder, witness })
        }
        None => Ok(Classification {
            class: CutClass::Dominated,
            witness: lifted(p, &center, depth, nearest),
        }),
    }
}

fn nearest_facet(p: &Polyhedron, x: &Vector) -> (f64, usize) {
    (0..p.num_facets())
        .map(|j| (p.distance(j, x), j))
        .fold((f64::INFINITY, 0), |acc, cur| if cur.0 < acc.0 { cur } else { acc })
}

fn lifted_provenance(p: &Polyhedron, center: &Vector, radius: f64, facet: usize) -> Provenance {
    let a = p.normal(facet);
    let norm = p.normal_norm(facet);
    let anchor = center - a * (p.distance(facet, center) / norm);
    Provenance::LiftedFirstOrder { anchor, facet, alpha: radius / norm }
}

/// Ball cut for the largest ball centered at `center`, touching `facet`.
fn lifted(p: &Polyhedron, center: &Vector, radius: f64, facet: usize) -> Cut {
    Cut {
        delta: 1.0,
        beta: center.clone(),
        beta0: radius * radius - center.norm_squared(),
        provenance: lifted_provenance(p, center, radius, facet),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::cut::{ball_cut, linearization_cut, Ball};

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn unit_square() -> Polyhedron {
        Polyhedron::from_rows(
            &[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]],
            &[0.0, 0.0, -1.0, -1.0],
        )
        .unwrap()
    }

    #[test]
    fn zero_delta_is_complement_valid() {
        let c = Cut { delta: 0.0, beta: v(&[0.5, 0.0]), beta0: 0.0, provenance: Provenance::External };
        assert_eq!(classify_cut(&c, &unit_square()).unwrap().class, CutClass::TrivialComplementValid);
    }

    #[test]
    fn linearization_outside() {
        let c = linearization_cut(&v(&[2.0, -1.0]));
        assert_eq!(classify_cut(&c, &unit_square()).unwrap().class, CutClass::Linearization);
    }

    #[test]
    fn inscribed_tangent_ball_is_lifted() {
        // q >= x1 + x2 - 0.25
        let c = Cut { delta: 1.0, beta: v(&[0.5, 0.5]), beta0: -0.25, provenance: Provenance::External };
        let cls = classify_cut(&c, &unit_square()).unwrap();
        assert_eq!(cls.class, CutClass::LiftedFirstOrder);
        match cls.witness.provenance {
            Provenance::LiftedFirstOrder { anchor, facet, alpha } => {
                assert_eq!(facet, 0);
                assert!((anchor - v(&[0.0, 0.5])).norm() < 1e-12);
                assert!((alpha - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected provenance {other:?}"),
        }
    }

    #[test]
    fn untouching_ball_is_dominated() {
        let c = ball_cut(&Ball::new(v(&[0.3, 0.5]), 0.04).unwrap());
        let cls = classify_cut(&c, &unit_square()).unwrap();
        assert_eq!(cls.class, CutClass::Dominated);
        // maximal concentric ball has radius 0.3
        let w = &cls.witness;
        assert!((w.beta0 - (0.09 - 0.34)).abs() < 1e-12);
        let again = classify_cut(w, &unit_square()).unwrap();
        assert_eq!(again.class, CutClass::LiftedFirstOrder);
        assert!(again.witness.same_coefficients(w, 1e-12));
    }

    #[test]
    fn oversized_ball_is_invalid() {
        let c = ball_cut(&Ball::new(v(&[0.5, 0.5]), 0.3).unwrap());
        assert!(matches!(classify_cut(&c, &unit_square()), Err(Error::InvalidCut(_))));
    }

    #[test]
    fn classification_is_idempotent_on_witness() {
        let p = unit_square();
        let cuts = [
            linearization_cut(&v(&[3.0, 3.0])),
            ball_cut(&Ball::new(v(&[0.5, 0.5]), 0.25).unwrap()),
            ball_cut(&Ball::new(v(&[0.4, 0.6]), 0.01).unwrap()),
            ball_cut(&Ball::new(v(&[0.2, 0.7]), 0.04).unwrap()),
        ];
        for c in cuts {
            let first = classify_cut(&c, &p).unwrap();
            let second = classify_cut(&first.witness, &p).unwrap();
            assert!(second.witness.same_coefficients(&first.witness, 1e-12));
            let third = classify_cut(&second.witness, &p).unwrap();
            assert_eq!(third.class, second.class);
        }
    }
}
