//! A complete separation problem: quadratic, region and query point, with
//! the change of variables to `q >= ||z||^2` handled here.

use crate::ellipsoid::separate_ellipsoid;
use crate::error::{Error, Result};
use crate::model::{normalize, AffineNormalizer, QuadraticForm, Query, Region, SeparatedCut, SeparationReport};
use crate::oracle::{check_cut_validity, inflate_lifting, Validity, ValidityOptions};
use crate::paraboloid::separate_paraboloid_with;
use crate::poly::{separate_poly_with, SeparationOptions};
use crate::{Matrix, Vector};

/// Box for the demonstration loop: `lo <= x <= hi`, `q_lo <= q <= q_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vector,
    pub hi: Vector,
    pub q_lo: f64,
    pub q_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub quadratic: QuadraticForm,
    pub region: Region,
    pub query: Query,
    pub bounds: Option<Bounds>,
}

impl Instance {
    pub fn new(quadratic: QuadraticForm, region: Region, query: Query) -> Result<Self> {
        let d = region.dim();
        if quadratic.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: quadratic.dim() });
        }
        if query.x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: query.x.len() });
        }
        if matches!(region, Region::ParaboloidComplement(_)) && query.w.is_none() {
            return Err(Error::InvalidRegion("paraboloid-complement queries need w_star".into()));
        }
        Ok(Self { quadratic, region, query, bounds: None })
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        let d = self.dim();
        if bounds.lo.len() != d || bounds.hi.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: bounds.lo.len().min(bounds.hi.len()) });
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// `Q(x) = ||x||^2` exactly.
    pub fn is_standard_form(&self) -> bool {
        let d = self.dim();
        self.quadratic.matrix() == &Matrix::identity(d, d)
            && self.quadratic.linear().iter().all(|v| *v == 0.0)
            && self.quadratic.constant() == 0.0
    }

    /// Region in normalized coordinates and the map to them.
    pub fn normalized(&self) -> Result<(Region, AffineNormalizer)> {
        if self.is_standard_form() {
            return Ok((self.region.clone(), AffineNormalizer::identity(self.dim())));
        }
        normalize(&self.quadratic, &self.region)
    }

    pub fn separate(&self, options: &SeparationOptions) -> Result<SeparationReport> {
        self.separate_at(&self.query, options)
    }

    /// Separates `query` (in original coordinates). The returned cut and
    /// query are in original coordinates; the certificate refers to the
    /// normalized ones.
    pub fn separate_at(&self, query: &Query, options: &SeparationOptions) -> Result<SeparationReport> {
        let (region, nz) = self.normalized()?;
        let z = nz.forward(&query.x);
        let qz = nz.forward_q(query.q);
        let mut report = match &region {
            Region::Polyhedron(p) => separate_poly_with(p, &z, qz, options)?,
            Region::Ellipsoid(e) => separate_ellipsoid(e, &z, qz)?,
            Region::ParaboloidComplement(r) => {
                let w = query.w.ok_or_else(|| Error::InvalidRegion("paraboloid-complement queries need w_star".into()))?;
                separate_paraboloid_with(r, &z, w, qz, options)?
            }
        };
        report.cut = match &report.cut {
            SeparatedCut::Standard(c) => SeparatedCut::Standard(nz.pull_back_cut(c)),
            SeparatedCut::Paraboloid(c) => SeparatedCut::Paraboloid(nz.pull_back_paraboloid_cut(c)),
        };
        report.query = query.clone();
        report.violation = report.recomputed_violation();
        Ok(report)
    }

    /// Runs the validity oracle on a cut given in original coordinates.
    /// Counterexample points are reported in original coordinates.
    pub fn check_cut(&self, cut: &SeparatedCut, options: &ValidityOptions) -> Result<Validity> {
        let (region, nz) = self.normalized()?;
        let forward = match cut {
            SeparatedCut::Standard(c) => SeparatedCut::Standard(nz.push_forward_cut(c)),
            SeparatedCut::Paraboloid(c) => SeparatedCut::Paraboloid(nz.push_forward_paraboloid_cut(c)),
        };
        Ok(match check_cut_validity(&region, &forward, options)? {
            Validity::CounterExample { point, w, residual, samples } => {
                Validity::CounterExample { point: nz.inverse(&point), w, residual, samples }
            }
            v => v,
        })
    }

    /// The cut with its lifting coefficient raised by `delta`, or `None`
    /// when the cut carries no coefficient.
    pub fn inflate_lifting(&self, cut: &SeparatedCut, delta: f64) -> Result<Option<SeparatedCut>> {
        let (region, nz) = self.normalized()?;
        let forward = match cut {
            SeparatedCut::Standard(c) => SeparatedCut::Standard(nz.push_forward_cut(c)),
            SeparatedCut::Paraboloid(c) => SeparatedCut::Paraboloid(nz.push_forward_paraboloid_cut(c)),
        };
        Ok(inflate_lifting(&region, &forward, delta).map(|c| match c {
            SeparatedCut::Standard(c) => SeparatedCut::Standard(nz.pull_back_cut(&c)),
            SeparatedCut::Paraboloid(c) => SeparatedCut::Paraboloid(nz.pull_back_paraboloid_cut(&c)),
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Polyhedron;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scaled_form_matches_direct_separation() {
        // Q(x) = 4 x1^2 + x2^2 on the unit square equals ||z||^2 with
        // z = (2 x1, x2) on [0, 2] x [0, 1].
        let q = QuadraticForm::new(Matrix::from_diagonal(&Vector::from_row_slice(&[4.0, 1.0])), Vector::zeros(2), 0.0)
            .unwrap();
        let sq = Region::Polyhedron(Polyhedron::cube(2, 0.0, 1.0).unwrap());
        let x = Vector::from_row_slice(&[0.5, 0.5]);
        let inst = Instance::new(q.clone(), sq, Query::new(x.clone(), 0.5)).unwrap();
        let report = inst.separate(&SeparationOptions::default()).unwrap();

        let rect = Polyhedron::from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]], &[0.0, 0.0, -2.0, -1.0])
            .unwrap();
        let direct = separate_poly_with(&rect, &Vector::from_row_slice(&[1.0, 0.5]), 0.5, &SeparationOptions::default())
            .unwrap();
        assert_abs_diff_eq!(report.violation, direct.violation, epsilon = 1e-9);
        let cut = report.cut.as_standard().unwrap();
        // Valid in original coordinates: q = Q(x) on the complement.
        let check = inst.check_cut(&report.cut, &ValidityOptions::default()).unwrap();
        assert!(check.is_valid());
        assert_abs_diff_eq!(cut.violation(&x, 0.5), report.violation, epsilon = 1e-12);
    }
}
