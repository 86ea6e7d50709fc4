use crate::error::{Error, Result};
use crate::linalg::{asymmetry, symmetric_eigen};
use crate::model::cut::{Cut, ParaboloidCut};
use crate::model::region::{Region, EIGEN_TOL};
use crate::{Matrix, Vector};

/// `Q(x) = x' M x + l' x + m0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    m: Matrix,
    l: Vector,
    m0: f64,
    min_eigenvalue: f64,
    normalizer: Option<AffineNormalizer>,
}

/// Affine change of variables `z = T x + s` with `Q(x) = ||z||^2 + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineNormalizer {
    t: Matrix,
    t_inv: Matrix,
    s: Vector,
    offset: f64,
}

impl QuadraticForm {
    pub fn new(m: Matrix, l: Vector, m0: f64) -> Result<Self> {
        let d = m.nrows();
        if m.ncols() != d || d == 0 {
            return Err(Error::InvalidRegion("quadratic matrix must be square and nonempty".into()));
        }
        if l.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: l.len() });
        }
        let asym = asymmetry(&m);
        if asym > 1e-12 {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let m = (&m + m.transpose()) * 0.5;
        let (vals, _) = symmetric_eigen(&m);
        let min_eigenvalue = vals[0];
        let normalizer = if min_eigenvalue > EIGEN_TOL {
            AffineNormalizer::from_form(&m, &l, m0)
        } else {
            None
        };
        Ok(Self { m, l, m0, min_eigenvalue, normalizer })
    }

    /// `||x||^2` in dimension `d`.
    pub fn squared_norm(d: usize) -> Self {
        Self::new(Matrix::identity(d, d), Vector::zeros(d), 0.0).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn linear(&self) -> &Vector {
        &self.l
    }

    pub fn constant(&self) -> f64 {
        self.m0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn is_positive_definite(&self) -> bool {
        self.normalizer.is_some()
    }

    pub fn normalizer(&self) -> Option<&AffineNormalizer> {
        self.normalizer.as_ref()
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        x.dot(&(&self.m * x)) + self.l.dot(x) + self.m0
    }
}

impl AffineNormalizer {
    fn from_form(m: &Matrix, l: &Vector, m0: f64) -> Option<Self> {
        let chol = m.clone().cholesky()?;
        let t = chol.l().transpose();
        let t_inv = t.clone().try_inverse()?;
        let s = t_inv.transpose() * l * 0.5;
        let offset = m0 - s.norm_squared();
        Some(Self { t, t_inv, s, offset })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            t: Matrix::identity(d, d),
            t_inv: Matrix::identity(d, d),
            s: Vector::zeros(d),
            offset: 0.0,
        }
    }

    pub fn transform(&self) -> &Matrix {
        &self.t
    }

    pub fn shift(&self) -> &Vector {
        &self.s
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `z = T x + s`.
    pub fn forward(&self, x: &Vector) -> Vector {
        &self.t * x + &self.s
    }

    /// `x = T^{-1} (z - s)`.
    pub fn inverse(&self, z: &Vector) -> Vector {
        &self.t_inv * (z - &self.s)
    }

    /// Epigraph variable in normalized coordinates.
    pub fn forward_q(&self, q: f64) -> f64 {
        q - self.offset
    }

    pub fn inverse_q(&self, q: f64) -> f64 {
        q + self.offset
    }

    /// Expresses a cut given in normalized coordinates in the original ones.
    /// Provenance data (anchors, balls) stays in normalized coordinates.
    pub fn pull_back_cut(&self, cut: &Cut) -> Cut {
        Cut {
            delta: cut.delta,
            beta: self.t.transpose() * &cut.beta,
            beta0: cut.beta0 + cut.delta * self.offset + 2.0 * cut.beta.dot(&self.s),
            provenance: cut.provenance.clone(),
        }
    }

    /// Inverse of [`AffineNormalizer::pull_back_cut`].
    pub fn push_forward_cut(&self, cut: &Cut) -> Cut {
        let beta = self.t_inv.transpose() * &cut.beta;
        Cut {
            delta: cut.delta,
            beta0: cut.beta0 - cut.delta * self.offset - 2.0 * beta.dot(&self.s),
            beta,
            provenance: cut.provenance.clone(),
        }
    }

    /// Paraboloid cut in original coordinates; the anchor is mapped back too.
    pub fn pull_back_paraboloid_cut(&self, cut: &ParaboloidCut) -> ParaboloidCut {
        ParaboloidCut {
            x_coeff: self.t.transpose() * &cut.x_coeff,
            constant: cut.constant + cut.x_coeff.dot(&self.s) + self.offset,
            anchor: self.inverse(&cut.anchor),
            ..cut.clone()
        }
    }

    /// Inverse of [`AffineNormalizer::pull_back_paraboloid_cut`].
    pub fn push_forward_paraboloid_cut(&self, cut: &ParaboloidCut) -> ParaboloidCut {
        let x_coeff = self.t_inv.transpose() * &cut.x_coeff;
        ParaboloidCut {
            constant: cut.constant - x_coeff.dot(&self.s) - self.offset,
            x_coeff,
            anchor: self.forward(&cut.anchor),
            ..cut.clone()
        }
    }
}

/// Maps `region` into the coordinates where the epigraph constraint reads
/// `q >= ||z||^2`.
pub fn normalize(q: &QuadraticForm, region: &Region) -> Result<(Region, AffineNormalizer)> {
    if region.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), found: region.dim() });
    }
    let nz = q
        .normalizer()
        .cloned()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: q.min_eigenvalue() })?;
    // x = W z + t
    let w = nz.t_inv.clone();
    let t = -(&nz.t_inv * &nz.s);
    let mapped = match region {
        Region::Polyhedron(p) => {
            let interior = nz.forward(p.interior_point());
            Region::Polyhedron(p.pull_back(&w, &t, interior)?)
        }
        Region::Ellipsoid(e) => Region::Ellipsoid(e.pull_back(&w, &t)?),
        Region::ParaboloidComplement(r) => Region::ParaboloidComplement(r.pull_back(&w, &t)?),
    };
    Ok((mapped, nz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::region::Polyhedron;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_square() -> Polyhedron {
        Polyhedron::from_rows(
            &[&[1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]],
            &[0.0, 0.0, -1.0, -1.0],
        )
        .unwrap()
    }

    #[test]
    fn identity_form_leaves_region_unchanged() {
        let q = QuadraticForm::squared_norm(2);
        let region = Region::Polyhedron(unit_square());
        let (mapped, nz) = normalize(&q, &region).unwrap();
        assert_eq!(nz.transform(), &Matrix::identity(2, 2));
        assert_abs_diff_eq!(nz.offset(), 0.0);
        match mapped {
            Region::Polyhedron(p) => {
                for i in 0..4 {
                    assert_abs_diff_eq!((p.normal(i) - unit_square().normal(i)).norm(), 0.0);
                    assert_abs_diff_eq!(p.offset(i), unit_square().offset(i));
                }
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn diagonal_form_stretches_square() {
        let q = QuadraticForm::new(
            Matrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]),
            Vector::zeros(2),
            0.0,
        )
        .unwrap();
        let nz = q.normalizer().unwrap();
        assert_abs_diff_eq!((nz.transform() - Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0])).norm(), 0.0, epsilon = 1e-14);
        let (mapped, _) = normalize(&q, &Region::Polyhedron(unit_square())).unwrap();
        let Region::Polyhedron(p) = mapped else { unreachable!() };
        // [0,2] x [0,1]
        for (pt, inside) in [([1.9, 0.9], true), ([2.1, 0.5], false), ([1.0, 1.1], false), ([0.1, 0.1], true)] {
            assert_eq!(p.in_interior(&Vector::from_row_slice(&pt)), inside, "{pt:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = Vector::from_fn(2, |_, _| rng.random_range(-5.0..5.0));
            let z = nz.forward(&x);
            let lhs = q.eval(&x);
            let rhs = z.norm_squared() + nz.offset();
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn singular_form_is_rejected() {
        let q = QuadraticForm::new(
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            Vector::zeros(2),
            0.0,
        )
        .unwrap();
        let err = normalize(&q, &Region::Polyhedron(unit_square())).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn general_form_round_trip_and_membership() {
        let m = Matrix::from_row_slice(3, 3, &[3.0, 0.5, 0.2, 0.5, 2.0, -0.3, 0.2, -0.3, 1.5]);
        let l = Vector::from_row_slice(&[1.0, -2.0, 0.5]);
        let q = QuadraticForm::new(m, l, 0.7).unwrap();
        let cube = Polyhedron::cube(3, -1.0, 1.0).unwrap();
        let (mapped, nz) = normalize(&q, &Region::Polyhedron(cube.clone())).unwrap();
        let Region::Polyhedron(p) = mapped else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = Vector::from_fn(3, |_, _| rng.random_range(-2.0..2.0));
            let z = nz.forward(&x);
            assert!((nz.inverse(&z) - &x).norm() <= 1e-9);
            assert_eq!(cube.in_interior(&x), p.in_interior(&z));
            assert!((q.eval(&x) - z.norm_squared() - nz.offset()).abs() <= 1e-9 * q.eval(&x).abs().max(1.0));
        }
    }

    #[test]
    fn pulled_back_cut_matches_normalized_cut() {
        let m = Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let q = QuadraticForm::new(m, Vector::from_row_slice(&[0.4, -1.0]), 2.0).unwrap();
        let nz = q.normalizer().unwrap();
        let cut = Cut::linearization(&Vector::from_row_slice(&[0.3, -0.7]));
        let back = nz.pull_back_cut(&cut);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = Vector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
            let qv: f64 = rng.random_range(-3.0..10.0);
            let lhs = back.evaluate(&x, qv);
            let rhs = cut.evaluate(&nz.forward(&x), nz.forward_q(qv));
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }
}
