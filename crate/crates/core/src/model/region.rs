use crate::error::{Error, Result};
use crate::linalg::{asymmetry, symmetric_eigen};
use crate::solver::{solve_qp, QpProblem, QpSettings, SolveStatus};
use crate::{Matrix, Vector};

/// Eigenvalues below this are treated as zero.
pub const EIGEN_TOL: f64 = 1e-10;
/// Absolute tolerance on distances for tangency and containment tests.
pub const GEOM_TOL: f64 = 1e-8;

/// `{ x : a_i' x >= b_i, i = 1..m }` with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    norms: Vec<f64>,
    interior: Vector,
}

impl Polyhedron {
    /// Builds the polyhedron and finds a strict interior point by maximizing
    /// the radius of an inscribed ball (capped at 1).
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        let dim = Self::check_facets(&normals, &offsets)?;
        let interior = chebyshev_point(&normals, &offsets, dim)?;
        Ok(Self::assemble(normals, offsets, interior))
    }

    /// Builds the polyhedron with a caller-supplied strict interior point.
    pub fn with_interior_point(
        normals: Vec<Vector>,
        offsets: Vec<f64>,
        interior: Vector,
    ) -> Result<Self> {
        let dim = Self::check_facets(&normals, &offsets)?;
        if interior.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: interior.len() });
        }
        let poly = Self::assemble(normals, offsets, interior);
        if !poly.in_interior(&poly.interior) {
            return Err(Error::InvalidRegion("supplied point is not strictly interior".into()));
        }
        Ok(poly)
    }

    /// Convenience constructor from row slices.
    pub fn from_rows(rows: &[&[f64]], offsets: &[f64]) -> Result<Self> {
        let normals = rows.iter().map(|r| Vector::from_row_slice(r)).collect();
        Self::new(normals, offsets.to_vec())
    }

    /// The box `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut normals = Vec::with_capacity(2 * dim);
        let mut offsets = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            normals.push(Vector::from_fn(dim, |r, _| if r == k { 1.0 } else { 0.0 }));
            offsets.push(lo);
        }
        for k in 0..dim {
            normals.push(Vector::from_fn(dim, |r, _| if r == k { -1.0 } else { 0.0 }));
            offsets.push(-hi);
        }
        Self::with_interior_point(normals, offsets, Vector::from_element(dim, 0.5 * (lo + hi)))
    }

    fn check_facets(normals: &[Vector], offsets: &[f64]) -> Result<usize> {
        if normals.is_empty() {
            return Err(Error::InvalidRegion("polyhedron needs at least one facet".into()));
        }
        if normals.len() != offsets.len() {
            return Err(Error::DimensionMismatch { expected: normals.len(), found: offsets.len() });
        }
        let dim = normals[0].len();
        if dim == 0 {
            return Err(Error::InvalidRegion("zero-dimensional polyhedron".into()));
        }
        for (i, a) in normals.iter().enumerate() {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
            if a.norm() == 0.0 || !a.iter().all(|v| v.is_finite()) || !offsets[i].is_finite() {
                return Err(Error::InvalidRegion(format!("facet {i} has a zero or non-finite normal")));
            }
        }
        for i in 0..normals.len() {
            for j in (i + 1)..normals.len() {
                let (ni, nj) = (normals[i].norm(), normals[j].norm());
                let cos = normals[i].dot(&normals[j]) / (ni * nj);
                let same_offset = (offsets[i] / ni - offsets[j] / nj).abs() <= 1e-12 * (1.0 + offsets[i].abs() / ni);
                if cos > 1.0 - 1e-12 && same_offset {
                    return Err(Error::InvalidRegion(format!(
                        "facets {i} and {j} are positive multiples of each other"
                    )));
                }
            }
        }
        Ok(dim)
    }

    fn assemble(normals: Vec<Vector>, offsets: Vec<f64>, interior: Vector) -> Self {
        let norms = normals.iter().map(|a| a.norm()).collect();
        Self { normals, offsets, norms, interior }
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    pub fn normal(&self, i: usize) -> &Vector {
        &self.normals[i]
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn normal_norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn interior_point(&self) -> &Vector {
        &self.interior
    }

    pub fn check_facet(&self, i: usize) -> Result<()> {
        if i >= self.num_facets() {
            return Err(Error::FacetOutOfRange { index: i, count: self.num_facets() });
        }
        Ok(())
    }

    /// `a_i' x - b_i`.
    pub fn slack(&self, i: usize, x: &Vector) -> f64 {
        self.normals[i].dot(x) - self.offsets[i]
    }

    /// Signed Euclidean distance from `x` to `H_i` (positive on the feasible side).
    pub fn distance(&self, i: usize, x: &Vector) -> f64 {
        self.slack(i, x) / self.norms[i]
    }

    /// Smallest signed facet distance; `x` is in `P` iff this is `>= 0`.
    pub fn depth(&self, x: &Vector) -> f64 {
        (0..self.num_facets()).map(|i| self.distance(i, x)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.depth(x) >= -tol
    }

    pub fn in_interior(&self, x: &Vector) -> bool {
        self.depth(x) > 0.0
    }

    /// Maps the polyhedron through `x = W z + t`, returning `{ z : x in P }`.
    pub fn pull_back(&self, w: &Matrix, t: &Vector, interior: Vector) -> Result<Self> {
        let normals: Vec<Vector> = self.normals.iter().map(|a| w.transpose() * a).collect();
        let offsets = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| b - a.dot(t))
            .collect();
        Self::with_interior_point(normals, offsets, interior)
    }
}

/// Strict interior point from `max r  s.t.  a_i' x - ||a_i|| r >= b_i, r <= 1`.
fn chebyshev_point(normals: &[Vector], offsets: &[f64], dim: usize) -> Result<Vector> {
    let m = normals.len();
    let n = dim + 1;
    let mut c = Matrix::zeros(m + 1, n);
    let mut rhs = Vector::zeros(m + 1);
    for (i, a) in normals.iter().enumerate() {
        for k in 0..dim {
            c[(i, k)] = a[k];
        }
        c[(i, dim)] = -a.norm();
        rhs[i] = offsets[i];
    }
    c[(m, dim)] = -1.0;
    rhs[m] = -1.0;
    let mut g = Vector::zeros(n);
    g[dim] = -1.0;
    let problem = QpProblem::new(Matrix::zeros(n, n), g).with_inequalities(c, rhs);
    let settings = QpSettings { max_iter: 50 * (n + m + 1), ..QpSettings::default() };
    let out = solve_qp(&problem, &settings);
    match out.status {
        SolveStatus::Optimal if out.primal[dim] > 1e-9 => Ok(out.primal.rows(0, dim).into_owned()),
        SolveStatus::Optimal | SolveStatus::Infeasible => {
            Err(Error::InvalidRegion("polyhedron has empty interior".into()))
        }
        status => Err(Error::SolverFailure { context: "interior point".into(), status }),
    }
}

/// `{ x : x' A x - 2 c' x + b <= 0 }` with `A` positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    a: Matrix,
    c: Vector,
    b: f64,
    eigenvalues: Vector,
    eigenvectors: Matrix,
}

impl Ellipsoid {
    pub fn new(a: Matrix, c: Vector, b: f64) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || d == 0 {
            return Err(Error::InvalidRegion("ellipsoid matrix must be square and nonempty".into()));
        }
        if c.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: c.len() });
        }
        let asym = asymmetry(&a);
        if asym > 1e-12 {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let a = (&a + a.transpose()) * 0.5;
        let (mut eigenvalues, eigenvectors) = symmetric_eigen(&a);
        if eigenvalues[0] < -EIGEN_TOL {
            return Err(Error::InvalidRegion(format!(
                "ellipsoid matrix has negative eigenvalue {:e}",
                eigenvalues[0]
            )));
        }
        for v in eigenvalues.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let e = Self { a, c, b, eigenvalues, eigenvectors };
        if e.is_bounded() && e.center_level() <= 0.0 {
            return Err(Error::InvalidRegion("ellipsoid has empty interior".into()));
        }
        Ok(e)
    }

    /// The ball `B(center, radius)` as an ellipsoid.
    pub fn ball(center: &Vector, radius: f64) -> Result<Self> {
        let d = center.len();
        Self::new(Matrix::identity(d, d), center.clone(), center.norm_squared() - radius * radius)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn linear(&self) -> &Vector {
        &self.c
    }

    pub fn constant(&self) -> f64 {
        self.b
    }

    /// Eigenvalues of `A`, ascending.
    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors of `A` as columns (`U` in `A = U L U'`).
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn is_bounded(&self) -> bool {
        self.lambda_min() > EIGEN_TOL
    }

    pub fn require_bounded(&self) -> Result<()> {
        if self.is_bounded() {
            Ok(())
        } else {
            Err(Error::UnboundedEllipsoid { min_eigenvalue: self.lambda_min() })
        }
    }

    /// `x' A x - 2 c' x + b`; nonpositive inside.
    pub fn value(&self, x: &Vector) -> f64 {
        x.dot(&(&self.a * x)) - 2.0 * self.c.dot(x) + self.b
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.value(x) <= tol
    }

    pub fn in_interior(&self, x: &Vector) -> bool {
        self.value(x) < 0.0
    }

    /// `A^{-1} c` (bounded ellipsoids only).
    pub fn center(&self) -> Vector {
        let u = &self.eigenvectors;
        let mut w = u.transpose() * &self.c;
        for (k, wk) in w.iter_mut().enumerate() {
            *wk /= self.eigenvalues[k];
        }
        u * w
    }

    /// `c' A^{-1} c - b`, i.e. minus the constraint value at the center.
    pub fn center_level(&self) -> f64 {
        self.c.dot(&self.center()) - self.b
    }

    /// Maps the ellipsoid through `x = W z + t`.
    pub fn pull_back(&self, w: &Matrix, t: &Vector) -> Result<Self> {
        let a = w.transpose() * &self.a * w;
        let a = (&a + a.transpose()) * 0.5;
        let at = &self.a * t;
        let c = w.transpose() * (&self.c - &at);
        let b = self.b + t.dot(&at) - 2.0 * self.c.dot(t);
        Self::new(a, c, b)
    }
}

/// `P = { (x, w) : a_i' x - w <= b_i }`; the complement of its interior is
/// `{ (x, w) : w <= max_i (a_i' x - b_i) }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaboloidComplement {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
}

impl ParaboloidComplement {
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self> {
        if normals.is_empty() {
            return Err(Error::InvalidRegion("region needs at least one facet".into()));
        }
        if normals.len() != offsets.len() {
            return Err(Error::DimensionMismatch { expected: normals.len(), found: offsets.len() });
        }
        let dim = normals[0].len();
        for a in &normals {
            if a.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.len() });
            }
            if !a.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidRegion("non-finite facet normal".into()));
            }
        }
        if !offsets.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRegion("non-finite facet offset".into()));
        }
        Ok(Self { normals, offsets })
    }

    pub fn from_rows(rows: &[&[f64]], offsets: &[f64]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Vector::from_row_slice(r)).collect(), offsets.to_vec())
    }

    /// Dimension of `x` (the region itself lives in dimension `dim() + 1`).
    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    pub fn normal(&self, i: usize) -> &Vector {
        &self.normals[i]
    }

    pub fn offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn check_facet(&self, i: usize) -> Result<()> {
        if i >= self.num_facets() {
            return Err(Error::FacetOutOfRange { index: i, count: self.num_facets() });
        }
        Ok(())
    }

    /// `a_i' x - b_i`, the `w`-level of hyperplane `i` above `x`.
    pub fn level(&self, i: usize, x: &Vector) -> f64 {
        self.normals[i].dot(x) - self.offsets[i]
    }

    /// `max_i (a_i' x - b_i)` together with the maximizing index.
    pub fn envelope(&self, x: &Vector) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for i in 0..self.num_facets() {
            let v = self.level(i, x);
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn contains(&self, x: &Vector, w: f64, tol: f64) -> bool {
        w >= self.envelope(x).0 - tol
    }

    pub fn in_interior(&self, x: &Vector, w: f64) -> bool {
        w > self.envelope(x).0
    }

    /// Maps the `x` part through `x = W z + t`.
    pub fn pull_back(&self, w: &Matrix, t: &Vector) -> Result<Self> {
        let normals = self.normals.iter().map(|a| w.transpose() * a).collect();
        let offsets = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, b)| b - a.dot(t))
            .collect();
        Self::new(normals, offsets)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Polyhedron(Polyhedron),
    Ellipsoid(Ellipsoid),
    ParaboloidComplement(ParaboloidComplement),
}

impl Region {
    /// Dimension of `x`.
    pub fn dim(&self) -> usize {
        match self {
            Region::Polyhedron(p) => p.dim(),
            Region::Ellipsoid(e) => e.dim(),
            Region::ParaboloidComplement(r) => r.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Region::Polyhedron(_) => "polyhedron",
            Region::Ellipsoid(_) => "ellipsoid",
            Region::ParaboloidComplement(_) => "paraboloid_complement",
        }
    }
}

impl From<Polyhedron> for Region {
    fn from(p: Polyhedron) -> Self {
        Region::Polyhedron(p)
    }
}

impl From<Ellipsoid> for Region {
    fn from(e: Ellipsoid) -> Self {
        Region::Ellipsoid(e)
    }
}

impl From<ParaboloidComplement> for Region {
    fn from(r: ParaboloidComplement) -> Self {
        Region::ParaboloidComplement(r)
    }
}
