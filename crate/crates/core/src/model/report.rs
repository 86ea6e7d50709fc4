use crate::ellipsoid::ContainmentCertificate;
use crate::model::cut::{Ball, SeparatedCut};
use crate::Vector;

/// Point to be separated. `w` is only used by paraboloid-complement regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub x: Vector,
    pub w: Option<f64>,
    pub q: f64,
}

impl Query {
    pub fn new(x: Vector, q: f64) -> Self {
        Self { x, w: None, q }
    }

    pub fn with_w(x: Vector, w: f64, q: f64) -> Self {
        Self { x, w: Some(w), q }
    }
}

/// Geometric data that justifies the reported cut.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Tangent plane at `anchor`; valid everywhere.
    Linearization { anchor: Vector },
    /// Lifted first-order cut anchored on a facet of a polyhedron.
    Facet { facet: usize, anchor: Vector, alpha: f64, binding: Option<usize> },
    /// Inscribed ball, with the S-lemma certificate for ellipsoids.
    Ball { ball: Ball, containment: Option<ContainmentCertificate> },
    /// `a_i' x <= b_i`, the limit of lifted cuts on a facet whose lifting
    /// is unbounded.
    Halfspace { facet: usize },
    /// Paraboloid-complement lifting.
    Paraboloid { facet: usize, anchor: Vector, alpha: f64, binding: Option<usize> },
}

/// A facet subproblem that produced no cut.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSubproblem {
    pub facet: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Total solver iterations over all subproblems.
    pub iterations: usize,
    /// Largest KKT residual among the subproblem solutions that were used.
    pub kkt_residual: f64,
    /// Number of subproblems solved.
    pub subproblems: usize,
    /// Optimal squared radius (ellipsoids only).
    pub rho: Option<f64>,
    pub skipped: Vec<SkippedSubproblem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub query: Query,
    pub cut: SeparatedCut,
    /// Positive when the query is cut off.
    pub violation: f64,
    pub certificate: Certificate,
    pub diagnostics: Diagnostics,
}

impl SeparationReport {
    pub fn separates(&self) -> bool {
        self.violation > 0.0
    }

    /// Recomputes the violation from the cut and the query.
    pub fn recomputed_violation(&self) -> f64 {
        self.cut.violation(&self.query.x, self.query.w, self.query.q)
    }
}
