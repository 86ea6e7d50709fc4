use thiserror::Error;

use crate::solver::SolveStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadratic form is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("ellipsoid is unbounded (min eigenvalue {min_eigenvalue:e})")]
    UnboundedEllipsoid { min_eigenvalue: f64 },

    #[error("facet index {index} out of range (region has {count} facets)")]
    FacetOutOfRange { index: usize, count: usize },

    #[error("facet pair ({0}, {0}) has identical indices")]
    SamePairIndex(usize),

    #[error("point is not on facet {facet} (residual {residual:e})")]
    NotOnFacet { facet: usize, residual: f64 },

    #[error("lifting coefficient {alpha} exceeds maximum {max}")]
    AlphaTooLarge { alpha: f64, max: f64 },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("facets {i} and {j} have identical normals")]
    IdenticalNormals { i: usize, j: usize },

    #[error("anchor is not in the relative interior of facet {facet} (facet {other} is active)")]
    NotRelativeInterior { facet: usize, other: usize },

    #[error("no ball of squared radius {rho} fits in the region")]
    Infeasible { rho: f64 },

    #[error("solver failure ({context}): status {status:?}")]
    SolverFailure { context: String, status: SolveStatus },

    #[error("unbounded separation subproblem on facet {facet}")]
    UnboundedDirection { facet: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
