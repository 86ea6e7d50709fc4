//! Instance model: quadratic forms, regions, balls, cuts and reports.

mod classify;
mod cut;
mod quadratic;
mod region;
mod report;

pub use classify::{classify_cut, Classification, CutClass};
pub use cut::{
    ball_cut, evaluate_cut, linearization_cut, Ball, Cut, ParaboloidCut, Provenance, SeparatedCut,
};
pub use quadratic::{normalize, AffineNormalizer, QuadraticForm};
pub use region::{Ellipsoid, ParaboloidComplement, Polyhedron, Region, EIGEN_TOL, GEOM_TOL};
pub use report::{Certificate, Diagnostics, Query, SeparationReport, SkippedSubproblem};
