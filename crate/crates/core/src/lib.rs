//! Separation of linear inequalities for the convex hull of
//!
//! ```text
//!     S = { (x, q) : q >= Q(x),  x outside int(P) }
//! ```
//!
//! where `Q` is a convex quadratic and `P` is a polyhedron, a bounded
//! ellipsoid, or (for the indefinite case) a region of the form
//! `{ (x, w) : a_i' x - w <= b_i }`.
//!
//! Every cut is stored as `delta q - 2 beta' x >= beta0`. After mapping `Q`
//! to `||x||^2` (see [`model::normalize`]) a cut with `delta = 1` is violated
//! by `(x, ||x||^2)` exactly on the interior of the ball
//! `B(beta, sqrt(||beta||^2 + beta0))`, so every valid cut corresponds to a
//! ball inscribed in `P`. The separators search over such balls:
//!
//! * [`poly`]: lifted first-order cuts for polyhedra, one convex QP per facet.
//! * [`ellipsoid`]: S-lemma containment certificate, a barrier solve at fixed
//!   squared radius, and golden-section search over the radius.
//! * [`paraboloid`]: closed-form lifting for the paraboloid-complement case.
//!
//! [`oracle`] holds brute-force checks that are independent of the
//! separators and back the test suites.

pub mod cutloop;
pub mod ellipsoid;
pub mod error;
pub mod generate;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod paraboloid;
pub mod poly;
pub mod solver;

pub use error::{Error, Result};
pub use model::{
    ball_cut, classify_cut, evaluate_cut, linearization_cut, normalize, AffineNormalizer, Ball,
    Certificate, Classification, Cut, CutClass, Diagnostics, Ellipsoid, ParaboloidComplement,
    ParaboloidCut, Polyhedron, Provenance, QuadraticForm, Query, Region, SeparatedCut,
    SeparationReport,
};
pub use instance::{Bounds, Instance};
pub use solver::{KktResiduals, QpProblem, QpSettings, SolveOutcome, SolveStatus};

/// Vector type used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
/// Matrix type used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
