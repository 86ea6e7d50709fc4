//! Brute-force checks that share no code with the separators: ball
//! containment by direct geometry, lifting coefficients by bisection, cut
//! validity by sampling the complement of `int P`, facet irredundancy by LP,
//! concavity by second differences, and small QPs by active-set
//! enumeration.

mod alpha;
mod concavity;
mod containment;
mod enumeration;
mod irredundancy;
mod validity;

pub use alpha::brute_force_alpha;
pub use concavity::{probe_concavity, probe_concavity_values, Concavity};
pub use containment::{check_ball_containment, check_ball_containment_tol, Containment};
pub use enumeration::enumerate_qp;
pub use irredundancy::{check_irredundancy, facet_center, FacetStatus};
pub use validity::{check_cut_validity, inflate_lifting, verify_counterexample, Validity, ValidityOptions};
