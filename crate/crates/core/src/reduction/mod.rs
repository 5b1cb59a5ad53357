//! Reduction theory: Minkowski reduction, the Grenier fundamental domain and
//! Siegel sets.

mod grenier;
mod minkowski;
mod siegel;

pub use grenier::{grenier_margin, grenier_membership, grenier_reduce, F3Mode, GrenierCheck, GrenierViolation};
pub use minkowski::{
    is_minkowski_reduced, minkowski_margin, minkowski_reduce, r4_check, MinkowskiCheck, MinkowskiViolation,
};
pub use siegel::{sandwich_probe, siegel_membership, SandwichReport, SiegelSetParams};

use serde::{Deserialize, Serialize};

use crate::linalg::{SpdMatrix, UnimodularMatrix};

/// Default cap on reduction iterations.
pub const ITERATION_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Minkowski,
    Grenier,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionResult {
    #[serde(rename = "A")]
    pub a: UnimodularMatrix,
    #[serde(rename = "R")]
    pub r: SpdMatrix,
    pub domain: Domain,
    pub iterations: usize,
    /// The reduced point lies within `1e-6` of an active constraint.
    pub boundary: bool,
}

/// Relative margin below which a point counts as lying on the boundary.
pub const BOUNDARY_MARGIN: f64 = 1e-6;
