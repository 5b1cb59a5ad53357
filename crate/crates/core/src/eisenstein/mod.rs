//! Selberg Eisenstein series, their Fourier coefficients and the Grenier
//! operator.

pub mod cosets;
pub mod fourier;
pub mod grenier_op;
pub mod series;

pub use crate::kbessel::{k_bessel_rank1, k_bessel_rank1_with, Convention};
pub use cosets::{canonical, count_cosets, enumerate_cosets, fold_cosets, max_height, CosetRep};
pub use fourier::{cuspidality_defect, fourier_coefficient, TorusAverage};
pub use grenier_op::{grenier_operator, grenier_scaled, stable_chain_check, ChainEntry, ChainLevel, ChainProbe, GrenierLimit, GrenierSample, StableChainReport};
pub use series::{check_convergence, eisenstein_many, eisenstein_series, EisensteinField, EisensteinValue, TailMode, TruncationParams};
