//! Performance analysis of energy detectors: false-alarm, detection and
//! missed-detection probabilities in AWGN and averaged over Weibull fading.

// Argument checks are written as `!(x > 0.0)` so that NaN is rejected.
// Reference constants keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod channel;
pub mod detector;
mod error;
pub mod format;
pub mod montecarlo;
pub(crate) mod quadrature;
pub mod specfun;
pub mod sweep;

pub use channel::WeibullChannel;
pub use detector::{AvgPdResult, DetectorConfig, Method};
pub use error::{Error, Result};
pub use specfun::SeriesControl;

/// Converts a decibel power ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
