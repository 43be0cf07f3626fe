//! Special functions needed by the detector: log-gamma, the regularized
//! upper incomplete gamma function and its inverse, scaled modified Bessel
//! functions of integer order, the generalized Marcum Q-function and
//! Kummer's confluent hypergeometric function.
//!
//! Everything here is a pure function of its arguments.

mod bessel;
pub(crate) mod gamma;
mod hyperg;
mod incgamma;
mod marcum;

pub use bessel::bessel_i_scaled;
pub use gamma::{log_gamma, pochhammer_log};
pub use hyperg::{kummer_1f1, kummer_1f1_ln};
pub use incgamma::{inv_reg_upper_gamma, reg_upper_gamma};
pub use marcum::{marcum_q, marcum_q_with};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest amount a probability may stray outside `[0, 1]` before clamping
/// is treated as an accuracy failure.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Truncation policy for the infinite series evaluated in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
    consecutive_small: usize,
    max_cancellation: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
            consecutive_small: 3,
            max_cancellation: 1e6,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize, consecutive_small: usize) -> Result<Self> {
        Self::default()
            .with_rel_tol(rel_tol)?
            .with_max_terms(max_terms)?
            .with_consecutive_small(consecutive_small)
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(domain(
                "SeriesControl",
                format!("rel_tol must lie in (0, 1), got {rel_tol}"),
            ));
        }
        self.rel_tol = rel_tol;
        Ok(self)
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(domain("SeriesControl", "max_terms must be at least 1"));
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    pub fn with_consecutive_small(mut self, consecutive_small: usize) -> Result<Self> {
        if consecutive_small == 0 {
            return Err(domain(
                "SeriesControl",
                "consecutive_small must be at least 1",
            ));
        }
        self.consecutive_small = consecutive_small;
        Ok(self)
    }

    /// Largest tolerated ratio between the biggest term of an alternating
    /// series and its final value. Beyond this, rounding in the individual
    /// terms swamps the requested accuracy and the series is reported as
    /// failed.
    pub fn with_max_cancellation(mut self, max_cancellation: f64) -> Result<Self> {
        if !(max_cancellation >= 1.0) {
            return Err(domain(
                "SeriesControl",
                format!("max_cancellation must be >= 1, got {max_cancellation}"),
            ));
        }
        self.max_cancellation = max_cancellation;
        Ok(self)
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn consecutive_small(&self) -> usize {
        self.consecutive_small
    }

    pub fn max_cancellation(&self) -> f64 {
        self.max_cancellation
    }
}

/// Clamp a computed probability into `[0, 1]`, failing if the excursion is
/// larger than [`PROBABILITY_SLACK`].
pub fn clamp_probability(func: &'static str, value: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&value) {
        return Err(Error::Accuracy { func, value });
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running sum of positive terms kept as `exp(log_scale) * sum` so that
/// series whose terms exceed the double range can still be accumulated.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ScaledSum {
    log_scale: f64,
    sum: f64,
}

const RESCALE_AT: f64 = 1e280;

impl ScaledSum {
    /// Starts the sum with a single term of value `exp(log_first)`. The
    /// term is represented as `1.0` relative to the scale.
    pub(crate) fn starting_at(log_first: f64) -> Self {
        Self {
            log_scale: log_first,
            sum: 1.0,
        }
    }

    /// Adds a term expressed in the current scale and returns it expressed
    /// in the (possibly updated) scale, so the caller can keep multiplying.
    pub(crate) fn add_scaled(&mut self, term: f64) -> f64 {
        self.sum += term;
        if self.sum > RESCALE_AT {
            self.sum /= RESCALE_AT;
            self.log_scale += RESCALE_AT.ln();
            term / RESCALE_AT
        } else {
            term
        }
    }

    pub(crate) fn relative(&self) -> f64 {
        self.sum
    }

    pub(crate) fn ln(&self) -> f64 {
        self.log_scale + self.sum.ln()
    }
}
