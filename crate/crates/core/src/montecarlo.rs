//! Monte Carlo estimation of false-alarm and average detection
//! probabilities.
//!
//! Rather than synthesizing waveforms, each trial draws the radiometer's
//! test statistic directly: a sum of `2u` squared unit normals, with the
//! noncentrality `2γ` placed on a single component's mean. Under fading, `γ`
//! is first drawn from the Weibull channel.
//!
//! # Random streams
//!
//! Trials are split into fixed blocks of [`BLOCK_TRIALS`]. Block `i` uses a
//! ChaCha8 generator seeded with `seed` via `SeedableRng::seed_from_u64` and
//! switched to stream `i` with `set_stream`. The block layout does not
//! depend on the number of worker threads and the per-block hit counts are
//! summed as integers, so serial and parallel runs agree bit for bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::WeibullChannel;
use crate::detector::DetectorConfig;
use crate::error::{domain, Result};

/// Trials per independent random stream.
pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Noise only.
    H0,
    /// Signal plus noise.
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub cfg: DetectorConfig,
    pub channel: Option<WeibullChannel>,
    pub trials: u64,
    pub seed: u64,
    pub hypothesis: Hypothesis,
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(domain("SimSpec", "trials must be at least 1"));
        }
        if self.hypothesis == Hypothesis::H1 && self.channel.is_none() {
            return Err(domain("SimSpec", "H1 simulation needs a fading channel"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub estimate: f64,
    pub trials: u64,
    pub seed: u64,
    /// Normal-approximation 95% half-width, `1.96 √(p(1-p)/n)`.
    pub half_width_95: f64,
    pub hypothesis: Hypothesis,
}

impl SimReport {
    fn from_count(hits: u64, spec: &SimSpec) -> Self {
        let n = spec.trials as f64;
        let estimate = hits as f64 / n;
        Self {
            estimate,
            trials: spec.trials,
            seed: spec.seed,
            half_width_95: 1.96 * (estimate * (1.0 - estimate) / n).sqrt(),
            hypothesis: spec.hypothesis,
        }
    }

    /// Standard error of the estimate, `√(p(1-p)/n)`.
    pub fn std_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

/// One draw of the energy statistic for time-bandwidth product `u` at SNR
/// `gamma`: `(Z₀ + √(2γ))² + Σ_{i=1}^{2u-1} Z_i²`.
pub fn sample_test_statistic<R: Rng + ?Sized>(u: u32, gamma: f64, rng: &mut R) -> f64 {
    let shift = (2.0 * gamma).sqrt();
    let z0: f64 = rng.sample(StandardNormal);
    let mut y = (z0 + shift) * (z0 + shift);
    for _ in 1..2 * u {
        let z: f64 = rng.sample(StandardNormal);
        y += z * z;
    }
    y
}

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn count_block(spec: &SimSpec, block: u64) -> u64 {
    let start = block * BLOCK_TRIALS;
    let len = BLOCK_TRIALS.min(spec.trials - start);
    let mut rng = block_rng(spec.seed, block);
    let u = spec.cfg.u();
    let lambda = spec.cfg.lambda();
    let mut hits = 0;
    for _ in 0..len {
        let gamma = match (spec.hypothesis, &spec.channel) {
            (Hypothesis::H0, _) => 0.0,
            (Hypothesis::H1, Some(ch)) => ch.sample_snr(&mut rng),
            (Hypothesis::H1, None) => unreachable!("validated"),
        };
        // Detection is declared only when the statistic strictly exceeds λ.
        if sample_test_statistic(u, gamma, &mut rng) > lambda {
            hits += 1;
        }
    }
    hits
}

/// Estimates `Pr(y > λ)` under the requested hypothesis: the false-alarm
/// probability for `H0`, the fading-averaged detection probability for
/// `H1`. Runs in parallel on the current rayon pool.
pub fn estimate_detection(spec: &SimSpec) -> Result<SimReport> {
    estimate_detection_with(spec, Execution::Parallel)
}

pub fn estimate_detection_with(spec: &SimSpec, execution: Execution) -> Result<SimReport> {
    spec.validate()?;
    let blocks = spec.trials.div_ceil(BLOCK_TRIALS);
    let hits: u64 = match execution {
        Execution::Serial => (0..blocks).map(|b| count_block(spec, b)).sum(),
        Execution::Parallel => (0..blocks)
            .into_par_iter()
            .map(|b| count_block(spec, b))
            .sum(),
    };
    Ok(SimReport::from_count(hits, spec))
}
