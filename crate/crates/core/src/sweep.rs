//! Curve generation: average detection probability against average SNR at
//! a fixed false-alarm rate, and complementary ROC curves (missed detection
//! against false alarm) at a fixed average SNR.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::WeibullChannel;
use crate::detector::{avg_pd, threshold_for_pf, DetectorConfig, Method};
use crate::error::{domain, Result};
use crate::format::fmt_sig;
use crate::montecarlo::{estimate_detection, Hypothesis, SimSpec};
use crate::specfun::SeriesControl;

pub const CSV_HEADER: &str = "kind,u,a,snr_db,pf,lambda,pd,pm,method,est_error";

/// Default average-SNR grid in dB: start, stop, step.
pub const DEFAULT_SNR_DB_RANGE: SnrRange = SnrRange {
    start: -10.0,
    stop: 30.0,
    step: 0.5,
};

/// Default complementary-ROC false-alarm grid.
pub const DEFAULT_PF_GRID: PfGrid = PfGrid::LogSpaced {
    start: 1e-3,
    stop: 0.999,
    points: 50,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    PdVsSnr,
    CompRoc,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::PdVsSnr => "pd_vs_snr",
            SweepKind::CompRoc => "comp_roc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Analytic,
    Simulate,
}

/// Where a curve point's detection probability came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Series,
    Quadrature,
    Simulate,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Series => "series",
            Estimator::Quadrature => "quadrature",
            Estimator::Simulate => "simulate",
        }
    }
}

impl From<Method> for Estimator {
    fn from(m: Method) -> Self {
        match m {
            Method::Series => Estimator::Series,
            Method::Quadrature => Estimator::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrRange {
    /// `start, start + step, ...` up to and including `stop` (within a
    /// relative slack of 1e-9 steps). Each point is computed as
    /// `start + i·step` so rounding does not accumulate.
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(domain(
                "SnrRange",
                format!("step must be positive, got {}", self.step),
            ));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.stop < self.start {
            return Err(domain(
                "SnrRange",
                format!("empty range [{}, {}]", self.start, self.stop),
            ));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum PfGrid {
    List(Vec<f64>),
    LogSpaced {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl PfGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        let pts = match self {
            PfGrid::List(v) => v.clone(),
            PfGrid::LogSpaced {
                start,
                stop,
                points,
            } => {
                if *points == 0 {
                    return Err(domain("PfGrid", "log-spaced grid needs at least one point"));
                }
                if !(*start > 0.0 && *stop >= *start) {
                    return Err(domain(
                        "PfGrid",
                        format!("invalid log-spaced range [{start}, {stop}]"),
                    ));
                }
                if *points == 1 {
                    vec![*start]
                } else {
                    let (l0, l1) = (start.ln(), stop.ln());
                    let last = (*points - 1) as f64;
                    (0..*points)
                        .map(|i| (l0 + (l1 - l0) * i as f64 / last).exp())
                        .collect()
                }
            }
        };
        if pts.is_empty() {
            return Err(domain("PfGrid", "false-alarm grid is empty"));
        }
        for &p in &pts {
            check_open_probability("pf_grid", p)?;
        }
        Ok(pts)
    }
}

fn check_open_probability(what: &'static str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(
            what,
            format!("probability must lie in (0, 1), got {p}"),
        ));
    }
    Ok(())
}

/// Parameters of one family of curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub u: u32,
    pub a_values: Vec<f64>,
    /// Fixed false-alarm probability (`pd_vs_snr`).
    pub pf_fixed: Option<f64>,
    /// Average-SNR grid in dB (`pd_vs_snr`); defaults to -10..30 step 0.5.
    pub snr_db_range: Option<SnrRange>,
    /// Fixed average SNR in dB (`comp_roc`).
    pub snr_db_fixed: Option<f64>,
    /// False-alarm grid (`comp_roc`); defaults to 50 log-spaced points in
    /// `[1e-3, 0.999]`.
    pub pf_grid: Option<PfGrid>,
    #[serde(default)]
    pub engine: Engine,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl SweepSpec {
    pub fn pd_vs_snr(u: u32, a_values: Vec<f64>, pf_fixed: f64, range: SnrRange) -> Self {
        Self {
            kind: SweepKind::PdVsSnr,
            u,
            a_values,
            pf_fixed: Some(pf_fixed),
            snr_db_range: Some(range),
            snr_db_fixed: None,
            pf_grid: None,
            engine: Engine::Analytic,
            trials: None,
            seed: None,
        }
    }

    pub fn comp_roc(u: u32, a_values: Vec<f64>, snr_db_fixed: f64, pf_grid: PfGrid) -> Self {
        Self {
            kind: SweepKind::CompRoc,
            u,
            a_values,
            pf_fixed: None,
            snr_db_range: None,
            snr_db_fixed: Some(snr_db_fixed),
            pf_grid: Some(pf_grid),
            engine: Engine::Analytic,
            trials: None,
            seed: None,
        }
    }

    pub fn simulated(mut self, trials: u64, seed: u64) -> Self {
        self.engine = Engine::Simulate;
        self.trials = Some(trials);
        self.seed = Some(seed);
        self
    }

    /// Validates the sweep and expands it into `(a, snr_db, pf)` grid points
    /// in `(a, snr)` or `(a, pf)` lexicographic order.
    pub fn grid(&self) -> Result<Vec<(f64, f64, f64)>> {
        if self.u == 0 {
            return Err(domain("SweepSpec", "u must be at least 1"));
        }
        if self.a_values.is_empty() {
            return Err(domain("SweepSpec", "a_values is empty"));
        }
        for &a in &self.a_values {
            if !(a > 0.0) || !a.is_finite() {
                return Err(domain(
                    "SweepSpec",
                    format!("fading severity must be positive, got {a}"),
                ));
            }
        }
        if self.engine == Engine::Simulate && self.trials == Some(0) {
            return Err(domain("SweepSpec", "trials must be at least 1"));
        }
        let mut out = Vec::new();
        match self.kind {
            SweepKind::PdVsSnr => {
                let pf = self
                    .pf_fixed
                    .ok_or_else(|| domain("SweepSpec", "pd_vs_snr needs pf_fixed"))?;
                check_open_probability("pf_fixed", pf)?;
                let snrs = self.snr_db_range.unwrap_or(DEFAULT_SNR_DB_RANGE).points()?;
                for &a in &self.a_values {
                    out.extend(snrs.iter().map(|&s| (a, s, pf)));
                }
            }
            SweepKind::CompRoc => {
                let snr = self
                    .snr_db_fixed
                    .ok_or_else(|| domain("SweepSpec", "comp_roc needs snr_db_fixed"))?;
                if !snr.is_finite() {
                    return Err(domain("SweepSpec", "snr_db_fixed must be finite"));
                }
                let pfs = self.pf_grid.clone().unwrap_or(DEFAULT_PF_GRID).points()?;
                for &a in &self.a_values {
                    out.extend(pfs.iter().map(|&pf| (a, snr, pf)));
                }
            }
        }
        Ok(out)
    }
}

/// Default trial count for simulated sweeps.
pub const DEFAULT_TRIALS: u64 = 1_000_000;
/// Default base seed for simulated sweeps.
pub const DEFAULT_SEED: u64 = 1;

/// One curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub kind: SweepKind,
    pub u: u32,
    pub a: f64,
    pub snr_db: f64,
    pub pf: f64,
    pub lambda: f64,
    pub pd: f64,
    pub pm: f64,
    pub method: Estimator,
    pub est_error: f64,
}

impl RocPoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.kind.as_str(),
            self.u,
            fmt_sig(self.a),
            fmt_sig(self.snr_db),
            fmt_sig(self.pf),
            fmt_sig(self.lambda),
            fmt_sig(self.pd),
            fmt_sig(self.pm),
            self.method.as_str(),
            fmt_sig(self.est_error),
        )
    }
}

/// Seed of the `index`-th grid point of a simulated sweep: the base seed
/// mixed with the index through the SplitMix64 finalizer.
pub fn point_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn evaluate_point(
    spec: &SweepSpec,
    index: usize,
    (a, snr_db, pf): (f64, f64, f64),
) -> Result<RocPoint> {
    let lambda = threshold_for_pf(spec.u, pf)?;
    let cfg = DetectorConfig::new(spec.u, lambda)?;
    let ch = WeibullChannel::from_db(a, snr_db)?;
    let (pd, method, est_error) = match spec.engine {
        Engine::Analytic => {
            let r = avg_pd(&cfg, &ch, &SeriesControl::default())?;
            (r.value, Estimator::from(r.method), r.est_error)
        }
        Engine::Simulate => {
            let sim = SimSpec {
                cfg,
                channel: Some(ch),
                trials: spec.trials.unwrap_or(DEFAULT_TRIALS),
                seed: point_seed(spec.seed.unwrap_or(DEFAULT_SEED), index as u64),
                hypothesis: Hypothesis::H1,
            };
            let r = estimate_detection(&sim)?;
            (r.estimate, Estimator::Simulate, r.half_width_95)
        }
    };
    Ok(RocPoint {
        kind: spec.kind,
        u: spec.u,
        a,
        snr_db,
        pf,
        lambda,
        pd,
        pm: 1.0 - pd,
        method,
        est_error,
    })
}

/// Evaluates every grid point; points are computed in parallel and
/// returned in grid order.
pub fn run(spec: &SweepSpec) -> Result<Vec<RocPoint>> {
    let grid = spec.grid()?;
    grid.par_iter()
        .enumerate()
        .map(|(i, &p)| evaluate_point(spec, i, p))
        .collect()
}

/// Average detection probability against average SNR, one curve per `a`.
pub fn run_pd_vs_snr(spec: &SweepSpec) -> Result<Vec<RocPoint>> {
    if spec.kind != SweepKind::PdVsSnr {
        return Err(domain("run_pd_vs_snr", "spec kind must be pd_vs_snr"));
    }
    run(spec)
}

/// Complementary ROC curves, one per `a`.
pub fn run_comp_roc(spec: &SweepSpec) -> Result<Vec<RocPoint>> {
    if spec.kind != SweepKind::CompRoc {
        return Err(domain("run_comp_roc", "spec kind must be comp_roc"));
    }
    run(spec)
}

/// Writes the header and one row per point, LF-terminated.
pub fn write_csv<W: Write>(mut out: W, points: &[RocPoint], header: bool) -> io::Result<()> {
    if header {
        out.write_all(CSV_HEADER.as_bytes())?;
        out.write_all(b"\n")?;
    }
    for p in points {
        out.write_all(p.csv_row().as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
