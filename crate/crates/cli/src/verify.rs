//! Three-way agreement check between the closed-form series, numerical
//! integration and Monte Carlo simulation.

use std::collections::BTreeMap;

use edsense::detector::{
    avg_pd, avg_pd_weibull_quadrature, avg_pd_weibull_series, DEFAULT_QUAD_TOL,
};
use edsense::montecarlo::{estimate_detection, Hypothesis, SimSpec};
use edsense::{DetectorConfig, Error, SeriesControl, WeibullChannel};
use rayon::prelude::*;

pub const SERIES_QUAD_TOL: f64 = 1e-8;
pub const ZERO_SNR_TOL: f64 = 1e-8;
pub const MC_FLOOR: f64 = 5e-3;
pub const ANCHOR_TOL: f64 = 0.02;

/// Missed-detection reference values at `u = 5`, `a = 1`, `P_f = 0.2`,
/// keyed by average SNR in dB.
pub const ANCHORS: [(f64, f64); 3] = [(-5.0, 0.78), (10.0, 0.41), (25.0, 0.10)];

/// A Monte Carlo spot check: `(u, a, pf, snr_db)`.
pub type McCell = (u32, f64, f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyPlan {
    pub a_values: Vec<f64>,
    pub u_values: Vec<u32>,
    pub pf_values: Vec<f64>,
    pub snr_db_values: Vec<f64>,
    pub zero_snr_pf: Vec<f64>,
    pub mc_cells: Vec<McCell>,
    pub mc_trials: u64,
    pub mc_seed: u64,
    pub series_ctrl: SeriesControl,
}

const FULL_MC_CELLS: [McCell; 12] = [
    (1, 0.75, 0.1, 10.0),
    (5, 1.0, 0.2, 10.0),
    (2, 1.0, 0.01, 20.0),
    (10, 1.5, 0.5, 5.0),
    (5, 2.0, 0.1, 5.0),
    (5, 2.0, 0.1, 15.0),
    (1, 2.5, 0.2, 0.0),
    (2, 3.0, 0.1, 25.0),
    (5, 3.5, 0.01, 15.0),
    (10, 5.0, 0.2, 10.0),
    (1, 5.0, 0.5, 0.0),
    (10, 0.75, 0.1, 25.0),
];

impl VerifyPlan {
    pub fn full() -> Self {
        Self {
            a_values: vec![0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 5.0],
            u_values: vec![1, 2, 5, 10],
            pf_values: vec![0.01, 0.1, 0.2, 0.5],
            snr_db_values: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            zero_snr_pf: vec![0.1, 0.2],
            mc_cells: FULL_MC_CELLS.to_vec(),
            mc_trials: 1_000_000,
            mc_seed: 20_240_601,
            series_ctrl: SeriesControl::default(),
        }
    }

    pub fn quick() -> Self {
        Self {
            a_values: vec![1.0, 2.0, 3.0],
            u_values: vec![1, 5],
            pf_values: vec![0.1, 0.2],
            snr_db_values: vec![0.0, 10.0, 20.0],
            zero_snr_pf: vec![0.1, 0.2],
            mc_cells: vec![FULL_MC_CELLS[1], FULL_MC_CELLS[4], FULL_MC_CELLS[6]],
            mc_trials: 200_000,
            mc_seed: 20_240_601,
            series_ctrl: SeriesControl::default(),
        }
    }
}

/// Worst discrepancy of one check within one `(a, u)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub check: &'static str,
    pub a: f64,
    pub u: u32,
    pub points: usize,
    pub worst_delta: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorResult {
    pub snr_db: f64,
    pub expected_pm: f64,
    pub computed_pm: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub cells: Vec<CellSummary>,
    pub anchors: Vec<AnchorResult>,
    /// Offending grid points, one description each.
    pub violations: Vec<String>,
}

impl VerifyReport {
    /// True when every agreement check holds. Anchor points are reported
    /// but do not enter the verdict.
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Outcome {
    check: &'static str,
    a: f64,
    u: u32,
    delta: f64,
    tolerance: f64,
    detail: String,
}

fn snr(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn series_vs_quadrature(
    ctrl: &SeriesControl,
    u: u32,
    a: f64,
    pf: f64,
    snr_db: f64,
) -> Option<Outcome> {
    let point = format!("a={a} u={u} pf={pf} snr_db={snr_db}");
    let cfg = DetectorConfig::for_false_alarm(u, pf).ok()?;
    let ch = WeibullChannel::new(a, snr(snr_db)).ok()?;
    let quad = avg_pd_weibull_quadrature(&cfg, &ch, DEFAULT_QUAD_TOL);
    let series = avg_pd_weibull_series(&cfg, &ch, ctrl);
    let (delta, detail) = match (series, quad) {
        (Err(Error::Convergence { .. }), Ok(_)) => return None,
        (Ok(s), Ok(q)) => ((s.value - q.value).abs(), point),
        (s, q) => (
            f64::INFINITY,
            format!("{point}: series {s:?}, quadrature {q:?}"),
        ),
    };
    Some(Outcome {
        check: "series_vs_quadrature",
        a,
        u,
        delta,
        tolerance: SERIES_QUAD_TOL,
        detail,
    })
}

fn zero_snr(u: u32, a: f64, pf: f64) -> Outcome {
    let point = format!("a={a} u={u} pf={pf} gamma_bar=1e-12");
    let r = DetectorConfig::for_false_alarm(u, pf).and_then(|cfg| {
        let ch = WeibullChannel::new(a, 1e-12)?;
        avg_pd(&cfg, &ch, &SeriesControl::default())
    });
    let (delta, detail) = match r {
        Ok(r) => ((r.value - pf).abs(), point),
        Err(e) => (f64::INFINITY, format!("{point}: {e}")),
    };
    Outcome {
        check: "zero_snr",
        a,
        u,
        delta,
        tolerance: ZERO_SNR_TOL,
        detail,
    }
}

fn quadrature_vs_montecarlo((u, a, pf, snr_db): McCell, trials: u64, seed: u64) -> Outcome {
    let point = format!("a={a} u={u} pf={pf} snr_db={snr_db}");
    let run = || -> edsense::Result<(f64, f64)> {
        let cfg = DetectorConfig::for_false_alarm(u, pf)?;
        let ch = WeibullChannel::new(a, snr(snr_db))?;
        let q = avg_pd_weibull_quadrature(&cfg, &ch, DEFAULT_QUAD_TOL)?;
        let sim = SimSpec {
            cfg,
            channel: Some(ch),
            trials,
            seed,
            hypothesis: Hypothesis::H1,
        };
        let r = estimate_detection(&sim)?;
        Ok((
            (q.value - r.estimate).abs(),
            (3.0 * r.half_width_95).max(MC_FLOOR),
        ))
    };
    match run() {
        Ok((delta, tolerance)) => Outcome {
            check: "quadrature_vs_montecarlo",
            a,
            u,
            delta,
            tolerance,
            detail: point,
        },
        Err(e) => Outcome {
            check: "quadrature_vs_montecarlo",
            a,
            u,
            delta: f64::INFINITY,
            tolerance: MC_FLOOR,
            detail: format!("{point}: {e}"),
        },
    }
}

/// Missed-detection probability at `u = 5`, `a = 1`, `P_f = 0.2`.
pub fn anchor_pm(snr_db: f64) -> edsense::Result<f64> {
    let cfg = DetectorConfig::for_false_alarm(5, 0.2)?;
    let ch = WeibullChannel::from_db(1.0, snr_db)?;
    Ok(1.0 - avg_pd(&cfg, &ch, &SeriesControl::default())?.value)
}

pub fn run_verify(plan: &VerifyPlan) -> VerifyReport {
    let mut grid = Vec::new();
    for &a in &plan.a_values {
        for &u in &plan.u_values {
            for &pf in &plan.pf_values {
                for &s in &plan.snr_db_values {
                    grid.push((u, a, pf, s));
                }
            }
        }
    }
    let mut outcomes: Vec<Outcome> = grid
        .par_iter()
        .filter_map(|&(u, a, pf, s)| series_vs_quadrature(&plan.series_ctrl, u, a, pf, s))
        .collect();
    for &a in &plan.a_values {
        for &u in &plan.u_values {
            for &pf in &plan.zero_snr_pf {
                outcomes.push(zero_snr(u, a, pf));
            }
        }
    }
    for &cell in &plan.mc_cells {
        outcomes.push(quadrature_vs_montecarlo(cell, plan.mc_trials, plan.mc_seed));
    }

    let mut report = VerifyReport::default();
    let mut cells: BTreeMap<(&'static str, u64, u32), CellSummary> = BTreeMap::new();
    let order = |c: &str| match c {
        "series_vs_quadrature" => 0,
        "zero_snr" => 1,
        _ => 2,
    };
    for o in &outcomes {
        let passed = o.delta <= o.tolerance;
        if !passed {
            report.violations.push(format!(
                "{}: {} (delta {:e}, tolerance {:e})",
                o.check, o.detail, o.delta, o.tolerance
            ));
        }
        let key = (o.check, o.a.to_bits(), o.u);
        let cell = cells.entry(key).or_insert(CellSummary {
            check: o.check,
            a: o.a,
            u: o.u,
            points: 0,
            worst_delta: 0.0,
            tolerance: o.tolerance,
            passed: true,
        });
        cell.points += 1;
        if o.delta > cell.worst_delta || o.delta.is_nan() {
            cell.worst_delta = o.delta;
        }
        cell.tolerance = cell.tolerance.min(o.tolerance);
        cell.passed &= passed;
    }
    report.cells = cells.into_values().collect();
    report.cells.sort_by(|x, y| {
        (order(x.check), x.a, x.u)
            .partial_cmp(&(order(y.check), y.a, y.u))
            .unwrap()
    });

    for (snr_db, expected_pm) in ANCHORS {
        let computed_pm = anchor_pm(snr_db).unwrap_or(f64::NAN);
        report.anchors.push(AnchorResult {
            snr_db,
            expected_pm,
            computed_pm,
            passed: (computed_pm - expected_pm).abs() <= ANCHOR_TOL,
        });
    }
    report
}
