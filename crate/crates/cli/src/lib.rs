//! `edsense`: energy-detector performance over Weibull fading from the
//! command line.
//!
//! Subcommands: `pd`, `threshold`, `sweep`, `simulate`, `verify`. SNR is
//! always given in dB. Output is CSV by default (`--output json` for JSON)
//! with 12 significant digits, written to standard output or `--out`.
//!
//! The rayon pool size defaults to the `EDSENSE_THREADS` environment
//! variable (or `--threads`); results do not depend on it.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error, 3 numerical failure.

pub mod config;
pub mod record;
pub mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use edsense::detector::{
    avg_pd, avg_pd_weibull_quadrature, avg_pd_weibull_series, prob_false_alarm, threshold_for_pf,
    DEFAULT_QUAD_TOL,
};
use edsense::montecarlo::{estimate_detection_with, Execution, Hypothesis, SimSpec};
use edsense::sweep::{self, PfGrid, RocPoint, SnrRange, SweepKind, SweepSpec};
use edsense::{DetectorConfig, Error, SeriesControl, WeibullChannel};

use crate::config::SweepConfig;
use crate::record::{write_records, Field, OutputFormat, Record};
use crate::verify::{run_verify, VerifyPlan, VerifyReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("verification failed: {0} violation(s)")]
    Verification(usize),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "edsense",
    version,
    about = "Energy-detector performance over Weibull fading channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, env = "EDSENSE_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average detection probability at one operating point.
    Pd(PdArgs),
    /// Threshold for a target false-alarm probability.
    Threshold(ThresholdArgs),
    /// Curve families from a config file or inline flags.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the false-alarm or detection probability.
    Simulate(SimulateArgs),
    /// Cross-check series, quadrature and simulation on a parameter grid.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Series,
    Quadrature,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("operating").required(true).args(["pf", "lambda"])))]
pub struct PdArgs {
    /// Time-bandwidth product.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub u: u32,
    /// Weibull fading severity.
    #[arg(long)]
    pub a: f64,
    /// Average SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: f64,
    /// Target false-alarm probability.
    #[arg(long)]
    pub pf: Option<f64>,
    /// Decision threshold.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub u: u32,
    #[arg(long)]
    pub pf: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// TOML file with one `[[sweep]]` table per curve family.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["kind", "u", "a"])]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    pub kind: Option<KindArg>,
    #[arg(long, required_unless_present = "config", value_parser = clap::value_parser!(u32).range(1..))]
    pub u: Option<u32>,
    /// Comma-separated fading severities.
    #[arg(long, value_delimiter = ',', required_unless_present = "config")]
    pub a: Vec<f64>,
    /// Fixed false-alarm probability (pd-vs-snr).
    #[arg(long)]
    pub pf: Option<f64>,
    /// SNR grid start, stop and step in dB (pd-vs-snr).
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        value_name = "START,STOP,STEP"
    )]
    pub snr_range: Option<Vec<f64>>,
    /// Fixed average SNR in dB (comp-roc).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Comma-separated false-alarm grid (comp-roc).
    #[arg(long, value_delimiter = ',')]
    pub pf_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = EngineArg::Analytic)]
    pub engine: EngineArg,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    PdVsSnr,
    CompRoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Simulate,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("operating").required(true).args(["pf", "lambda"])))]
pub struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub u: u32,
    #[arg(long)]
    pub pf: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// Fading severity; with `--snr-db`, simulates under signal presence.
    #[arg(long, requires = "snr_db")]
    pub a: Option<f64>,
    #[arg(long, requires = "a", allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Run all trials on the calling thread.
    #[arg(long)]
    pub serial: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Reduced grid and fewer Monte Carlo trials.
    #[arg(long)]
    pub quick: bool,
}

fn configure_threads(threads: Option<u16>) {
    if let Some(n) = threads {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global();
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_probability(name: &str, p: f64) -> Result<(), CliError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must lie in (0, 1), got {p}"
        )))
    }
}

fn detector(
    u: u32,
    pf: Option<f64>,
    lambda: Option<f64>,
) -> Result<(DetectorConfig, f64), CliError> {
    match (pf, lambda) {
        (Some(pf), None) => {
            check_probability("pf", pf)?;
            Ok((DetectorConfig::for_false_alarm(u, pf)?, pf))
        }
        (None, Some(lambda)) => {
            let cfg = DetectorConfig::new(u, lambda)?;
            let pf = prob_false_alarm(&cfg)?;
            Ok((cfg, pf))
        }
        _ => Err(CliError::Usage(
            "exactly one of --pf or --lambda is required".into(),
        )),
    }
}

pub fn pd_record(args: &PdArgs) -> Result<Record, CliError> {
    let (cfg, pf) = detector(args.u, args.pf, args.lambda)?;
    let ch = WeibullChannel::from_db(args.a, args.snr_db)?;
    let r = match args.method {
        MethodArg::Auto => avg_pd(&cfg, &ch, &SeriesControl::default())?,
        MethodArg::Series => avg_pd_weibull_series(&cfg, &ch, &SeriesControl::default())?,
        MethodArg::Quadrature => avg_pd_weibull_quadrature(&cfg, &ch, DEFAULT_QUAD_TOL)?,
    };
    let mut rec = Record::default();
    rec.int("u", args.u as u64)
        .num("a", args.a)
        .num("snr_db", args.snr_db)
        .num("pf", pf)
        .num("lambda", cfg.lambda())
        .num("pd", r.value)
        .num("pm", 1.0 - r.value)
        .text("method", r.method.as_str())
        .int("terms_used", r.terms_used as u64)
        .num("est_error", r.est_error);
    Ok(rec)
}

pub fn threshold_record(args: &ThresholdArgs) -> Result<Record, CliError> {
    check_probability("pf", args.pf)?;
    let lambda = threshold_for_pf(args.u, args.pf)?;
    let round_trip = prob_false_alarm(&DetectorConfig::new(args.u, lambda)?)?;
    let mut rec = Record::default();
    rec.int("u", args.u as u64)
        .num("pf", args.pf)
        .num("lambda", lambda)
        .num("pf_roundtrip", round_trip);
    Ok(rec)
}

pub fn simulate_record(args: &SimulateArgs) -> Result<Record, CliError> {
    let (cfg, _) = detector(args.u, args.pf, args.lambda)?;
    let channel = match (args.a, args.snr_db) {
        (Some(a), Some(s)) => Some(WeibullChannel::from_db(a, s)?),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "--a and --snr-db must be given together".into(),
            ))
        }
    };
    let hypothesis = if channel.is_some() {
        Hypothesis::H1
    } else {
        Hypothesis::H0
    };
    let spec = SimSpec {
        cfg,
        channel,
        trials: args.trials,
        seed: args.seed,
        hypothesis,
    };
    let execution = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let r = estimate_detection_with(&spec, execution)?;
    let opt = |v: Option<f64>| v.map_or(Field::Missing, Field::Num);
    let mut rec = Record::default();
    rec.text("hypothesis", format!("{:?}", r.hypothesis))
        .int("u", args.u as u64)
        .push("a", opt(args.a))
        .push("snr_db", opt(args.snr_db))
        .num("lambda", cfg.lambda())
        .int("trials", r.trials)
        .int("seed", r.seed)
        .num("estimate", r.estimate)
        .num("half_width_95", r.half_width_95);
    Ok(rec)
}

/// Sweep specs described by the inline flags.
pub fn inline_sweep(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let (Some(kind), Some(u)) = (args.kind, args.u) else {
        return Err(CliError::Usage(
            "--kind, --u and --a are required without --config".into(),
        ));
    };
    let mut spec = match kind {
        KindArg::PdVsSnr => {
            let pf = args
                .pf
                .ok_or_else(|| CliError::Usage("pd-vs-snr needs --pf".into()))?;
            let range = match args.snr_range.as_deref() {
                Some(&[start, stop, step]) => SnrRange { start, stop, step },
                Some(_) => return Err(CliError::Usage("--snr-range takes START,STOP,STEP".into())),
                None => sweep::DEFAULT_SNR_DB_RANGE,
            };
            SweepSpec::pd_vs_snr(u, args.a.clone(), pf, range)
        }
        KindArg::CompRoc => {
            let snr = args
                .snr_db
                .ok_or_else(|| CliError::Usage("comp-roc needs --snr-db".into()))?;
            let grid = args
                .pf_grid
                .clone()
                .map_or(sweep::DEFAULT_PF_GRID, PfGrid::List);
            SweepSpec::comp_roc(u, args.a.clone(), snr, grid)
        }
    };
    if args.engine == EngineArg::Simulate {
        spec = spec.simulated(
            args.trials.unwrap_or(sweep::DEFAULT_TRIALS),
            args.seed.unwrap_or(sweep::DEFAULT_SEED),
        );
    }
    spec.grid().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

pub fn sweep_specs(args: &SweepArgs) -> Result<Vec<SweepSpec>, CliError> {
    match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(SweepConfig::parse(&text, &path.display().to_string())?.sweep)
        }
        None => Ok(vec![inline_sweep(args)?]),
    }
}

pub fn roc_record(p: &RocPoint) -> Record {
    let mut rec = Record::default();
    rec.text("kind", p.kind.as_str())
        .int("u", p.u as u64)
        .num("a", p.a)
        .num("snr_db", p.snr_db)
        .num("pf", p.pf)
        .num("lambda", p.lambda)
        .num("pd", p.pd)
        .num("pm", p.pm)
        .text("method", p.method.as_str())
        .num("est_error", p.est_error);
    rec
}

pub fn run_sweeps(specs: &[SweepSpec]) -> Result<Vec<RocPoint>, CliError> {
    let mut points = Vec::new();
    for spec in specs {
        let pts = match spec.kind {
            SweepKind::PdVsSnr => sweep::run_pd_vs_snr(spec)?,
            SweepKind::CompRoc => sweep::run_comp_roc(spec)?,
        };
        points.extend(pts);
    }
    Ok(points)
}

fn write_sweep(out: &mut dyn Write, points: &[RocPoint], format: OutputFormat) -> io::Result<()> {
    match format {
        OutputFormat::Csv => sweep::write_csv(out, points, true),
        OutputFormat::Json => {
            let recs: Vec<Record> = points.iter().map(roc_record).collect();
            if recs.is_empty() {
                writeln!(out, "[]")
            } else {
                write_records(out, &recs, format)
            }
        }
    }
}

/// Renders a verification report as two CSV tables separated by a blank
/// line: per-cell worst deltas, then the reference points.
pub fn write_verify(out: &mut dyn Write, report: &VerifyReport) -> io::Result<()> {
    use edsense::format::fmt_sig;
    let status = |ok: bool| if ok { "pass" } else { "FAIL" };
    writeln!(out, "check,a,u,points,worst_delta,tolerance,status")?;
    for c in &report.cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.check,
            fmt_sig(c.a),
            c.u,
            c.points,
            fmt_sig(c.worst_delta),
            fmt_sig(c.tolerance),
            status(c.passed)
        )?;
    }
    writeln!(out)?;
    writeln!(
        out,
        "reference,u,a,pf,snr_db,expected_pm,computed_pm,tolerance,status"
    )?;
    for r in &report.anchors {
        writeln!(
            out,
            "pm,5,1,0.2,{},{},{},{},{}",
            fmt_sig(r.snr_db),
            fmt_sig(r.expected_pm),
            fmt_sig(r.computed_pm),
            fmt_sig(verify::ANCHOR_TOL),
            status(r.passed)
        )?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads(cli.threads);
    if let Command::Sweep(args) = &cli.command {
        let specs = sweep_specs(args)?;
        let points = run_sweeps(&specs)?;
        let mut out = open_output(&cli.out)?;
        write_sweep(&mut out, &points, cli.output)?;
        out.flush()?;
        return Ok(());
    }
    if let Command::Verify(args) = &cli.command {
        let plan = if args.quick {
            VerifyPlan::quick()
        } else {
            VerifyPlan::full()
        };
        let report = run_verify(&plan);
        let mut out = open_output(&cli.out)?;
        write_verify(&mut out, &report)?;
        out.flush()?;
        for v in &report.violations {
            eprintln!("violation: {v}");
        }
        return if report.passed() {
            Ok(())
        } else {
            Err(CliError::Verification(report.violations.len()))
        };
    }
    let rec = match &cli.command {
        Command::Pd(args) => pd_record(args)?,
        Command::Threshold(args) => threshold_record(args)?,
        Command::Simulate(args) => simulate_record(args)?,
        Command::Sweep(_) | Command::Verify(_) => unreachable!(),
    };
    let mut out = open_output(&cli.out)?;
    write_records(&mut out, &[rec], cli.output)?;
    out.flush()?;
    Ok(())
}
