//! Command-line front end: one subcommand per experiment, each writing a
//! manifest and a `series.csv` under `<out>/<name>/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use kp5::acceptance;
use kp5::diagnostics::{almost_conservation_run, bilinear_ladder, radius_decay_run, uniqueness_gap};
use kp5::integrator::{plan_steps, simulate_with, Schedule};
use kp5::operators::gevrey_norm;
use kp5::output::{fmt_f64, fmt_opt, write_csv, Manifest};
use kp5::picard::{delta_rule, doubling_check, picard_iterate, PicardOptions};
use kp5::spectral::snapshot;
use kp5::{load_config, DiagnosticsRecord, Error, SimConfig, SpectralField};

/// Gap-to-bound ratio above which the two-run envelope counts as violated.
const ENVELOPE_SLACK: f64 = 1.1;

#[derive(Parser)]
#[command(
    name = "kp5",
    version,
    about = "Fifth-order KP-II solver and Gevrey-norm experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress progress and summaries on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Integrate to the horizon, sampling diagnostics.
    Simulate,
    /// Picard iteration on one window and the doubling check.
    Picard,
    /// Track the fitted radius of analyticity over the horizon.
    RadiusDecay,
    /// Almost-conservation defect across the Gevrey ladder.
    SigmaLadder,
    /// Randomized bilinear-estimate ratios at two resolutions.
    Bilinear,
    /// Gap between two nearby solutions against its Gronwall bound.
    Uniqueness,
    /// Run the acceptance suite.
    Accept,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::RadiusDecay => "radius-decay",
            Command::SigmaLadder => "sigma-ladder",
            Command::Bilinear => "bilinear",
            Command::Uniqueness => "uniqueness",
            Command::Accept => "accept",
        }
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Everything a subcommand produced. Nothing touches the disk until the
/// computation is over, so a rejected input leaves no files behind.
struct Report {
    series: Table,
    snapshots: Vec<(String, SpectralField)>,
    summary: Value,
    c_emp: Option<f64>,
    /// Set when the run ended early or a check failed; outputs are still
    /// written and the process exits with this error's code.
    failure: Option<Failure>,
}

enum Failure {
    Numeric(Error),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Numeric(e) => exit_code(e),
            Failure::Check(_) => 1,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if e.is_blow_up() {
        3
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kp5: invalid configuration: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match execute(cli.command, &cfg, cli.quiet) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("kp5 {}: {e}", cli.command.name());
            return ExitCode::from(exit_code(&e));
        }
    };
    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.dir))
        .join(&cfg.output.name);
    if let Err(e) = persist(&dir, cli.command, &cfg, &report) {
        eprintln!("kp5 {}: {e}", cli.command.name());
        return ExitCode::from(1);
    }
    match &report.failure {
        None => {
            if !cli.quiet {
                println!("wrote {}", dir.display());
            }
            ExitCode::SUCCESS
        }
        Some(f) => {
            match f {
                Failure::Numeric(e) => eprintln!("kp5 {}: {e}", cli.command.name()),
                Failure::Check(msg) => eprintln!("kp5 {}: {msg}", cli.command.name()),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load(cli: &Cli) -> kp5::Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn persist(dir: &Path, command: Command, cfg: &SimConfig, report: &Report) -> kp5::Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header: Vec<&str> = report.series.header.iter().map(String::as_str).collect();
    write_csv(&dir.join("series.csv"), &header, report.series.rows.iter().cloned())?;
    let mut outputs = vec!["series.csv".to_string()];
    if !report.snapshots.is_empty() {
        let snaps = dir.join("snapshots");
        fs::create_dir_all(&snaps).map_err(|e| Error::io(&snaps, e))?;
        for (name, field) in &report.snapshots {
            snapshot::save(&snaps.join(name), field)?;
            outputs.push(format!("snapshots/{name}"));
        }
    }
    let mut manifest = Manifest::new(command.name(), cfg);
    manifest.status = match &report.failure {
        None => "ok",
        Some(Failure::Numeric(e)) if e.is_blow_up() => "blow-up",
        Some(_) => "failed",
    };
    manifest.calibrated.c_emp = report.c_emp;
    manifest.outputs = outputs;
    manifest.summary = report.summary.clone();
    manifest.write(&dir.join("manifest.json"))
}

fn execute(command: Command, cfg: &SimConfig, quiet: bool) -> kp5::Result<Report> {
    match command {
        Command::Simulate => simulate(cfg, quiet),
        Command::Picard => picard(cfg),
        Command::RadiusDecay => radius_decay(cfg),
        Command::SigmaLadder => sigma_ladder(cfg),
        Command::Bilinear => bilinear(cfg),
        Command::Uniqueness => uniqueness(cfg),
        Command::Accept => accept(cfg, quiet),
    }
}

fn report(series: Table, summary: Value) -> Report {
    Report {
        series,
        snapshots: Vec::new(),
        summary,
        c_emp: None,
        failure: None,
    }
}

fn simulate(cfg: &SimConfig, quiet: bool) -> kp5::Result<Report> {
    let mut series = Table {
        header: DiagnosticsRecord::csv_header(&cfg.gevrey.ladder),
        rows: Vec::new(),
    };
    let mut snapshots = Vec::new();
    let mut last: Option<DiagnosticsRecord> = None;
    let result = simulate_with(
        cfg,
        Schedule::Interval(cfg.sample_interval()),
        |rec, _| {
            if !quiet {
                println!("t = {:.6} l2 = {:.12e}", rec.t, rec.l2);
            }
            series.rows.push(rec.csv_row());
            last = Some(rec.clone());
        },
        |_, field| {
            snapshots.push((format!("snap{:04}.kp5s", snapshots.len()), field.clone()));
            Ok(())
        },
    );
    let failure = match result {
        Ok(()) => None,
        Err(e) if e.is_blow_up() => Some(Failure::Numeric(e)),
        Err(e) => return Err(e),
    };
    let first_l2 = series.rows.first().map(|r| r[1].clone());
    let summary = json!({
        "samples": series.rows.len(),
        "initial_l2": first_l2,
        "final": last.as_ref().map(|r| json!({ "t": r.t, "step": r.step, "l2": r.l2, "sigma_est": r.sigma_est })),
        "snapshot_times": snapshot_times(cfg),
    });
    Ok(Report {
        series,
        snapshots,
        summary,
        c_emp: None,
        failure,
    })
}

/// Times actually written for the configured snapshot requests.
fn snapshot_times(cfg: &SimConfig) -> Vec<f64> {
    let Ok(grid) = cfg.grid() else { return Vec::new() };
    let (n, dt) = plan_steps(cfg.time.horizon, cfg.dt_target(&grid));
    let mut steps: Vec<usize> = cfg
        .output
        .snapshot_times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(n))
        .collect();
    steps.sort_unstable();
    steps.dedup();
    steps
        .into_iter()
        .map(|i| if i == n { cfg.time.horizon } else { i as f64 * dt })
        .collect()
}

fn picard(cfg: &SimConfig) -> kp5::Result<Report> {
    let f = cfg.initial.build(&cfg.grid()?)?;
    let (s1, s2) = (cfg.gevrey.sigma1, cfg.gevrey.sigma2);
    let norm = gevrey_norm(&f, s1, s2)?;
    let delta = delta_rule(norm, cfg.delta_rule());
    let opts = PicardOptions {
        m: cfg.picard.m,
        n_max: cfg.picard.n_max,
        tol: cfg.picard.tol,
        sigma1: s1,
        sigma2: s2,
        nonlinear: true,
    };
    let out = picard_iterate(&f, delta, &opts)?;
    let check = doubling_check(&f, &out.window, s1, s2)?;
    let mut series = Table::new(&["n", "distance", "ratio", "sup_norm"]);
    for s in &out.steps {
        series.rows.push(vec![
            s.n.to_string(),
            fmt_f64(s.distance),
            fmt_opt(s.ratio),
            fmt_f64(s.sup_norm),
        ]);
    }
    let summary = json!({
        "f_norm": norm,
        "delta": delta,
        "converged": out.converged,
        "iterations": out.iterations(),
        "doubling_ratio": check.ratio,
        "doubling_passed": check.passed,
    });
    let mut r = report(series, summary);
    if !out.converged {
        r.failure = Some(Failure::Check(format!(
            "no convergence to tol {:e} within {} iterations",
            opts.tol, opts.n_max
        )));
    } else if !check.passed {
        r.failure = Some(Failure::Check(format!(
            "doubling bound violated: ratio {}",
            check.ratio
        )));
    }
    Ok(r)
}

fn radius_decay(cfg: &SimConfig) -> kp5::Result<Report> {
    let run = radius_decay_run(cfg, cfg.time.horizon, true)?;
    let mut series = Table::new(&["t", "sigma_est", "residual"]);
    for s in &run.samples {
        series
            .rows
            .push(vec![fmt_f64(s.t), fmt_f64(s.sigma_est), fmt_f64(s.residual)]);
    }
    let summary = json!({
        "sigma_ref": run.sigma_ref,
        "delta": run.delta,
        "tail_exponent": run.tail_exponent,
        "c_emp": run.c_emp,
        "collapse": run.collapse,
        "plateau_deviation": run.plateau_deviation(),
    });
    let mut r = report(series, summary);
    r.c_emp = run.c_emp;
    Ok(r)
}

fn sigma_ladder(cfg: &SimConfig) -> kp5::Result<Report> {
    let table = almost_conservation_run(cfg, &cfg.gevrey.ladder)?;
    let mut series = Table::new(&["sigma", "D"]);
    for row in &table.rows {
        series.rows.push(vec![fmt_f64(row.sigma), fmt_f64(row.d)]);
    }
    let summary = json!({ "delta": table.delta, "slope": table.slope });
    Ok(report(series, summary))
}

fn bilinear(cfg: &SimConfig) -> kp5::Result<Report> {
    let ladder = bilinear_ladder(&cfg.bilinear_params(), &cfg.bilinear_options())?;
    let mut series = Table::new(&["n", "trial", "ratio"]);
    for rep in [&ladder.coarse, &ladder.fine] {
        for (i, r) in rep.ratios.iter().enumerate() {
            series.rows.push(vec![rep.n.to_string(), i.to_string(), fmt_f64(*r)]);
        }
    }
    let quantiles = |r: &kp5::diagnostics::BilinearReport| json!({ "n": r.n, "slices": r.slices, "max": r.max, "p50": r.p50, "p90": r.p90, "p99": r.p99 });
    let summary = json!({
        "coarse": quantiles(&ladder.coarse),
        "fine": quantiles(&ladder.fine),
        "growth": ladder.growth,
    });
    Ok(report(series, summary))
}

fn uniqueness(cfg: &SimConfig) -> kp5::Result<Report> {
    let grid = cfg.grid()?;
    let f = cfg.initial.build(&grid)?;
    let dt_target = cfg.dt_target(&grid);
    let (_, dt) = plan_steps(cfg.time.horizon, dt_target);
    let every = Schedule::Interval(cfg.sample_interval()).stride(dt);
    let run = uniqueness_gap(&f, cfg.uniqueness.epsilon, cfg.time.horizon, dt_target, true, every)?;
    let mut series = Table::new(&["t", "gap", "bound"]);
    for s in &run.samples {
        series.rows.push(vec![fmt_f64(s.t), fmt_f64(s.gap), fmt_f64(s.bound)]);
    }
    let summary = json!({ "max_ratio": run.max_ratio, "limit": ENVELOPE_SLACK });
    let mut r = report(series, summary);
    if run.max_ratio > ENVELOPE_SLACK {
        r.failure = Some(Failure::Check(format!(
            "gap exceeded {ENVELOPE_SLACK} x bound (ratio {})",
            run.max_ratio
        )));
    }
    Ok(r)
}

fn accept(cfg: &SimConfig, quiet: bool) -> kp5::Result<Report> {
    let outcomes = acceptance::run_all(cfg.seed, |o| {
        if !quiet {
            println!("{o}");
        }
    });
    let mut series = Table::new(&["id", "title", "status", "detail"]);
    for o in &outcomes {
        series.rows.push(vec![
            o.id.to_string(),
            o.title.to_string(),
            if o.passed { "PASS" } else { "FAIL" }.to_string(),
            o.detail.clone(),
        ]);
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if !quiet {
        println!(
            "{} of {} criteria passed",
            outcomes.len() - failed.len(),
            outcomes.len()
        );
    }
    let summary = json!({ "passed": outcomes.len() - failed.len(), "failed": failed });
    let mut r = report(series, summary);
    if !failed.is_empty() {
        r.failure = Some(Failure::Check(format!("failed: {}", failed.join(", "))));
    }
    Ok(r)
}
