//! Command-line front end for the beam-selection simulation harness.
//!
//! Four subcommands: `sweep` runs an SNR sweep from a JSON config file,
//! `reproduce-fig2` and `reproduce-fig3` run the shipped baselines (the
//! four-method error comparison and the delay miss-rate curve), and
//! `validate-theorem1` checks the energy-error split moments on one frozen
//! channel. Sweep commands emit the contractual CSV plus a JSON run
//! manifest; reruns with identical arguments emit identical bytes.

use anyhow::{bail, Context, Result};
use beamsel_core::harness::{
    csv_string, manifest_json, run_sweep, validate_decomposition, RunManifest, SimConfig,
    ToolInfo,
};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "beamsel",
    version,
    about = "Delay-domain beam selection simulator for hybrid beamforming links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep described by a JSON config file.
    Sweep(SweepArgs),
    /// Run the shipped baseline sweep comparing all four estimation methods.
    #[command(name = "reproduce-fig2")]
    ReproduceFig2(CommonArgs),
    /// Trace the delay miss-rate curve over the baseline SNR grid.
    #[command(name = "reproduce-fig3")]
    ReproduceFig3(CommonArgs),
    /// Check the energy-error split moments on one frozen channel.
    #[command(name = "validate-theorem1")]
    ValidateTheorem1(TheoremArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// JSON config file; keys are exactly the config fields.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Trials per SNR point (overrides the config).
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed of every random stream (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Lowest SNR point in dB; with --snr-max/--snr-step this replaces the
    /// grid (unset bounds fall back to -20..20 step 5).
    #[arg(long, allow_negative_numbers = true)]
    snr_min: Option<f64>,
    /// Highest SNR point in dB.
    #[arg(long, allow_negative_numbers = true)]
    snr_max: Option<f64>,
    /// SNR grid spacing in dB (must be positive).
    #[arg(long)]
    snr_step: Option<f64>,
    /// Output CSV path; the manifest lands next to it with
    /// `.manifest.json` appended.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TheoremArgs {
    /// SNR in dB of the noise draws.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Independent noise draws.
    #[arg(long, default_value_t = 10_000)]
    draws: u64,
    /// Seed of the frozen channel (overrides the baseline).
    #[arg(long)]
    seed: Option<u64>,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => {
            let cfg = SimConfig::from_json_file(&args.config)
                .with_context(|| format!("loading {}", args.config.display()))?;
            run_and_emit(cfg, &args.common, "sweep.csv")
        }
        Command::ReproduceFig2(common) => {
            run_and_emit(SimConfig::baseline(), &common, "fig2.csv")
        }
        Command::ReproduceFig3(common) => {
            run_and_emit(SimConfig::delay_curve_baseline(), &common, "fig3.csv")
        }
        Command::ValidateTheorem1(args) => run_theorem(&args),
    }
}

/// Installs the global worker pool when a thread count was requested.
fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("installing the worker pool")?;
    }
    Ok(())
}

/// Applies command-line overrides to a loaded config.
fn apply_overrides(mut cfg: SimConfig, common: &CommonArgs) -> Result<SimConfig> {
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.snr_min.is_some() || common.snr_max.is_some() || common.snr_step.is_some() {
        cfg.snr_grid = build_grid(
            common.snr_min.unwrap_or(-20.0),
            common.snr_max.unwrap_or(20.0),
            common.snr_step.unwrap_or(5.0),
        )?;
    }
    Ok(cfg)
}

/// Arithmetic SNR grid from `min` to `max` inclusive in steps of `step`.
fn build_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !step.is_finite() || step <= 0.0 {
        bail!("--snr-step must be a positive number, got {step}");
    }
    if !min.is_finite() || !max.is_finite() || min > max {
        bail!("need --snr-min <= --snr-max, got {min} > {max}");
    }
    let count = ((max - min) / step).floor() as usize + 1;
    if count > 1000 {
        bail!("SNR grid of {count} points is unreasonably large");
    }
    Ok((0..count).map(|i| min + i as f64 * step).collect())
}

fn tool_info() -> ToolInfo {
    ToolInfo {
        name: "beamsel".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        git_describe: env!("BEAMSEL_GIT_DESCRIBE").to_string(),
    }
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

/// The CSV path with `.manifest.json` appended to the full file name.
fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Runs the sweep and writes the CSV plus its run manifest.
fn run_and_emit(cfg: SimConfig, common: &CommonArgs, default_out: &str) -> Result<()> {
    init_threads(common.threads)?;
    let cfg = apply_overrides(cfg, common)?;
    let records = run_sweep(&cfg)?;
    let out = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default_out));
    fs::write(&out, csv_string(&records))
        .with_context(|| format!("writing {}", out.display()))?;
    let manifest = RunManifest {
        tool: tool_info(),
        command: command_line(),
        config: cfg,
        extra: None,
    };
    let manifest_out = manifest_path(&out);
    fs::write(&manifest_out, manifest_json(&manifest)?)
        .with_context(|| format!("writing {}", manifest_out.display()))?;
    let rows: usize = records.iter().map(|r| r.modes.len()).sum();
    println!(
        "wrote {} ({} SNR points, {rows} rows) and {}",
        out.display(),
        records.len(),
        manifest_out.display()
    );
    Ok(())
}

/// Runs the moment validation, printing one PASS/FAIL line per check.
fn run_theorem(args: &TheoremArgs) -> Result<()> {
    init_threads(args.threads)?;
    let mut cfg = SimConfig::baseline();
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let report = validate_decomposition(&cfg, args.snr_db, args.draws)?;
    println!(
        "frozen channel seed {}, pair ({}, {}), {} draws at {} dB:",
        cfg.seed, report.pair.0, report.pair.1, report.draws, report.snr_db
    );
    for (name, ok, detail) in report.checks() {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&report).context("rendering the report")?;
        text.push('\n');
        fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
        println!("wrote {}", out.display());
    }
    if !report.passes() {
        bail!("moment validation failed");
    }
    Ok(())
}
