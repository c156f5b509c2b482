//! Batch experiment runner.
//!
//! [`run`] validates a config, executes its command and writes
//! `results.csv`, `summary.json` and, for sweep and grid commands,
//! `plot.svg` into the output directory. Failures write `error.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

use std::path::{Path, PathBuf};

pub use commands::Artifacts;
pub use config::{Command, ExperimentConfig, Mode, RunOptions};
pub use error::{CliError, CliResult, ErrorRecord};
pub use plot::{emit_plot, PlotOptions, Series};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "plot.svg";
pub const ERROR_FILE: &str = "error.json";

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub output: Option<PathBuf>,
    pub error: Option<ErrorRecord>,
}

fn write(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

fn remove_stale(dir: &Path, names: &[&str]) -> CliResult<()> {
    for name in names {
        let path = dir.join(name);
        match std::fs::remove_file(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(CliError::io(path, e)),
        }
    }
    Ok(())
}

/// Computes the artifacts of a config without touching the filesystem
/// beyond reading referenced inputs.
pub fn compute(config: &ExperimentConfig) -> CliResult<Artifacts> {
    let job = commands::prepare(config)?;
    job.execute(config)
}

fn run_inner(config: &ExperimentConfig, out: &Path) -> CliResult<()> {
    let artifacts = compute(config)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    remove_stale(out, &[ERROR_FILE, PLOT_FILE])?;
    write(out, RESULTS_FILE, &artifacts.csv)?;
    write(out, SUMMARY_FILE, &artifacts.summary)?;
    if let Some(svg) = &artifacts.plot {
        write(out, PLOT_FILE, svg)?;
    }
    if artifacts.violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Library(sdht_core::SdhtError::BoundViolated(artifacts.violations.join("; "))))
    }
}

fn record_failure(out: Option<&Path>, e: &CliError) -> ErrorRecord {
    let record = ErrorRecord::from(e);
    if let Some(dir) = out {
        let text = serde_json::to_string_pretty(&record).expect("error record serializes") + "\n";
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join(ERROR_FILE), text);
        }
    }
    record
}

/// Runs a loaded config with command-line overrides.
pub fn run(config: ExperimentConfig, opts: &RunOptions) -> RunOutcome {
    let fallback_out = opts.out.clone().or_else(|| config.output.clone());
    let config = match opts.apply(config) {
        Ok(c) => c,
        Err(e) => {
            let error = record_failure(fallback_out.as_deref(), &e);
            return RunOutcome { exit_code: e.exit_code(), output: fallback_out, error: Some(error) };
        }
    };
    let out = config.output.clone().expect("apply checked the output directory");
    match run_inner(&config, &out) {
        Ok(()) => RunOutcome { exit_code: 0, output: Some(out), error: None },
        Err(e) => {
            let error = record_failure(Some(&out), &e);
            RunOutcome { exit_code: e.exit_code(), output: Some(out), error: Some(error) }
        }
    }
}

/// Loads `path` and runs it; an unreadable config still yields `error.json`
/// when `--out` is known.
pub fn run_file(path: &Path, opts: &RunOptions) -> RunOutcome {
    match ExperimentConfig::load(path) {
        Ok(c) => run(c, opts),
        Err(e) => {
            let error = record_failure(opts.out.as_deref(), &e);
            RunOutcome { exit_code: e.exit_code(), output: opts.out.clone(), error: Some(error) }
        }
    }
}
