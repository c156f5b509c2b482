use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sdht_lab::{run_file, Mode, RunOptions};

/// Runs one experiment config and writes its results.
///
/// Exit status: 0 success, 1 I/O failure, 2 invalid config or input,
/// 3 a checked bound was violated.
#[derive(Debug, Parser)]
#[command(name = "sdht-lab", version)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "SDHT_LAB_THREADS")]
    threads: Option<usize>,
    /// Overrides the config's `mode`.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(k) = args.threads.filter(|&k| k > 0) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("sdht-lab: cannot set thread count: {e}");
        }
    }
    let opts = RunOptions { out: args.out, seed: args.seed, mode: args.mode };
    let outcome = run_file(&args.config, &opts);
    match &outcome.error {
        Some(e) => eprintln!("sdht-lab: {} ({})", e.message, e.kind),
        None => {
            if let Some(dir) = &outcome.output {
                println!("wrote {}", dir.display());
            }
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
