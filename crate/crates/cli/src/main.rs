// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rindler_sim::{execute, load, CliError, RunMode};

/// Accelerated detectors coupled to a quantized field, simulated in proper
/// time.
#[derive(Debug, Parser)]
#[command(name = "rindler-sim", version)]
struct Args {
    /// What to run.
    #[arg(value_enum)]
    mode: RunMode,

    /// TOML run configuration. May be omitted when `--set preset=...`
    /// supplies everything.
    #[arg(long, short)]
    config: Option<PathBuf>,

    /// Override a config value, e.g. `--set worldline.alpha=2e-4`. Repeatable;
    /// later overrides win.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory, created if missing.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,

    /// Worker threads for `sweep` (default: all processors).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(args.config.as_deref(), &args.overrides).and_then(|loaded| {
        let timestamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        execute(&loaded, args.mode, &args.out, args.workers, timestamp)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("rindler-sim: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &CliError) -> u8 {
    err.exit_code() as u8
}
