use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use anisoflow_cli::{execute, THREADS_VAR};

/// Runs one JSON-configured job: exponents, exact, simulate, steady,
/// rescale or verify. Exit status 0 on success, 1 on invalid input, 2 on a
/// numerical abort.
#[derive(Parser)]
#[command(name = "anisoflow", version)]
struct Args {
    /// JSON run document with a `command` field.
    #[arg(long)]
    config: PathBuf,
    /// Directory for the output files and the run manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Print errors only.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let threads = std::env::var(THREADS_VAR).ok();
    let outcome = execute(&args.config, &args.out, threads.as_deref());
    for w in &outcome.manifest.warnings {
        log::warn!("{w}");
    }
    match &outcome.manifest.error {
        Some(e) => log::error!("{e}"),
        None if !args.quiet => println!("{}", outcome.message),
        None => {}
    }
    ExitCode::from(outcome.exit_code)
}
