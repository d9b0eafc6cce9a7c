//! File-driven front end: a JSON run document in, CSV/JSON/SVG files and a
//! `run.json` manifest out.

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod svg;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use commands::{CheckSummary, EmittedFile, Sink};
use config::RunConfig;
use error::{CliError, CliResult};

pub const MANIFEST: &str = "run.json";
pub const THREADS_VAR: &str = "ANISOFLOW_THREADS";

/// Record of one invocation; the echoed config is enough to repeat it.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Option<String>,
    pub config: Option<serde_json::Value>,
    pub config_path: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    /// Worker-count hint from the environment. Recorded only; the solvers
    /// run on one thread.
    pub threads_hint: Option<usize>,
    pub files: Vec<EmittedFile>,
    pub summary: Option<CheckSummary>,
    pub warnings: Vec<String>,
    pub exit_code: u8,
    pub error: Option<String>,
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

pub fn threads_hint(raw: Option<&str>) -> CliResult<Option<usize>> {
    match raw {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!(
                "{THREADS_VAR} must be a positive integer, got {s:?}"
            ))),
        },
    }
}

/// What a finished invocation produced.
pub struct RunOutcome {
    pub exit_code: u8,
    pub manifest: RunManifest,
    pub message: String,
}

fn dispatch(cfg: &RunConfig, sink: &mut Sink, base: &Path) -> CliResult<()> {
    match cfg {
        RunConfig::Exponents { exponents } => commands::cmd_exponents(exponents, sink),
        RunConfig::Exact { exact } => commands::cmd_exact(exact, sink),
        RunConfig::Simulate { simulate } => commands::cmd_simulate(simulate, sink),
        RunConfig::Steady { steady } => commands::cmd_steady(steady, sink, base),
        RunConfig::Rescale { rescale } => commands::cmd_rescale(rescale, sink, base),
        RunConfig::Verify { verify } => commands::cmd_verify(verify, sink),
    }
}

/// Runs the document at `config_path`, writing into `out_dir`. The manifest
/// is written whatever happens, as long as the directory can be created.
/// Relative input paths in the document resolve against its directory.
pub fn execute(config_path: &Path, out_dir: &Path, threads_var: Option<&str>) -> RunOutcome {
    let started = unix_now();
    let clock = std::time::Instant::now();
    let mut sink = Sink::new(out_dir);
    let mut config_value = None;
    let mut command = None;
    let mut threads = None;

    let result: CliResult<()> = (|| {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        threads = threads_hint(threads_var)?;
        let text =
            std::fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        config_value = Some(value.clone());
        command = value
            .get("command")
            .and_then(|c| c.as_str())
            .map(str::to_string);
        let cfg: RunConfig = serde_json::from_value(value)?;
        let base: PathBuf = config_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        dispatch(&cfg, &mut sink, &base)
    })();

    let (exit_code, error) = match &result {
        Ok(()) => (0, None),
        Err(e) => (e.exit_code(), Some(e.to_string())),
    };
    sink.files.push(EmittedFile {
        path: MANIFEST.into(),
        role: "run manifest".into(),
    });
    let manifest = RunManifest {
        tool: "anisoflow",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config: config_value,
        config_path: config_path.display().to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        wall_seconds: clock.elapsed().as_secs_f64(),
        threads_hint: threads,
        files: sink.files,
        summary: sink.summary,
        warnings: sink.warnings,
        exit_code,
        error,
    };
    let mut exit_code = exit_code;
    if out_dir.is_dir() {
        let path = out_dir.join(MANIFEST);
        let written = serde_json::to_string_pretty(&manifest)
            .map_err(CliError::from)
            .and_then(|t| std::fs::write(&path, t + "\n").map_err(|e| CliError::io(&path, e)));
        if let Err(e) = written {
            log::error!("{e}");
            exit_code = exit_code.max(1);
        }
    }
    RunOutcome {
        exit_code,
        manifest,
        message: sink.message,
    }
}
