//! Command-line front end: argument model, command dispatch and the JSON
//! run report.

pub mod args;
pub mod commands;
pub mod output;
pub mod report;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub use args::Cli;
use args::Format;
use report::RunReport;

/// Exit status for `--strict` runs that left a verdict undecided.
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config { path: PathBuf, source: selfaffine::Error },
    Core(selfaffine::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Config { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<selfaffine::Error> for CliError {
    fn from(e: selfaffine::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A finished run: the report plus the primary data for csv/pgm formats.
#[derive(Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub data: Option<Vec<u8>>,
    pub format: Format,
}

/// Runs one command without touching stdout.
pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let start = Instant::now();
    let mut outcome = commands::dispatch(cli)?;
    outcome.report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(outcome)
}

/// Writes the outcome to `--output` and/or `out`, returning the exit status.
pub fn emit(cli: &Cli, mut outcome: Outcome, out: &mut impl Write) -> CliResult<i32> {
    let stdout_err = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    match (outcome.data.take(), &cli.global.output) {
        (Some(data), Some(path)) => {
            let name = format_name(outcome.format);
            let artifact = output::write_artifact(path, name, &data).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            outcome.report.artifacts.push(artifact);
            out.write_all(&report_json(&outcome.report)).map_err(stdout_err)?;
        }
        (Some(data), None) => out.write_all(&data).map_err(stdout_err)?,
        (None, Some(path)) => {
            output::write_atomic(path, &report_json(&outcome.report)).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?
        }
        (None, None) => out.write_all(&report_json(&outcome.report)).map_err(stdout_err)?,
    }
    Ok(if cli.global.strict && !outcome.report.undecided.is_empty() {
        EXIT_UNDECIDED
    } else {
        0
    })
}

pub fn report_json(report: &RunReport) -> Vec<u8> {
    let mut text = serde_json::to_vec_pretty(report).expect("report serializes");
    text.push(b'\n');
    text
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Pgm => "pgm",
    }
}

/// Sizes the rayon pool from `SELFAFFINE_THREADS` when it is set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(text) = std::env::var("SELFAFFINE_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("SELFAFFINE_THREADS: `{text}` is not a thread count")))?;
    // A pool built earlier in the process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
