//! Command-line front end for the `polytrope` crate.
//!
//! [`run`] is the whole program minus process exit, so it can be driven
//! in-process by tests.

pub mod args;
mod commands;
pub mod output;

use std::io::Write;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::{Cli, FileConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Lib(polytrope::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use polytrope::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Lib(E::InvalidConfig(_)) => EXIT_USAGE,
            CliError::Lib(E::Convergence(_)) => EXIT_CONVERGENCE,
            CliError::Lib(_) => EXIT_DOMAIN,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<polytrope::Error> for CliError {
    fn from(e: polytrope::Error) -> Self {
        CliError::Lib(e)
    }
}

/// Machine-readable summary printed with `--json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_clock_seconds: f64,
    pub exit_status: i32,
}

/// What a command produced: human-readable text, the JSON payload, and the
/// resolved configuration it ran with.
pub(crate) struct Outcome {
    pub text: String,
    pub results: serde_json::Value,
}

/// Parses `argv` (including the program name), executes, writes to `out` and
/// `err`, and returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let echo: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();

    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
            return code;
        }
    };

    let file = match &cli.opts.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(m) => {
                let _ = writeln!(err, "error: {m}");
                return EXIT_USAGE;
            }
        },
        None => FileConfig::default(),
    };
    let merged = args::merge(&cli.opts, file);
    let mut config = serde_json::json!({ "command": cli.command.name(), "options": merged });

    let result = commands::execute(cli.command, &merged, &mut config);
    let (code, text, results, error) = match result {
        Ok(o) => (EXIT_OK, o.text, o.results, None),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            (e.exit_code(), String::new(), serde_json::Value::Null, Some(e.to_string()))
        }
    };

    if cli.opts.json {
        let report = RunReport {
            command: echo,
            config,
            results,
            error,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            exit_status: code,
        };
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        let _ = write!(out, "{text}");
    }
    code
}
