//! Command-line front end: argument parsing, config merging, subcommands.
//!
//! Exit codes: 0 success, 2 config error, 3 I/O error, 4 processing error.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;
use tremorscope::{Error, ErrorKind};

use crate::args::{Cli, Command};
use crate::config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PROCESSING: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Config => EXIT_CONFIG,
        ErrorKind::Io => EXIT_IO,
        ErrorKind::Processing => EXIT_PROCESSING,
    }
}

fn quote(v: &str) -> String {
    if v.is_empty() || v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
        format!("{v:?}")
    } else {
        v.to_string()
    }
}

/// One `key=value` line on stderr.
pub fn log_line(pairs: &[(&str, String)]) {
    let line: Vec<String> = pairs
        .iter()
        .map(|(k, v)| format!("{k}={}", quote(v)))
        .collect();
    eprintln!("{}", line.join(" "));
}

fn dispatch(cli: Cli) -> tremorscope::Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = cli.threads.or(file.threads) {
        if n == 0 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match cli.command {
        Command::Magnify(a) => commands::cmd_magnify(a, &file),
        Command::Detect(a) => commands::cmd_detect(a, &file),
        Command::Synth(a) => commands::cmd_synth(a, &file),
        Command::Report(a) => commands::cmd_report(a, &file),
        Command::Bench(a) => commands::cmd_bench(a, &file),
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let kind = match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Io => "io",
                ErrorKind::Processing => "processing",
            };
            log_line(&[("error", kind.into()), ("message", e.to_string())]);
            exit_code(&e)
        }
    }
}
