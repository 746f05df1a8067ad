//! `tsfn`: drives the optimizers, spectrum studies, quantum-step verification,
//! sampled-SVD bound checks and PCA reports, writing plain CSV files.
//!
//! Exit codes: 0 success, 2 optimizer hit `max_iter`, 3 optimizer diverged,
//! 64 usage error, 1 any other failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use thiserror::Error;

use output::Output;

pub const EXIT_MAX_ITER: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tsfn", version, about = "Truncated saddle-free Newton experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an optimizer and write its trajectory.
    Optimize(commands::OptimizeArgs),
    /// Sample Wishart spectra against the Marchenko-Pastur law.
    Mp(commands::MpArgs),
    /// Compare the simulated quantum step with the classical truncated step.
    Qverify(commands::QverifyArgs),
    /// Check the sampled-SVD error bounds over repeated trials.
    Rsvd(commands::RsvdArgs),
    /// Explained-variance report, optionally with Hessian outliers.
    Pca(commands::PcaArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory; overrides TSFN_OUT_DIR and the config file.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// JSON object of flag values; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Command line after folding in the config file, plus the config's output
/// directory, which ranks below the environment variable.
struct Expanded {
    argv: Vec<String>,
    config_out_dir: Option<PathBuf>,
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Splices `--key value` pairs from the config right after the subcommand,
/// so later command-line occurrences override them.
fn expand(argv: Vec<String>) -> Result<Expanded, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(Expanded {
            argv,
            config_out_dir: None,
        });
    };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Usage(format!("config {path}: expected a JSON object")));
    };
    let mut flags = Vec::new();
    let mut config_out_dir = None;
    for (key, v) in map {
        let key = key.replace('_', "-");
        let rendered = match v {
            Value::Bool(true) => None,
            Value::Bool(false) | Value::Null => continue,
            Value::String(s) => Some(s),
            Value::Number(n) => Some(n.to_string()),
            Value::Array(items) => Some(
                items
                    .iter()
                    .map(|i| match i {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            Value::Object(_) => return Err(CliError::Usage(format!("config {path}: nested object for {key}"))),
        };
        match key.as_str() {
            "config" => continue,
            "out-dir" => config_out_dir = rendered.map(PathBuf::from),
            _ => {
                flags.push(format!("--{key}"));
                flags.extend(rendered);
            }
        }
    }
    let sub = argv.iter().skip(1).position(|a| !a.starts_with('-')).map(|i| i + 2);
    let mut out = argv;
    if let Some(at) = sub {
        out.splice(at..at, flags);
    }
    Ok(Expanded {
        argv: out,
        config_out_dir,
    })
}

/// Flag, then environment, then config file, then the working directory.
fn resolve_out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("TSFN_OUT_DIR").filter(|v| !v.is_empty()).map(PathBuf::from))
        .or(config)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn shell_word(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,=/:+".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn invocation(argv: &[String]) -> String {
    std::iter::once("tsfn".to_string())
        .chain(argv.iter().skip(1).map(|a| shell_word(a)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(argv: Vec<String>) -> Result<u8, CliError> {
    let raw = invocation(&argv);
    let expanded = expand(argv)?;
    let cli = match Cli::try_parse_from(&expanded.argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(0);
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string())),
    };
    let common = match &cli.command {
        Command::Optimize(a) => &a.common,
        Command::Mp(a) => &a.common,
        Command::Qverify(a) => &a.common,
        Command::Rsvd(a) => &a.common,
        Command::Pca(a) => &a.common,
    };
    let out = Output::new(
        resolve_out_dir(common.out_dir.clone(), expanded.config_out_dir),
        &raw,
        common.seed,
    );
    match &cli.command {
        Command::Optimize(a) => commands::optimize(a, &out),
        Command::Mp(a) => commands::mp(a, &out),
        Command::Qverify(a) => commands::qverify(a, &out),
        Command::Rsvd(a) => commands::rsvd(a, &out),
        Command::Pca(a) => commands::pca(a, &out),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.trim_end());
            if matches!(e, CliError::Usage(_)) && !msg.contains("Usage:") {
                eprintln!("\nRun `tsfn --help` for usage.");
            }
            ExitCode::from(e.code())
        }
    }
}
