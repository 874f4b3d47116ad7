//! Command-line front end: JSON experiment configs, figure presets and
//! deterministic CSV/JSON artifacts.
//!
//! `chase-rd <command> --config <path> [--out <path>] [--format csv|json]
//! [--seed <u64>] [--threads <n>]`

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, scenario_of};
pub use config::{AwgnRule, DecoderKind, ExperimentConfig, Format, Kind, OneOrMany, Preset, DEFAULT_SEED};
pub use output::{float, Artifact, Table};

use crate::error::{invalid, Error, Result};

/// JSON schema description of the CSV and JSON outputs.
pub const OUTPUT_SCHEMA: &str = include_str!("../../schema/outputs.json");

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) => EXIT_VALIDATION,
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "chase-rd", version, about = "Rate-distortion guided stochastic Chase decoding experiments")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Kind,
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Resolved config and rendered output for a set of arguments.
pub fn render(args: &Args) -> Result<(ExperimentConfig, String)> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(k) = config.kind {
        if k != args.command {
            return invalid(format!("config kind is {k} but the command is {}", args.command));
        }
    }
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(format) = args.format {
        config.format = Some(format);
    }
    config.apply_preset()?;
    let artifact = execute(args.command, &config)?;
    let text = match config.format.unwrap_or(Format::Csv) {
        Format::Csv => artifact.table.to_csv(),
        Format::Json => artifact.to_json(),
    };
    Ok((config, text))
}

/// Entry point behind the binary; returns the process exit code.
pub fn run(args: Args) -> i32 {
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_VALIDATION;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return EXIT_IO;
        }
    }
    let (config, text) = match render(&args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    // The output path stays out of the echoed config so that runs written to
    // different files compare byte for byte.
    let out = args.out.clone().or_else(|| config.output.as_ref().map(PathBuf::from));
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_IO;
            }
        }
        None => print!("{text}"),
    }
    EXIT_OK
}
