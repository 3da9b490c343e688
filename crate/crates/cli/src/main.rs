//! `lmlds`: train, forecast, evaluate and benchmark transform-domain
//! multilinear dynamical systems on tensor time series.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lmlds::ErrorCategory;

use crate::commands::{benchmark, evaluate, params, predict, synth, train};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),
    #[error(transparent)]
    Lib(#[from] lmlds::Error),
    /// Every evaluated variant failed; details are in the report.
    #[error("{0}")]
    AllFailed(String),
}

impl CliError {
    fn category(&self) -> ErrorCategory {
        match self {
            CliError::Config(_) => ErrorCategory::Config,
            CliError::Lib(e) => e.category(),
            CliError::AllFailed(_) => ErrorCategory::Numeric,
        }
    }
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Config => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numeric => 4,
        ErrorCategory::Io => 5,
    }
}

fn category_name(category: ErrorCategory) -> &'static str {
    match category {
        ErrorCategory::Config => "config",
        ErrorCategory::Data => "data",
        ErrorCategory::Numeric => "numeric",
        ErrorCategory::Io => "io",
    }
}

#[derive(Debug, Parser)]
#[command(name = "lmlds", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model to the first --train-len epochs of a dataset
    Train(train::Args),
    /// Forecast epochs after the end of training
    Predict(predict::Args),
    /// Train every variant and the vectorized baseline, score the test span
    Evaluate(evaluate::Args),
    /// Time training across problem sizes and worker counts
    Benchmark(benchmark::Args),
    /// Sample a dataset from a random ground-truth model
    GenSynthetic(synth::Args),
    /// Print parameter counts, or the latent width for a budget
    Params(params::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train::run(&a),
        Command::Predict(a) => predict::run(&a),
        Command::Evaluate(a) => evaluate::run(&a),
        Command::Benchmark(a) => benchmark::run(&a),
        Command::GenSynthetic(a) => synth::run(&a),
        Command::Params(a) => params::run(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let category = e.category();
            eprintln!("error ({}): {e}", category_name(category));
            ExitCode::from(exit_code(category))
        }
    }
}
