//! `roadscan`: dataset preparation, evaluation, inference and reparameterization
//! from the command line.
//!
//! Exit status: 0 on success, 1 when the operation fails, 2 on usage errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Error that maps to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "roadscan", version, about = "Road-damage detection toolkit")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON config file (pipeline settings and paths); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice; overrides `pipeline.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert a tree of VOC XML files to YOLO labels plus a JSONL manifest.
    Convert(commands::convert::ConvertArgs),
    /// Crop large images to their lower-left square and clip their labels.
    Crop(commands::crop::CropArgs),
    /// Assign train/val splits per folder.
    Split(commands::split::SplitArgs),
    /// Per-folder class distribution as CSV.
    Stats(commands::stats::StatsArgs),
    /// Score detections against a manifest (mAP@0.5, F1, confidence sweep).
    Eval(commands::eval::EvalArgs),
    /// Run size-dispatched batched inference over a manifest.
    Infer(commands::infer::InferArgs),
    /// Fold batch norm into the preceding convolution of a weights fixture.
    Fuse(commands::fuse::FuseArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = config::CliConfigFile::load(cli.global.config.as_deref()).and_then(|mut file| {
        if let Some(seed) = cli.global.seed {
            file.pipeline.seed = seed;
        }
        let ctx = commands::Context { file, jobs: cli.global.jobs.unwrap_or(0) };
        match cli.command {
            Command::Convert(a) => commands::convert::run(&ctx, a),
            Command::Crop(a) => commands::crop::run(&ctx, a),
            Command::Split(a) => commands::split::run(&ctx, a),
            Command::Stats(a) => commands::stats::run(&ctx, a),
            Command::Eval(a) => commands::eval::run(&ctx, a),
            Command::Infer(a) => commands::infer::run(&ctx, a),
            Command::Fuse(a) => commands::fuse::run(&ctx, a),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
