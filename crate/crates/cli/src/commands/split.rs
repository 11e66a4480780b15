use std::collections::HashSet;
use std::path::PathBuf;

use clap::Args;
use roadscan_core::annot_io::split_dataset;
use roadscan_core::Split;

use super::{load_manifest, Context};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct SplitArgs {
    pub manifest: PathBuf,
    pub out_manifest: PathBuf,
    /// Share of each folder assigned to validation.
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    /// Folder kept entirely in training (repeatable).
    #[arg(long = "train-only", value_name = "FOLDER")]
    pub train_only: Vec<String>,
}

pub fn run(ctx: &Context, args: SplitArgs) -> anyhow::Result<()> {
    if !(args.val_fraction > 0.0 && args.val_fraction < 1.0) {
        return Err(UsageError(format!("--val-fraction {} must be in (0,1)", args.val_fraction)).into());
    }
    let manifest = load_manifest(ctx, &args.manifest)?;
    let train_only: HashSet<String> = args.train_only.into_iter().collect();
    let out = split_dataset(&manifest, args.val_fraction, ctx.file.pipeline.seed, &train_only)?;
    out.save(&args.out_manifest)?;
    let val = out.images.iter().filter(|r| r.split == Split::Val).count();
    println!("train {}, val {}", out.len() - val, val);
    Ok(())
}
