use std::path::PathBuf;

use clap::Args;
use roadscan_core::annot_io::distribution_stats;

use super::{load_manifest, write_text, Context};

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub manifest: PathBuf,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(ctx: &Context, args: StatsArgs) -> anyhow::Result<()> {
    let report = distribution_stats(&load_manifest(ctx, &args.manifest)?);
    let csv = report.to_csv();
    match args.out {
        Some(path) => {
            write_text(&path, &csv)?;
            println!("{} images, {} labels", report.total_images(), report.total_labels());
        }
        None => print!("{csv}"),
    }
    Ok(())
}
