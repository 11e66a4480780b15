use std::path::PathBuf;

use anyhow::Context as _;
use clap::Args;
use roadscan_core::eval::{evaluate, ground_truth_from_manifest, Aggregation};
use roadscan_core::orchestrator::DetectionRow;
use roadscan_core::{BBox, Detection, DetectionFrame};

use super::{load_manifest, write_text, Context};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth manifest.
    pub manifest: PathBuf,
    /// Detections as JSON lines (`image_id, class, x1, y1, x2, y2, confidence`).
    pub detections: PathBuf,
    /// Confidence threshold for the reported F1.
    #[arg(long, default_value_t = 0.5)]
    pub conf: f64,
    /// Step of the confidence sweep grid.
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Average F1 over classes instead of pooling counts.
    #[arg(long)]
    pub r#macro: bool,
    /// Write the full report as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn read_detections(path: &std::path::Path) -> anyhow::Result<Vec<Detection>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let row: DetectionRow =
                serde_json::from_str(line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
            Ok(Detection::new(
                row.image_id,
                row.class.parse()?,
                BBox::new(row.x1, row.y1, row.x2, row.y2),
                row.confidence,
                DetectionFrame::Original,
            ))
        })
        .collect()
}

pub fn run(ctx: &Context, args: EvalArgs) -> anyhow::Result<()> {
    if !(args.grid_step > 0.0 && args.grid_step <= 1.0) {
        return Err(UsageError(format!("--grid-step {} must be in (0,1]", args.grid_step)).into());
    }
    let gts = ground_truth_from_manifest(&load_manifest(ctx, &args.manifest)?);
    let det_path = ctx.file.resolve(&args.detections);
    if !det_path.is_file() {
        return Err(UsageError(format!("detections {} do not exist", det_path.display())).into());
    }
    let preds = read_detections(&det_path)?;
    let agg = if args.r#macro { Aggregation::Macro } else { Aggregation::Micro };
    let report = evaluate(&preds, &gts, args.conf, args.grid_step, agg);
    println!(
        "F1 {:.4} precision {:.4} recall {:.4} at conf {:.2} ({:?}); mAP@0.5 {:.4}; best F1 {:.4} at conf {:.2}",
        report.overall.f1,
        report.overall.precision,
        report.overall.recall,
        args.conf,
        agg,
        report.map50,
        report.sweep.best_f1,
        report.sweep.best_conf
    );
    if let Some(out) = args.out {
        write_text(&out, &report.to_csv())?;
    }
    Ok(())
}
