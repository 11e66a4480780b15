use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;
use roadscan_core::orchestrator::{
    detections_jsonl, run_pipeline, submission_csv, Backends, DimsOnly, ImageSource, MeasureReport, ModelBackend,
    PpmDirectory, RunOptions, SizeTag, StubBackend,
};

use super::{load_manifest, write_text, Context};
use crate::UsageError;

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Manifest of the images to run on.
    pub manifest: PathBuf,
    /// Output directory for detections.jsonl, submission.csv and latency.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of `<id>.ppm` (or `<folder>/<id>.ppm`) images; without it only
    /// geometry is passed to the backends.
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Use the built-in deterministic stub models instead of model files.
    #[arg(long)]
    pub stub: bool,
    /// Input size of the stub models.
    #[arg(long, default_value_t = 640)]
    pub stub_input_size: u32,
    /// Normal-path ONNX model (repeatable; results are fused).
    #[arg(long = "model", value_name = "ONNX")]
    pub models: Vec<PathBuf>,
    /// Large-path ONNX model (default: the first normal model).
    #[arg(long, value_name = "ONNX")]
    pub large_model: Option<PathBuf>,
    /// Batch size for large images (default 12)
    #[arg(long)]
    pub batch_large: Option<usize>,
    /// Batch size for normal images (default 24)
    #[arg(long)]
    pub batch_normal: Option<usize>,
    /// Run identity, flipped and 0.83x views and fuse them.
    #[arg(long)]
    pub tta: bool,
    /// Timed runs; detections come from the first.
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    /// Leave timing cells empty so outputs only depend on inputs and config.
    #[arg(long)]
    pub no_timing: bool,
    /// Exit 0 even when some images failed.
    #[arg(long)]
    pub keep_going: bool,
}

#[cfg(feature = "onnx")]
fn load_model(path: &std::path::Path) -> anyhow::Result<Arc<dyn ModelBackend>> {
    Ok(Arc::new(roadscan_core::orchestrator::OnnxBackend::load(path)?))
}

#[cfg(not(feature = "onnx"))]
fn load_model(path: &std::path::Path) -> anyhow::Result<Arc<dyn ModelBackend>> {
    Err(UsageError(format!("cannot load {}: built without the `onnx` feature", path.display())).into())
}

fn build_backends(ctx: &Context, args: &InferArgs) -> anyhow::Result<Backends> {
    let paths = &ctx.file.paths;
    let normal_paths = if args.models.is_empty() { paths.normal_models.clone() } else { args.models.clone() };
    let large_path = args.large_model.clone().or_else(|| paths.large_models.first().cloned());
    if args.stub {
        if !normal_paths.is_empty() || large_path.is_some() {
            return Err(UsageError("--stub cannot be combined with model files".into()).into());
        }
        let seed = ctx.file.pipeline.seed;
        let big: Arc<dyn ModelBackend> = Arc::new(StubBackend::new("stub-large", args.stub_input_size, seed));
        let tiny: Arc<dyn ModelBackend> = Arc::new(StubBackend::new("stub-tiny", args.stub_input_size, seed));
        return Ok(Backends::new(vec![big.clone(), tiny], vec![big]));
    }
    if normal_paths.is_empty() {
        return Err(UsageError("no models: pass --model (or --stub)".into()).into());
    }
    let normal = normal_paths.iter().map(|p| load_model(&ctx.file.resolve(p))).collect::<anyhow::Result<Vec<_>>>()?;
    let large = match large_path {
        Some(p) => load_model(&ctx.file.resolve(&p))?,
        None => normal[0].clone(),
    };
    Ok(Backends::new(normal, vec![large]))
}

pub fn run(ctx: &Context, args: InferArgs) -> anyhow::Result<()> {
    let mut file = ctx.file.clone();
    if let Some(b) = args.batch_large {
        file.pipeline.batch_large = b;
    }
    if let Some(b) = args.batch_normal {
        file.pipeline.batch_normal = b;
    }
    file.pipeline.tta_enabled |= args.tta;
    let cfg = file.checked_pipeline()?;
    if args.repetitions == 0 {
        return Err(UsageError("--repetitions must be at least 1".into()).into());
    }
    let out_dir = args
        .out
        .clone()
        .or_else(|| file.paths.output_dir.clone())
        .ok_or_else(|| UsageError("no output directory: pass --out or set paths.output_dir".into()))?;

    let manifest = load_manifest(ctx, &args.manifest)?;
    let backends = build_backends(ctx, &args)?;
    let images = args.images.clone().or_else(|| file.paths.images_dir.clone());
    let source: Box<dyn ImageSource> = match images {
        Some(root) => Box::new(PpmDirectory { root: file.resolve(&root) }),
        None => Box::new(DimsOnly),
    };
    let opts = RunOptions { jobs: ctx.jobs };

    let mut first = None;
    let mut timings = MeasureReport::default();
    for _ in 0..args.repetitions {
        let out = run_pipeline(&manifest, source.as_ref(), &backends, &cfg, &opts)?;
        timings.runs.push(out.latency.clone());
        first.get_or_insert(out);
    }
    let out = first.expect("at least one repetition");

    write_text(&out_dir.join("detections.jsonl"), &detections_jsonl(&out.results)?)?;
    write_text(&out_dir.join("submission.csv"), &submission_csv(&out.results)?)?;
    write_text(&out_dir.join("latency.csv"), &timings.to_csv(args.no_timing))?;

    let failed: Vec<_> = out.failures().collect();
    for f in &failed {
        eprintln!("{}: {}", f.image_id, f.failure.as_deref().unwrap_or_default());
    }
    let n_large = out.results.iter().filter(|r| r.tag == SizeTag::Large).count();
    print!(
        "images {} (normal {}, large {}), batches {}, detections {}, failed {}",
        out.results.len(),
        out.results.len() - n_large,
        n_large,
        out.plan.batches.len(),
        out.results.iter().map(|r| r.detections.len()).sum::<usize>(),
        failed.len()
    );
    if args.no_timing {
        println!();
    } else {
        println!("; {:.6} s/image mean", timings.mean_seconds_per_image());
    }
    if !failed.is_empty() && !args.keep_going {
        anyhow::bail!("{} image(s) failed (use --keep-going to accept)", failed.len());
    }
    Ok(())
}
