use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annot_io::DatasetManifest;
use crate::error::{Error, Result};
use crate::eval::{detection_order, ensemble_fuse};
use crate::geometry::{is_large, remap_to_original};
use crate::imaging::ImageBuffer;
use crate::model::{validate_config, Detection, DetectionFrame, ImageRecord, PipelineConfig};

use super::backend::{ModelBackend, RawDetection};
use super::batching::{plan_batches, BatchPlan, SizeTag};
use super::latency::{ImageTiming, LatencyReport};
use super::preprocess::{preprocess, PreparedImage, View};
use super::source::ImageSource;

/// Models per dispatch path. Normal images run through every normal model and the
/// results are fused; large images use only the first large model.
#[derive(Clone, Default)]
pub struct Backends {
    pub normal: Vec<Arc<dyn ModelBackend>>,
    pub large: Vec<Arc<dyn ModelBackend>>,
}

impl Backends {
    pub fn new(normal: Vec<Arc<dyn ModelBackend>>, large: Vec<Arc<dyn ModelBackend>>) -> Self {
        Self { normal, large }
    }

    fn for_tag(&self, tag: SizeTag) -> &[Arc<dyn ModelBackend>] {
        match tag {
            SizeTag::Normal => &self.normal,
            SizeTag::Large => &self.large[..self.large.len().min(1)],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Worker threads; 0 uses every available core.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageResult {
    pub image_id: String,
    pub tag: SizeTag,
    /// Original frame, clamped, in detection order.
    pub detections: Vec<Detection>,
    /// Set when the image could not be processed; detections are then empty.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
    pub timing: ImageTiming,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub plan: BatchPlan,
    /// In image-id order.
    pub results: Vec<ImageResult>,
    pub latency: LatencyReport,
}

impl PipelineOutput {
    pub fn detections(&self) -> Vec<Detection> {
        self.results.iter().flat_map(|r| r.detections.iter().cloned()).collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ImageResult> {
        self.results.iter().filter(|r| r.failure.is_some())
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

/// One `predict` call with the output-count contract checked.
fn predict_checked(backend: &dyn ModelBackend, batch: &[PreparedImage]) -> std::result::Result<Vec<Vec<RawDetection>>, String> {
    let out = backend.predict(batch).map_err(|e| e.to_string())?;
    if out.len() != batch.len() {
        return Err(format!("returned {} outputs for {} inputs", out.len(), batch.len()));
    }
    Ok(out)
}

/// Runs a whole batch; if the call fails, every image is retried alone so a bad
/// input only takes itself down.
fn predict_isolated(backend: &dyn ModelBackend, batch: &[PreparedImage]) -> Vec<std::result::Result<Vec<RawDetection>, String>> {
    if batch.is_empty() {
        return Vec::new();
    }
    match predict_checked(backend, batch) {
        Ok(out) => out.into_iter().map(Ok).collect(),
        Err(_) if batch.len() > 1 => batch
            .iter()
            .map(|p| predict_checked(backend, std::slice::from_ref(p)).map(|mut v| v.remove(0)))
            .collect(),
        Err(e) => vec![Err(e)],
    }
}

type ViewOutputs = Vec<(View, Vec<RawDetection>)>;

/// Per image, the raw detections of every view (identity only without TTA).
fn infer_views(
    backend: &dyn ModelBackend,
    inputs: &[PreparedImage],
    tta: bool,
) -> Vec<std::result::Result<ViewOutputs, String>> {
    let mut per_image: Vec<std::result::Result<ViewOutputs, String>> = inputs.iter().map(|_| Ok(Vec::new())).collect();
    let Some(first) = inputs.first() else {
        return per_image;
    };
    let view_count = if tta { View::tta_set(first.transform.out).len() } else { 1 };
    for v in 0..view_count {
        let batch: Vec<PreparedImage> = if v == 0 {
            inputs.to_vec()
        } else {
            inputs
                .par_iter()
                .map(|p| p.with_view(View::tta_set(p.transform.out)[v]))
                .collect()
        };
        for ((slot, p), res) in per_image.iter_mut().zip(&batch).zip(predict_isolated(backend, &batch)) {
            match (slot.as_mut(), res) {
                (Ok(views), Ok(raw)) => views.push((p.view, raw)),
                (Ok(_), Err(e)) => *slot = Err(format!("backend `{}`: {e}", backend.name())),
                (Err(_), _) => {}
            }
        }
    }
    per_image
}

/// Undoes the view and the frame transform, clamps to the image and drops boxes
/// that collapse to zero area or carry an invalid confidence.
fn to_original(prepared: &PreparedImage, view: &View, raws: &[RawDetection]) -> Vec<Detection> {
    let t = &prepared.transform;
    let (w, h) = t.original;
    raws.iter()
        .filter(|r| r.confidence.is_finite() && (0.0..=1.0).contains(&r.confidence))
        .filter_map(|r| {
            let b = view.inverse_box(&r.bbox).normalized();
            let d = match t.crop {
                Some(region) => {
                    let cropped = Detection::new(prepared.image_id.clone(), r.cls, t.unscale_box(&b), r.confidence, DetectionFrame::Cropped);
                    remap_to_original(&cropped, &region, t.original).ok()?.detection
                }
                None => Detection::new(
                    prepared.image_id.clone(),
                    r.cls,
                    t.inverse_box(&b).clamp_to(w as f64, h as f64),
                    r.confidence,
                    DetectionFrame::Original,
                ),
            };
            (d.bbox.area() > 0.0 && d.bbox.is_finite()).then_some(d)
        })
        .collect()
}

fn fuse_lists(mut lists: Vec<Vec<Detection>>, iou: f64) -> Vec<Detection> {
    if lists.len() == 1 {
        let mut only = lists.pop().unwrap_or_default();
        only.sort_by(detection_order);
        only
    } else {
        ensemble_fuse(&lists, iou)
    }
}

/// Runs one backend on the identity, flipped and scaled views of an image and fuses
/// the de-transformed boxes. No confidence filter is applied.
pub fn tta_run(
    record: &ImageRecord,
    pixels: Option<&ImageBuffer>,
    backend: &dyn ModelBackend,
    cfg: &PipelineConfig,
) -> Result<Vec<Detection>> {
    if !cfg.tta_enabled {
        return Err(Error::Precondition("tta_run needs tta_enabled".into()));
    }
    let large = is_large(record.dims(), &cfg.large_predicate);
    let prepared = preprocess(record, pixels, large, cfg, backend.input_size());
    let views = infer_views(backend, std::slice::from_ref(&prepared), true)
        .pop()
        .unwrap_or_else(|| Ok(Vec::new()))
        .map_err(|message| Error::Backend {
            backend: backend.name().to_string(),
            message,
        })?;
    let lists = views.iter().map(|(v, raw)| to_original(&prepared, v, raw)).collect();
    Ok(fuse_lists(lists, cfg.nms_iou))
}

struct Prepared {
    inputs: std::result::Result<Vec<PreparedImage>, String>,
    warnings: Vec<String>,
    ms: f64,
}

fn check_inputs(manifest: &DatasetManifest, plan: &BatchPlan, backends: &Backends, cfg: &PipelineConfig) -> Result<()> {
    let problems = validate_config(cfg);
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut seen = HashSet::new();
    if let Some(dup) = manifest.images.iter().find(|r| !seen.insert(r.id.as_str())) {
        return Err(Error::Precondition(format!("duplicate image id `{}`", dup.id)));
    }
    for tag in [SizeTag::Normal, SizeTag::Large] {
        if !plan.sizes(tag).is_empty() && backends.for_tag(tag).is_empty() {
            return Err(Error::Precondition(format!("no backend for the {} path", tag.as_str())));
        }
        if let Some(b) = backends.for_tag(tag).iter().find(|b| b.input_size() == 0) {
            return Err(Error::Precondition(format!("backend `{}` has input size 0", b.name())));
        }
    }
    Ok(())
}

/// Plans batches, preprocesses, runs every backend batch by batch and maps the
/// results back to the original frames. Output does not depend on batch sizes,
/// manifest order or worker count when the backends are deterministic.
pub fn run_pipeline(
    manifest: &DatasetManifest,
    source: &dyn ImageSource,
    backends: &Backends,
    cfg: &PipelineConfig,
    opts: &RunOptions,
) -> Result<PipelineOutput> {
    let plan = plan_batches(manifest, cfg);
    check_inputs(manifest, &plan, backends, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;

    let wall = Instant::now();
    let mut results = pool.install(|| {
        let mut results = Vec::with_capacity(plan.image_count());
        for batch in &plan.batches {
            let models = backends.for_tag(batch.tag);
            let records: Vec<&ImageRecord> = batch
                .image_ids
                .iter()
                .map(|id| manifest.get(id).expect("planned ids come from the manifest"))
                .collect();
            let large = batch.tag == SizeTag::Large;

            let prepared: Vec<Prepared> = records
                .par_iter()
                .map(|rec| {
                    let t = Instant::now();
                    let mut warnings = Vec::new();
                    let inputs = source.load(rec).map_err(|e| format!("load: {e}")).map(|px| {
                        models
                            .iter()
                            .map(|m| {
                                let p = preprocess(rec, px.as_ref(), large, cfg, m.input_size());
                                warnings.extend(p.warnings.iter().cloned());
                                p
                            })
                            .collect::<Vec<_>>()
                    });
                    warnings.dedup();
                    Prepared { inputs, warnings, ms: ms_since(t) }
                })
                .collect();

            let ok: Vec<usize> = (0..prepared.len()).filter(|&i| prepared[i].inputs.is_ok()).collect();
            let mut inference_ms = vec![0.0; prepared.len()];
            // outputs[k][j]: model k on the j-th loadable image
            let mut outputs = Vec::with_capacity(models.len());
            for (k, model) in models.iter().enumerate() {
                let inputs: Vec<PreparedImage> = ok
                    .iter()
                    .map(|&i| prepared[i].inputs.as_ref().map(|v| v[k].clone()).expect("filtered"))
                    .collect();
                let t = Instant::now();
                let out = infer_views(model.as_ref(), &inputs, cfg.tta_enabled);
                let share = if ok.is_empty() { 0.0 } else { ms_since(t) / ok.len() as f64 };
                for &i in &ok {
                    inference_ms[i] += share;
                }
                outputs.push(out);
            }

            let conf = if large { cfg.conf_large } else { cfg.conf_normal };
            let batch_results: Vec<ImageResult> = (0..prepared.len())
                .into_par_iter()
                .map(|i| {
                    let t = Instant::now();
                    let p = &prepared[i];
                    let mut failure = p.inputs.as_ref().err().cloned();
                    let mut detections = Vec::new();
                    if let (Ok(inputs), Some(j)) = (&p.inputs, ok.iter().position(|&x| x == i)) {
                        let mut lists = Vec::new();
                        for (k, input) in inputs.iter().enumerate() {
                            match &outputs[k][j] {
                                Ok(views) => lists.extend(views.iter().map(|(v, raw)| to_original(input, v, raw))),
                                Err(e) => {
                                    failure.get_or_insert_with(|| e.clone());
                                }
                            }
                        }
                        if failure.is_none() {
                            detections = fuse_lists(lists, cfg.nms_iou);
                            detections.retain(|d| d.confidence >= conf);
                        }
                    }
                    let id = records[i].id.clone();
                    ImageResult {
                        timing: ImageTiming::new(id.clone(), batch.tag, p.ms, inference_ms[i], ms_since(t)),
                        image_id: id,
                        tag: batch.tag,
                        detections,
                        failure,
                        warnings: p.warnings.clone(),
                    }
                })
                .collect();
            results.extend(batch_results);
        }
        results
    });
    let wall_seconds = wall.elapsed().as_secs_f64();
    results.sort_by(|a, b| a.image_id.cmp(&b.image_id));
    for r in &results {
        for w in &r.warnings {
            log::warn!("{w}");
        }
        if let Some(f) = &r.failure {
            log::warn!("{}: {f}", r.image_id);
        }
    }
    let latency = LatencyReport {
        images: results.iter().map(|r| r.timing.clone()).collect(),
        wall_seconds,
    };
    Ok(PipelineOutput { plan, results, latency })
}
