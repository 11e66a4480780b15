use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::annot_io::DatasetManifest;
use crate::error::{Error, Result};
use crate::model::PipelineConfig;

use super::batching::SizeTag;
use super::pipeline::{run_pipeline, Backends, RunOptions};
use super::source::ImageSource;

/// Wall-clock milliseconds spent on one image, per stage. Batch inference time is
/// shared equally between the batch members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTiming {
    pub image_id: String,
    pub tag: SizeTag,
    pub preprocess_ms: f64,
    pub inference_ms: f64,
    pub postprocess_ms: f64,
    pub total_ms: f64,
}

impl ImageTiming {
    pub fn new(image_id: impl Into<String>, tag: SizeTag, preprocess_ms: f64, inference_ms: f64, postprocess_ms: f64) -> Self {
        let (p, i, q) = (preprocess_ms.max(0.0), inference_ms.max(0.0), postprocess_ms.max(0.0));
        Self {
            image_id: image_id.into(),
            tag,
            preprocess_ms: p,
            inference_ms: i,
            postprocess_ms: q,
            total_ms: p + i + q,
        }
    }
}

/// Timings of one pipeline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    /// In image-id order.
    pub images: Vec<ImageTiming>,
    pub wall_seconds: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        (s[m - 1] + s[m]) / 2.0
    }
}

impl LatencyReport {
    fn per_image_seconds(&self) -> Vec<f64> {
        self.images.iter().map(|t| t.total_ms / 1000.0).collect()
    }

    pub fn mean_seconds_per_image(&self) -> f64 {
        mean(&self.per_image_seconds())
    }

    pub fn median_seconds_per_image(&self) -> f64 {
        median(&self.per_image_seconds())
    }

    pub fn mean_inference_ms(&self) -> f64 {
        mean(&self.images.iter().map(|t| t.inference_ms).collect::<Vec<_>>())
    }

    /// Images per wall-clock second.
    pub fn throughput(&self) -> f64 {
        if self.wall_seconds > 0.0 {
            self.images.len() as f64 / self.wall_seconds
        } else {
            0.0
        }
    }

    pub fn to_csv(&self, no_timing: bool) -> String {
        MeasureReport {
            runs: vec![self.clone()],
        }
        .to_csv(no_timing)
    }
}

/// Repeated runs of the same workload.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub runs: Vec<LatencyReport>,
}

impl MeasureReport {
    fn all_seconds(&self) -> Vec<f64> {
        self.runs.iter().flat_map(|r| r.per_image_seconds()).collect()
    }

    pub fn mean_seconds_per_image(&self) -> f64 {
        mean(&self.all_seconds())
    }

    pub fn median_seconds_per_image(&self) -> f64 {
        median(&self.all_seconds())
    }

    pub fn total_seconds(&self) -> f64 {
        self.runs.iter().map(|r| r.wall_seconds).sum()
    }

    /// Header, one `image` row per image and run, one `run` aggregate row per run and
    /// a final `all` row. With `no_timing` every timing cell is left empty so the
    /// output only depends on the workload.
    pub fn to_csv(&self, no_timing: bool) -> String {
        let mut out = String::from(
            "kind,run,image_id,tag,preprocess_ms,inference_ms,postprocess_ms,total_ms,mean_s_per_image,median_s_per_image,throughput_ips\n",
        );
        let num = |v: f64| if no_timing { String::new() } else { format!("{v:.6}") };
        for (r, run) in self.runs.iter().enumerate() {
            for t in &run.images {
                let _ = writeln!(
                    out,
                    "image,{r},{},{},{},{},{},{},,,",
                    t.image_id,
                    t.tag.as_str(),
                    num(t.preprocess_ms),
                    num(t.inference_ms),
                    num(t.postprocess_ms),
                    num(t.total_ms)
                );
            }
        }
        for (r, run) in self.runs.iter().enumerate() {
            let _ = writeln!(
                out,
                "run,{r},,,,,,{},{},{},{}",
                num(run.wall_seconds * 1000.0),
                num(run.mean_seconds_per_image()),
                num(run.median_seconds_per_image()),
                num(run.throughput())
            );
        }
        let total = self.total_seconds();
        let n: usize = self.runs.iter().map(|r| r.images.len()).sum();
        let _ = writeln!(
            out,
            "all,{},,,,,,{},{},{},{}",
            self.runs.len(),
            num(total * 1000.0),
            num(self.mean_seconds_per_image()),
            num(self.median_seconds_per_image()),
            num(if total > 0.0 { n as f64 / total } else { 0.0 })
        );
        out
    }
}

/// Runs the whole pipeline `repetitions` times and collects the timings.
pub fn measure(
    manifest: &DatasetManifest,
    source: &dyn ImageSource,
    backends: &Backends,
    cfg: &PipelineConfig,
    opts: &RunOptions,
    repetitions: usize,
) -> Result<MeasureReport> {
    if repetitions == 0 {
        return Err(Error::Precondition("repetitions must be at least 1".into()));
    }
    let runs = (0..repetitions)
        .map(|_| run_pipeline(manifest, source, backends, cfg, opts).map(|o| o.latency))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureReport { runs })
}
