//! Size-dispatched batched inference.
//!
//! Images whose both sides exceed the large-image thresholds are cropped to their
//! lower-left square, run through the single large-path model and filtered at the
//! large-image confidence; every other image is letterboxed, run through each
//! normal-path model, fused and filtered at the normal confidence. All boxes come
//! back in the original image frame.

mod backend;
mod batching;
mod interchange;
mod latency;
#[cfg(feature = "onnx")]
mod onnx;
mod output;
mod pipeline;
mod preprocess;
mod source;

pub use backend::{BackendError, ModelBackend, RawDetection, StubBackend};
pub use batching::{plan_batches, Batch, BatchPlan, SizeTag};
pub use interchange::{ModelSidecar, Normalization};
pub use latency::{measure, ImageTiming, LatencyReport, MeasureReport};
#[cfg(feature = "onnx")]
pub use onnx::OnnxBackend;
pub use output::{detections_jsonl, submission_csv, submission_filename, DetectionRow};
pub use pipeline::{run_pipeline, tta_run, Backends, ImageResult, PipelineOutput, RunOptions};
pub use preprocess::{preprocess, FrameTransform, PreparedImage, View, ViewKind, TTA_SCALE};
pub use source::{DimsOnly, ImageSource, PpmDirectory};
