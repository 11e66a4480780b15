//! Road-damage detection toolkit.
//!
//! The crate covers the full desk-scale workflow around a YOLO-style detector:
//!
//! - [`model`]: shared value types (`BBox`, `Annotation`, `ImageRecord`, `Detection`)
//!   and the [`PipelineConfig`] carrying every tunable of the pipeline.
//! - [`annot_io`]: PASCAL VOC / YOLO label formats, manifests, class remapping,
//!   train/val splitting and damage-type statistics.
//! - [`geometry`]: IoU, crop regions, annotation clipping and the size-dispatch predicate.
//! - [`augment`]: seeded affine / mosaic / mixup / paste-in augmentations.
//! - [`numerics`]: coordinate attention, conv + batch-norm fusion, label smoothing.
//! - [`eval`]: NMS, ensemble fusion, matching, AP / mAP@0.5 and F1.
//! - [`orchestrator`]: size-dispatched batched inference with latency instrumentation.

pub mod annot_io;
pub mod augment;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod imaging;
pub mod model;
pub mod numerics;
pub mod orchestrator;
pub mod seeding;

pub use error::{Error, Result};
pub use model::{
    validate_config, Annotation, BBox, DamageClass, Detection, DetectionFrame, ImageRecord,
    LargePredicate, PipelineConfig, Split,
};
