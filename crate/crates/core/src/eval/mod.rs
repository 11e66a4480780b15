//! Detection evaluation at IoU 0.5: NMS and ensemble fusion, greedy matching,
//! all-point AP, mAP@0.5 and F1 with a confidence sweep.

mod ap;
mod f1;
mod matching;
mod nms;
mod report;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::annot_io::DatasetManifest;
use crate::model::{BBox, DamageClass, Detection};

pub use ap::{average_precision, map50, pr_curve, PrCurve, PrPoint};
pub use f1::{
    best_f1_sweep, f1_at, f1_from_counts, per_class_f1, Aggregation, F1Score, SweepResult,
};
pub use matching::{match_detections, MatchResult, PredictionMatch};
pub use nms::{ensemble_fuse, nms};
pub use report::{evaluate, EvalReport};

/// IoU at or above which a prediction may match a ground-truth box.
pub const IOU_MATCH: f64 = 0.5;

/// One ground-truth box tied to its image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub image_id: String,
    pub cls: DamageClass,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

impl GroundTruth {
    pub fn new(image_id: impl Into<String>, cls: DamageClass, bbox: BBox) -> Self {
        Self {
            image_id: image_id.into(),
            cls,
            bbox,
        }
    }
}

/// Flattens every annotation of the manifest into ground-truth entries.
pub fn ground_truth_from_manifest(manifest: &DatasetManifest) -> Vec<GroundTruth> {
    manifest
        .images
        .iter()
        .flat_map(|r| {
            r.annotations
                .iter()
                .map(|a| GroundTruth::new(r.id.clone(), a.cls, a.bbox))
        })
        .collect()
}

/// Confidence descending, then `x_min`, `y_min` ascending; the remaining fields
/// only make the order total.
pub fn detection_order(a: &Detection, b: &Detection) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(a.bbox.x_min.total_cmp(&b.bbox.x_min))
        .then(a.bbox.y_min.total_cmp(&b.bbox.y_min))
        .then(a.bbox.x_max.total_cmp(&b.bbox.x_max))
        .then(a.bbox.y_max.total_cmp(&b.bbox.y_max))
        .then(a.cls.cmp(&b.cls))
        .then(a.image_id.cmp(&b.image_id))
}

/// Indices of `preds` in [`detection_order`].
pub(crate) fn sorted_indices(preds: &[Detection]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..preds.len()).collect();
    idx.sort_by(|&a, &b| detection_order(&preds[a], &preds[b]).then(a.cmp(&b)));
    idx
}
