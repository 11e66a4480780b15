use std::collections::{BTreeMap, HashMap};

use crate::geometry::iou;
use crate::model::{DamageClass, Detection};

use super::{sorted_indices, GroundTruth};

/// Outcome for one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionMatch {
    /// Index into the input prediction slice.
    pub pred: usize,
    pub cls: DamageClass,
    pub confidence: f64,
    /// Index into the ground-truth slice when this prediction is a true positive.
    pub gt: Option<usize>,
}

impl PredictionMatch {
    pub fn is_tp(&self) -> bool {
        self.gt.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatchResult {
    /// In evaluation order (confidence descending with positional tie-break).
    pub predictions: Vec<PredictionMatch>,
    pub gt_matched: Vec<bool>,
    /// Unmatched ground truth per image.
    pub false_negatives: BTreeMap<String, usize>,
}

impl MatchResult {
    pub fn tp(&self) -> usize {
        self.predictions.iter().filter(|p| p.is_tp()).count()
    }

    pub fn fp(&self) -> usize {
        self.predictions.len() - self.tp()
    }

    pub fn fn_count(&self) -> usize {
        self.gt_matched.iter().filter(|m| !**m).count()
    }
}

/// Greedy matching: in confidence order, each prediction takes the highest-IoU
/// unmatched ground truth of its image and class with IoU >= `iou_thresh`.
pub fn match_detections(preds: &[Detection], gts: &[GroundTruth], iou_thresh: f64) -> MatchResult {
    let mut pools: HashMap<(&str, DamageClass), Vec<usize>> = HashMap::new();
    for (i, g) in gts.iter().enumerate() {
        pools.entry((g.image_id.as_str(), g.cls)).or_default().push(i);
    }

    let mut gt_matched = vec![false; gts.len()];
    let mut predictions = Vec::with_capacity(preds.len());
    for pi in sorted_indices(preds) {
        let p = &preds[pi];
        let mut best: Option<(usize, f64)> = None;
        if let Some(pool) = pools.get(&(p.image_id.as_str(), p.cls)) {
            for &gi in pool {
                if gt_matched[gi] {
                    continue;
                }
                let v = iou(&p.bbox, &gts[gi].bbox);
                if v >= iou_thresh && best.is_none_or(|(_, b)| v > b) {
                    best = Some((gi, v));
                }
            }
        }
        if let Some((gi, _)) = best {
            gt_matched[gi] = true;
        }
        predictions.push(PredictionMatch {
            pred: pi,
            cls: p.cls,
            confidence: p.confidence,
            gt: best.map(|(gi, _)| gi),
        });
    }

    let mut false_negatives = BTreeMap::new();
    for (g, matched) in gts.iter().zip(&gt_matched) {
        if !matched {
            *false_negatives.entry(g.image_id.clone()).or_insert(0) += 1;
        }
    }
    MatchResult {
        predictions,
        gt_matched,
        false_negatives,
    }
}
