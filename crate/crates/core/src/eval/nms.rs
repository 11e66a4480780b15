use std::collections::BTreeMap;

use crate::geometry::iou;
use crate::model::{DamageClass, Detection};

use super::detection_order;

/// Greedy per-class suppression: keep the best remaining box, drop every box of the
/// same class and image whose IoU with it exceeds `iou_thresh`.
pub fn nms(dets: &[Detection], iou_thresh: f64) -> Vec<Detection> {
    let mut groups: BTreeMap<(&str, DamageClass), Vec<&Detection>> = BTreeMap::new();
    for d in dets {
        groups.entry((d.image_id.as_str(), d.cls)).or_default().push(d);
    }

    let mut kept: Vec<Detection> = Vec::with_capacity(dets.len());
    for (_, mut group) in groups {
        group.sort_by(|a, b| detection_order(a, b));
        let mut suppressed = vec![false; group.len()];
        for i in 0..group.len() {
            if suppressed[i] {
                continue;
            }
            kept.push(group[i].clone());
            for j in i + 1..group.len() {
                if !suppressed[j] && iou(&group[i].bbox, &group[j].bbox) > iou_thresh {
                    suppressed[j] = true;
                }
            }
        }
    }
    kept.sort_by(detection_order);
    kept
}

/// Concatenates every model's detections and suppresses duplicates.
pub fn ensemble_fuse(det_lists: &[Vec<Detection>], iou_thresh: f64) -> Vec<Detection> {
    let all: Vec<Detection> = det_lists.iter().flatten().cloned().collect();
    nms(&all, iou_thresh)
}
