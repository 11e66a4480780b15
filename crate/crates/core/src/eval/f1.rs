use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{DamageClass, Detection};

use super::{match_detections, GroundTruth, IOU_MATCH};

/// How per-class counts combine into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Pool TP/FP/FN over all images and classes.
    #[default]
    Micro,
    /// Average the per-class scores.
    Macro,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct F1Score {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
}

/// Precision and recall are 0 when their denominators are, and so is F1 when P + R = 0.
pub fn f1_from_counts(tp: usize, fp: usize, fn_count: usize) -> F1Score {
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_count);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    F1Score {
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_count,
    }
}

fn classes_of(preds: &[Detection], gts: &[GroundTruth]) -> BTreeSet<DamageClass> {
    gts.iter().map(|g| g.cls).chain(preds.iter().map(|p| p.cls)).collect()
}

fn macro_mean(scores: &[F1Score]) -> F1Score {
    let n = scores.len().max(1) as f64;
    F1Score {
        precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
        recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
        f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
        tp: scores.iter().map(|s| s.tp).sum(),
        fp: scores.iter().map(|s| s.fp).sum(),
        fn_count: scores.iter().map(|s| s.fn_count).sum(),
    }
}

/// Per-class scores over the classes seen in either ground truth or predictions.
pub fn per_class_f1(
    preds: &[Detection],
    gts: &[GroundTruth],
    conf_thresh: f64,
) -> Vec<(DamageClass, F1Score)> {
    let kept: Vec<Detection> = preds
        .iter()
        .filter(|p| p.confidence >= conf_thresh)
        .cloned()
        .collect();
    let m = match_detections(&kept, gts, IOU_MATCH);
    classes_of(preds, gts)
        .into_iter()
        .map(|c| {
            let tp = m.predictions.iter().filter(|p| p.cls == c && p.is_tp()).count();
            let n_pred = m.predictions.iter().filter(|p| p.cls == c).count();
            let n_gt = gts.iter().filter(|g| g.cls == c).count();
            (c, f1_from_counts(tp, n_pred - tp, n_gt - tp))
        })
        .collect()
}

/// Precision, recall and F1 counting only predictions with confidence >= `conf_thresh`.
pub fn f1_at(
    preds: &[Detection],
    gts: &[GroundTruth],
    conf_thresh: f64,
    aggregation: Aggregation,
) -> F1Score {
    match aggregation {
        Aggregation::Micro => {
            let kept: Vec<Detection> = preds
                .iter()
                .filter(|p| p.confidence >= conf_thresh)
                .cloned()
                .collect();
            let m = match_detections(&kept, gts, IOU_MATCH);
            f1_from_counts(m.tp(), m.fp(), m.fn_count())
        }
        Aggregation::Macro => {
            let per: Vec<F1Score> = per_class_f1(preds, gts, conf_thresh)
                .into_iter()
                .map(|(_, s)| s)
                .collect();
            macro_mean(&per)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub best_conf: f64,
    pub best_f1: f64,
    /// `(threshold, f1)` for every grid point.
    pub curve: Vec<(f64, f64)>,
}

/// Evaluates F1 on the grid `i / n` for `i = 0..=n`, `n = round(1 / grid_step)`,
/// and returns the best point, preferring the lowest threshold on ties.
///
/// Greedy matching in confidence order means the matches among predictions above a
/// threshold are exactly the matches of the full run restricted to them, so one
/// matching pass serves every grid point.
pub fn best_f1_sweep(
    preds: &[Detection],
    gts: &[GroundTruth],
    grid_step: f64,
    aggregation: Aggregation,
) -> SweepResult {
    let n = (1.0 / grid_step).round().max(1.0) as usize;
    let m = match_detections(preds, gts, IOU_MATCH);
    let classes: Vec<DamageClass> = classes_of(preds, gts).into_iter().collect();
    let n_gt: Vec<usize> = classes
        .iter()
        .map(|&c| gts.iter().filter(|g| g.cls == c).count())
        .collect();

    // prefix[k][j] = (tp, predictions) of class k among the first j predictions.
    let mut prefix: Vec<Vec<(usize, usize)>> = vec![vec![(0, 0)]; classes.len()];
    for p in &m.predictions {
        for (k, &c) in classes.iter().enumerate() {
            let (tp, cnt) = *prefix[k].last().unwrap();
            let next = if p.cls == c {
                (tp + p.is_tp() as usize, cnt + 1)
            } else {
                (tp, cnt)
            };
            prefix[k].push(next);
        }
    }
    let confs: Vec<f64> = m.predictions.iter().map(|p| p.confidence).collect();

    let mut curve = Vec::with_capacity(n + 1);
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=n {
        let t = i as f64 / n as f64;
        // confidences are sorted descending
        let len = confs.partition_point(|&c| c >= t);
        let per: Vec<F1Score> = classes
            .iter()
            .enumerate()
            .map(|(k, _)| {
                let (tp, cnt) = prefix[k][len];
                f1_from_counts(tp, cnt - tp, n_gt[k] - tp)
            })
            .collect();
        let f1 = match aggregation {
            Aggregation::Micro => {
                let tp: usize = per.iter().map(|s| s.tp).sum();
                let fp: usize = per.iter().map(|s| s.fp).sum();
                let fn_count: usize = gts.len() - tp;
                f1_from_counts(tp, fp, fn_count).f1
            }
            Aggregation::Macro => macro_mean(&per).f1,
        };
        if f1 > best.1 {
            best = (t, f1);
        }
        curve.push((t, f1));
    }
    SweepResult {
        best_conf: best.0,
        best_f1: best.1.max(0.0),
        curve,
    }
}
