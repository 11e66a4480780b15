use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{DamageClass, Detection};

use super::{
    average_precision, best_f1_sweep, f1_at, map50, per_class_f1, Aggregation, F1Score,
    GroundTruth, SweepResult,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub cls: DamageClass,
    pub ground_truth: usize,
    pub predictions: usize,
    pub ap50: f64,
    pub score: F1Score,
}

/// Everything the evaluation step reports for one prediction set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub conf_thresh: f64,
    pub aggregation: Aggregation,
    pub classes: Vec<ClassRow>,
    pub map50: f64,
    pub overall: F1Score,
    pub sweep: SweepResult,
}

pub fn evaluate(
    preds: &[Detection],
    gts: &[GroundTruth],
    conf_thresh: f64,
    grid_step: f64,
    aggregation: Aggregation,
) -> EvalReport {
    let classes = per_class_f1(preds, gts, conf_thresh)
        .into_iter()
        .map(|(cls, score)| ClassRow {
            cls,
            ground_truth: gts.iter().filter(|g| g.cls == cls).count(),
            predictions: preds.iter().filter(|p| p.cls == cls).count(),
            ap50: average_precision(preds, gts, cls),
            score,
        })
        .collect();
    EvalReport {
        conf_thresh,
        aggregation,
        classes,
        map50: map50(preds, gts),
        overall: f1_at(preds, gts, conf_thresh, aggregation),
        sweep: best_f1_sweep(preds, gts, grid_step, aggregation),
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "no-gt".to_string()
    } else {
        format!("{v:.6}")
    }
}

impl EvalReport {
    /// One table: a row per class, an `overall` row (mAP in the `ap50` column),
    /// then one `sweep` row per grid threshold.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("row,class,conf,ap50,precision,recall,f1,tp,fp,fn\n");
        for r in &self.classes {
            let _ = writeln!(
                s,
                "class,{},{:.3},{},{},{},{},{},{},{}",
                r.cls,
                self.conf_thresh,
                fmt(r.ap50),
                fmt(r.score.precision),
                fmt(r.score.recall),
                fmt(r.score.f1),
                r.score.tp,
                r.score.fp,
                r.score.fn_count
            );
        }
        let o = &self.overall;
        let _ = writeln!(
            s,
            "overall,all,{:.3},{},{},{},{},{},{},{}",
            self.conf_thresh,
            fmt(self.map50),
            fmt(o.precision),
            fmt(o.recall),
            fmt(o.f1),
            o.tp,
            o.fp,
            o.fn_count
        );
        let _ = writeln!(
            s,
            "best,all,{:.3},,,,{},,,",
            self.sweep.best_conf,
            fmt(self.sweep.best_f1)
        );
        for &(t, f1) in &self.sweep.curve {
            let _ = writeln!(s, "sweep,all,{t:.3},,,,{},,,", fmt(f1));
        }
        s
    }
}
