use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{DamageClass, Detection};

use super::{match_detections, GroundTruth, MatchResult, IOU_MATCH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Cumulative precision/recall after each prediction in evaluation order.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
}

pub fn pr_curve(matched: &MatchResult, n_gt: usize) -> PrCurve {
    let mut tp = 0usize;
    let points = matched
        .predictions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            tp += p.is_tp() as usize;
            PrPoint {
                confidence: p.confidence,
                precision: tp as f64 / (i + 1) as f64,
                recall: if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 },
            }
        })
        .collect();
    PrCurve { points }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    /// `num / den` for integers below 2^53.
    fn ratio(num: u64, den: u64) -> Self {
        let (a, b) = (num as f64, den as f64);
        let q = a / b;
        let r = (-q).mul_add(b, a);
        Self::two_sum(q, r / b)
    }

    fn scale(self, k: u64) -> Self {
        let k = k as f64;
        let p = self.hi * k;
        let e = self.hi.mul_add(k, -p);
        Self::two_sum(p, e + self.lo * k)
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::two_sum(s.hi, s.lo + self.lo + o.lo)
    }

    fn div_int(self, k: u64) -> Self {
        let d = k as f64;
        let q = self.hi / d;
        let e = (-q).mul_add(d, self.hi) + self.lo;
        Self::two_sum(q, e / d)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// All-point area under the precision envelope.
fn all_point_ap(matched: &MatchResult, n_gt: usize) -> f64 {
    if n_gt == 0 {
        return 0.0;
    }
    // (tp, predictions so far) after each prediction; precision = tp / k.
    let mut steps: Vec<(u64, u64)> = Vec::with_capacity(matched.predictions.len());
    let mut tp = 0u64;
    for (i, p) in matched.predictions.iter().enumerate() {
        tp += p.is_tp() as u64;
        steps.push((tp, i as u64 + 1));
    }
    // Envelope: best precision at this or any later point, compared exactly.
    let mut envelope = steps.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        let (a, b) = envelope[i];
        let (c, d) = envelope[i + 1];
        if (c as u128) * (b as u128) > (a as u128) * (d as u128) {
            envelope[i] = (c, d);
        }
    }
    // Area accrues only where recall steps up (a true positive).
    let mut area = DoubleDouble::ZERO;
    let mut prev_tp = 0u64;
    for (&(tp, _), &(num, den)) in steps.iter().zip(&envelope) {
        if tp > prev_tp {
            area = area.add(DoubleDouble::ratio(num, den).scale(tp - prev_tp));
            prev_tp = tp;
        }
    }
    area.div_int(n_gt as u64).value().clamp(0.0, 1.0)
}

/// Average precision for one class at IoU 0.5.
pub fn average_precision(preds: &[Detection], gts: &[GroundTruth], cls: DamageClass) -> f64 {
    let preds: Vec<Detection> = preds.iter().filter(|p| p.cls == cls).cloned().collect();
    let gts: Vec<GroundTruth> = gts.iter().filter(|g| g.cls == cls).cloned().collect();
    let matched = match_detections(&preds, &gts, IOU_MATCH);
    all_point_ap(&matched, gts.len())
}

/// Mean AP over the classes present in the ground truth; NaN when there is none.
pub fn map50(preds: &[Detection], gts: &[GroundTruth]) -> f64 {
    let classes: BTreeSet<DamageClass> = gts.iter().map(|g| g.cls).collect();
    if classes.is_empty() {
        return f64::NAN;
    }
    let sum: f64 = classes
        .iter()
        .map(|&c| average_precision(preds, gts, c))
        .sum();
    sum / classes.len() as f64
}
