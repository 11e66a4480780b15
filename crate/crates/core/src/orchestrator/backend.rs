use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BBox, DamageClass};
use crate::seeding::image_rng;

use super::PreparedImage;

/// A detection in the frame of the image handed to the backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawDetection {
    pub cls: DamageClass,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct BackendError(pub String);

/// A detector that consumes prepared images and returns raw detections per image.
pub trait ModelBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Square side length the backend expects its inputs resized to.
    fn input_size(&self) -> u32;

    fn is_deterministic(&self) -> bool {
        true
    }

    /// One detection list per input, in input order.
    fn predict(&self, batch: &[PreparedImage]) -> Result<Vec<Vec<RawDetection>>, BackendError>;
}

/// Deterministic test double.
///
/// Detections for an image come from the explicit `rules` table when present,
/// otherwise from a generator seeded with `(seed, image id)`. They are defined in
/// the un-augmented prepared frame and carried through the test-time view of each
/// input, so the stub behaves like a perfectly flip/scale-equivariant model.
#[derive(Debug, Clone)]
pub struct StubBackend {
    pub name: String,
    pub input_size: u32,
    pub seed: u64,
    pub rules: BTreeMap<String, Vec<RawDetection>>,
    /// Generate detections for images without a rule.
    pub generate: bool,
    /// Detections generated per image, inclusive upper bound.
    pub max_generated: usize,
    /// Sleep charged once per `predict` call.
    pub call_overhead: Duration,
    /// Images whose presence in a batch makes the call fail.
    pub fail_ids: BTreeSet<String>,
}

impl StubBackend {
    pub fn new(name: impl Into<String>, input_size: u32, seed: u64) -> Self {
        Self {
            name: name.into(),
            input_size,
            seed,
            rules: BTreeMap::new(),
            generate: true,
            max_generated: 4,
            call_overhead: Duration::ZERO,
            fail_ids: BTreeSet::new(),
        }
    }

    pub fn with_rule(mut self, image_id: impl Into<String>, dets: Vec<RawDetection>) -> Self {
        self.rules.insert(image_id.into(), dets);
        self
    }

    pub fn with_overhead(mut self, overhead: Duration) -> Self {
        self.call_overhead = overhead;
        self
    }

    pub fn failing_on(mut self, image_id: impl Into<String>) -> Self {
        self.fail_ids.insert(image_id.into());
        self
    }

    /// Detections in the un-augmented prepared frame of `image_id`.
    pub fn base_detections(&self, image_id: &str, frame: (u32, u32)) -> Vec<RawDetection> {
        if let Some(d) = self.rules.get(image_id) {
            return d.clone();
        }
        if !self.generate {
            return Vec::new();
        }
        let mut rng = image_rng(self.seed ^ crate::seeding::stable_hash(self.name.as_bytes()), image_id);
        let (w, h) = (frame.0 as f64, frame.1 as f64);
        let n = rng.random_range(0..=self.max_generated);
        (0..n)
            .map(|_| {
                let bw = rng.random_range(0.05..0.4) * w;
                let bh = rng.random_range(0.05..0.4) * h;
                let x = rng.random_range(0.0..w - bw);
                let y = rng.random_range(0.0..h - bh);
                RawDetection {
                    cls: DamageClass::ALL[rng.random_range(0..4)],
                    bbox: BBox::new(x, y, x + bw, y + bh),
                    confidence: (rng.random_range(0.05..1.0) * 1000.0_f64).round() / 1000.0,
                }
            })
            .collect()
    }
}

impl ModelBackend for StubBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn input_size(&self) -> u32 {
        self.input_size
    }

    fn predict(&self, batch: &[PreparedImage]) -> Result<Vec<Vec<RawDetection>>, BackendError> {
        if !self.call_overhead.is_zero() {
            std::thread::sleep(self.call_overhead);
        }
        if let Some(bad) = batch.iter().find(|p| self.fail_ids.contains(&p.image_id)) {
            return Err(BackendError(format!("injected failure on `{}`", bad.image_id)));
        }
        Ok(batch
            .iter()
            .map(|p| {
                self.base_detections(&p.image_id, p.transform.out)
                    .into_iter()
                    .map(|d| RawDetection {
                        bbox: p.view.forward_box(&d.bbox),
                        ..d
                    })
                    .collect()
            })
            .collect())
    }
}
