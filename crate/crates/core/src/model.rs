//! Shared value types and pipeline configuration.
//!
//! Pixel coordinates are continuous with the origin at the top-left corner and
//! `y` growing downward. Widths are `x_max - x_min` with no inclusive `+1`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four road-damage categories, with stable internal codes `0..=3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DamageClass {
    /// Longitudinal (vertical) crack.
    D00 = 0,
    /// Transverse crack.
    D10 = 1,
    /// Alligator crack.
    D20 = 2,
    /// Pothole.
    D40 = 3,
}

impl DamageClass {
    pub const ALL: [DamageClass; 4] = [
        DamageClass::D00,
        DamageClass::D10,
        DamageClass::D20,
        DamageClass::D40,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(DamageClass::D00),
            1 => Some(DamageClass::D10),
            2 => Some(DamageClass::D20),
            3 => Some(DamageClass::D40),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DamageClass::D00 => "D00",
            DamageClass::D10 => "D10",
            DamageClass::D20 => "D20",
            DamageClass::D40 => "D40",
        }
    }
}

impl fmt::Display for DamageClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DamageClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "D00" => Ok(DamageClass::D00),
            "D10" => Ok(DamageClass::D10),
            "D20" => Ok(DamageClass::D20),
            "D40" => Ok(DamageClass::D40),
            other => Err(Error::UnknownClass(other.to_string())),
        }
    }
}

/// Axis-aligned box in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    /// Swaps inverted coordinates so that `min <= max` on both axes.
    pub fn normalized(self) -> Self {
        Self {
            x_min: self.x_min.min(self.x_max),
            y_min: self.y_min.min(self.y_max),
            x_max: self.x_min.max(self.x_max),
            y_max: self.y_min.max(self.y_max),
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn is_valid(&self) -> bool {
        self.x_min <= self.x_max && self.y_min <= self.y_max
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox::new(
            self.x_min.max(other.x_min),
            self.y_min.max(other.y_min),
            self.x_max.min(other.x_max),
            self.y_max.min(other.y_max),
        );
        b.is_valid().then_some(b)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> BBox {
        BBox::new(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)
    }

    /// Clamps every coordinate into `[0, width] x [0, height]`.
    pub fn clamp_to(&self, width: f64, height: f64) -> BBox {
        BBox::new(
            self.x_min.clamp(0.0, width),
            self.y_min.clamp(0.0, height),
            self.x_max.clamp(0.0, width),
            self.y_max.clamp(0.0, height),
        )
    }

    pub fn is_finite(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max].iter().all(|v| v.is_finite())
    }

    pub fn is_within(&self, width: f64, height: f64) -> bool {
        self.is_valid()
            && self.x_min >= 0.0
            && self.y_min >= 0.0
            && self.x_max <= width
            && self.y_max <= height
    }
}

/// One damage label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub cls: DamageClass,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

impl Annotation {
    pub fn new(cls: DamageClass, bbox: BBox) -> Self {
        Self { cls, bbox }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    #[default]
    Unassigned,
}

/// Image metadata: dimensions, provenance folder and labels. No pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageRecord {
    pub id: String,
    pub folder: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub split: Split,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

impl ImageRecord {
    pub fn new(id: impl Into<String>, folder: impl Into<String>, width: u32, height: u32) -> Self {
        Self {
            id: id.into(),
            folder: folder.into(),
            width,
            height,
            split: Split::Unassigned,
            annotations: Vec::new(),
        }
    }

    pub fn with_annotations(mut self, annotations: Vec<Annotation>) -> Self {
        self.annotations = annotations;
        self
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Checks positive dimensions and in-bounds, non-inverted annotation boxes.
    pub fn is_consistent(&self) -> bool {
        self.width > 0
            && self.height > 0
            && self
                .annotations
                .iter()
                .all(|a| a.bbox.is_within(self.width as f64, self.height as f64))
    }
}

/// Coordinate frame a detection box is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionFrame {
    Original,
    Cropped,
    Letterboxed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub cls: DamageClass,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub confidence: f64,
    pub image_id: String,
    pub frame: DetectionFrame,
}

impl Detection {
    pub fn new(
        image_id: impl Into<String>,
        cls: DamageClass,
        bbox: BBox,
        confidence: f64,
        frame: DetectionFrame,
    ) -> Self {
        Self {
            cls,
            bbox,
            confidence,
            image_id: image_id.into(),
            frame,
        }
    }
}

/// Strict-greater thresholds an image must exceed on both axes to count as large.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LargePredicate {
    pub min_width: u32,
    pub min_height: u32,
}

impl Default for LargePredicate {
    fn default() -> Self {
        Self {
            min_width: 1824,
            min_height: 1824,
        }
    }
}

/// Every tunable of the preparation and inference pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub crop_size: u32,
    pub large_predicate: LargePredicate,
    pub batch_large: usize,
    pub batch_normal: usize,
    pub conf_normal: f64,
    pub conf_large: f64,
    pub nms_iou: f64,
    pub tta_enabled: bool,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            crop_size: 1824,
            large_predicate: LargePredicate::default(),
            batch_large: 12,
            batch_normal: 24,
            conf_normal: 0.50,
            conf_large: 0.35,
            nms_iou: 0.45,
            tta_enabled: false,
            seed: 0,
        }
    }
}

fn open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Returns one description per violated rule; empty when the config is valid.
pub fn validate_config(cfg: &PipelineConfig) -> Vec<String> {
    let mut violations = Vec::new();
    if cfg.crop_size == 0 {
        violations.push("crop_size must be positive".to_string());
    } else if !cfg.crop_size.is_multiple_of(32) {
        violations.push("crop_size not multiple of 32".to_string());
    }
    if cfg.batch_large == 0 {
        violations.push("batch_large must be positive".to_string());
    }
    if cfg.batch_normal == 0 {
        violations.push("batch_normal must be positive".to_string());
    }
    if !open_unit(cfg.conf_normal) {
        violations.push("conf_normal out of (0,1)".to_string());
    }
    if !open_unit(cfg.conf_large) {
        violations.push("conf_large out of (0,1)".to_string());
    }
    if !open_unit(cfg.nms_iou) {
        violations.push("nms_iou out of (0,1)".to_string());
    }
    violations
}
