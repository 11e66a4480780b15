use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Detection, DetectionFrame};

use super::pipeline::ImageResult;

/// One line of the JSONL detections output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub image_id: String,
    pub class: String,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub confidence: f64,
}

impl DetectionRow {
    pub fn from_detection(d: &Detection) -> Result<Self> {
        if d.frame != DetectionFrame::Original {
            return Err(Error::Precondition(format!(
                "detection for `{}` is in the {:?} frame, expected original",
                d.image_id, d.frame
            )));
        }
        Ok(Self {
            image_id: d.image_id.clone(),
            class: d.cls.name().to_string(),
            x1: d.bbox.x_min,
            y1: d.bbox.y_min,
            x2: d.bbox.x_max,
            y2: d.bbox.y_max,
            confidence: d.confidence,
        })
    }
}

/// One JSON object per detection, images in the given order.
pub fn detections_jsonl(results: &[ImageResult]) -> Result<String> {
    let mut out = String::new();
    for r in results {
        for d in &r.detections {
            out.push_str(&serde_json::to_string(&DetectionRow::from_detection(d)?)?);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Image ids without an extension get `.jpg`, the dataset's image format.
pub fn submission_filename(image_id: &str) -> String {
    if image_id.contains('.') {
        image_id.to_string()
    } else {
        format!("{image_id}.jpg")
    }
}

/// Challenge-style rows: `<file>,<cls x1 y1 x2 y2> ...` with 1-based class labels
/// (D00=1 .. D40=4) and coordinates rounded to whole pixels. Every image gets a
/// row, failed or empty ones with nothing after the comma.
pub fn submission_csv(results: &[ImageResult]) -> Result<String> {
    let mut out = String::new();
    for r in results {
        let mut preds = Vec::with_capacity(r.detections.len());
        for d in &r.detections {
            let row = DetectionRow::from_detection(d)?;
            preds.push(format!(
                "{} {} {} {} {}",
                d.cls.code() + 1,
                row.x1.round() as i64,
                row.y1.round() as i64,
                row.x2.round() as i64,
                row.y2.round() as i64
            ));
        }
        let _ = writeln!(out, "{},{}", submission_filename(&r.image_id), preds.join(" "));
    }
    Ok(out)
}
