use crate::error::{Error, Result};
use crate::model::{Annotation, BBox};

use super::remap::RawLabel;

/// Rendered YOLO label lines plus warnings for omitted annotations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct YoloOutput {
    pub lines: Vec<String>,
    pub warnings: Vec<String>,
}

impl YoloOutput {
    /// File contents: one line per label, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for line in &self.lines {
            s.push_str(line);
            s.push('\n');
        }
        s
    }
}

/// Normalized `cls cx cy w h` lines, six decimals each. Zero-area boxes are omitted.
pub fn write_yolo(annotations: &[Annotation], image_dims: (u32, u32)) -> YoloOutput {
    let (w, h) = (image_dims.0 as f64, image_dims.1 as f64);
    let mut out = YoloOutput::default();
    for (i, ann) in annotations.iter().enumerate() {
        let b = ann.bbox.clamp_to(w, h);
        if b.width() <= 0.0 || b.height() <= 0.0 {
            out.warnings.push(format!("annotation {i}: zero-area box omitted"));
            continue;
        }
        let cx = (b.x_min + b.x_max) / 2.0 / w;
        let cy = (b.y_min + b.y_max) / 2.0 / h;
        out.lines.push(format!(
            "{} {:.6} {:.6} {:.6} {:.6}",
            ann.cls.code(),
            cx,
            cy,
            b.width() / w,
            b.height() / h
        ));
    }
    out
}

/// Parses YOLO lines keeping the integer class code as-is.
pub fn parse_yolo_raw<S: AsRef<str>>(lines: &[S], image_dims: (u32, u32)) -> Result<Vec<RawLabel>> {
    let (w, h) = (image_dims.0 as f64, image_dims.1 as f64);
    let mut out = Vec::new();
    for (index, line) in lines.iter().enumerate() {
        let line = line.as_ref().trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::YoloLine { index, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let code: i64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad class code {:?}", fields[0])))?;
        let mut vals = [0.0f64; 4];
        for (k, name) in ["cx", "cy", "w", "h"].into_iter().enumerate() {
            let v: f64 = fields[k + 1]
                .parse()
                .map_err(|_| err(format!("{name} is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(format!("{name} out of range")));
            }
            vals[k] = v;
        }
        let [cx, cy, bw, bh] = vals;
        let bbox = BBox::new(
            (cx - bw / 2.0) * w,
            (cy - bh / 2.0) * h,
            (cx + bw / 2.0) * w,
            (cy + bh / 2.0) * h,
        )
        .clamp_to(w, h);
        out.push(RawLabel { code, bbox });
    }
    Ok(out)
}

/// Parses YOLO lines whose class codes are the internal `0..=3` codes.
pub fn parse_yolo<S: AsRef<str>>(lines: &[S], image_dims: (u32, u32)) -> Result<Vec<Annotation>> {
    let raw = parse_yolo_raw(lines, image_dims)?;
    super::remap_classes(&raw, &super::ClassRemap::identity())
}
