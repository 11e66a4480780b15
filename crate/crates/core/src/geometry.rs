//! Coordinate transforms: IoU, crop regions, annotation clipping, label scaling
//! and the large-image predicate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Annotation, BBox, Detection, DetectionFrame, LargePredicate};

/// Intersection over union; `0` when the union is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = match a.intersection(b) {
        Some(i) => i.area(),
        None => return 0.0,
    };
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Square region of an image, in original-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CropRegion {
    pub x0: u32,
    pub y0: u32,
    pub size: u32,
}

impl CropRegion {
    pub fn bounds(&self) -> BBox {
        BBox::new(
            self.x0 as f64,
            self.y0 as f64,
            (self.x0 + self.size) as f64,
            (self.y0 + self.size) as f64,
        )
    }
}

/// Region of side `size` anchored at the bottom-left corner of the image.
pub fn lower_left_region(image_dims: (u32, u32), size: u32) -> Result<CropRegion> {
    let (width, height) = image_dims;
    if size == 0 {
        return Err(Error::Precondition("crop size must be positive".into()));
    }
    if width < size || height < size {
        return Err(Error::Precondition(format!(
            "image {width}x{height} is smaller than crop size {size}"
        )));
    }
    Ok(CropRegion {
        x0: 0,
        y0: height - size,
        size,
    })
}

/// Rule deciding whether a box that was cut by a region boundary is kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetainPolicy {
    /// Minimum clipped area as a fraction of the unclipped area.
    pub min_area_ratio: f64,
    /// Minimum side length, in pixels, of the clipped box.
    pub min_side: f64,
}

impl Default for RetainPolicy {
    fn default() -> Self {
        Self {
            min_area_ratio: 0.20,
            min_side: 2.0,
        }
    }
}

/// Result of clipping one box against a bounding region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clipped {
    Inside(BBox),
    Modified(BBox),
    Dropped,
}

/// Clips `bbox` to `bounds`. Boxes fully inside pass through untouched; cut boxes
/// go through `policy`.
pub fn clip_box(bbox: &BBox, bounds: &BBox, policy: &RetainPolicy) -> Clipped {
    if bbox.is_valid()
        && bbox.x_min >= bounds.x_min
        && bbox.y_min >= bounds.y_min
        && bbox.x_max <= bounds.x_max
        && bbox.y_max <= bounds.y_max
    {
        return Clipped::Inside(*bbox);
    }
    let Some(clipped) = bbox.intersection(bounds) else {
        return Clipped::Dropped;
    };
    let original_area = bbox.area();
    if original_area <= 0.0 || clipped.area() < policy.min_area_ratio * original_area {
        return Clipped::Dropped;
    }
    if clipped.width().min(clipped.height()) < policy.min_side {
        return Clipped::Dropped;
    }
    Clipped::Modified(clipped)
}

/// Annotations after cropping, in region-local coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClipOutcome {
    pub kept: Vec<Annotation>,
    pub dropped: usize,
    pub modified: usize,
}

pub fn crop_annotations(
    annotations: &[Annotation],
    region: &CropRegion,
    policy: &RetainPolicy,
) -> ClipOutcome {
    let bounds = region.bounds();
    let (dx, dy) = (-(region.x0 as f64), -(region.y0 as f64));
    let mut out = ClipOutcome::default();
    for ann in annotations {
        match clip_box(&ann.bbox, &bounds, policy) {
            Clipped::Inside(b) => out.kept.push(Annotation::new(ann.cls, b.translate(dx, dy))),
            Clipped::Modified(b) => {
                out.modified += 1;
                out.kept.push(Annotation::new(ann.cls, b.translate(dx, dy)));
            }
            Clipped::Dropped => out.dropped += 1,
        }
    }
    out
}

/// A detection mapped back to the original image frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Remapped {
    pub detection: Detection,
    /// The translated box left the image and had to be clamped.
    pub clamped: bool,
}

/// Translates a cropped-frame detection back by the region origin and clamps it to
/// the original image.
pub fn remap_to_original(
    d: &Detection,
    region: &CropRegion,
    image_dims: (u32, u32),
) -> Result<Remapped> {
    if d.frame != DetectionFrame::Cropped {
        return Err(Error::Precondition(format!(
            "expected a cropped-frame detection, got {:?}",
            d.frame
        )));
    }
    let moved = d.bbox.translate(region.x0 as f64, region.y0 as f64);
    let (w, h) = (image_dims.0 as f64, image_dims.1 as f64);
    let clamped_box = moved.clamp_to(w, h);
    let mut detection = d.clone();
    detection.bbox = clamped_box;
    detection.frame = DetectionFrame::Original;
    Ok(Remapped {
        detection,
        clamped: clamped_box != moved,
    })
}

/// Size a label of `box_dims` takes after resizing its image to `target`.
pub fn scaled_label_size(
    image_dims: (u32, u32),
    box_dims: (f64, f64),
    target: (u32, u32),
) -> (f64, f64) {
    (
        box_dims.0 * target.0 as f64 / image_dims.0 as f64,
        box_dims.1 * target.1 as f64 / image_dims.1 as f64,
    )
}

/// Both dimensions strictly above the thresholds.
pub fn is_large(image_dims: (u32, u32), predicate: &LargePredicate) -> bool {
    image_dims.0 > predicate.min_width && image_dims.1 > predicate.min_height
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DamageClass;
    use proptest::prelude::*;

    /// Counts covered cells on a grid of `step`-sized squares.
    fn raster_iou(a: &BBox, b: &BBox, step: f64) -> f64 {
        let x_hi = a.x_max.max(b.x_max);
        let y_hi = a.y_max.max(b.y_max);
        let (mut inter, mut union) = (0u64, 0u64);
        let mut y = a.y_min.min(b.y_min) + step / 2.0;
        while y < y_hi {
            let mut x = a.x_min.min(b.x_min) + step / 2.0;
            while x < x_hi {
                let ina = x > a.x_min && x < a.x_max && y > a.y_min && y < a.y_max;
                let inb = x > b.x_min && x < b.x_max && y > b.y_min && y < b.y_max;
                inter += (ina && inb) as u64;
                union += (ina || inb) as u64;
                x += step;
            }
            y += step;
        }
        inter as f64 / union as f64
    }

    #[test]
    fn iou_examples() {
        let a = BBox::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &BBox::new(5.0, 5.0, 6.0, 6.0)), 0.0);
        let b = BBox::new(1.0, 1.0, 3.0, 3.0);
        let oracle = raster_iou(&a, &b, 0.01);
        assert!((oracle - 1.0 / 7.0).abs() < 1e-9);
        assert!((iou(&a, &b) - oracle).abs() < 1e-12);
        let p = BBox::new(1.0, 1.0, 1.0, 1.0);
        assert_eq!(iou(&p, &p), 0.0);
    }

    #[test]
    fn lower_left_examples() {
        assert_eq!(
            lower_left_region((4040, 2041), 1824).unwrap(),
            CropRegion { x0: 0, y0: 217, size: 1824 }
        );
        assert_eq!(
            lower_left_region((1824, 1824), 1824).unwrap(),
            CropRegion { x0: 0, y0: 0, size: 1824 }
        );
        assert!(lower_left_region((640, 640), 1824).is_err());
    }

    #[test]
    fn crop_examples() {
        let region = CropRegion { x0: 0, y0: 217, size: 1824 };
        let anns = vec![
            Annotation::new(DamageClass::D00, BBox::new(100.0, 300.0, 200.0, 400.0)),
            Annotation::new(DamageClass::D10, BBox::new(2000.0, 300.0, 2100.0, 400.0)),
            Annotation::new(DamageClass::D20, BBox::new(1800.0, 300.0, 1900.0, 400.0)),
        ];
        let out = crop_annotations(&anns, &region, &RetainPolicy::default());
        assert_eq!(out.dropped, 1);
        assert_eq!(out.modified, 1);
        assert_eq!(out.kept.len(), 2);
        assert_eq!(out.kept[0].bbox, BBox::new(100.0, 83.0, 200.0, 183.0));
        assert_eq!(out.kept[1].bbox, BBox::new(1800.0, 83.0, 1824.0, 183.0));
        assert_eq!(out.kept[1].cls, DamageClass::D20);

        // 10% of the width survives: below the area ratio
        let thin = [Annotation::new(DamageClass::D00, BBox::new(1814.0, 300.0, 1914.0, 400.0))];
        assert_eq!(crop_annotations(&thin, &region, &RetainPolicy::default()).dropped, 1);
        // sliver: passes the area ratio but not the side length
        let sliver = [Annotation::new(DamageClass::D00, BBox::new(1823.0, 300.0, 1826.0, 400.0))];
        assert_eq!(crop_annotations(&sliver, &region, &RetainPolicy::default()).dropped, 1);
    }

    #[test]
    fn remap_examples() {
        let region = CropRegion { x0: 0, y0: 217, size: 1824 };
        let d = Detection::new(
            "n",
            DamageClass::D00,
            BBox::new(10.0, 20.0, 50.0, 60.0),
            0.9,
            DetectionFrame::Cropped,
        );
        let r = remap_to_original(&d, &region, (4040, 2041)).unwrap();
        assert_eq!(r.detection.bbox, BBox::new(10.0, 237.0, 50.0, 277.0));
        assert_eq!(r.detection.frame, DetectionFrame::Original);
        assert!(!r.clamped);

        let id = CropRegion { x0: 0, y0: 0, size: 640 };
        assert_eq!(remap_to_original(&d, &id, (640, 640)).unwrap().detection.bbox, d.bbox);

        let far = Detection { bbox: BBox::new(10.0, 1800.0, 50.0, 1900.0), ..d.clone() };
        let r = remap_to_original(&far, &region, (4040, 2041)).unwrap();
        assert!(r.clamped);
        assert_eq!(r.detection.bbox.y_max, 2041.0);

        let wrong = Detection { frame: DetectionFrame::Original, ..d };
        assert!(remap_to_original(&wrong, &region, (4040, 2041)).is_err());
    }

    #[test]
    fn scaled_label_examples() {
        let (w, h) = scaled_label_size((4040, 2041), (50.0, 30.0), (640, 640));
        assert!((w - 7.92).abs() < 0.005 && (h - 9.41).abs() < 0.005);
        assert_eq!((w.round(), h.round()), (8.0, 9.0));
        assert_eq!(scaled_label_size((300, 200), (50.0, 30.0), (300, 200)), (50.0, 30.0));
        assert_eq!(scaled_label_size((1280, 1280), (64.0, 64.0), (640, 640)), (32.0, 32.0));
    }

    #[test]
    fn large_predicate_examples() {
        let p = LargePredicate::default();
        assert!(is_large((4040, 2041), &p));
        assert!(!is_large((1824, 1824), &p));
        assert!(!is_large((2000, 1500), &p));
        assert!(!is_large((1825, 1824), &p));
    }

    fn arb_box(max: f64) -> impl Strategy<Value = BBox> {
        (0.0..max, 0.0..max, 0.0..max, 0.0..max)
            .prop_map(|(a, b, c, d)| BBox::new(a, b, c, d).normalized())
    }

    proptest! {
        #[test]
        fn iou_is_symmetric_and_bounded(a in arb_box(100.0), b in arb_box(100.0)) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
            if a.area() > 0.0 {
                prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn crop_then_remap_is_identity_inside(
            x in 0u32..1800, y in 0u32..1800, w in 1u32..24, h in 1u32..24,
            fx in 0.0f64..1.0, fy in 0.0f64..1.0,
        ) {
            let region = lower_left_region((4040, 2041), 1824).unwrap();
            let bbox = BBox::new(
                x as f64 + fx,
                217.0 + y as f64 + fy,
                (x + w) as f64 + fx,
                217.0 + (y + h) as f64 + fy,
            );
            let ann = Annotation::new(DamageClass::D10, bbox);
            let out = crop_annotations(&[ann], &region, &RetainPolicy::default());
            prop_assert_eq!(out.modified, 0);
            let det = Detection::new("i", ann.cls, out.kept[0].bbox, 0.5, DetectionFrame::Cropped);
            let back = remap_to_original(&det, &region, (4040, 2041)).unwrap();
            prop_assert_eq!(back.detection.bbox, bbox);
        }

        #[test]
        fn clip_outcome_conserves_count(boxes in prop::collection::vec(arb_box(3000.0), 0..40)) {
            let region = lower_left_region((4040, 2041), 1824).unwrap();
            let anns: Vec<_> = boxes.iter().map(|b| Annotation::new(DamageClass::D40, *b)).collect();
            let out = crop_annotations(&anns, &region, &RetainPolicy::default());
            prop_assert_eq!(out.kept.len() + out.dropped, anns.len());
            for k in &out.kept {
                prop_assert!(k.bbox.is_within(1824.0, 1824.0));
            }
        }

        #[test]
        fn is_large_is_monotone(w in 0u32..5000, h in 0u32..5000, dw in 0u32..500, dh in 0u32..500) {
            let p = LargePredicate::default();
            if is_large((w, h), &p) {
                prop_assert!(is_large((w + dw, h + dh), &p));
            }
        }
    }
}
