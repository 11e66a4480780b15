use rand::Rng;

use crate::geometry::iou;
use crate::imaging::ImageBuffer;
use crate::model::{Annotation, BBox, DamageClass};

use super::Sample;

/// Placement attempts per patch before it is skipped.
pub const PASTE_TRIES: usize = 30;

/// Pastes each labeled patch at a uniformly drawn position whose box overlaps every
/// existing and previously pasted box with IoU below `max_iou`.
pub fn paste_in<R: Rng + ?Sized>(
    dst: &Sample,
    patches: &[(ImageBuffer, DamageClass)],
    rng: &mut R,
    max_iou: f64,
) -> Sample {
    let (mut img, mut anns) = dst.clone();
    for (patch, cls) in patches {
        if patch.width == 0 || patch.height == 0 || patch.width > img.width || patch.height > img.height {
            continue;
        }
        let (span_x, span_y) = (img.width - patch.width, img.height - patch.height);
        for _ in 0..PASTE_TRIES {
            let x = rng.random_range(0..=span_x);
            let y = rng.random_range(0..=span_y);
            let b = BBox::new(
                x as f64,
                y as f64,
                (x + patch.width) as f64,
                (y + patch.height) as f64,
            );
            if anns.iter().all(|a| iou(&a.bbox, &b) < max_iou) {
                img.paste(patch, x as i64, y as i64);
                anns.push(Annotation::new(*cls, b));
                break;
            }
        }
    }
    (img, anns)
}
