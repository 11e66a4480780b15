use rand::Rng;

use crate::geometry::{clip_box, Clipped, RetainPolicy};
use crate::imaging::{ImageBuffer, FILL_GRAY};
use crate::model::{Annotation, BBox};

use super::{uniform, Sample};

/// Tile center on the `2S x 2S` canvas: `S + round(u * S)` per axis with
/// `u ~ U[-jitter, jitter]`, kept at least one pixel from each edge.
pub fn mosaic_center<R: Rng + ?Sized>(out_size: u32, center_jitter: f64, rng: &mut R) -> (u32, u32) {
    let s = out_size as f64;
    let j = center_jitter.clamp(0.0, 1.0);
    let mut axis = || {
        let c = s + (uniform(rng, -j, j) * s).round();
        c.clamp(1.0, 2.0 * s - 1.0) as u32
    };
    let xc = axis();
    let yc = axis();
    (xc, yc)
}

/// Quadrant `k` (top-left, top-right, bottom-left, bottom-right) as `(x0, y0, w, h)`.
fn quadrant(k: usize, size: u32, center: (u32, u32)) -> (u32, u32, u32, u32) {
    let (xc, yc) = center;
    let full = 2 * size;
    match k {
        0 => (0, 0, xc, yc),
        1 => (xc, 0, full - xc, yc),
        2 => (0, yc, xc, full - yc),
        _ => (xc, yc, full - xc, full - yc),
    }
}

/// Four images, each resized to fill its quadrant around `center` on a `2S x 2S` canvas.
pub fn mosaic_with_center(inputs: &[Sample; 4], out_size: u32, center: (u32, u32)) -> Sample {
    let full = 2 * out_size;
    let mut canvas = ImageBuffer::filled(full, full, FILL_GRAY);
    let mut anns = Vec::new();
    let policy = RetainPolicy::default();
    for (k, (img, labels)) in inputs.iter().enumerate() {
        let (x0, y0, qw, qh) = quadrant(k, out_size, center);
        if qw == 0 || qh == 0 || img.width == 0 || img.height == 0 {
            continue;
        }
        canvas.paste(&img.resize(qw, qh), x0 as i64, y0 as i64);
        let sx = qw as f64 / img.width as f64;
        let sy = qh as f64 / img.height as f64;
        let bounds = BBox::new(x0 as f64, y0 as f64, (x0 + qw) as f64, (y0 + qh) as f64);
        for a in labels {
            let b = BBox::new(
                a.bbox.x_min * sx + x0 as f64,
                a.bbox.y_min * sy + y0 as f64,
                a.bbox.x_max * sx + x0 as f64,
                a.bbox.y_max * sy + y0 as f64,
            );
            match clip_box(&b, &bounds, &policy) {
                Clipped::Inside(b) | Clipped::Modified(b) => anns.push(Annotation::new(a.cls, b)),
                Clipped::Dropped => {}
            }
        }
    }
    (canvas, anns)
}

pub fn mosaic<R: Rng + ?Sized>(
    inputs: &[Sample; 4],
    out_size: u32,
    center_jitter: f64,
    rng: &mut R,
) -> Sample {
    let center = mosaic_center(out_size, center_jitter, rng);
    mosaic_with_center(inputs, out_size, center)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DamageClass;
    use crate::seeding::image_rng;

    fn inputs(s: u32) -> [Sample; 4] {
        std::array::from_fn(|k| {
            let img = ImageBuffer::filled(s, s, 10 * (k as u8 + 1));
            let ann = Annotation::new(DamageClass::ALL[k], BBox::new(4.0, 6.0, 20.0, 30.0));
            (img, vec![ann])
        })
    }

    #[test]
    fn zero_jitter_tiles_quadrants() {
        let mut rng = image_rng(0, "m");
        assert_eq!(mosaic_center(64, 0.0, &mut rng), (64, 64));
        let (canvas, anns) = mosaic(&inputs(64), 64, 0.0, &mut image_rng(0, "m"));
        assert_eq!(canvas.dims(), (128, 128));
        assert_eq!(canvas.pixel(0, 0), [10; 3]);
        assert_eq!(canvas.pixel(127, 0), [20; 3]);
        assert_eq!(canvas.pixel(0, 127), [30; 3]);
        assert_eq!(canvas.pixel(127, 127), [40; 3]);
        let origins = [(0.0, 0.0), (64.0, 0.0), (0.0, 64.0), (64.0, 64.0)];
        for (k, (ox, oy)) in origins.iter().enumerate() {
            assert_eq!(anns[k].bbox, BBox::new(4.0, 6.0, 20.0, 30.0).translate(*ox, *oy));
            assert_eq!(anns[k].cls, DamageClass::ALL[k]);
        }
    }

    #[test]
    fn jittered_center_matches_hand_arithmetic() {
        let s = 100u32;
        let mut probe = image_rng(42, "mosaic");
        let (xc, yc) = mosaic_center(s, 0.5, &mut probe);
        assert!((50..=150).contains(&xc) && (50..=150).contains(&yc));
        let (_, anns) = mosaic(&inputs(s), s, 0.5, &mut image_rng(42, "mosaic"));
        // bottom-right quadrant: origin (xc, yc), size (200 - xc, 200 - yc), source 100x100
        let (qw, qh) = ((200 - xc) as f64, (200 - yc) as f64);
        let want = BBox::new(
            xc as f64 + 4.0 * qw / 100.0,
            yc as f64 + 6.0 * qh / 100.0,
            xc as f64 + 20.0 * qw / 100.0,
            yc as f64 + 30.0 * qh / 100.0,
        );
        let got = anns.iter().find(|a| a.cls == DamageClass::D40).unwrap().bbox;
        assert!((got.x_min - want.x_min).abs() < 1e-9);
        assert!((got.y_min - want.y_min).abs() < 1e-9);
        assert!((got.x_max - want.x_max).abs() < 1e-9);
        assert!((got.y_max - want.y_max).abs() < 1e-9);
        assert_eq!(anns.len(), 4);
        assert!(anns.iter().all(|a| a.bbox.is_within(200.0, 200.0)));
    }
}
