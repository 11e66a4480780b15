use rand::Rng;

use crate::geometry::{clip_box, Clipped, RetainPolicy};
use crate::imaging::{to_u8, ImageBuffer, FILL_GRAY};
use crate::model::{Annotation, BBox};

use super::{uniform, AugmentParams};

/// 3x3 projective transform acting on `(x, y, 1)` column vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub const IDENTITY: Homography = Homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn translation(dx: f64, dy: f64) -> Self {
        Homography([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])
    }

    pub fn scaling(s: f64) -> Self {
        Homography([[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, 1.0]])
    }

    /// Scales by `s` about `(cx, cy)`.
    pub fn scaling_about(s: f64, cx: f64, cy: f64) -> Self {
        Self::translation(cx, cy)
            .then_after(&Self::scaling(s))
            .then_after(&Self::translation(-cx, -cy))
    }

    /// Matrix product `self * rhs`: `rhs` applies first.
    pub fn then_after(&self, rhs: &Homography) -> Homography {
        let (a, b) = (&self.0, &rhs.0);
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Homography(m)
    }

    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let m = &self.0;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        (
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        )
    }

    pub fn inverse(&self) -> Option<Homography> {
        let m = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Homography(adj.map(|row| row.map(|v| v / det))))
    }

    /// Axis-aligned envelope of the four transformed corners.
    pub fn map_box(&self, b: &BBox) -> BBox {
        let pts = [
            self.apply(b.x_min, b.y_min),
            self.apply(b.x_max, b.y_min),
            self.apply(b.x_min, b.y_max),
            self.apply(b.x_max, b.y_max),
        ];
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in pts {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        BBox::new(x0, y0, x1, y1)
    }
}

/// Draws a transform centered on the image: perspective, then scale, then shear.
pub fn sample_homography<R: Rng + ?Sized>(
    params: &AugmentParams,
    width: u32,
    height: u32,
    rng: &mut R,
) -> Homography {
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let center = Homography::translation(-cx, -cy);
    let mut persp = Homography::IDENTITY;
    persp.0[2][0] = uniform(rng, -params.perspective, params.perspective);
    persp.0[2][1] = uniform(rng, -params.perspective, params.perspective);
    let scale = Homography::scaling(uniform(rng, 1.0 - params.scale, 1.0 + params.scale));
    let mut shear = Homography::IDENTITY;
    shear.0[0][1] = uniform(rng, -params.shear, params.shear).to_radians().tan();
    shear.0[1][0] = uniform(rng, -params.shear, params.shear).to_radians().tan();
    Homography::translation(cx, cy)
        .then_after(&shear)
        .then_after(&scale)
        .then_after(&persp)
        .then_after(&center)
}

/// Warps pixels (bilinear, gray fill) and labels through `h`, keeping the image size.
pub fn apply_homography(
    img: &ImageBuffer,
    annotations: &[Annotation],
    h: &Homography,
    policy: &RetainPolicy,
) -> (ImageBuffer, Vec<Annotation>) {
    let (w, hgt) = img.dims();
    let Some(inv) = h.inverse() else {
        return (ImageBuffer::filled(w, hgt, FILL_GRAY), Vec::new());
    };
    let mut out = ImageBuffer::filled(w, hgt, FILL_GRAY);
    for y in 0..hgt {
        for x in 0..w {
            let (sx, sy) = inv.apply(x as f64 + 0.5, y as f64 + 0.5);
            if !sx.is_finite() || !sy.is_finite() {
                continue;
            }
            let v = img.sample_bilinear(sx - 0.5, sy - 0.5, FILL_GRAY);
            out.put_pixel(x, y, v.map(to_u8));
        }
    }
    let bounds = BBox::new(0.0, 0.0, w as f64, hgt as f64);
    let anns = annotations
        .iter()
        .filter_map(|a| match clip_box(&h.map_box(&a.bbox), &bounds, policy) {
            Clipped::Inside(b) | Clipped::Modified(b) => Some(Annotation::new(a.cls, b)),
            Clipped::Dropped => None,
        })
        .collect();
    (out, anns)
}

pub fn random_affine<R: Rng + ?Sized>(
    img: &ImageBuffer,
    annotations: &[Annotation],
    params: &AugmentParams,
    rng: &mut R,
) -> (ImageBuffer, Vec<Annotation>) {
    let h = sample_homography(params, img.width, img.height, rng);
    apply_homography(img, annotations, &h, &RetainPolicy::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DamageClass;
    use crate::seeding::image_rng;

    fn noise(w: u32, h: u32) -> ImageBuffer {
        let data = (0..w * h * 3).map(|i| (i.wrapping_mul(2654435761) >> 13) as u8).collect();
        ImageBuffer::from_raw(w, h, data).unwrap()
    }

    #[test]
    fn zero_params_are_identity() {
        let img = noise(31, 17);
        let anns = vec![Annotation::new(DamageClass::D00, BBox::new(3.0, 4.0, 20.5, 9.0))];
        let mut rng = image_rng(3, "a");
        let h = sample_homography(&AugmentParams::none(), 31, 17, &mut rng);
        assert_eq!(h, Homography::IDENTITY);
        let (out, out_anns) = random_affine(&img, &anns, &AugmentParams::none(), &mut image_rng(3, "a"));
        assert_eq!(out, img);
        assert_eq!(out_anns, anns);
    }

    #[test]
    fn centered_half_scale() {
        // oracle: x' = 200 + 0.5 * (x - 200)
        let h = Homography::scaling_about(0.5, 200.0, 200.0);
        let img = ImageBuffer::filled(400, 400, 9);
        let anns = [Annotation::new(DamageClass::D10, BBox::new(100.0, 100.0, 200.0, 200.0))];
        let (_, out) = apply_homography(&img, &anns, &h, &RetainPolicy::default());
        assert_eq!(out[0].bbox, BBox::new(150.0, 150.0, 200.0, 200.0));
    }

    #[test]
    fn same_seed_same_output() {
        let img = noise(40, 30);
        let anns = vec![Annotation::new(DamageClass::D20, BBox::new(5.0, 5.0, 30.0, 25.0))];
        let p = AugmentParams::default();
        let a = random_affine(&img, &anns, &p, &mut image_rng(11, "img"));
        let b = random_affine(&img, &anns, &p, &mut image_rng(11, "img"));
        assert_eq!(a, b);
        for ann in &a.1 {
            assert!(ann.bbox.is_within(40.0, 30.0));
            assert_eq!(ann.cls, DamageClass::D20);
        }
    }

    #[test]
    fn inverse_round_trips() {
        let mut rng = image_rng(5, "x");
        let h = sample_homography(&AugmentParams::default(), 640, 480, &mut rng);
        let inv = h.inverse().unwrap();
        let (x, y) = inv.apply(h.apply(123.0, 45.0).0, h.apply(123.0, 45.0).1);
        assert!((x - 123.0).abs() < 1e-9 && (y - 45.0).abs() < 1e-9);
    }
}
