use serde::{Deserialize, Serialize};

use crate::geometry::{lower_left_region, CropRegion};
use crate::imaging::{ImageBuffer, FILL_GRAY};
use crate::model::{BBox, DetectionFrame, ImageRecord, PipelineConfig};

/// Downscale factor of the scaled test-time view.
pub const TTA_SCALE: f64 = 0.83;

/// Everything needed to map boxes between the original image and the prepared
/// backend input: `prepared = (original - crop origin) * scale + pad`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameTransform {
    pub original: (u32, u32),
    pub crop: Option<CropRegion>,
    pub scale: f64,
    pub pad: (f64, f64),
    pub out: (u32, u32),
}

impl FrameTransform {
    pub fn identity(dims: (u32, u32)) -> Self {
        Self {
            original: dims,
            crop: None,
            scale: 1.0,
            pad: (0.0, 0.0),
            out: dims,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.crop.is_none() && self.scale == 1.0 && self.pad == (0.0, 0.0) && self.out == self.original
    }

    /// Frame the prepared image lives in.
    pub fn frame(&self) -> DetectionFrame {
        if self.crop.is_some() {
            DetectionFrame::Cropped
        } else {
            DetectionFrame::Letterboxed
        }
    }

    fn origin(&self) -> (f64, f64) {
        self.crop.map_or((0.0, 0.0), |c| (c.x0 as f64, c.y0 as f64))
    }

    pub fn forward_box(&self, b: &BBox) -> BBox {
        let (ox, oy) = self.origin();
        let s = self.scale;
        BBox::new(
            (b.x_min - ox) * s + self.pad.0,
            (b.y_min - oy) * s + self.pad.1,
            (b.x_max - ox) * s + self.pad.0,
            (b.y_max - oy) * s + self.pad.1,
        )
    }

    /// Undoes padding and scaling only: the result is in the crop frame when a crop
    /// was taken, otherwise in the original frame.
    pub fn unscale_box(&self, b: &BBox) -> BBox {
        let s = self.scale;
        BBox::new(
            (b.x_min - self.pad.0) / s,
            (b.y_min - self.pad.1) / s,
            (b.x_max - self.pad.0) / s,
            (b.y_max - self.pad.1) / s,
        )
    }

    /// Full inverse into the original frame, without clamping.
    pub fn inverse_box(&self, b: &BBox) -> BBox {
        let (ox, oy) = self.origin();
        self.unscale_box(b).translate(ox, oy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Identity,
    HFlip,
    Scale,
}

/// A test-time view applied on top of the prepared image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub kind: ViewKind,
    /// Prepared-frame size the view starts from.
    pub base: (u32, u32),
    pub out: (u32, u32),
}

impl View {
    pub fn identity(base: (u32, u32)) -> Self {
        Self {
            kind: ViewKind::Identity,
            base,
            out: base,
        }
    }

    pub fn hflip(base: (u32, u32)) -> Self {
        Self {
            kind: ViewKind::HFlip,
            base,
            out: base,
        }
    }

    pub fn scaled(base: (u32, u32), factor: f64) -> Self {
        let out = (
            ((base.0 as f64 * factor).round() as u32).max(1),
            ((base.1 as f64 * factor).round() as u32).max(1),
        );
        Self {
            kind: ViewKind::Scale,
            base,
            out,
        }
    }

    /// The three views used for test-time augmentation.
    pub fn tta_set(base: (u32, u32)) -> [View; 3] {
        [View::identity(base), View::hflip(base), View::scaled(base, TTA_SCALE)]
    }

    fn factors(&self) -> (f64, f64) {
        (
            self.out.0 as f64 / self.base.0 as f64,
            self.out.1 as f64 / self.base.1 as f64,
        )
    }

    pub fn forward_box(&self, b: &BBox) -> BBox {
        match self.kind {
            ViewKind::Identity => *b,
            ViewKind::HFlip => {
                let w = self.base.0 as f64;
                BBox::new(w - b.x_max, b.y_min, w - b.x_min, b.y_max)
            }
            ViewKind::Scale => {
                let (sx, sy) = self.factors();
                BBox::new(b.x_min * sx, b.y_min * sy, b.x_max * sx, b.y_max * sy)
            }
        }
    }

    pub fn inverse_box(&self, b: &BBox) -> BBox {
        match self.kind {
            ViewKind::Identity => *b,
            ViewKind::HFlip => self.forward_box(b),
            ViewKind::Scale => {
                let (sx, sy) = self.factors();
                BBox::new(b.x_min / sx, b.y_min / sy, b.x_max / sx, b.y_max / sy)
            }
        }
    }

    pub fn apply_pixels(&self, img: &ImageBuffer) -> ImageBuffer {
        match self.kind {
            ViewKind::Identity => img.clone(),
            ViewKind::HFlip => img.flip_horizontal(),
            ViewKind::Scale => img.resize(self.out.0, self.out.1),
        }
    }
}

/// A backend input: optional pixels plus the records needed to undo every transform.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedImage {
    pub image_id: String,
    pub pixels: Option<ImageBuffer>,
    pub transform: FrameTransform,
    pub view: View,
    pub warnings: Vec<String>,
}

impl PreparedImage {
    pub fn dims(&self) -> (u32, u32) {
        self.view.out
    }

    pub fn with_view(&self, view: View) -> PreparedImage {
        PreparedImage {
            image_id: self.image_id.clone(),
            pixels: self.pixels.as_ref().map(|p| view.apply_pixels(p)),
            transform: self.transform,
            view,
            warnings: Vec::new(),
        }
    }
}

fn letterbox(dims: (u32, u32), size: u32) -> FrameTransform {
    let (w, h) = (dims.0 as f64, dims.1 as f64);
    let s = size as f64;
    let r = (s / w).min(s / h);
    let new_w = (w * r).round().min(s);
    let new_h = (h * r).round().min(s);
    FrameTransform {
        original: dims,
        crop: None,
        scale: r,
        pad: (((s - new_w) / 2.0).floor(), ((s - new_h) / 2.0).floor()),
        out: (size, size),
    }
}

/// Builds the backend input for one image.
///
/// Large images are cropped to the lower-left `crop_size` square and resized to the
/// backend size; others are letterboxed (aspect preserved, gray padding). A large
/// image smaller than the crop falls back to letterboxing with a warning.
pub fn preprocess(
    record: &ImageRecord,
    pixels: Option<&ImageBuffer>,
    is_large: bool,
    cfg: &PipelineConfig,
    input_size: u32,
) -> PreparedImage {
    let dims = record.dims();
    let mut warnings = Vec::new();
    let region = if is_large {
        match lower_left_region(dims, cfg.crop_size) {
            Ok(r) => Some(r),
            Err(e) => {
                warnings.push(format!("{}: {e}; using the normal path", record.id));
                None
            }
        }
    } else {
        None
    };

    let transform = match region {
        Some(region) => FrameTransform {
            original: dims,
            crop: Some(region),
            scale: input_size as f64 / region.size as f64,
            pad: (0.0, 0.0),
            out: (input_size, input_size),
        },
        None if dims == (input_size, input_size) => FrameTransform::identity(dims),
        None => letterbox(dims, input_size),
    };

    let prepared_pixels = pixels.map(|img| match transform.crop {
        Some(r) => img
            .crop(r.x0, r.y0, r.size, r.size)
            .map(|c| c.resize(input_size, input_size))
            .unwrap_or_else(|_| ImageBuffer::filled(input_size, input_size, FILL_GRAY)),
        None if transform.is_identity() => img.clone(),
        None => {
            let new_w = (img.width as f64 * transform.scale).round().min(input_size as f64) as u32;
            let new_h = (img.height as f64 * transform.scale).round().min(input_size as f64) as u32;
            let mut canvas = ImageBuffer::filled(input_size, input_size, FILL_GRAY);
            canvas.paste(&img.resize(new_w.max(1), new_h.max(1)), transform.pad.0 as i64, transform.pad.1 as i64);
            canvas
        }
    });

    PreparedImage {
        image_id: record.id.clone(),
        pixels: prepared_pixels,
        transform,
        view: View::identity(transform.out),
        warnings,
    }
}
