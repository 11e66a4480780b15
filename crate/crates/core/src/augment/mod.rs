//! Training-time augmentations with deterministic seeding: random homography
//! (scale / shear / perspective), mosaic, mixup and paste-in.
//!
//! Every operation is a pure function of its inputs and the generator passed in.
//! Per-image generators come from [`crate::seeding::image_rng`].

mod affine;
mod mixup;
mod mosaic;
mod paste;
mod pipeline;

use serde::{Deserialize, Serialize};

use crate::model::Annotation;

pub use crate::imaging::{ImageBuffer, FILL_GRAY};
pub use affine::{apply_homography, random_affine, sample_homography, Homography};
pub use mixup::mixup;
pub use mosaic::{mosaic, mosaic_center, mosaic_with_center};
pub use paste::{paste_in, PASTE_TRIES};
pub use pipeline::augment_sample;

/// An image with its labels.
pub type Sample = (ImageBuffer, Vec<Annotation>);

/// Augmentation magnitudes and probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentParams {
    /// Scale gain: factor drawn from `[1 - scale, 1 + scale]`.
    pub scale: f64,
    /// Shear, degrees: drawn from `[-shear, shear]` per axis.
    pub shear: f64,
    /// Perspective terms drawn from `[-perspective, perspective]`.
    pub perspective: f64,
    pub mosaic_p: f64,
    pub mixup_p: f64,
    pub paste_in_p: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            scale: 0.7,
            shear: 0.01,
            perspective: 0.0001,
            mosaic_p: 0.5,
            mixup_p: 0.1,
            paste_in_p: 0.05,
        }
    }
}

impl AugmentParams {
    /// No geometric change and no probabilistic operation.
    pub fn none() -> Self {
        Self {
            scale: 0.0,
            shear: 0.0,
            perspective: 0.0,
            mosaic_p: 0.0,
            mixup_p: 0.0,
            paste_in_p: 0.0,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.scale.is_nan() || self.scale < 0.0 {
            v.push("scale must be >= 0".to_string());
        }
        for (name, p) in [
            ("mosaic_p", self.mosaic_p),
            ("mixup_p", self.mixup_p),
            ("paste_in_p", self.paste_in_p),
        ] {
            if !(0.0..=1.0).contains(&p) {
                v.push(format!("{name} out of [0,1]"));
            }
        }
        v
    }
}

/// Uniform draw from `[lo, hi]`; returns `lo` exactly when the range is empty.
pub(crate) fn uniform<R: rand::Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    if hi == lo {
        lo
    } else {
        lo + (hi - lo) * u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_are_valid() {
        assert!(AugmentParams::default().validate().is_empty());
        let bad = AugmentParams {
            mixup_p: 1.5,
            scale: -1.0,
            ..Default::default()
        };
        assert_eq!(bad.validate().len(), 2);
    }
}
