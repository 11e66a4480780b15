use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::imaging::ImageBuffer;
use crate::model::{Annotation, BBox, DamageClass};
use crate::seeding::image_rng;

use super::{mixup, mosaic, paste_in, random_affine, AugmentParams, Sample};

const MOSAIC_JITTER: f64 = 0.5;
const MIXUP_BETA: f64 = 8.0;
const PASTE_MAX_IOU: f64 = 0.3;

fn resize_sample(s: &Sample, width: u32, height: u32) -> Sample {
    let (img, anns) = s;
    if img.dims() == (width, height) {
        return s.clone();
    }
    let sx = width as f64 / img.width as f64;
    let sy = height as f64 / img.height as f64;
    let anns = anns
        .iter()
        .map(|a| {
            let b = a.bbox;
            Annotation::new(a.cls, BBox::new(b.x_min * sx, b.y_min * sy, b.x_max * sx, b.y_max * sy))
        })
        .collect();
    (img.resize(width, height), anns)
}

/// Full training-time chain for one image: mosaic (with three pool images), then a
/// random homography, then mixup with a pool image, then paste-in. Each
/// probabilistic stage fires with its probability from `params`. The generator is
/// derived from `(seed, image_id)`.
pub fn augment_sample(
    primary: &Sample,
    pool: &[Sample],
    patches: &[(ImageBuffer, DamageClass)],
    params: &AugmentParams,
    seed: u64,
    image_id: &str,
) -> Sample {
    let mut rng = image_rng(seed, image_id);
    let mut current = primary.clone();

    if pool.len() >= 3 && rng.random::<f64>() < params.mosaic_p {
        let size = primary.0.width.max(primary.0.height);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| pool[rng.random_range(0..pool.len())].clone();
        let inputs = [primary.clone(), pick(&mut rng), pick(&mut rng), pick(&mut rng)];
        current = mosaic(&inputs, size, MOSAIC_JITTER, &mut rng);
    }

    current = random_affine(&current.0, &current.1, params, &mut rng);

    if !pool.is_empty() && rng.random::<f64>() < params.mixup_p {
        let other = &pool[rng.random_range(0..pool.len())];
        let other = resize_sample(other, current.0.width, current.0.height);
        let lambda = Beta::new(MIXUP_BETA, MIXUP_BETA)
            .expect("valid beta parameters")
            .sample(&mut rng);
        current = mixup(&current, &other, lambda).expect("dimensions were matched");
    }

    if !patches.is_empty() && rng.random::<f64>() < params.paste_in_p {
        current = paste_in(&current, patches, &mut rng, PASTE_MAX_IOU);
    }
    current
}
