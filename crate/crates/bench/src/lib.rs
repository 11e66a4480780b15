//! Seeded fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadscan_core::eval::GroundTruth;
use roadscan_core::{BBox, DamageClass, Detection, DetectionFrame, ImageRecord};
use roadscan_core::annot_io::DatasetManifest;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_box(rng: &mut ChaCha8Rng, size: f64) -> BBox {
    let (x, y) = (rng.random_range(0.0..size - 64.0), rng.random_range(0.0..size - 64.0));
    BBox::new(x, y, x + rng.random_range(8.0..64.0), y + rng.random_range(8.0..64.0))
}

/// `n` detections spread over `images` images of side 640.
pub fn detections(n: usize, images: usize, seed: u64) -> Vec<Detection> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let cls = DamageClass::ALL[r.random_range(0..4)];
            let b = random_box(&mut r, 640.0);
            Detection::new(format!("img{}", i % images), cls, b, r.random_range(0.0..1.0), DetectionFrame::Original)
        })
        .collect()
}

pub fn ground_truth(n: usize, images: usize, seed: u64) -> Vec<GroundTruth> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let cls = DamageClass::ALL[r.random_range(0..4)];
            GroundTruth::new(format!("img{}", i % images), cls, random_box(&mut r, 640.0))
        })
        .collect()
}

/// Mixed manifest: `normal` 600x600 images and `large` 4040x2041 images.
pub fn manifest(normal: usize, large: usize) -> DatasetManifest {
    let mut images: Vec<ImageRecord> =
        (0..normal).map(|i| ImageRecord::new(format!("Japan_{i:06}"), "Japan", 600, 600)).collect();
    images.extend((0..large).map(|i| ImageRecord::new(format!("Norway_{i:06}"), "Norway", 4040, 2041)));
    DatasetManifest::new(images)
}
