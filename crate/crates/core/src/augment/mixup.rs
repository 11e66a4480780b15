use crate::error::{Error, Result};
use crate::imaging::{to_u8, ImageBuffer};

use super::Sample;

/// `lambda * a + (1 - lambda) * b` per pixel, rounded; labels concatenated.
pub fn mixup(a: &Sample, b: &Sample, lambda: f64) -> Result<Sample> {
    let (ia, ib) = (&a.0, &b.0);
    if ia.dims() != ib.dims() {
        return Err(Error::Shape(format!(
            "mixup of {:?} and {:?} images",
            ia.dims(),
            ib.dims()
        )));
    }
    let data = ia
        .data
        .iter()
        .zip(&ib.data)
        .map(|(&x, &y)| to_u8(lambda * x as f64 + (1.0 - lambda) * y as f64))
        .collect();
    let img = ImageBuffer::from_raw(ia.width, ia.height, data)?;
    let mut anns = a.1.clone();
    anns.extend_from_slice(&b.1);
    Ok((img, anns))
}
