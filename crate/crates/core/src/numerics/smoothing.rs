use crate::error::{Error, Result};

/// Binary targets smoothed by `eps`: `(1 - eps/2, eps/2)`.
pub fn smooth_targets(eps: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Precondition(format!("smoothing {eps} not in [0,1)")));
    }
    Ok((1.0 - 0.5 * eps, 0.5 * eps))
}

/// Uniform smoothing over `k` classes: `(1 - eps + eps/k, eps/k)`.
pub fn smooth_targets_uniform(eps: f64, k: usize) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&eps) || k == 0 {
        return Err(Error::Precondition(format!(
            "smoothing {eps} over {k} classes"
        )));
    }
    let off = eps / k as f64;
    Ok((1.0 - eps + off, off))
}
