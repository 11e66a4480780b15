use crate::error::{Error, Result};

use super::{BatchNormParams, Conv2dParams, Tensor3};

/// Folds an inference-mode batch norm into the preceding convolution:
/// `w'_o = w_o * s_o`, `b'_o = beta_o + (b_o - mean_o) * s_o` with
/// `s_o = gamma_o / sqrt(var_o + eps)`.
pub fn fuse_conv_bn(conv: &Conv2dParams, bn: &BatchNormParams) -> Result<Conv2dParams> {
    if bn.channels() != conv.c_out {
        return Err(Error::Shape(format!(
            "batch norm has {} channels, conv produces {}",
            bn.channels(),
            conv.c_out
        )));
    }
    let per_out = conv.c_in * conv.k * conv.k;
    let mut fused = conv.clone();
    for o in 0..conv.c_out {
        let s = bn.scale(o);
        for w in &mut fused.weights[o * per_out..(o + 1) * per_out] {
            *w *= s;
        }
        fused.bias[o] = bn.beta[o] + (conv.bias[o] - bn.running_mean[o]) * s;
    }
    Ok(fused)
}

/// `max |a - b| / (1 + |b|)` over all elements.
pub fn max_relative_error(a: &Tensor3, b: &Tensor3) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs() / (1.0 + y.abs()))
        .fold(0.0, f64::max)
}
