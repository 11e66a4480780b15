use rand::Rng;

use crate::error::{Error, Result};

use super::{batchnorm_infer, conv2d, BatchNormParams, Conv2dParams, Tensor3};

pub fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// `x * clamp(x + 3, 0, 6) / 6`
pub fn hard_swish(v: f64) -> f64 {
    v * (v + 3.0).clamp(0.0, 6.0) / 6.0
}

/// Weights of one coordinate attention block over `c` channels.
///
/// The shared 1x1 transform maps `c -> mid` channels, `mid = max(8, c / reduction)`,
/// followed by an inference-mode batch norm and hard-swish; `conv_h` and `conv_w`
/// map back `mid -> c` before the sigmoid gates.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordAttnParams {
    pub reduction: usize,
    pub conv1: Conv2dParams,
    pub bn: BatchNormParams,
    pub conv_h: Conv2dParams,
    pub conv_w: Conv2dParams,
}

impl CoordAttnParams {
    pub fn mid_channels(c: usize, reduction: usize) -> usize {
        (c / reduction.max(1)).max(8)
    }

    /// All transform weights and biases zero; the norm is the identity.
    pub fn zeros(c: usize, reduction: usize) -> Self {
        let m = Self::mid_channels(c, reduction);
        Self {
            reduction,
            conv1: Conv2dParams::zeros(m, c, 1),
            bn: BatchNormParams::identity(m),
            conv_h: Conv2dParams::zeros(c, m, 1),
            conv_w: Conv2dParams::zeros(c, m, 1),
        }
    }

    pub fn random<R: Rng + ?Sized>(c: usize, reduction: usize, rng: &mut R) -> Self {
        let m = Self::mid_channels(c, reduction);
        Self {
            reduction,
            conv1: Conv2dParams::random(m, c, 1, rng),
            bn: BatchNormParams::random(m, rng),
            conv_h: Conv2dParams::random(c, m, 1, rng),
            conv_w: Conv2dParams::random(c, m, 1, rng),
        }
    }

    pub fn channels(&self) -> usize {
        self.conv1.c_in
    }

    pub fn mid(&self) -> usize {
        self.conv1.c_out
    }
}

/// Gates `(g_h: c x h x 1, g_w: c x w x 1)` for input `x`.
pub fn coord_attention_gates(x: &Tensor3, p: &CoordAttnParams) -> Result<(Tensor3, Tensor3)> {
    if x.c != p.channels() || p.conv_h.c_out != x.c || p.conv_w.c_out != x.c {
        return Err(Error::Shape(format!(
            "coordinate attention built for {} channels, input has {}",
            p.channels(),
            x.c
        )));
    }
    let (h, w) = (x.h, x.w);

    // Directional pooling, stacked along one spatial axis: rows [0, h) hold the
    // height descriptor, rows [h, h + w) the width descriptor.
    let mut pooled = Tensor3::zeros(x.c, h + w, 1);
    for c in 0..x.c {
        for y in 0..h {
            let s: f64 = (0..w).map(|xx| x.at(c, y, xx)).sum();
            pooled.set(c, y, 0, s / w as f64);
        }
        for xx in 0..w {
            let s: f64 = (0..h).map(|y| x.at(c, y, xx)).sum();
            pooled.set(c, h + xx, 0, s / h as f64);
        }
    }

    let shared = batchnorm_infer(&conv2d(&pooled, &p.conv1)?, &p.bn)?.map(hard_swish);
    let m = shared.c;
    let mut t_h = Tensor3::zeros(m, h, 1);
    let mut t_w = Tensor3::zeros(m, w, 1);
    for c in 0..m {
        for y in 0..h {
            t_h.set(c, y, 0, shared.at(c, y, 0));
        }
        for xx in 0..w {
            t_w.set(c, xx, 0, shared.at(c, h + xx, 0));
        }
    }
    let g_h = conv2d(&t_h, &p.conv_h)?.map(sigmoid);
    let g_w = conv2d(&t_w, &p.conv_w)?.map(sigmoid);
    Ok((g_h, g_w))
}

/// `y[c][i][j] = x[c][i][j] * g_h[c][i] * g_w[c][j]`; output shape equals input shape.
pub fn coord_attention(x: &Tensor3, p: &CoordAttnParams) -> Result<Tensor3> {
    let (g_h, g_w) = coord_attention_gates(x, p)?;
    let mut y = x.clone();
    for c in 0..x.c {
        for i in 0..x.h {
            let gh = g_h.at(c, i, 0);
            for j in 0..x.w {
                let idx = y.idx(c, i, j);
                y.data[idx] = x.data[idx] * gh * g_w.at(c, j, 0);
            }
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_quarter_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Tensor3::random(16, 8, 8, &mut rng);
        let y = coord_attention(&x, &CoordAttnParams::zeros(16, 4)).unwrap();
        assert_eq!(y, x.scale(0.25));
    }

    #[test]
    fn shape_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (c, h, w) in [(3, 1, 9), (16, 8, 8), (32, 5, 12)] {
            let p = CoordAttnParams::random(c, 4, &mut rng);
            let x = Tensor3::random(c, h, w, &mut rng);
            assert_eq!(coord_attention(&x, &p).unwrap().shape(), (c, h, w));
        }
    }

    #[test]
    fn mid_channels_floor() {
        assert_eq!(CoordAttnParams::mid_channels(16, 4), 8);
        assert_eq!(CoordAttnParams::mid_channels(64, 4), 16);
        assert_eq!(CoordAttnParams::zeros(256, 32).mid(), 8);
    }

    #[test]
    fn gates_are_open_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = CoordAttnParams::random(12, 2, &mut rng);
            let x = Tensor3::random(12, 6, 7, &mut rng).scale(3.0);
            let (gh, gw) = coord_attention_gates(&x, &p).unwrap();
            assert!(gh.data.iter().chain(&gw.data).all(|&g| g > 0.0 && g < 1.0));
        }
    }

    #[test]
    fn hard_swish_pieces() {
        assert_eq!(hard_swish(-4.0), 0.0);
        assert_eq!(hard_swish(4.0), 4.0);
        assert_eq!(hard_swish(0.0), 0.0);
        assert_eq!(hard_swish(1.0), 4.0 / 6.0);
    }

    #[test]
    fn wrong_channel_count() {
        let x = Tensor3::zeros(4, 2, 2);
        assert!(coord_attention(&x, &CoordAttnParams::zeros(8, 1)).is_err());
    }
}
