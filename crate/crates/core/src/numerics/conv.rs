use rand::Rng;

use crate::error::{Error, Result};

use super::Tensor3;

/// Convolution weights `[c_out][c_in][k][k]` (flattened) with per-output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2dParams {
    pub c_out: usize,
    pub c_in: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub stride: usize,
    pub padding: usize,
}

impl Conv2dParams {
    pub fn zeros(c_out: usize, c_in: usize, k: usize) -> Self {
        Self {
            c_out,
            c_in,
            k,
            weights: vec![0.0; c_out * c_in * k * k],
            bias: vec![0.0; c_out],
            stride: 1,
            padding: k / 2,
        }
    }

    pub fn random<R: Rng + ?Sized>(c_out: usize, c_in: usize, k: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(c_out, c_in, k);
        p.weights.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
        p.bias.iter_mut().for_each(|b| *b = rng.random_range(-1.0..1.0));
        p
    }

    #[inline]
    pub fn widx(&self, o: usize, i: usize, ky: usize, kx: usize) -> usize {
        ((o * self.c_in + i) * self.k + ky) * self.k + kx
    }

    pub fn output_dims(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let (hp, wp) = (h + 2 * self.padding, w + 2 * self.padding);
        if self.stride == 0 || hp < self.k || wp < self.k {
            return None;
        }
        Some(((hp - self.k) / self.stride + 1, (wp - self.k) / self.stride + 1))
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() != self.c_out * self.c_in * self.k * self.k
            || self.bias.len() != self.c_out
        {
            return Err(Error::Shape("conv weight/bias length mismatch".into()));
        }
        Ok(())
    }
}

/// Inference-mode batch norm parameters for `c` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormParams {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub eps: f64,
}

impl BatchNormParams {
    /// gamma = 1, beta = 0, mean = 0, var = 1, eps = 0.
    pub fn identity(c: usize) -> Self {
        Self {
            gamma: vec![1.0; c],
            beta: vec![0.0; c],
            running_mean: vec![0.0; c],
            running_var: vec![1.0; c],
            eps: 0.0,
        }
    }

    pub fn random<R: Rng + ?Sized>(c: usize, rng: &mut R) -> Self {
        Self {
            gamma: (0..c).map(|_| rng.random_range(0.5..1.5)).collect(),
            beta: (0..c).map(|_| rng.random_range(-0.5..0.5)).collect(),
            running_mean: (0..c).map(|_| rng.random_range(-0.5..0.5)).collect(),
            running_var: (0..c).map(|_| rng.random_range(0.1..2.0)).collect(),
            eps: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.gamma.len()
    }

    /// Per-channel multiplier `gamma / sqrt(var + eps)`.
    pub fn scale(&self, ch: usize) -> f64 {
        self.gamma[ch] / (self.running_var[ch] + self.eps).sqrt()
    }
}

/// Direct cross-correlation with zero padding.
pub fn conv2d(x: &Tensor3, p: &Conv2dParams) -> Result<Tensor3> {
    p.check()?;
    if x.c != p.c_in {
        return Err(Error::Shape(format!(
            "input has {} channels, conv expects {}",
            x.c, p.c_in
        )));
    }
    let (ho, wo) = p.output_dims(x.h, x.w).ok_or_else(|| {
        Error::Shape(format!(
            "kernel {} does not fit {}x{} with padding {}",
            p.k, x.h, x.w, p.padding
        ))
    })?;
    let pad = p.padding as isize;
    let mut out = Tensor3::zeros(p.c_out, ho, wo);
    for o in 0..p.c_out {
        for oy in 0..ho {
            for ox in 0..wo {
                let mut acc = p.bias[o];
                for i in 0..p.c_in {
                    for ky in 0..p.k {
                        let iy = (oy * p.stride + ky) as isize - pad;
                        if iy < 0 || iy >= x.h as isize {
                            continue;
                        }
                        for kx in 0..p.k {
                            let ix = (ox * p.stride + kx) as isize - pad;
                            if ix < 0 || ix >= x.w as isize {
                                continue;
                            }
                            acc += p.weights[p.widx(o, i, ky, kx)] * x.at(i, iy as usize, ix as usize);
                        }
                    }
                }
                out.set(o, oy, ox, acc);
            }
        }
    }
    Ok(out)
}

pub fn batchnorm_infer(x: &Tensor3, p: &BatchNormParams) -> Result<Tensor3> {
    if p.channels() != x.c {
        return Err(Error::Shape(format!(
            "batch norm has {} channels, input {}",
            p.channels(),
            x.c
        )));
    }
    let mut out = x.clone();
    let plane = x.h * x.w;
    for ch in 0..x.c {
        let denom = (p.running_var[ch] + p.eps).sqrt();
        for v in &mut out.data[ch * plane..(ch + 1) * plane] {
            *v = p.gamma[ch] * (*v - p.running_mean[ch]) / denom + p.beta[ch];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent route: zero-pad into a bigger buffer first, then plain loops.
    #[allow(clippy::needless_range_loop)]
    fn oracle_conv(x: &Tensor3, p: &Conv2dParams) -> Tensor3 {
        let (hp, wp) = (x.h + 2 * p.padding, x.w + 2 * p.padding);
        let mut padded = vec![vec![vec![0.0; wp]; hp]; x.c];
        for c in 0..x.c {
            for y in 0..x.h {
                for xx in 0..x.w {
                    padded[c][y + p.padding][xx + p.padding] = x.at(c, y, xx);
                }
            }
        }
        let ho = (hp - p.k) / p.stride + 1;
        let wo = (wp - p.k) / p.stride + 1;
        let mut out = Vec::new();
        for o in 0..p.c_out {
            for oy in 0..ho {
                for ox in 0..wo {
                    let mut s = 0.0;
                    for i in 0..p.c_in {
                        for ky in 0..p.k {
                            for kx in 0..p.k {
                                s += p.weights[((o * p.c_in + i) * p.k + ky) * p.k + kx]
                                    * padded[i][oy * p.stride + ky][ox * p.stride + kx];
                            }
                        }
                    }
                    out.push(s + p.bias[o]);
                }
            }
        }
        Tensor3::from_vec(p.c_out, ho, wo, out).unwrap()
    }

    #[test]
    fn identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Tensor3::random(3, 5, 4, &mut rng);
        let mut p = Conv2dParams::zeros(3, 3, 1);
        for c in 0..3 {
            let i = p.widx(c, c, 0, 0);
            p.weights[i] = 1.0;
        }
        assert_eq!(conv2d(&x, &p).unwrap(), x);
    }

    #[test]
    fn all_ones_sum() {
        let x = Tensor3::filled(1, 3, 3, 1.0);
        let mut p = Conv2dParams::zeros(1, 1, 3);
        p.padding = 0;
        p.weights.fill(1.0);
        let y = conv2d(&x, &p).unwrap();
        assert_eq!(y.shape(), (1, 1, 1));
        assert_eq!(y.data, vec![9.0]);
    }

    #[test]
    fn matches_padded_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..20 {
            let k = [1, 3, 5][case % 3];
            let mut p = Conv2dParams::random(rng.random_range(1..6), rng.random_range(1..6), k, &mut rng);
            p.stride = 1 + case % 2;
            p.padding = rng.random_range(0..=k / 2 + 1);
            let x = Tensor3::random(p.c_in, rng.random_range(k..12), rng.random_range(k..12), &mut rng);
            let got = conv2d(&x, &p).unwrap();
            assert!(got.max_abs_diff(&oracle_conv(&x, &p)) <= 1e-9);
        }
    }

    #[test]
    fn linear_without_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut p = Conv2dParams::random(4, 2, 3, &mut rng);
        p.bias.fill(0.0);
        let x = Tensor3::random(2, 7, 6, &mut rng);
        let lhs = conv2d(&x.scale(2.5), &p).unwrap();
        let rhs = conv2d(&x, &p).unwrap().scale(2.5);
        assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn channel_mismatch() {
        let x = Tensor3::zeros(2, 3, 3);
        assert!(conv2d(&x, &Conv2dParams::zeros(1, 3, 1)).is_err());
        assert!(batchnorm_infer(&x, &BatchNormParams::identity(3)).is_err());
    }

    #[test]
    fn batchnorm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Tensor3::random(2, 3, 3, &mut rng);
        assert_eq!(batchnorm_infer(&x, &BatchNormParams::identity(2)).unwrap(), x);

        let mut bn = BatchNormParams::identity(1);
        bn.gamma[0] = 2.0;
        bn.beta[0] = 1.0;
        let y = batchnorm_infer(&Tensor3::filled(1, 1, 1, 3.0), &bn).unwrap();
        assert_eq!(y.data, vec![7.0]);

        let bn = BatchNormParams::random(2, &mut rng);
        let y = batchnorm_infer(&x, &bn).unwrap();
        for c in 0..2 {
            for i in 0..3 {
                for j in 0..3 {
                    let v = x.at(c, i, j);
                    let want = (v - bn.running_mean[c]) * bn.gamma[c] / (bn.running_var[c] + bn.eps).sqrt() + bn.beta[c];
                    assert!((y.at(c, i, j) - want).abs() <= 1e-12);
                }
            }
        }
    }
}
