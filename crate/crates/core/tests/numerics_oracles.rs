mod common;

use common::{oracle_conv_bn, oracle_coord_attention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadscan_core::numerics::{
    batchnorm_infer, conv2d, coord_attention, fuse_conv_bn, max_relative_error, BatchNormParams, Conv2dParams,
    ConvBnFixture, CoordAttnParams, Tensor3, WeightsFile,
};

#[test]
fn coord_attention_agrees_with_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..25 {
        let c = rng.random_range(1..=32);
        let (h, w) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let r = [1, 4, 8, 32][rng.random_range(0..4)];
        let p = CoordAttnParams::random(c, r, &mut rng);
        let x = Tensor3::random(c, h, w, &mut rng);
        let y = coord_attention(&x, &p).unwrap();
        assert_eq!(y.shape(), x.shape());
        let err = y.max_abs_diff(&oracle_coord_attention(&x, &p));
        assert!(err <= 1e-6, "case {case}: {err}");
    }
}

#[test]
fn zero_weight_attention_quarters_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let x = Tensor3::random(16, 9, 7, &mut rng);
    let y = coord_attention(&x, &CoordAttnParams::zeros(16, 8)).unwrap();
    assert_eq!(y, x.scale(0.25));
}

#[test]
fn fused_conv_matches_conv_then_bn() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (c_in, c_out) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let k = [1, 3, 5][rng.random_range(0..3)];
        let (h, w) = (rng.random_range(k..=16), rng.random_range(k..=16));
        let mut conv = Conv2dParams::random(c_out, c_in, k, &mut rng);
        conv.stride = rng.random_range(1..=2);
        let bn = BatchNormParams::random(c_out, &mut rng);
        let x = Tensor3::random(c_in, h, w, &mut rng);

        let unfused = batchnorm_infer(&conv2d(&x, &conv).unwrap(), &bn).unwrap();
        let fused = conv2d(&x, &fuse_conv_bn(&conv, &bn).unwrap()).unwrap();
        let reference = oracle_conv_bn(&x, &conv, &bn);
        assert!(max_relative_error(&unfused, &reference) <= 1e-12);
        worst = worst.max(max_relative_error(&fused, &unfused));
    }
    assert!(worst <= 1e-5, "{worst}");
}

#[test]
fn identity_bn_fuses_to_same_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let conv = Conv2dParams::random(4, 3, 3, &mut rng);
    let fused = fuse_conv_bn(&conv, &BatchNormParams::identity(4)).unwrap();
    assert_eq!(fused, conv);
}

#[test]
fn fixture_survives_serialization_and_fusion() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let fixture = ConvBnFixture {
        conv: Conv2dParams::random(6, 3, 3, &mut rng),
        bn: Some(BatchNormParams::random(6, &mut rng)),
    };
    let bytes = fixture.to_weights().to_bytes().unwrap();
    let back = ConvBnFixture::from_weights(&WeightsFile::from_bytes(&bytes).unwrap()).unwrap();
    let bn = back.bn.clone().unwrap();
    let x = Tensor3::random(3, 10, 10, &mut rng);
    let a = batchnorm_infer(&conv2d(&x, &back.conv).unwrap(), &bn).unwrap();
    let b = conv2d(&x, &fuse_conv_bn(&back.conv, &bn).unwrap()).unwrap();
    // weights are stored as f32
    assert!(max_relative_error(&b, &a) <= 1e-5);
    assert_eq!(back.conv.stride, fixture.conv.stride);
}
