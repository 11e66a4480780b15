use std::path::PathBuf;

use anyhow::Context as _;
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roadscan_core::numerics::{batchnorm_infer, conv2d, fuse_conv_bn, max_relative_error, ConvBnFixture, Tensor3, WeightsFile};

use super::Context;

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Weights fixture holding `conv.*` and `bn.*` tensors.
    pub weights: PathBuf,
    /// Where the fused fixture (conv only) is written.
    pub out: PathBuf,
    /// Random probe inputs used to check equivalence.
    #[arg(long, default_value_t = 4)]
    pub probes: usize,
    /// Spatial side of each probe input.
    #[arg(long, default_value_t = 16)]
    pub probe_size: usize,
}

pub fn run(ctx: &Context, args: FuseArgs) -> anyhow::Result<()> {
    let file = WeightsFile::load(ctx.file.resolve(&args.weights))?;
    let fixture = ConvBnFixture::from_weights(&file)?;
    let bn = fixture.bn.clone().context("fixture has no batch norm to fold")?;
    let fused = fuse_conv_bn(&fixture.conv, &bn)?;

    let mut rng = ChaCha8Rng::seed_from_u64(ctx.file.pipeline.seed);
    let side = args.probe_size.max(fixture.conv.k);
    let mut worst = 0.0f64;
    for _ in 0..args.probes {
        let x = Tensor3::random(fixture.conv.c_in, side, side, &mut rng);
        let reference = batchnorm_infer(&conv2d(&x, &fixture.conv)?, &bn)?;
        worst = worst.max(max_relative_error(&conv2d(&x, &fused)?, &reference));
    }

    ConvBnFixture { conv: fused, bn: None }.to_weights().save(&args.out)?;
    println!(
        "fused {}x{}x{}x{} conv; max equivalence error: {worst}",
        fixture.conv.c_out, fixture.conv.c_in, fixture.conv.k, fixture.conv.k
    );
    Ok(())
}
