//! Small dense numerics for the two architectural techniques used by the
//! detector: coordinate attention and conv + batch-norm reparameterization, plus
//! label-smoothing targets. Everything runs in `f64` on `C x H x W` tensors.

mod attention;
mod conv;
mod fixture;
mod fuse;
mod smoothing;
mod tensor;

pub use attention::{coord_attention, coord_attention_gates, hard_swish, sigmoid, CoordAttnParams};
pub use conv::{batchnorm_infer, conv2d, BatchNormParams, Conv2dParams};
pub use fixture::{ConvBnFixture, TensorEntry, WeightsFile, WeightsHeader};
pub use fuse::{fuse_conv_bn, max_relative_error};
pub use smoothing::{smooth_targets, smooth_targets_uniform};
pub use tensor::Tensor3;
