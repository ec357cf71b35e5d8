//! A small convolutional classifier written from scratch.
//!
//! Layout is batch-major `[N, H, W, C]`. The default [`NetworkSpec`] is the
//! seven-conv / three-FC architecture over 399 x 752 x 3 cortical images;
//! any smaller spec trains the same way. Everything is generic over
//! [`Real`] so training can run in `f32` and gradient checks in `f64`.

mod layers;
mod metrics;
mod network;
mod tensor;
mod train;

pub use layers::{Conv2d, Dense};
pub use metrics::{evaluate, metrics_from_predictions, predict_labels, Evaluation};
pub use network::{
    build_network, shape_trace, softmax_cross_entropy, Cache, Gradients, LayerKind, LayerShape, Network, ParamGrad,
    NetworkSpec, Padding, CROSS_ENTROPY_EPS,
};
pub use tensor::Tensor;
pub use train::{sgd_step, train_epoch, train_epoch_with, Dataset, EpochMetrics, StepMetrics, TrainConfig};

/// Floating-point element type of a network.
pub trait Real:
    num_traits::Float + Default + core::iter::Sum + core::fmt::Debug + Send + Sync + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}
