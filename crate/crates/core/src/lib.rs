//! Multi-label, class-imbalanced action recognition with small 3D CNNs.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense `f64` tensors, valid 3D convolution and max-pooling.
//! * [`nn`]: architecture specs, forward/backward, weighted BCE, momentum SGD,
//!   gradient checking.
//! * [`dataio`]: HVD video files, label files, manifests, synthetic data.
//! * [`pipeline`]: downscaling, normalization, windowing, splits, caching.
//! * [`imbalance`]: class weights, threshold softening, oversampling.
//! * [`strategy`]: ensemble and single-model training, prediction, persistence.
//! * [`metrics`]: confusion counts, precision/recall/F1, reports.
//! * [`cli`]: the `actionrec` command.

pub mod cli;
pub mod dataio;
pub mod error;
mod fmtnum;
pub mod imbalance;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod strategy;
pub mod tensor;

pub use error::{Error, Result};
pub use metrics::MetricsReport;
pub use nn::{ArchitectureSpec, Hyperparameters, Model};
pub use strategy::{StrategyKind, TrainedSystem};
pub use tensor::Tensor;
