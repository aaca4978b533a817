//! Numerical laboratory for observing Kolmogorov-Arnold (KA) geometry in
//! shallow MLPs.
//!
//! The crate trains 1-hidden-layer GeLU networks on synthetic targets over
//! `[-1, 1]^n` and measures the fine-scale structure of the inner-map
//! Jacobian through exterior-power minor statistics: calibrated zero rows,
//! participation ratios, random rotation ratios, softmax column divergences,
//! and mean-excess tail diagnostics.
//!
//! Module layout mirrors the pipeline:
//!
//! - [`linalg`]: dense matrices, determinants, Haar-random rotations,
//!   quantiles, log-gamma, deterministic RNG streams
//! - [`model`]: the MLP, its analytic inner-map Jacobian and gradients,
//!   bit-exact checkpoints
//! - [`targets`]: synthetic target families and dataset generation
//! - [`training`]: Adam loop, R², early stopping, critical batch size,
//!   R²-indexed checkpoint schedules
//! - [`minors`]: size-k minor matrices and zero-row classification
//! - [`concentration`]: minor-concentration metrics and tail diagnostics
//! - [`experiments`]: declarative experiment orchestration
//! - [`report`]: CSV/JSON emission for every figure and table family

pub mod concentration;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod minors;
pub mod model;
pub mod report;
pub mod targets;
pub mod training;

pub use error::{Error, Result};
pub use linalg::{Matrix, RngStream};
pub use model::MlpModel;
pub use targets::{Dataset, TargetFunction};
pub use training::{TrainConfig, TrainRecord};
