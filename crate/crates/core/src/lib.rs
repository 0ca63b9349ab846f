//! Fair-classification toolkit built around binary correctness indicators.
//!
//! The library optimizes a penalized objective of the form
//! `accuracy(z, u) + lambda * regularization + rho * fairness(z)` where `z`
//! are per-point correctness/selection indicators and `u` are classifier
//! outcome scores (hinge margins, log-likelihoods, or probabilities).
//!
//! Main pieces:
//! - [`fairness`]: exact group-fairness and F1-complement measures over `z`.
//! - [`subselect`]: exact minimizers of the restricted problem with scores
//!   fixed, in `O(N log N)` (plus a brute-force validation oracle).
//! - [`train`]: deterministic first-order trainers for the continuous
//!   subproblems, including a line-delimited JSON protocol for external
//!   black-box scorers.
//! - [`irs`]: the iterative refining driver alternating selection and
//!   refitting, with convergence tracing and an approximation-gap report.
//! - [`micp`]: exportable mixed-integer convex models plus closed-form
//!   constants (big-M, minimum attainable positive unfairness).
//! - [`oracle`]: exhaustive exact solutions for tiny instances.
//! - [`dataio`]: CSV ingestion, stratified splits, and the 2-D Gaussian
//!   synthetic generator.
//!
//! Core numeric code is generic over [`scalar::Scalar`] (any `f32`/`f64`-like
//! float); the aliases below fix `f64`, which is what the CLI uses.

pub mod data;
pub mod dataio;
pub mod error;
pub mod fairness;
pub mod irs;
pub mod micp;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod subselect;
pub mod train;

pub use crate::error::{Error, Result};
pub use crate::scalar::Scalar;

/// `f64` instantiations of the generic core types.
pub type Dataset = data::Dataset<f64>;
pub type HyperParams = model::HyperParams<f64>;
pub type LinearModel = model::LinearModel<f64>;
pub type MulticlassModel = model::MulticlassModel<f64>;
pub type Scores = model::Scores<f64>;
pub type ScoreMatrix = model::ScoreMatrix<f64>;
pub type SelectionOutcome = subselect::SelectionOutcome<f64>;
pub type TrainConfig = train::TrainConfig<f64>;
pub type IrsTrace = irs::IrsTrace<f64>;
