//! Resampling techniques for imbalanced binary classification, with the
//! learners and evaluation protocol needed to benchmark them.
//!
//! The crate provides:
//!
//! - a [`Dataset`] type with the two headline metrics for skewed problems
//!   (precision on the majority class, recall on the minority class);
//! - a deterministic synthetic data generator and PCA projection
//!   ([`datagen`]);
//! - under-, over- and combined samplers ([`resample`]): random
//!   undersampling, NearMiss-1/2/3, condensed and edited nearest neighbor,
//!   Tomek link removal, random oversampling, SMOTE and its borderline
//!   variants, SMOTE+Tomek and SMOTE+ENN;
//! - weighted logistic regression and AdaBoost over decision stumps
//!   ([`learn`]), plus the EasyEnsemble and BalanceCascade meta-classifiers
//!   ([`ensemble`]);
//! - a benchmark harness with stratified splitting and cross-validated
//!   model selection ([`eval`]).
//!
//! Every operation is a pure function of its inputs and an explicit seed;
//! nothing reads the clock or global RNG state.

pub mod datagen;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod eval;
pub mod io;
pub mod learn;
pub mod neighbors;
pub mod resample;
pub mod rng;

pub use dataset::{ClassLabel, Dataset, EvalMetrics, ResampleReport};
pub use error::{Error, Result};
