//! Building blocks for news-veracity generalization benchmarks.
//!
//! The crate covers the whole pipeline from raw articles to fold-aggregated
//! results:
//!
//! * [`corpus`] loads source-labelled article collections and draws balanced
//!   per-source samples.
//! * [`textfeat`] computes a versioned catalog of hand-crafted style,
//!   complexity, bias, affect and moral features.
//! * [`embed`] trains PV-DBOW paragraph vectors with negative sampling.
//! * [`learn`] holds the scaler, random forest / extra trees and a linear SVM.
//! * [`eval`] builds article, source and country split plans and runs
//!   train/test cycles over them.

pub mod corpus;
pub mod embed;
mod error;
pub mod eval;
pub mod learn;
pub mod rng;
pub mod textfeat;

pub use error::{Error, Result};
