//! Correlation networks from multichannel time series, persistence diagrams
//! of their graph filtrations, K-means topological descriptors and a hybrid
//! autoencoder / PCA / SVM classifier.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command line live in the `vistopo` crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod corrnet;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod matrix;
pub mod model;
pub mod persistence;
pub mod rng;
pub mod tdafeat;

pub use error::{Error, ErrorClass, Result};
pub use matrix::Matrix;
