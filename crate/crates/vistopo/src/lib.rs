//! File formats, pipeline stages, caching and the `vistopo` command line on
//! top of `vistopo-core`.
//!
//! Output tree of `run-all`:
//!
//! ```text
//! out/config.txt         resolved configuration
//! out/manifest.json      stage cache records
//! out/data/              synthetic CSVs and label files
//! out/networks/          one network JSON per (recording, class)
//! out/correlations/      marginal / partial matrices (optional)
//! out/diagrams/          diagram JSON + SVG per network
//! out/features.csv       12-D descriptors
//! out/report.json        per task × feature type CV results
//! out/scree.csv          PCA components, retained variance, accuracy
//! out/plots/             decision regions per task
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod stages;
pub mod svg;

pub use config::{Config, Settings};
pub use error::{Error, Result};
