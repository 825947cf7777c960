//! Rolling-window financial networks from daily prices.
//!
//! For each window of log returns a dissimilarity matrix is built (from
//! Pearson correlations or from a VAR's generalized variance
//! decomposition), read as a weighted graph for center detection, and
//! clustered by single linkage into a dendrogram. Consecutive dendrograms
//! are compared with Robinson-Foulds or clustering-information distances,
//! and the resulting series are monitored with Shewhart control charts and
//! a VAR with Hannan–Quinn lag selection.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod config;
pub mod dissim;
pub mod error;
pub mod graph;
pub mod hclust;
pub mod ingest;
pub mod monitor;
pub mod numfmt;
mod ols;
pub mod output;
pub mod pipeline;
pub mod simulate;
pub mod treedist;

pub use error::{Error, ErrorClass, Result};
