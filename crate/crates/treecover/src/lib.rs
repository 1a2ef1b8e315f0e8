//! Tree covers and Ramsey tree covers of finite metric spaces.
//!
//! A *tree cover* of a metric is a collection of dominating trees such that
//! every pair of points has a low-distortion path in at least one tree; a
//! *Ramsey* tree cover additionally gives every point a single "home tree"
//! that is good for all pairs containing it. This crate provides:
//!
//! - [`metric`]: finite metrics, weighted graphs, shortest-path extraction,
//!   and structural statistics (aspect ratio, doubling-constant estimate).
//! - [`tree`]: tree embeddings, ultrametrics/HSTs and their Steiner
//!   realization, and forest completion.
//! - [`verify`]: the exhaustive distortion verifier that certifies every
//!   cover produced by the builders.
//! - [`nets`]: greedy nets, hierarchical net ladders and separated sub-net
//!   partitions.
//! - [`doubling`]: a (1+eps)-distortion tree cover for doubling metrics via
//!   bottom-up clustering over separated sub-nets.
//! - [`planar`]: shortest-path separators for planar graphs, per-vertex
//!   landmark sets and randomized single-edge attachment trees.
//! - [`partition`]: padded probabilistic partitions, hierarchical partition
//!   families with constructive-LLL resampling, and tree covers from
//!   families.
//! - [`ramsey`]: Ramsey tree covers with few trees via iterative extraction.
//! - [`gadgets`]: adversarial input generators (cycle powers, metric
//!   compositions, recursive cycle graphs).
//!
//! All construction randomness is derived from explicit seeds through
//! [`rng::stream`], so every artifact is reproducible.

#![allow(clippy::needless_range_loop)]

pub mod doubling;
pub mod error;
pub mod gadgets;
pub mod metric;
pub mod nets;
pub mod partition;
pub mod planar;
pub mod ramsey;
pub mod rng;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{metric_from_graph, FiniteMetric, WeightedGraph};
pub use tree::{HstTree, TreeCover, TreeEmbedding, TreeKind};
pub use verify::{verify_cover, DistortionReport};

/// Relative tolerance used by all distance comparisons in verification.
pub const REL_TOL: f64 = 1e-9;
