//! Multilevel trade-and-ownership networks: ingestion, intra-firm trade motif
//! filtering, descriptive network statistics and a synthetic data generator.

pub mod bitset;
pub mod csvio;
pub mod graph;
pub mod ingest;
pub mod motif;
pub mod netstats;
pub mod synth;

pub use graph::{BipartiteGraph, GeodesicHistogram, Graph, GraphError, NodeSet};
