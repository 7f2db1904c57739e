//! Well-connected clustering of large citation networks.
//!
//! The pipeline finds clusters with a dense, connected core and an optional
//! periphery of nodes that are still well attached to that core:
//!
//! 1. [`kcore::ikc`] peels off the components of the maximum k-core again and
//!    again.
//! 2. [`bisect`] optionally splits those clusters with a normalized-cut
//!    bipartitioner.
//! 3. [`augment::augment`] attaches unclustered nodes as periphery.
//! 4. [`parse::kmp_parse`] reduces every cluster to a form where each core
//!    node has `k` core neighbours, each periphery node has `p`, and the core
//!    is connected with positive modularity.
//!
//! [`pipeline::run_pipeline`] chains the four stages; [`markers`] compares
//! several clusterings through a panel of marker nodes.

pub mod augment;
pub mod bisect;
pub mod cluster;
pub mod error;
pub mod graph;
pub mod io;
pub mod kcore;
pub mod markers;
pub mod metrics;
pub mod modularity;
pub mod parse;
pub mod pipeline;
pub mod synth;

pub use cluster::{Cluster, Clustering, Role};
pub use error::{Error, Result};
pub use graph::{Adjacency, IdMap, LoadReport, Network, NodeId, NodeSubset, Subgraph};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput, Stage2};
