//! Clustering statistics: node coverage, size distribution and minimum core
//! degree.

use serde::Serialize;

use crate::cluster::{Cluster, Clustering};
use crate::error::{Error, Result};
use crate::graph::{Adjacency, Network, Subgraph};

/// Percent of the universe that lies in non-singleton clusters.
pub fn node_coverage(clustering: &Clustering) -> f64 {
    if clustering.universe() == 0 {
        return 0.0;
    }
    100.0 * clustering.clustered_node_count() as f64 / clustering.universe() as f64
}

/// One row of cluster statistics.
///
/// `median` is the lower-middle size; `median_mean` averages the two middle
/// sizes for an even number of clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeStats {
    pub node_coverage: f64,
    pub clusters: usize,
    pub singletons: usize,
    pub min: usize,
    pub median: usize,
    pub median_mean: f64,
    pub max: usize,
}

pub fn size_stats(clustering: &Clustering) -> SizeStats {
    let mut sizes: Vec<usize> = clustering.clusters().iter().map(Cluster::len).collect();
    sizes.sort_unstable();
    let len = sizes.len();
    let (min, median, median_mean, max) = if len == 0 {
        (0, 0, 0.0, 0)
    } else {
        let lower = sizes[(len - 1) / 2];
        let upper = sizes[len / 2];
        (sizes[0], lower, (lower + upper) as f64 / 2.0, sizes[len - 1])
    };
    SizeStats {
        node_coverage: node_coverage(clustering),
        clusters: len,
        singletons: clustering.singleton_count(),
        min,
        median,
        median_mean,
        max,
    }
}

impl SizeStats {
    pub const TSV_HEADER: &'static str =
        "node_coverage\tclusters\tsingletons\tmin\tmedian\tmedian_mean\tmax";

    pub fn tsv_row(&self) -> String {
        format!(
            "{:.2}\t{}\t{}\t{}\t{}\t{:.1}\t{}",
            self.node_coverage,
            self.clusters,
            self.singletons,
            self.min,
            self.median,
            self.median_mean,
            self.max
        )
    }
}

/// Minimum degree among core nodes in the subgraph induced by the core.
pub fn mcd(net: &Network, cluster: &Cluster) -> Result<u32> {
    if cluster.core().is_empty() {
        return Err(Error::Contract("minimum core degree of an empty core".into()));
    }
    let sub = Subgraph::induced(net, cluster.core());
    Ok((0..sub.len()).map(|v| sub.degree_of(v)).min().unwrap_or(0) as u32)
}
