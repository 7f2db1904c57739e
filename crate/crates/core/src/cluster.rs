//! Clusters with a core/non-core parse, and disjoint clusterings of a network.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, NodeSubset};

/// A cluster split into core and non-core (periphery) members.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster {
    core: NodeSubset,
    noncore: NodeSubset,
}

impl Cluster {
    /// # Panics
    ///
    /// If `core` and `noncore` overlap.
    pub fn new(core: NodeSubset, noncore: NodeSubset) -> Self {
        assert!(core.is_disjoint(&noncore), "core and non-core overlap");
        Cluster { core, noncore }
    }

    pub fn all_core(core: NodeSubset) -> Self {
        Cluster {
            core,
            noncore: NodeSubset::new(),
        }
    }

    pub fn core(&self) -> &NodeSubset {
        &self.core
    }

    pub fn noncore(&self) -> &NodeSubset {
        &self.noncore
    }

    pub fn members(&self) -> NodeSubset {
        if self.noncore.is_empty() {
            self.core.clone()
        } else {
            self.core.union(&self.noncore)
        }
    }

    pub fn len(&self) -> usize {
        self.core.len() + self.noncore.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn smallest(&self) -> Option<NodeId> {
        match (self.core.smallest(), self.noncore.smallest()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// Treats every member as core.
    pub fn flattened(&self) -> Cluster {
        Cluster::all_core(self.members())
    }
}

/// Pairwise-disjoint non-singleton clusters over a network of `universe`
/// nodes. Nodes outside every cluster are the singletons.
///
/// Clusters are kept in canonical order: ascending smallest member id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    clusters: Vec<Cluster>,
    universe: usize,
}

impl Clustering {
    pub fn empty(universe: usize) -> Self {
        Clustering {
            clusters: Vec::new(),
            universe,
        }
    }

    /// Validates disjointness and range, drops clusters with fewer than two
    /// members, and sorts canonically.
    pub fn new(universe: usize, clusters: Vec<Cluster>) -> Result<Self> {
        let mut owner = vec![u32::MAX; universe];
        for (ci, c) in clusters.iter().enumerate() {
            for &v in c.core().iter().chain(c.noncore().iter()) {
                let slot = owner.get_mut(v as usize).ok_or(Error::NodeOutOfRange {
                    index: v as usize,
                    len: universe,
                })?;
                if *slot != u32::MAX {
                    return Err(Error::Contract(format!(
                        "node {v} appears in clusters {} and {ci}",
                        *slot
                    )));
                }
                *slot = ci as u32;
            }
        }
        Ok(Self::from_disjoint(universe, clusters))
    }

    /// Like [`Clustering::new`] without the disjointness scan; callers
    /// guarantee it.
    pub(crate) fn from_disjoint(universe: usize, mut clusters: Vec<Cluster>) -> Self {
        clusters.retain(|c| c.len() >= 2);
        clusters.sort_by_key(|c| c.smallest());
        debug_assert!(clusters.windows(2).all(|w| w[0].smallest() != w[1].smallest()));
        Clustering { clusters, universe }
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn into_clusters(self) -> Vec<Cluster> {
        self.clusters
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn clustered_node_count(&self) -> usize {
        self.clusters.iter().map(Cluster::len).sum()
    }

    pub fn singleton_count(&self) -> usize {
        self.universe - self.clustered_node_count()
    }

    /// True when no cluster has a non-core member.
    pub fn is_all_core(&self) -> bool {
        self.clusters.iter().all(|c| c.noncore().is_empty())
    }

    /// Cluster index of every node, `None` for singletons.
    pub fn assignment(&self) -> Vec<Option<u32>> {
        let mut out = vec![None; self.universe];
        for (ci, c) in self.clusters.iter().enumerate() {
            for &v in c.core().iter().chain(c.noncore().iter()) {
                out[v as usize] = Some(ci as u32);
            }
        }
        out
    }

    /// Role of every node in this clustering.
    pub fn roles(&self) -> Vec<Role> {
        let mut out = vec![Role::Unclustered; self.universe];
        for c in &self.clusters {
            for &v in c.core() {
                out[v as usize] = Role::Core;
            }
            for &v in c.noncore() {
                out[v as usize] = Role::NonCore;
            }
        }
        out
    }

    pub fn clustered_nodes(&self) -> NodeSubset {
        self.clusters
            .iter()
            .flat_map(|c| c.core().iter().chain(c.noncore().iter()).copied())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Core,
    NonCore,
    Unclustered,
}
