//! Stage 3: attach unclustered nodes as periphery.

use rayon::prelude::*;

use crate::cluster::{Cluster, Clustering};
use crate::graph::{Network, NodeId, NodeSubset};

/// Picks the eligible cluster (`count >= p`) with the largest
/// `count / core_size`, ties to the lower index. Candidates are
/// `(index, count, core_size)`.
pub(crate) fn choose_cluster<I>(candidates: I, p: usize) -> Option<usize>
where
    I: IntoIterator<Item = (usize, usize, usize)>,
{
    let mut best: Option<(usize, usize, usize)> = None;
    for (idx, count, size) in candidates {
        if count < p || size == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((bi, bc, bs)) => {
                let lhs = count as u128 * bs as u128;
                let rhs = bc as u128 * size as u128;
                lhs > rhs || (lhs == rhs && idx < bi)
            }
        };
        if better {
            best = Some((idx, count, size));
        }
    }
    best.map(|(idx, _, _)| idx)
}

/// Adds every node outside all clusters to the cluster where it has
/// proportionally the most core neighbors, as a non-core member, provided it
/// has at least `p` core neighbors there. Core sets are left untouched, so
/// the result does not depend on the order candidates are visited in.
///
/// # Panics
///
/// If `p == 0`.
pub fn augment(net: &Network, clustering: &Clustering, p: u32) -> Clustering {
    assert!(p >= 1, "augmentation requires p >= 1");
    let n = net.len();
    let mut owner = vec![u32::MAX; n];
    let mut clustered = vec![false; n];
    for (ci, c) in clustering.clusters().iter().enumerate() {
        for &v in c.core() {
            owner[v as usize] = ci as u32;
            clustered[v as usize] = true;
        }
        for &v in c.noncore() {
            clustered[v as usize] = true;
        }
    }
    let core_sizes: Vec<usize> = clustering.clusters().iter().map(|c| c.core().len()).collect();
    let candidates: Vec<NodeId> = (0..n as NodeId).filter(|&v| !clustered[v as usize]).collect();
    let choices: Vec<Option<usize>> = candidates
        .par_iter()
        .map_init(Vec::new, |counts: &mut Vec<u32>, &x| {
            counts.clear();
            counts.extend(
                net.neighbors_of(x)
                    .iter()
                    .map(|&u| owner[u as usize])
                    .filter(|&o| o != u32::MAX),
            );
            counts.sort_unstable();
            let groups = counts.chunk_by(|a, b| a == b).map(|g| {
                let ci = g[0] as usize;
                (ci, g.len(), core_sizes[ci])
            });
            choose_cluster(groups, p as usize)
        })
        .collect();
    let mut additions: Vec<Vec<NodeId>> = vec![Vec::new(); clustering.len()];
    for (&x, choice) in candidates.iter().zip(choices) {
        if let Some(ci) = choice {
            additions[ci].push(x);
        }
    }
    let clusters = clustering
        .clusters()
        .iter()
        .zip(additions)
        .map(|(c, add)| {
            if add.is_empty() {
                c.clone()
            } else {
                Cluster::new(c.core().clone(), c.noncore().union(&NodeSubset::from_sorted(add)))
            }
        })
        .collect();
    Clustering::from_disjoint(clustering.universe(), clusters)
}
