//! Stage 4: kmp-parsing, validity checking, strict filtering and core
//! extraction.
//!
//! A cluster is *k-valid* when every core node has at least `k` core
//! neighbors in the cluster, *m-valid* when its core is connected with
//! positive modularity, and *p-valid* when every non-core node has at least
//! `p` core neighbors. kmp-parsing turns an arbitrary clustering into one
//! where all three hold, provided `p < k`.

use rayon::prelude::*;
use serde::Serialize;

use crate::augment::choose_cluster;
use crate::cluster::{Cluster, Clustering};
use crate::error::{Error, Result};
use crate::graph::{components, Adjacency, Network, NodeId, NodeSubset, Subgraph};
use crate::kcore::peel;
use crate::metrics::node_coverage;
pub use crate::modularity::{has_positive_modularity, modularity, ModularityTerms};

/// Result of parsing: the new clustering and every node of an input cluster
/// that is in no output cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub clustering: Clustering,
    pub discarded: NodeSubset,
}

fn check_kp(k: u32, p: u32) -> Result<()> {
    if k == 0 || p == 0 {
        return Err(Error::Config(format!(
            "k and p must be positive (k = {k}, p = {p})"
        )));
    }
    if p >= k {
        return Err(Error::Config(format!(
            "kmp-parsing requires p < k (k = {k}, p = {p})"
        )));
    }
    Ok(())
}

/// Positive-modularity components of the k-core of the subgraph induced by
/// `alive` inside `sub`, as local index lists.
fn positive_components(
    net: &Network,
    sub: &Subgraph,
    alive: &[bool],
) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let total_edges = net.edge_count() as u64;
    let (mut kept, mut dropped) = (Vec::new(), Vec::new());
    for comp in components(sub, Some(alive)) {
        let twice_internal: usize = comp
            .iter()
            .map(|&v| {
                sub.neighbors(v as usize)
                    .iter()
                    .filter(|&&u| alive[u as usize])
                    .count()
            })
            .sum();
        let terms = ModularityTerms {
            internal_edges: (twice_internal / 2) as u64,
            degree_sum: comp.iter().map(|&v| net.deg(sub.global(v)) as u64).sum(),
            total_edges,
        };
        if terms.is_positive() {
            kept.push(comp);
        } else {
            dropped.push(comp);
        }
    }
    (kept, dropped)
}

/// The k-core of `members` (labelled on its own induced subgraph), broken
/// into connected components, keeping those with positive modularity.
pub(crate) fn core_components(net: &Network, members: &NodeSubset, k: u32) -> Vec<NodeSubset> {
    let sub = Subgraph::induced(net, members);
    let labels = peel(&sub, None);
    let alive: Vec<bool> = labels.iter().map(|&l| l >= k).collect();
    let (kept, _) = positive_components(net, &sub, &alive);
    kept.iter().map(|c| sub.to_global(c)).collect()
}

fn parse_cluster(net: &Network, members: &NodeSubset, k: u32, p: u32) -> Vec<Cluster> {
    let sub = Subgraph::induced(net, members);
    let labels = peel(&sub, None);
    let alive: Vec<bool> = labels.iter().map(|&l| l >= k).collect();
    let (derived, _) = positive_components(net, &sub, &alive);
    if derived.is_empty() {
        return Vec::new();
    }
    let mut owner = vec![u32::MAX; sub.len()];
    for (i, comp) in derived.iter().enumerate() {
        for &v in comp {
            owner[v as usize] = i as u32;
        }
    }
    let mut periphery: Vec<Vec<u32>> = vec![Vec::new(); derived.len()];
    let mut counts: Vec<(u32, u32)> = Vec::new();
    for x in (0..sub.len()).filter(|&x| !alive[x]) {
        counts.clear();
        counts.extend(
            sub.neighbors(x)
                .iter()
                .map(|&u| owner[u as usize])
                .filter(|&o| o != u32::MAX)
                .map(|o| (o, 1)),
        );
        counts.sort_unstable();
        counts.dedup_by(|next, acc| {
            if next.0 == acc.0 {
                acc.1 += 1;
                true
            } else {
                false
            }
        });
        let best = choose_cluster(
            counts
                .iter()
                .map(|&(o, c)| (o as usize, c as usize, derived[o as usize].len())),
            p as usize,
        );
        if let Some(best) = best {
            periphery[best].push(x as u32);
        }
    }
    derived
        .iter()
        .zip(periphery)
        .map(|(core, nc)| Cluster::new(sub.to_global(core), sub.to_global(&nc)))
        .collect()
}

/// kmp-parsing. Each input cluster is labelled on its own subgraph; the
/// positive-modularity components of its k-core become cores, and every
/// other member of that input cluster with at least `p` neighbors in some
/// core joins the best such core as non-core.
///
/// Requires `1 <= p < k`.
pub fn kmp_parse(net: &Network, clustering: &Clustering, k: u32, p: u32) -> Result<ParseOutcome> {
    check_kp(k, p)?;
    let parsed: Vec<Vec<Cluster>> = clustering
        .clusters()
        .par_iter()
        .map(|c| parse_cluster(net, &c.members(), k, p))
        .collect();
    let out = Clustering::from_disjoint(clustering.universe(), parsed.into_iter().flatten().collect());
    let kept = out.clustered_nodes();
    let discarded = clustering
        .clustered_nodes()
        .iter()
        .copied()
        .filter(|&v| !kept.contains(v))
        .collect();
    Ok(ParseOutcome {
        clustering: out,
        discarded,
    })
}

/// Core-only variant: for each cluster, the positive-modularity components
/// of its k-core.
pub fn extract_cores(net: &Network, clustering: &Clustering, k: u32) -> Clustering {
    let cores: Vec<Vec<NodeSubset>> = clustering
        .clusters()
        .par_iter()
        .map(|c| core_components(net, &c.members(), k))
        .collect();
    Clustering::from_disjoint(
        clustering.universe(),
        cores.into_iter().flatten().map(Cluster::all_core).collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterValidity {
    /// Position in the clustering's canonical order.
    pub cluster: usize,
    pub size: usize,
    pub core_size: usize,
    pub core_modularity: f64,
    pub k_valid: bool,
    pub m_valid: bool,
    pub p_valid: bool,
    pub kmp_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub k: u32,
    pub p: u32,
    /// Set when the clustering carried no non-core members, so every member
    /// was evaluated as core.
    pub all_core_assumed: bool,
    pub clusters: usize,
    pub k_valid: usize,
    pub m_valid: usize,
    pub p_valid: usize,
    pub kmp_valid: usize,
    /// Percent of network nodes in any non-singleton cluster.
    pub node_coverage: f64,
    /// Percent of network nodes in kmp-valid clusters.
    pub valid_node_coverage: f64,
    pub per_cluster: Vec<ClusterValidity>,
}

fn check_cluster(net: &Network, index: usize, cluster: &Cluster, k: u32, p: u32) -> ClusterValidity {
    let members = cluster.members();
    let sub = Subgraph::induced(net, &members);
    let is_core: Vec<bool> = members.iter().map(|&v| cluster.core().contains(v)).collect();
    let core_degree = |v: usize| {
        sub.neighbors(v)
            .iter()
            .filter(|&&u| is_core[u as usize])
            .count()
    };
    let mut k_valid = true;
    let mut p_valid = true;
    for v in 0..sub.len() {
        if is_core[v] {
            k_valid &= core_degree(v) >= k as usize;
        } else {
            p_valid &= core_degree(v) >= p as usize;
        }
    }
    let terms = ModularityTerms::of(net, cluster.core());
    let connected = !cluster.core().is_empty() && components(&sub, Some(&is_core)).len() == 1;
    let m_valid = connected && terms.is_positive();
    ClusterValidity {
        cluster: index,
        size: members.len(),
        core_size: cluster.core().len(),
        core_modularity: terms.value(),
        k_valid,
        m_valid,
        p_valid,
        kmp_valid: k_valid && m_valid && p_valid,
    }
}

/// Evaluates every cluster against the k/m/p criteria using its own
/// core/non-core parse.
pub fn validate(net: &Network, clustering: &Clustering, k: u32, p: u32) -> ValidityReport {
    let per_cluster: Vec<ClusterValidity> = clustering
        .clusters()
        .par_iter()
        .enumerate()
        .map(|(i, c)| check_cluster(net, i, c, k, p))
        .collect();
    let count = |f: fn(&ClusterValidity) -> bool| per_cluster.iter().filter(|c| f(c)).count();
    let valid_nodes: usize = per_cluster
        .iter()
        .filter(|c| c.kmp_valid)
        .map(|c| c.size)
        .sum();
    let universe = clustering.universe();
    ValidityReport {
        k,
        p,
        all_core_assumed: clustering.is_all_core(),
        clusters: per_cluster.len(),
        k_valid: count(|c| c.k_valid),
        m_valid: count(|c| c.m_valid),
        p_valid: count(|c| c.p_valid),
        kmp_valid: count(|c| c.kmp_valid),
        node_coverage: node_coverage(clustering),
        valid_node_coverage: if universe == 0 {
            0.0
        } else {
            100.0 * valid_nodes as f64 / universe as f64
        },
        per_cluster,
    }
}

/// Strict kmp-parsing: keeps exactly the kmp-valid clusters. A clustering
/// without non-core members is evaluated with every member as core.
pub fn strict_filter(net: &Network, clustering: &Clustering, k: u32, p: u32) -> (Clustering, ValidityReport) {
    let report = validate(net, clustering, k, p);
    let kept = clustering
        .clusters()
        .iter()
        .zip(&report.per_cluster)
        .filter(|(_, v)| v.kmp_valid)
        .map(|(c, _)| c.clone())
        .collect();
    (Clustering::from_disjoint(clustering.universe(), kept), report)
}

/// Nodes whose Step-1 label inside `cluster`'s own subgraph is at least `k`.
pub fn relabelled_core(net: &Network, cluster: &Cluster, k: u32) -> NodeSubset {
    let members = cluster.members();
    let sub = Subgraph::induced(net, &members);
    let labels = peel(&sub, None);
    NodeSubset::from_sorted(
        (0..sub.len())
            .filter(|&v| labels[v] >= k)
            .map(|v| sub.global(v as u32))
            .collect::<Vec<NodeId>>(),
    )
}
