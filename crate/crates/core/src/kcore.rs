//! k-core labelling, simple k-core clustering and Iterative k-core
//! clustering (IKC).

use log::debug;

use crate::cluster::{Cluster, Clustering};
use crate::graph::{components, Adjacency, Network, NodeSubset, Subgraph};
use crate::modularity::ModularityTerms;

/// Coreness of every node of a subset, computed on the induced subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreLabeling {
    nodes: NodeSubset,
    labels: Vec<u32>,
}

impl CoreLabeling {
    pub fn nodes(&self) -> &NodeSubset {
        &self.nodes
    }

    /// Labels aligned with [`CoreLabeling::nodes`].
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: u32) -> Option<u32> {
        self.nodes.rank(v).map(|i| self.labels[i])
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Nodes with label at least `k`.
    pub fn at_least(&self, k: u32) -> NodeSubset {
        NodeSubset::from_sorted(
            self.nodes
                .iter()
                .zip(&self.labels)
                .filter(|(_, &l)| l >= k)
                .map(|(&v, _)| v)
                .collect(),
        )
    }
}

/// Coreness by bucketed minimum-degree peeling (Batagelj–Zaversnik), over
/// the nodes with `alive[v]` set, or all nodes. Dead nodes get label 0.
pub fn peel<G: Adjacency>(g: &G, alive: Option<&[bool]>) -> Vec<u32> {
    let n = g.node_count();
    let is_alive = |v: usize| alive.is_none_or(|a| a[v]);
    let mut deg = vec![0u32; n];
    let mut max_deg = 0u32;
    let mut count = 0usize;
    for v in 0..n {
        if is_alive(v) {
            let d = match alive {
                None => g.degree_of(v),
                Some(a) => g.neighbors(v).iter().filter(|&&u| a[u as usize]).count(),
            } as u32;
            deg[v] = d;
            max_deg = max_deg.max(d);
            count += 1;
        }
    }
    let mut bin = vec![0usize; max_deg as usize + 2];
    for v in 0..n {
        if is_alive(v) {
            bin[deg[v] as usize] += 1;
        }
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let c = *b;
        *b = start;
        start += c;
    }
    let mut vert = vec![0u32; count];
    let mut pos = vec![0usize; n];
    for v in 0..n {
        if is_alive(v) {
            let d = deg[v] as usize;
            pos[v] = bin[d];
            vert[bin[d]] = v as u32;
            bin[d] += 1;
        }
    }
    for d in (1..bin.len()).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;

    for i in 0..count {
        let v = vert[i] as usize;
        let dv = deg[v];
        for &u in g.neighbors(v) {
            let u = u as usize;
            if !is_alive(u) || deg[u] <= dv {
                continue;
            }
            let du = deg[u] as usize;
            let pu = pos[u];
            let pw = bin[du];
            let w = vert[pw] as usize;
            if u != w {
                vert.swap(pu, pw);
                pos[u] = pw;
                pos[w] = pu;
            }
            bin[du] += 1;
            deg[u] -= 1;
        }
    }
    deg
}

/// Coreness of every node in `within`, relative to the subgraph it induces.
pub fn core_labels(net: &Network, within: &NodeSubset) -> CoreLabeling {
    let labels = if within.len() == net.len() {
        peel(net, None)
    } else {
        peel(&Subgraph::induced(net, within), None)
    };
    CoreLabeling {
        nodes: within.clone(),
        labels,
    }
}

pub fn degeneracy(net: &Network) -> u32 {
    peel(net, None).into_iter().max().unwrap_or(0)
}

/// The connected components of `{v : coreness(v) >= k}`.
///
/// With `k = 0` every node qualifies, so isolated nodes come back as their
/// own components and are then dropped as singletons; on a network without
/// isolated nodes this is the same as `k = 1`.
pub fn kcore_clusters(net: &Network, k: u32) -> Clustering {
    let labels = peel(net, None);
    let alive: Vec<bool> = labels.iter().map(|&l| l >= k).collect();
    let clusters = components(net, Some(&alive))
        .into_iter()
        .map(|c| Cluster::all_core(NodeSubset::from_sorted(c)))
        .collect();
    Clustering::from_disjoint(net.len(), clusters)
}

/// Iterative k-core clustering.
///
/// Repeatedly labels the residual network, takes the components of the
/// top-labelled nodes (the `L`-cores), keeps those with positive modularity
/// against the original network, and deletes all of them. Stops once the top
/// label drops below `k`.
///
/// # Panics
///
/// If `k == 0`.
pub fn ikc(net: &Network, k: u32) -> Clustering {
    assert!(k >= 1, "ikc requires k >= 1");
    let n = net.len();
    let total_edges = net.edge_count() as u64;
    let mut alive = vec![true; n];
    let mut remaining = n;
    let mut clusters = Vec::new();
    while remaining > 0 {
        let labels = peel(net, Some(&alive));
        let top = (0..n)
            .filter(|&v| alive[v])
            .map(|v| labels[v])
            .max()
            .unwrap_or(0);
        if top < k {
            break;
        }
        let in_top: Vec<bool> = (0..n).map(|v| alive[v] && labels[v] == top).collect();
        let cores = components(net, Some(&in_top));
        let mut kept = 0;
        for core in &cores {
            let core = NodeSubset::from_sorted(core.clone());
            let terms = ModularityTerms {
                internal_edges: net.induced_edge_count(&core) as u64,
                degree_sum: net.degree_sum(&core) as u64,
                total_edges,
            };
            for &v in &core {
                alive[v as usize] = false;
            }
            remaining -= core.len();
            if terms.is_positive() {
                clusters.push(Cluster::all_core(core));
                kept += 1;
            }
        }
        debug!("ikc level {top}: {} cores, {kept} kept", cores.len());
    }
    Clustering::from_disjoint(n, clusters)
}
