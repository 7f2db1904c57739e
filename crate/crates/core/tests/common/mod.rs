//! Brute-force oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls into the library's algorithms; only its graph
//! accessors are used to read a network back.

#![allow(dead_code)]

use std::collections::BTreeSet;

use kmp_cluster::{Cluster, Clustering, Network, NodeId, NodeSubset};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random simple graph whose shape varies with the seed: uniform, blocky,
/// or with a few dense pockets.
pub fn random_graph(r: &mut ChaCha8Rng, max_n: usize) -> (usize, Vec<(u32, u32)>) {
    let n = r.gen_range(2..=max_n);
    (n, random_graph_on(r, n))
}

pub fn random_graph_on(r: &mut ChaCha8Rng, n: usize) -> Vec<(u32, u32)> {
    let mut edges = BTreeSet::new();
    match r.gen_range(0..3) {
        0 => {
            let p = r.gen_range(0.01..0.5);
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if r.gen_bool(p) {
                        edges.insert((a, b));
                    }
                }
            }
        }
        1 => {
            let blocks = r.gen_range(1..=6);
            let p_in = r.gen_range(0.3..1.0);
            let p_out = r.gen_range(0.0..0.05);
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    let same = a as usize * blocks / n == b as usize * blocks / n;
                    if r.gen_bool(if same { p_in } else { p_out }) {
                        edges.insert((a, b));
                    }
                }
            }
        }
        _ => {
            let m = r.gen_range(0..=3 * n);
            for _ in 0..m {
                let (a, b) = (r.gen_range(0..n as u32), r.gen_range(0..n as u32));
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
            for _ in 0..if n >= 3 { r.gen_range(0..4) } else { 0 } {
                let size = r.gen_range(3..=n.min(16));
                let mut nodes: Vec<u32> = (0..n as u32).collect();
                nodes.shuffle(r);
                let pocket = &nodes[..size];
                for (i, &a) in pocket.iter().enumerate() {
                    for &b in &pocket[i + 1..] {
                        edges.insert((a.min(b), a.max(b)));
                    }
                }
            }
        }
    }
    edges.into_iter().collect()
}

pub fn adjacency(n: usize, edges: &[(u32, u32)]) -> Vec<BTreeSet<u32>> {
    let mut adj = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a != b {
            adj[a as usize].insert(b);
            adj[b as usize].insert(a);
        }
    }
    adj
}

pub fn network_adjacency(net: &Network) -> Vec<BTreeSet<u32>> {
    (0..net.len() as u32)
        .map(|v| net.neighbors_of(v).iter().copied().collect())
        .collect()
}

/// Coreness by definition: the largest `k` such that `v` survives repeated
/// deletion of nodes with fewer than `k` surviving neighbours, restricted to
/// `within`.
pub fn brute_coreness(adj: &[BTreeSet<u32>], within: &[u32]) -> Vec<u32> {
    let mut label = vec![0u32; within.len()];
    let mut k = 1;
    loop {
        let mut alive: BTreeSet<u32> = within.iter().copied().collect();
        loop {
            let doomed: Vec<u32> = alive
                .iter()
                .copied()
                .filter(|&v| adj[v as usize].iter().filter(|u| alive.contains(u)).count() < k as usize)
                .collect();
            if doomed.is_empty() {
                break;
            }
            for v in doomed {
                alive.remove(&v);
            }
        }
        if alive.is_empty() {
            return label;
        }
        for (i, v) in within.iter().enumerate() {
            if alive.contains(v) {
                label[i] = k;
            }
        }
        k += 1;
    }
}

/// Connected components of `within` by union-find, sorted by smallest member.
pub fn union_find_components(adj: &[BTreeSet<u32>], within: &[u32]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let inside: BTreeSet<u32> = within.iter().copied().collect();
    for &a in within {
        for &b in &adj[a as usize] {
            if inside.contains(&b) {
                let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<u32>> = Default::default();
    for &v in &inside {
        groups.entry(find(&mut parent, v as usize)).or_default().push(v);
    }
    let mut out: Vec<Vec<u32>> = groups.into_values().collect();
    out.sort();
    out
}

pub fn edges_within(adj: &[BTreeSet<u32>], s: &BTreeSet<u32>) -> u64 {
    s.iter()
        .map(|&v| adj[v as usize].iter().filter(|u| s.contains(u)).count() as u64)
        .sum::<u64>()
        / 2
}

/// Exact single-cluster modularity `l_s/L - (d_s/2L)^2`; zero when `L = 0`.
pub fn rational_modularity(adj: &[BTreeSet<u32>], s: &BTreeSet<u32>) -> Ratio<i128> {
    let total: i128 = adj.iter().map(|a| a.len() as i128).sum::<i128>() / 2;
    if total == 0 {
        return Ratio::from_integer(0);
    }
    let ls = edges_within(adj, s) as i128;
    let ds: i128 = s.iter().map(|&v| adj[v as usize].len() as i128).sum();
    Ratio::new(ls, total) - Ratio::new(ds * ds, 4 * total * total)
}

/// Normalized cut `cut/(E1+cut) + cut/(E2+cut)` with `E_i` the edges inside
/// part `i`; `None` stands for an infinite value.
pub fn rational_ncut(adj: &[BTreeSet<u32>], a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> Option<Ratio<i128>> {
    let e1 = edges_within(adj, a) as i128;
    let e2 = edges_within(adj, b) as i128;
    let cut: i128 = a
        .iter()
        .map(|&v| adj[v as usize].iter().filter(|u| b.contains(u)).count() as i128)
        .sum();
    if e1 + cut == 0 || e2 + cut == 0 {
        return None;
    }
    Some(Ratio::new(cut, e1 + cut) + Ratio::new(cut, e2 + cut))
}

/// Minimum normalized cut over all `2^(n-1) - 1` bipartitions.
pub fn exhaustive_min_ncut(adj: &[BTreeSet<u32>], cluster: &[u32]) -> Option<Ratio<i128>> {
    let n = cluster.len();
    assert!((2..=20).contains(&n));
    let mut best: Option<Ratio<i128>> = None;
    for mask in 0u32..(1 << (n - 1)) {
        // The last node always sits in the second part.
        let a: BTreeSet<u32> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| cluster[i]).collect();
        if a.is_empty() {
            continue;
        }
        let b: BTreeSet<u32> = cluster.iter().copied().filter(|v| !a.contains(v)).collect();
        if let Some(v) = rational_ncut(adj, &a, &b) {
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best
}

/// Direct check of k-, m- and p-validity of one cluster.
pub fn brute_kmp_valid(adj: &[BTreeSet<u32>], cluster: &Cluster, k: u32, p: u32) -> bool {
    let core: BTreeSet<u32> = cluster.core().iter().copied().collect();
    if core.is_empty() {
        return false;
    }
    let core_deg = |v: u32| adj[v as usize].iter().filter(|u| core.contains(u)).count() as u32;
    let k_valid = core.iter().all(|&v| core_deg(v) >= k);
    let p_valid = cluster.noncore().iter().all(|&v| core_deg(v) >= p);
    let within: Vec<u32> = core.iter().copied().collect();
    let connected = union_find_components(adj, &within).len() == 1;
    let positive = rational_modularity(adj, &core) > Ratio::from_integer(0);
    k_valid && p_valid && connected && positive
}

/// A random partition of a random subset of nodes into clusters of at least
/// two nodes, every member core.
pub fn random_clustering(r: &mut ChaCha8Rng, n: usize) -> Clustering {
    let mut nodes: Vec<u32> = (0..n as u32).filter(|_| r.gen_bool(0.8)).collect();
    nodes.shuffle(r);
    let parts = r.gen_range(1..=8usize);
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); parts];
    for v in nodes {
        groups[r.gen_range(0..parts)].push(v);
    }
    let clusters = groups
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| Cluster::all_core(NodeSubset::from(g)))
        .collect();
    Clustering::new(n, clusters).unwrap()
}

/// A contiguous-block clustering: node `v` goes to cluster `v * parts / n`.
pub fn block_clustering(n: usize, parts: usize) -> Clustering {
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); parts];
    for v in 0..n {
        groups[v * parts / n].push(v as u32);
    }
    let clusters = groups
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| Cluster::all_core(NodeSubset::from(g)))
        .collect();
    Clustering::new(n, clusters).unwrap()
}

pub fn clique(offset: u32, size: u32) -> Vec<(u32, u32)> {
    (0..size)
        .flat_map(|a| (a + 1..size).map(move |b| (offset + a, offset + b)))
        .collect()
}

/// Two `size`-cliques joined by one bridge edge.
pub fn bridged_cliques(size: u32) -> (Network, NodeSubset, NodeSubset) {
    let mut edges = clique(0, size);
    edges.extend(clique(size, size));
    edges.push((size - 1, size));
    let net = Network::from_edges(2 * size as usize, edges);
    (net, (0..size).collect(), (size..2 * size).collect())
}

pub fn members(ids: &[NodeId]) -> NodeSubset {
    NodeSubset::from(ids.to_vec())
}
