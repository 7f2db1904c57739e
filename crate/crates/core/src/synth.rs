//! Seeded synthetic networks for tests, benchmarks and the acceptance suite.
//!
//! Every generator is a pure function of its arguments: the same seed gives
//! the same edge list on every platform.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Network, NodeId, NodeSubset};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn key(a: NodeId, b: NodeId) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

fn unkey(k: u64) -> (NodeId, NodeId) {
    ((k >> 32) as NodeId, k as NodeId)
}

/// Erdős–Rényi G(n, p) by scanning all pairs; meant for small `n`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Network {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for a in 0..n as NodeId {
        for b in a + 1..n as NodeId {
            if r.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Network::from_edges(n, edges)
}

/// Adds uniform random edges to `keys` until it holds `m` distinct ones.
fn top_up(keys: &mut Vec<u64>, n: usize, m: usize, r: &mut ChaCha8Rng) {
    keys.sort_unstable();
    keys.dedup();
    while keys.len() < m {
        let missing = m - keys.len();
        keys.extend((0..missing).filter_map(|_| {
            let a = r.gen_range(0..n as NodeId);
            let b = r.gen_range(0..n as NodeId);
            (a != b).then(|| key(a, b))
        }));
        keys.sort_unstable();
        keys.dedup();
    }
}

/// Uniform random simple graph with exactly `m` edges.
///
/// # Panics
///
/// If `m` exceeds the number of node pairs.
pub fn gnm(n: usize, m: usize, seed: u64) -> Network {
    let pairs = n as u128 * n.saturating_sub(1) as u128 / 2;
    assert!(m as u128 <= pairs, "{m} edges do not fit on {n} nodes");
    let mut keys = Vec::with_capacity(m);
    top_up(&mut keys, n, m, &mut rng(seed));
    Network::from_edges(n, keys.into_iter().map(unkey))
}

/// Disjoint dense blocks over a sparse random background. Block `i` has
/// `sizes[i]` consecutive nodes with internal edge probability `p_in`; the
/// background adds `background` uniform random edges over all nodes.
pub fn blocks(sizes: &[usize], p_in: f64, background: usize, seed: u64) -> Network {
    let n: usize = sizes.iter().sum();
    let mut r = rng(seed);
    let mut edges = Vec::new();
    let mut start = 0 as NodeId;
    for &size in sizes {
        for a in start..start + size as NodeId {
            for b in a + 1..start + size as NodeId {
                if r.gen_bool(p_in) {
                    edges.push((a, b));
                }
            }
        }
        start += size as NodeId;
    }
    if n >= 2 {
        for _ in 0..background {
            let a = r.gen_range(0..n as NodeId);
            let b = r.gen_range(0..n as NodeId);
            if a != b {
                edges.push((a, b));
            }
        }
    }
    Network::from_edges(n, edges)
}

/// The fixed network used for sweep determinism checks: blocks of 20 to 200
/// nodes totalling about 10,000, at density 0.3, with 10,000 background edges.
pub fn sweep_network(seed: u64) -> Network {
    let mut r = rng(seed);
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < 10_000 {
        let s = r.gen_range(20..=200).min(10_000 - total).max(1);
        sizes.push(s);
        total += s;
    }
    blocks(&sizes, 0.3, 10_000, r.gen())
}

/// Dense blocks of 20 to 180 nodes at density 0.14 over `n` nodes, topped up
/// with uniform random edges to exactly `m` edges. With `n = 10^6` about 70%
/// of the default `m = 10^7` edges fall inside blocks.
pub fn scale_network(n: usize, m: usize, seed: u64) -> Network {
    let mut r = rng(seed);
    let mut keys: Vec<u64> = Vec::with_capacity(m + m / 8);
    let mut start = 0usize;
    while start < n {
        let size = r.gen_range(20..=180).min(n - start);
        for a in start..start + size {
            for b in a + 1..start + size {
                if r.gen_bool(0.14) {
                    keys.push(key(a as NodeId, b as NodeId));
                }
            }
        }
        start += size;
    }
    keys.sort_unstable();
    keys.dedup();
    keys.truncate(m);
    top_up(&mut keys, n, m, &mut r);
    Network::from_edges(n, keys.into_iter().map(unkey))
}

/// Parameters for [`planted`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedConfig {
    pub cliques: usize,
    pub clique_size: usize,
    pub periphery_per_clique: usize,
    /// Number of distinct core nodes of its own clique each periphery node is
    /// joined to.
    pub periphery_wiring: usize,
    /// Number of random edges between nodes of different planted groups.
    pub noise_edges: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub network: Network,
    pub cores: Vec<NodeSubset>,
    pub periphery: Vec<NodeSubset>,
}

/// Disjoint cliques with pendant periphery and sparse noise between groups.
///
/// Group `i` is clique `i` plus its periphery. A noise edge joins two
/// different groups. Each periphery node receives at most one noise edge, and
/// noise between two clique nodes never links more than two cliques together,
/// so that every clique keeps its own neighbourhood dominant.
pub fn planted(cfg: &PlantedConfig) -> Planted {
    assert!(cfg.periphery_wiring <= cfg.clique_size, "periphery wiring exceeds clique size");
    let mut r = rng(cfg.seed);
    let group = cfg.clique_size + cfg.periphery_per_clique;
    let n = cfg.cliques * group;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    let mut cores = Vec::with_capacity(cfg.cliques);
    let mut periphery = Vec::with_capacity(cfg.cliques);
    let core_ids: Vec<NodeId> = (0..cfg.clique_size as NodeId).collect();
    for c in 0..cfg.cliques {
        let base = (c * group) as NodeId;
        let core: Vec<NodeId> = (base..base + cfg.clique_size as NodeId).collect();
        for (i, &a) in core.iter().enumerate() {
            edges.extend(core[i + 1..].iter().map(|&b| (a, b)));
        }
        let pend: Vec<NodeId> = (base + cfg.clique_size as NodeId..base + group as NodeId).collect();
        for &x in &pend {
            for &off in core_ids.choose_multiple(&mut r, cfg.periphery_wiring) {
                edges.push((x, base + off));
            }
        }
        cores.push(NodeSubset::from_sorted(core));
        periphery.push(NodeSubset::from_sorted(pend));
    }

    let group_of = |v: NodeId| v as usize / group;
    let is_core = |v: NodeId| (v as usize % group) < cfg.clique_size;
    let mut noisy_periphery = vec![false; n];
    // Union-find sizes over cliques joined by core-to-core noise.
    let mut parent: Vec<usize> = (0..cfg.cliques).collect();
    let mut size = vec![1usize; cfg.cliques];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut noise = std::collections::HashSet::new();
    let mut attempts = 0;
    while noise.len() < cfg.noise_edges && cfg.cliques >= 2 && attempts < 1000 * (cfg.noise_edges + 1) {
        attempts += 1;
        let a = r.gen_range(0..n as NodeId);
        let b = r.gen_range(0..n as NodeId);
        if group_of(a) == group_of(b) || noise.contains(&key(a, b)) {
            continue;
        }
        if [a, b].iter().any(|&v| !is_core(v) && noisy_periphery[v as usize]) {
            continue;
        }
        if is_core(a) && is_core(b) {
            let (ra, rb) = (find(&mut parent, group_of(a)), find(&mut parent, group_of(b)));
            if ra != rb {
                if size[ra] + size[rb] > 2 {
                    continue;
                }
                parent[ra] = rb;
                size[rb] += size[ra];
            }
        }
        for v in [a, b] {
            if !is_core(v) {
                noisy_periphery[v as usize] = true;
            }
        }
        noise.insert(key(a, b));
        edges.push((a, b));
    }
    Planted {
        network: Network::from_edges(n, edges),
        cores,
        periphery,
    }
}
