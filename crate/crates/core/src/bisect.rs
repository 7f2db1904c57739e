//! Stage 2: splitting large clusters with a normalized-cut bipartitioner.
//!
//! The cut objective for a split of `C` into `C1`, `C2` is
//! `links(C1,C2)/links(C1,C) + links(C1,C2)/links(C2,C)`, where
//! `links(A,C)` counts edges of the induced subgraph with at least one
//! endpoint in `A`. A split is seeded by a sweep over a Fiedler-direction
//! estimate. With local search enabled, that seed and further seeds from
//! greedy region growing are each refined by single-node boundary moves, and
//! the best result wins.

use std::cmp::Ordering;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{Cluster, Clustering};
use crate::error::{Error, Result};
use crate::graph::{components, Adjacency, Network, NodeSubset, Subgraph};
use crate::modularity::ModularityTerms;
use crate::parse::core_components;

/// Power-method steps for the Fiedler-direction estimate.
const FIEDLER_ITERS: usize = 200;
const SEED: u64 = 0x6b6d_705f_6375_7473;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BisectConfig {
    /// Local-search sweeps after the spectral seed; 0 disables refinement.
    pub local_search_iters: u32,
    /// Round cap for [`iterative_split`].
    pub max_rounds: u32,
    pub k: u32,
}

impl BisectConfig {
    pub fn new(k: u32) -> Self {
        BisectConfig {
            local_search_iters: 0,
            max_rounds: 10,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Normalized-cut value as an exact fraction. `den == 0` encodes +∞, for a
/// part with no incident edges inside the cluster.
#[derive(Debug, Clone, Copy)]
struct CutValue {
    num: u128,
    den: u128,
}

impl CutValue {
    fn from_counts(cut: u64, internal_a: u64, internal_b: u64) -> Self {
        let va = (internal_a + cut) as u128;
        let vb = (internal_b + cut) as u128;
        if va == 0 || vb == 0 {
            return CutValue { num: 1, den: 0 };
        }
        CutValue {
            num: cut as u128 * (va + vb),
            den: va * vb,
        }
    }

    fn as_f64(self) -> f64 {
        if self.den == 0 {
            f64::INFINITY
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

impl PartialEq for CutValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CutValue {}

impl PartialOrd for CutValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CutValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.den == 0, other.den == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Greater,
            (false, true) => Ordering::Less,
            (false, false) => (self.num * other.den).cmp(&(other.num * self.den)),
        }
    }
}

/// Side assignment over a subgraph with running edge counts.
struct Split {
    side_a: Vec<bool>,
    size_a: usize,
    cut: u64,
    internal_a: u64,
    internal_b: u64,
}

impl Split {
    fn new<G: Adjacency>(g: &G, side_a: Vec<bool>) -> Self {
        let (mut cut, mut internal_a, mut internal_b) = (0, 0, 0);
        for v in 0..g.node_count() {
            for &u in g.neighbors(v) {
                let u = u as usize;
                if u <= v {
                    continue;
                }
                match (side_a[v], side_a[u]) {
                    (true, true) => internal_a += 1,
                    (false, false) => internal_b += 1,
                    _ => cut += 1,
                }
            }
        }
        let size_a = side_a.iter().filter(|&&s| s).count();
        Split {
            side_a,
            size_a,
            cut,
            internal_a,
            internal_b,
        }
    }

    fn value(&self) -> CutValue {
        CutValue::from_counts(self.cut, self.internal_a, self.internal_b)
    }

    /// Neighbors of `v` on its own side and on the other side.
    fn links<G: Adjacency>(&self, g: &G, v: usize) -> (u64, u64) {
        let mine = self.side_a[v];
        let same = g
            .neighbors(v)
            .iter()
            .filter(|&&u| self.side_a[u as usize] == mine)
            .count() as u64;
        (same, g.degree_of(v) as u64 - same)
    }

    /// Counts after moving `v` across the cut: (cut, internal_a, internal_b).
    fn moved_counts(&self, v: usize, same: u64, other: u64) -> (u64, u64, u64) {
        let cut = self.cut - other + same;
        if self.side_a[v] {
            (cut, self.internal_a - same, self.internal_b + other)
        } else {
            (cut, self.internal_a + other, self.internal_b - same)
        }
    }
}

/// Normalized cut of the split `c1 | c2` of the cluster `c1 ∪ c2`.
/// Returns `+∞` when a part has no incident edge inside the cluster.
pub fn normalized_cut(net: &Network, c1: &NodeSubset, c2: &NodeSubset) -> Result<f64> {
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::Contract("normalized cut of an empty part".into()));
    }
    if !c1.is_disjoint(c2) {
        return Err(Error::Contract("normalized cut parts overlap".into()));
    }
    let whole = c1.union(c2);
    let sub = Subgraph::induced(net, &whole);
    let side_a = whole.iter().map(|&v| c1.contains(v)).collect();
    Ok(Split::new(&sub, side_a).value().as_f64())
}

/// Splits `cluster` into two nonempty parts approximately minimizing the
/// normalized cut. The smaller-id part comes first.
pub fn bipartition(
    net: &Network,
    cluster: &NodeSubset,
    cfg: &BisectConfig,
) -> Result<(NodeSubset, NodeSubset)> {
    if cluster.len() < 2 {
        return Err(Error::Contract(format!(
            "cannot bipartition a cluster of {} node(s)",
            cluster.len()
        )));
    }
    let sub = Subgraph::induced(net, cluster);
    let side_a = split_subgraph(&sub, cfg.local_search_iters);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, &v) in cluster.iter().enumerate() {
        if side_a[i] {
            a.push(v);
        } else {
            b.push(v);
        }
    }
    let (a, b) = (NodeSubset::from_sorted(a), NodeSubset::from_sorted(b));
    Ok(if a.smallest() < b.smallest() { (a, b) } else { (b, a) })
}

fn split_subgraph(sub: &Subgraph, local_search_iters: u32) -> Vec<bool> {
    let n = sub.len();
    if n == 2 {
        return vec![true, false];
    }
    let comps = components(sub, None);
    if comps.len() > 1 {
        // Two components with edges give a zero-cost cut.
        let mut with_edges = comps.iter().filter(|c| c.len() > 1);
        if let (Some(first), Some(_)) = (with_edges.next(), with_edges.next()) {
            let mut side_a = vec![false; n];
            for &v in first {
                side_a[v as usize] = true;
            }
            return side_a;
        }
    }
    let order = fiedler_order(sub);
    let mut best = Split::new(sub, sweep(sub, &order));
    if local_search_iters == 0 {
        return best.side_a;
    }
    local_search(sub, &mut best, local_search_iters);
    let mut best_value = best.value();
    for start in growth_starts(&order) {
        for greedy in [Growth::Links, Growth::Balance] {
            let mut split = Split::new(sub, sweep(sub, &growth_order(sub, start, greedy)));
            local_search(sub, &mut split, local_search_iters);
            let value = split.value();
            if value < best_value {
                best = split;
                best_value = value;
            }
        }
    }
    best.side_a
}

/// Every node of a small cluster; otherwise eight nodes spread evenly over
/// the spectral order, including both ends.
fn growth_starts(order: &[u32]) -> Vec<u32> {
    const ALL_STARTS_UP_TO: usize = 64;
    const STARTS: usize = 8;
    let n = order.len();
    if n <= ALL_STARTS_UP_TO {
        return (0..n as u32).collect();
    }
    (0..STARTS).map(|i| order[i * (n - 1) / (STARTS - 1)]).collect()
}

#[derive(Clone, Copy)]
enum Growth {
    /// Most neighbors already added.
    Links,
    /// Neighbors already added minus neighbors not yet added.
    Balance,
}

/// Greedy region growing from `start`, ties to the lower id. Unreached nodes
/// follow in id order.
fn growth_order(sub: &Subgraph, start: u32, greedy: Growth) -> Vec<u32> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = sub.len();
    let mut added = vec![false; n];
    let mut links = vec![0i64; n];
    let score = |v: usize, links: i64| match greedy {
        Growth::Links => links,
        Growth::Balance => 2 * links - sub.degree_of(v) as i64,
    };
    let mut heap = BinaryHeap::from([(score(start as usize, 0), Reverse(start))]);
    let mut order = Vec::with_capacity(n);
    while let Some((priority, Reverse(v))) = heap.pop() {
        let vi = v as usize;
        if added[vi] || priority != score(vi, links[vi]) {
            continue;
        }
        added[vi] = true;
        order.push(v);
        for &u in sub.neighbors(vi) {
            let ui = u as usize;
            if !added[ui] {
                links[ui] += 1;
                heap.push((score(ui, links[ui]), Reverse(u)));
            }
        }
    }
    order.extend((0..n as u32).filter(|&v| !added[v as usize]));
    order
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn orthogonalize(x: &mut [f64], unit: &[f64]) {
    let dot: f64 = x.iter().zip(unit).map(|(a, b)| a * b).sum();
    for (xi, ui) in x.iter_mut().zip(unit) {
        *xi -= dot * ui;
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

/// Nodes ordered by the second eigenvector of the lazy normalized adjacency
/// `(I + D^-1/2 A D^-1/2)/2`, scaled back by `D^-1/2`; ties by node id.
fn fiedler_order(sub: &Subgraph) -> Vec<u32> {
    let n = sub.len();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| match sub.degree_of(v) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();
    let mut top: Vec<f64> = (0..n).map(|v| (sub.degree_of(v) as f64).sqrt()).collect();
    normalize(&mut top);
    let mut x: Vec<f64> = (0..n)
        .map(|v| {
            let h = splitmix64(SEED ^ sub.global(v as u32) as u64);
            (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect();
    orthogonalize(&mut x, &top);
    normalize(&mut x);
    let mut scaled = vec![0.0; n];
    let mut next = vec![0.0; n];
    for _ in 0..FIEDLER_ITERS {
        for v in 0..n {
            scaled[v] = x[v] * inv_sqrt[v];
        }
        for v in 0..n {
            let s: f64 = sub.neighbors(v).iter().map(|&u| scaled[u as usize]).sum();
            next[v] = 0.5 * (x[v] + inv_sqrt[v] * s);
        }
        orthogonalize(&mut next, &top);
        if normalize(&mut next) < 1e-300 {
            break;
        }
        std::mem::swap(&mut x, &mut next);
    }
    let f: Vec<f64> = (0..n).map(|v| x[v] * inv_sqrt[v]).collect();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| f[a as usize].total_cmp(&f[b as usize]).then(a.cmp(&b)));
    order
}

/// Best prefix split of `order` under the normalized cut; the sign split of
/// the Fiedler estimate is one of the candidates.
fn sweep(sub: &Subgraph, order: &[u32]) -> Vec<bool> {
    let n = order.len();
    let mut side_a = vec![false; n];
    let (mut cut, mut internal_a, mut internal_b) = (0u64, 0u64, sub.edge_count() as u64);
    let mut best: Option<(usize, CutValue)> = None;
    for (t, &v) in order[..n - 1].iter().enumerate() {
        let v = v as usize;
        let into_a = sub
            .neighbors(v)
            .iter()
            .filter(|&&u| side_a[u as usize])
            .count() as u64;
        let into_b = sub.degree_of(v) as u64 - into_a;
        side_a[v] = true;
        internal_a += into_a;
        internal_b -= into_b;
        cut = cut - into_a + into_b;
        let value = CutValue::from_counts(cut, internal_a, internal_b);
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((t, value));
        }
    }
    let prefix = best.map_or(1, |(t, _)| t + 1);
    let mut side_a = vec![false; n];
    for &v in &order[..prefix] {
        side_a[v as usize] = true;
    }
    side_a
}

/// First-improvement sweeps of single boundary-node moves. A move is taken
/// only if it strictly lowers the objective and leaves both parts nonempty.
fn local_search(sub: &Subgraph, split: &mut Split, max_sweeps: u32) {
    let n = sub.len();
    let mut current = split.value();
    for _ in 0..max_sweeps {
        let mut moved = false;
        for v in 0..n {
            let from_a = split.side_a[v];
            let source_size = if from_a { split.size_a } else { n - split.size_a };
            if source_size == 1 {
                continue;
            }
            let (same, other) = split.links(sub, v);
            if other == 0 {
                continue;
            }
            let (cut, ia, ib) = split.moved_counts(v, same, other);
            let candidate = CutValue::from_counts(cut, ia, ib);
            if candidate < current {
                split.side_a[v] = !from_a;
                split.size_a = if from_a { split.size_a - 1 } else { split.size_a + 1 };
                split.cut = cut;
                split.internal_a = ia;
                split.internal_b = ib;
                current = candidate;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Outcome of a Stage-2 pass: the new clustering plus every input node that
/// ended up in no output cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOutcome {
    pub clustering: Clustering,
    pub discarded: NodeSubset,
}

/// All-core k-validity plus positive modularity.
fn qualifies(net: &Network, part: &NodeSubset, k: u32) -> bool {
    if part.len() <= k as usize {
        return false;
    }
    let sub = Subgraph::induced(net, part);
    let k_valid = (0..sub.len()).all(|v| sub.degree_of(v) >= k as usize);
    k_valid
        && ModularityTerms {
            internal_edges: sub.edge_count() as u64,
            degree_sum: net.degree_sum(part) as u64,
            total_edges: net.edge_count() as u64,
        }
        .is_positive()
}

enum Step {
    Final(NodeSubset),
    Requeue(NodeSubset),
    Discard(NodeSubset),
}

fn recursive_step(net: &Network, c: &NodeSubset, original: bool, cfg: &BisectConfig) -> Vec<Step> {
    let k = cfg.k;
    // Input clusters fall back to themselves; requeued remnants must qualify.
    let keep_or_drop = |s: &NodeSubset| {
        if original || qualifies(net, s, k) {
            Step::Final(s.clone())
        } else {
            Step::Discard(s.clone())
        }
    };
    if c.len() < 2 {
        return vec![keep_or_drop(c)];
    }
    let (a1, a2) = bipartition(net, c, cfg).expect("cluster has at least two nodes");
    match (qualifies(net, &a1, k), qualifies(net, &a2, k)) {
        (true, true) => vec![Step::Final(a1), Step::Final(a2)],
        (false, false) => vec![keep_or_drop(c)],
        (q1, _) => {
            let (good, other) = if q1 { (a1, a2) } else { (a2, a1) };
            let rest = if other.len() > k as usize {
                Step::Requeue(other)
            } else {
                Step::Discard(other)
            };
            vec![Step::Final(good), rest]
        }
    }
}

/// Recursive splitting. Each qualifying part (k-valid, positive modularity)
/// is final. When neither part qualifies, an input cluster is final as is,
/// while a remnant of an earlier split is kept only if it qualifies itself.
/// When exactly one part qualifies the other is split again, or discarded
/// once it is too small to ever be k-valid.
pub fn recursive_split(net: &Network, clustering: &Clustering, cfg: &BisectConfig) -> SplitOutcome {
    let mut queue: Vec<(NodeSubset, bool)> = clustering
        .clusters()
        .iter()
        .map(|c| (c.members(), true))
        .collect();
    let mut finals = Vec::new();
    let mut discarded = Vec::new();
    let mut wave = 0;
    while !queue.is_empty() {
        let steps: Vec<Vec<Step>> = queue
            .par_iter()
            .map(|(c, original)| recursive_step(net, c, *original, cfg))
            .collect();
        let mut next = Vec::new();
        for step in steps.into_iter().flatten() {
            match step {
                Step::Final(s) => finals.push(Cluster::all_core(s)),
                Step::Requeue(s) => next.push((s, false)),
                Step::Discard(s) => discarded.extend_from_slice(&s),
            }
        }
        wave += 1;
        debug!("recursive split wave {wave}: {} requeued", next.len());
        queue = next;
    }
    SplitOutcome {
        clustering: Clustering::from_disjoint(clustering.universe(), finals),
        discarded: discarded.into(),
    }
}

fn iterative_step(net: &Network, c: &NodeSubset, cfg: &BisectConfig) -> Vec<NodeSubset> {
    if c.len() < 2 {
        return Vec::new();
    }
    let (a1, a2) = bipartition(net, c, cfg).expect("cluster has at least two nodes");
    let mut subs = core_components(net, &a1, cfg.k);
    subs.extend(core_components(net, &a2, cfg.k));
    subs
}

/// Iterative splitting for at most `cfg.max_rounds` rounds. Each part of a
/// split is reduced to the positive-modularity components of its k-core;
/// those advance. A cluster with no advancing sub-cluster is final.
pub fn iterative_split(net: &Network, clustering: &Clustering, cfg: &BisectConfig) -> SplitOutcome {
    let mut active: Vec<NodeSubset> = clustering.clusters().iter().map(Cluster::members).collect();
    let mut finals = Vec::new();
    let mut discarded = Vec::new();
    for round in 0..cfg.max_rounds {
        if active.is_empty() {
            break;
        }
        let results: Vec<Vec<NodeSubset>> = active
            .par_iter()
            .map(|c| iterative_step(net, c, cfg))
            .collect();
        let mut next = Vec::new();
        for (c, subs) in active.into_iter().zip(results) {
            if subs.is_empty() {
                finals.push(Cluster::all_core(c));
                continue;
            }
            let kept: NodeSubset = subs.iter().flat_map(|s| s.iter().copied()).collect();
            discarded.extend(c.iter().filter(|&&v| !kept.contains(v)));
            next.extend(subs);
        }
        debug!("iterative split round {}: {} active", round + 1, next.len());
        active = next;
    }
    finals.extend(active.into_iter().map(Cluster::all_core));
    SplitOutcome {
        clustering: Clustering::from_disjoint(clustering.universe(), finals),
        discarded: discarded.into(),
    }
}
