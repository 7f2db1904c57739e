//! Undirected simple citation network in compressed sparse row form.
//!
//! Nodes carry dense internal ids `0..n`; the external publication ids read
//! from the edge list are kept in an [`IdMap`] side table. Citation direction
//! is dropped at load time.

use std::borrow::Cow;
use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Deref;
use std::path::Path;

use log::info;

use crate::error::{Error, Result};

/// Dense internal node id.
pub type NodeId = u32;

/// Read access to an adjacency structure over local indices `0..node_count()`.
pub trait Adjacency {
    fn node_count(&self) -> usize;

    /// Sorted neighbor list of `v`.
    fn neighbors(&self, v: usize) -> &[u32];

    fn degree_of(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }
}

/// A sorted, duplicate-free set of node ids.
///
/// Membership is a binary search; use [`NodeSubset::mask`] where many
/// constant-time lookups against one set are needed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSubset(Vec<NodeId>);

impl NodeSubset {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Wraps a vector that is already strictly increasing.
    pub fn from_sorted(members: Vec<NodeId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self(members)
    }

    pub fn full(n: usize) -> Self {
        Self((0..n as NodeId).collect())
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Position of `v` within the subset, if present.
    pub fn rank(&self, v: NodeId) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn smallest(&self) -> Option<NodeId> {
        self.0.first().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<NodeId> {
        self.0
    }

    /// Boolean membership mask over `0..n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.0 {
            mask[v as usize] = true;
        }
        mask
    }

    pub fn union(&self, other: &NodeSubset) -> NodeSubset {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            if a < b {
                out.push(a);
                i += 1;
            } else if b < a {
                out.push(b);
                j += 1;
            } else {
                out.push(a);
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        NodeSubset(out)
    }

    pub fn is_disjoint(&self, other: &NodeSubset) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }
}

impl From<Vec<NodeId>> for NodeSubset {
    fn from(mut members: Vec<NodeId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }
}

impl FromIterator<NodeId> for NodeSubset {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        iter.into_iter().collect::<Vec<_>>().into()
    }
}

impl Deref for NodeSubset {
    type Target = [NodeId];

    fn deref(&self) -> &[NodeId] {
        &self.0
    }
}

impl<'a> IntoIterator for &'a NodeSubset {
    type Item = &'a NodeId;
    type IntoIter = std::slice::Iter<'a, NodeId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Bijection between external publication ids and dense internal ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdMap {
    /// External id of node `v` is the decimal string of `v`.
    Identity(usize),
    Named {
        names: Vec<String>,
        index: HashMap<String, NodeId>,
    },
}

impl IdMap {
    pub fn external(&self, v: NodeId) -> Cow<'_, str> {
        match self {
            IdMap::Identity(_) => Cow::Owned(v.to_string()),
            IdMap::Named { names, .. } => Cow::Borrowed(&names[v as usize]),
        }
    }

    pub fn internal(&self, external: &str) -> Option<NodeId> {
        match self {
            IdMap::Identity(n) => external
                .parse::<NodeId>()
                .ok()
                .filter(|&v| (v as usize) < *n && v.to_string() == external),
            IdMap::Named { index, .. } => index.get(external).copied(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            IdMap::Identity(n) => *n,
            IdMap::Named { names, .. } => names.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Immutable undirected simple graph.
#[derive(Debug, Clone)]
pub struct Network {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    ids: IdMap,
}

/// Counts gathered while reading an edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub nodes: usize,
    pub edges: usize,
}

impl Network {
    /// Builds a network over `0..n` with identity external ids. Self-loops and
    /// repeated edges (in either orientation) are dropped.
    ///
    /// # Panics
    ///
    /// If an endpoint is `>= n`.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let (keys, _, _) = canonical_edges(edges.into_iter().inspect(|&(u, v)| {
            assert!(
                (u as usize) < n && (v as usize) < n,
                "edge ({u}, {v}) out of range for {n} nodes"
            );
        }));
        Self::from_keys(n, &keys, IdMap::Identity(n))
    }

    fn from_keys(n: usize, keys: &[u64], ids: IdMap) -> Self {
        let mut degree = vec![0usize; n + 1];
        for &key in keys {
            let (u, v) = split_key(key);
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        for d in degree.iter().take(n) {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut cursor = offsets.clone();
        let mut targets = vec![0 as NodeId; acc];
        // Keys are sorted by (min, max), which leaves every neighbor list sorted.
        for &key in keys {
            let (u, v) = split_key(key);
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        Network {
            offsets,
            targets,
            ids,
        }
    }

    /// Reads a whitespace-separated `source target` edge list. Lines starting
    /// with `#` and blank lines are skipped. Internal ids are assigned in order
    /// of first appearance.
    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Self, LoadReport)> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut raw: Vec<(NodeId, NodeId)> = Vec::new();
        let mut line = String::new();
        let mut lineno = 0usize;
        let mut intern = |token: &str, names: &mut Vec<String>| -> NodeId {
            match index.entry(token.to_owned()) {
                Entry::Occupied(e) => *e.get(),
                Entry::Vacant(e) => {
                    let id = names.len() as NodeId;
                    names.push(token.to_owned());
                    e.insert(id);
                    id
                }
            }
        };
        loop {
            line.clear();
            let read = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
            if read == 0 {
                break;
            }
            lineno += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: lineno,
                    message: format!("expected `source<TAB>target`, got {trimmed:?}"),
                });
            };
            let u = intern(a, &mut names);
            let v = intern(b, &mut names);
            raw.push((u, v));
        }
        if raw.is_empty() {
            return Err(Error::EmptyEdgeList(path.to_owned()));
        }
        let lines = raw.len();
        let (keys, self_loops, duplicate_edges) = canonical_edges(raw.into_iter());
        let n = names.len();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as NodeId))
            .collect();
        let net = Self::from_keys(n, &keys, IdMap::Named { names, index });
        let report = LoadReport {
            lines,
            self_loops,
            duplicate_edges,
            nodes: n,
            edges: net.edge_count(),
        };
        info!(
            "loaded {}: {} nodes, {} edges ({} self-loops, {} duplicate edges dropped)",
            path.display(),
            report.nodes,
            report.edges,
            report.self_loops,
            report.duplicate_edges
        );
        Ok((net, report))
    }

    /// Writes one `source<TAB>target` line per undirected edge, `source < target`
    /// by internal id.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for u in 0..self.len() as NodeId {
            for &v in self.neighbors_of(u) {
                if u < v {
                    writeln!(out, "{}\t{}", self.ids.external(u), self.ids.external(v))
                        .map_err(|e| Error::io(path, e))?;
                }
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Writes the `external_id<TAB>internal_id` table.
    pub fn write_id_map(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for v in 0..self.len() as NodeId {
            writeln!(out, "{}\t{}", self.ids.external(v), v).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn ids(&self) -> &IdMap {
        &self.ids
    }

    pub fn neighbors_of(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> Result<usize> {
        if (v as usize) < self.len() {
            Ok(self.neighbors_of(v).len())
        } else {
            Err(Error::NodeOutOfRange {
                index: v as usize,
                len: self.len(),
            })
        }
    }

    /// Unchecked degree for hot loops.
    pub(crate) fn deg(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn all_nodes(&self) -> NodeSubset {
        NodeSubset::full(self.len())
    }

    /// Connected components of the subgraph induced by `within`, each sorted,
    /// ordered by smallest member.
    pub fn connected_components(&self, within: &NodeSubset) -> Vec<NodeSubset> {
        if within.len() == self.len() {
            return components(self, None)
                .into_iter()
                .map(NodeSubset::from_sorted)
                .collect();
        }
        let sub = Subgraph::induced(self, within);
        components(&sub, None)
            .into_iter()
            .map(|c| sub.to_global(&c))
            .collect()
    }

    /// Number of edges with both endpoints in `s`.
    pub fn induced_edge_count(&self, s: &NodeSubset) -> usize {
        let twice: usize = s
            .iter()
            .map(|&v| {
                self.neighbors_of(v)
                    .iter()
                    .filter(|&&u| s.contains(u))
                    .count()
            })
            .sum();
        twice / 2
    }

    /// Sum of full-network degrees over `s`.
    pub fn degree_sum(&self, s: &[NodeId]) -> usize {
        s.iter().map(|&v| self.deg(v)).sum()
    }
}

impl Adjacency for Network {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Subgraph induced by a node subset, re-indexed to local ids `0..len`.
/// Local ids follow ascending global id order.
#[derive(Debug, Clone)]
pub struct Subgraph {
    nodes: NodeSubset,
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Subgraph {
    pub fn induced(net: &Network, members: &NodeSubset) -> Self {
        let mut offsets = Vec::with_capacity(members.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in members {
            let nbrs = net.neighbors_of(v);
            if nbrs.len() < members.len() / 8 {
                targets.extend(nbrs.iter().filter_map(|&u| members.rank(u).map(|r| r as u32)));
            } else {
                // Merge two sorted lists when the neighborhood is large.
                let (mut i, mut j) = (0, 0);
                while i < nbrs.len() && j < members.len() {
                    match nbrs[i].cmp(&members[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            targets.push(j as u32);
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
            offsets.push(targets.len());
        }
        Subgraph {
            nodes: members.clone(),
            offsets,
            targets,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn nodes(&self) -> &NodeSubset {
        &self.nodes
    }

    pub fn global(&self, local: u32) -> NodeId {
        self.nodes[local as usize]
    }

    /// Maps sorted local ids back to a global subset.
    pub fn to_global(&self, locals: &[u32]) -> NodeSubset {
        NodeSubset::from_sorted(locals.iter().map(|&l| self.global(l)).collect())
    }
}

impl Adjacency for Subgraph {
    fn node_count(&self) -> usize {
        self.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Connected components among the nodes with `alive[v]` (all nodes when
/// `alive` is `None`). Each component is sorted; components are ordered by
/// their smallest member.
pub fn components<G: Adjacency>(g: &G, alive: Option<&[bool]>) -> Vec<Vec<u32>> {
    let n = g.node_count();
    let is_alive = |v: usize| alive.is_none_or(|a| a[v]);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] || !is_alive(start) {
            continue;
        }
        seen[start] = true;
        queue.push_back(start as u32);
        let mut comp = Vec::new();
        while let Some(v) = queue.pop_front() {
            comp.push(v);
            for &u in g.neighbors(v as usize) {
                let ui = u as usize;
                if !seen[ui] && is_alive(ui) {
                    seen[ui] = true;
                    queue.push_back(u);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn edge_key(u: NodeId, v: NodeId) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

fn split_key(key: u64) -> (NodeId, NodeId) {
    ((key >> 32) as NodeId, key as NodeId)
}

/// Sorted, deduplicated undirected edge keys plus (self-loops, duplicates) dropped.
fn canonical_edges<I>(edges: I) -> (Vec<u64>, usize, usize)
where
    I: Iterator<Item = (NodeId, NodeId)>,
{
    let mut self_loops = 0;
    let mut keys: Vec<u64> = edges
        .filter_map(|(u, v)| {
            if u == v {
                self_loops += 1;
                None
            } else {
                Some(edge_key(u, v))
            }
        })
        .collect();
    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    let duplicates = before - keys.len();
    (keys, self_loops, duplicates)
}
