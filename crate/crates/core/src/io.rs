//! File formats: clustering TSV, node reports and marker matrices.
//!
//! Clustering rows are `node_external_id<TAB>cluster_id[<TAB>core|noncore]`.
//! Written cluster ids follow the canonical cluster order.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cluster::{Cluster, Clustering};
use crate::error::{Error, Result};
use crate::graph::{Network, NodeId, NodeSubset};
use crate::markers::{DistanceMatrix, MarkerPanel};

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads a clustering TSV. Without a role column every member is core.
pub fn load_clustering(net: &Network, path: impl AsRef<Path>) -> Result<Clustering> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut label_names: Vec<String> = Vec::new();
    let mut members: Vec<(Vec<NodeId>, Vec<NodeId>)> = Vec::new();
    let mut seen: HashMap<NodeId, (usize, bool)> = HashMap::new();
    let mut unknown = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        let parse_err = |message: String| Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        let core = match fields.as_slice() {
            [_, _] => true,
            [_, _, "core"] => true,
            [_, _, "noncore"] => false,
            [_, _, role] => return Err(parse_err(format!("unknown role {role:?}"))),
            _ => return Err(parse_err("expected `node<TAB>cluster[<TAB>core|noncore]`".into())),
        };
        let Some(v) = net.ids().internal(fields[0]) else {
            unknown.push(fields[0].to_owned());
            continue;
        };
        let label = match labels.entry(fields[1].to_owned()) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                label_names.push(fields[1].to_owned());
                members.push((Vec::new(), Vec::new()));
                *e.insert(members.len() - 1)
            }
        };
        match seen.entry(v) {
            Entry::Occupied(e) => {
                if *e.get() != (label, core) {
                    let (first, _) = *e.get();
                    return Err(Error::ConflictingAssignment {
                        node: fields[0].to_owned(),
                        first: label_names[first].clone(),
                        second: fields[1].to_owned(),
                    });
                }
            }
            Entry::Vacant(e) => {
                e.insert((label, core));
                let slot = &mut members[label];
                if core {
                    slot.0.push(v);
                } else {
                    slot.1.push(v);
                }
            }
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownNodes(unknown));
    }
    let clusters = members
        .into_iter()
        .map(|(core, noncore)| Cluster::new(core.into(), noncore.into()))
        .collect();
    Clustering::new(net.len(), clusters)
}

/// Writes `external_id<TAB>cluster_id<TAB>core|noncore`, one row per member,
/// members in ascending internal id.
pub fn write_clustering(net: &Network, clustering: &Clustering, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for (ci, c) in clustering.clusters().iter().enumerate() {
        for v in c.members().iter().copied() {
            let role = if c.core().contains(v) { "core" } else { "noncore" };
            writeln!(out, "{}\t{ci}\t{role}", net.ids().external(v)).map_err(|e| Error::io(path, e))?;
        }
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// One external id per line, optionally followed by a tab and a tag.
pub fn write_node_list(net: &Network, nodes: &NodeSubset, tag: Option<&str>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    for &v in nodes {
        let id = net.ids().external(v);
        match tag {
            Some(tag) => writeln!(out, "{id}\t{tag}"),
            None => writeln!(out, "{id}"),
        }
        .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    writeln!(out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Square matrix with a header row of marker ids; the first column repeats
/// the ids.
pub fn write_distances(net: &Network, panel: &MarkerPanel, d: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let ids: Vec<String> = panel.markers().iter().map(|&v| net.ids().external(v).into_owned()).collect();
    let io = |e| Error::io(path, e);
    writeln!(out, "id\t{}", ids.join("\t")).map_err(io)?;
    for (i, id) in ids.iter().enumerate() {
        let row: Vec<String> = d.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{id}\t{}", row.join("\t")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a matrix written by [`write_distances`]; returns the ids and values.
pub fn load_distances(path: impl AsRef<Path>) -> Result<(Vec<String>, DistanceMatrix)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_owned(),
        line: line + 1,
        message,
    };
    let (_, header) = lines.next().ok_or_else(|| parse_err(0, "empty matrix file".into()))?;
    let ids: Vec<String> = header.split('\t').skip(1).map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let row = line
            .split('\t')
            .skip(1)
            .map(|t| t.trim().parse::<f64>().map_err(|e| parse_err(i, format!("{t:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != ids.len() {
        return Err(parse_err(0, format!("{} ids but {} rows", ids.len(), rows.len())));
    }
    Ok((ids, DistanceMatrix::from_rows(rows)?))
}

/// `id<TAB>x<TAB>y...` with a header.
pub fn write_coordinates(ids: &[String], coords: &[Vec<f64>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    let dims = coords.first().map_or(2, Vec::len);
    let axes: Vec<String> = ["x", "y", "z"]
        .iter()
        .map(|s| s.to_string())
        .chain((3..).map(|i| format!("dim{i}")))
        .take(dims)
        .collect();
    writeln!(out, "id\t{}", axes.join("\t")).map_err(io)?;
    for (id, row) in ids.iter().zip(coords) {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:.12}")).collect();
        writeln!(out, "{id}\t{}", vals.join("\t")).map_err(io)?;
    }
    out.flush().map_err(io)
}
