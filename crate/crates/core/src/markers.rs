//! Marker-node analysis across several clusterings of one network, and the
//! co-clustering distance embedded by classical MDS.
//!
//! A marker that sits in no non-singleton cluster of a run is co-clustered
//! with nothing in that run, not even another unclustered marker.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::graph::{Network, NodeId};

/// Expert-chosen marker nodes, resolved to internal ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerPanel {
    markers: Vec<NodeId>,
}

impl MarkerPanel {
    /// Keeps the given order and drops repeats.
    pub fn new(markers: impl IntoIterator<Item = NodeId>) -> Self {
        let mut seen = HashSet::new();
        MarkerPanel {
            markers: markers.into_iter().filter(|v| seen.insert(*v)).collect(),
        }
    }

    /// Reads one external id per line. Every marker must be a network node.
    pub fn load(net: &Network, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut resolved = Vec::new();
        let mut missing = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match net.ids().internal(line) {
                Some(v) => resolved.push(v),
                None => missing.push(line.to_owned()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::UnknownNodes(missing));
        }
        Ok(Self::new(resolved))
    }

    pub fn markers(&self) -> &[NodeId] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }
}

/// Cluster index of each marker in one run.
fn locate(markers: &[NodeId], run: &Clustering) -> Vec<Option<u32>> {
    let wanted: HashSet<NodeId> = markers.iter().copied().collect();
    let mut found = BTreeMap::new();
    for (ci, c) in run.clusters().iter().enumerate() {
        for &v in c.core().iter().chain(c.noncore().iter()) {
            if wanted.contains(&v) {
                found.insert(v, ci as u32);
            }
        }
    }
    markers.iter().map(|v| found.get(v).copied()).collect()
}

/// Markers per cluster index; only clusters holding a marker appear, and
/// those are the relevant ones.
pub fn marker_counts(clustering: &Clustering, panel: &MarkerPanel) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for ci in locate(panel.markers(), clustering).into_iter().flatten() {
        *out.entry(ci as usize).or_insert(0) += 1;
    }
    out
}

/// Markers in a non-singleton cluster in every run.
pub fn always_clustered(panel: &MarkerPanel, runs: &[Clustering]) -> Vec<NodeId> {
    let located: Vec<Vec<Option<u32>>> = runs.iter().map(|r| locate(panel.markers(), r)).collect();
    panel
        .markers()
        .iter()
        .enumerate()
        .filter(|(i, _)| located.iter().all(|l| l[*i].is_some()))
        .map(|(_, &v)| v)
        .collect()
}

/// Groups the given markers by "same cluster in every run". Being in the
/// same cluster is an equivalence within each run, so the all-runs relation
/// is one as well and its classes are the maximal groups. A marker that is
/// unclustered in some run forms a group of its own. Groups are sorted, and
/// ordered by smallest member.
pub fn always_coclustered(markers: &[NodeId], runs: &[Clustering]) -> Vec<Vec<NodeId>> {
    let located: Vec<Vec<Option<u32>>> = runs.iter().map(|r| locate(markers, r)).collect();
    let mut classes: BTreeMap<Vec<u32>, Vec<NodeId>> = BTreeMap::new();
    let mut loners = Vec::new();
    for (i, &v) in markers.iter().enumerate() {
        let signature: Option<Vec<u32>> = located.iter().map(|l| l[i]).collect();
        match signature {
            Some(sig) if !runs.is_empty() => classes.entry(sig).or_default().push(v),
            _ => loners.push(vec![v]),
        }
    }
    let mut groups: Vec<Vec<NodeId>> = classes.into_values().chain(loners).collect();
    for g in &mut groups {
        g.sort_unstable();
        g.dedup();
    }
    groups.sort();
    groups.dedup();
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CommonCluster {
    pub run: usize,
    pub cluster: usize,
    pub size: usize,
}

/// Over all runs, the smallest cluster containing every given marker; ties
/// go to the earlier run.
pub fn smallest_common_cluster(markers: &[NodeId], runs: &[Clustering]) -> Result<CommonCluster> {
    if markers.is_empty() || runs.is_empty() {
        return Err(Error::Contract(
            "smallest common cluster needs at least one marker and one run".into(),
        ));
    }
    let mut best: Option<CommonCluster> = None;
    for (run, clustering) in runs.iter().enumerate() {
        let located = locate(markers, clustering);
        let first = located[0].ok_or(Error::NotCoclustered { run })?;
        if located.iter().any(|&c| c != Some(first)) {
            return Err(Error::NotCoclustered { run });
        }
        let size = clustering.clusters()[first as usize].len();
        if best.is_none_or(|b| size < b.size) {
            best = Some(CommonCluster {
                run,
                cluster: first as usize,
                size,
            });
        }
    }
    Ok(best.expect("at least one run"))
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Contract("distance matrix is not square".into()));
        }
        Ok(DistanceMatrix {
            n,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.values[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

/// `D[x][y]` = number of runs in which markers `x` and `y` do not share a
/// non-singleton cluster. Zero diagonal.
pub fn mds_distances(panel: &MarkerPanel, runs: &[Clustering]) -> DistanceMatrix {
    let n = panel.len();
    let located: Vec<Vec<Option<u32>>> = runs.iter().map(|r| locate(panel.markers(), r)).collect();
    let mut d = DistanceMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let apart = located
                .iter()
                .filter(|l| l[i].is_none() || l[i] != l[j])
                .count() as f64;
            d.set(i, j, apart);
            d.set(j, i, apart);
        }
    }
    d
}

const MDS_MAX_ITERS: usize = 1000;
const MDS_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(mut x: Vec<f64>) -> Option<Vec<f64>> {
    let norm = dot(&x, &x).sqrt();
    if norm < 1e-300 {
        return None;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    Some(x)
}

fn project_out(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(x, b);
        x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
    }
}

fn mat_vec(b: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| dot(&b[i * n..(i + 1) * n], x)).collect()
}

/// Power iteration on `B + shift·I` restricted to the complement of `basis`.
/// Returns the unit vector and its Rayleigh quotient under `B`.
fn power(b: &[f64], n: usize, start: &[f64], basis: &[Vec<f64>], shift: f64) -> Option<(Vec<f64>, f64)> {
    let mut x = start.to_vec();
    project_out(&mut x, basis);
    let mut x = unit(x)?;
    let mut lambda = f64::NAN;
    for _ in 0..MDS_MAX_ITERS {
        let mut y = mat_vec(b, n, &x);
        let rayleigh = dot(&x, &y);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += shift * xi);
        project_out(&mut y, basis);
        let Some(y) = unit(y) else {
            return Some((x, 0.0));
        };
        let step: f64 = x.iter().zip(&y).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
        let settled = (rayleigh - lambda).abs() <= MDS_TOL * rayleigh.abs().max(1e-300);
        x = y;
        lambda = rayleigh;
        if settled && step < 1e-10 {
            break;
        }
    }
    let bx = mat_vec(b, n, &x);
    Some((x.clone(), dot(&x, &bx)))
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix. Returns
/// eigenvalues and column eigenvectors (as `vecs[row][col]`).
fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = a.len();
    let mut v: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i][i]).collect(), v)
}

/// Classical (metric) MDS: double-centres `-½·J·D∘D·J`, extracts the top
/// `dims` eigenpairs by power iteration with deflation, refines them with a
/// Rayleigh–Ritz step on the found subspace, and scales each eigenvector by
/// `sqrt(max(λ, 0))`. Each axis is oriented so its first nonzero coordinate
/// is positive. Returns one row of `dims` coordinates per point.
pub fn classical_mds(d: &DistanceMatrix, dims: usize) -> Result<Vec<Vec<f64>>> {
    let n = d.len();
    for i in 0..n {
        if d.get(i, i) != 0.0 {
            return Err(Error::Contract(format!("distance matrix diagonal [{i}] is nonzero")));
        }
        for j in 0..n {
            let (a, b) = (d.get(i, j), d.get(j, i));
            if !a.is_finite() || a < 0.0 {
                return Err(Error::Contract(format!("distance [{i}][{j}] = {a} is not a nonnegative number")));
            }
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::Contract(format!("distance matrix is not symmetric at [{i}][{j}]")));
            }
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let sq: Vec<f64> = d.values.iter().map(|v| v * v).collect();
    let row_mean: Vec<f64> = (0..n).map(|i| sq[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = -0.5 * (sq[i * n + j] - row_mean[i] - row_mean[j] + grand);
        }
    }

    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let start: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).sqrt() + 0.5 * (i as f64).sin()).collect();
    let mut basis: Vec<Vec<f64>> = vec![ones];
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for _ in 0..dims.min(n.saturating_sub(1)) {
        let Some((mut v, lambda)) = power(&b, n, &start, &basis, 0.0) else {
            break;
        };
        if lambda < 0.0 {
            // Dominant eigenvalue is negative: shift so the top one dominates.
            match power(&b, n, &start, &basis, -lambda) {
                Some((shifted, _)) => v = shifted,
                None => break,
            }
        }
        basis.push(v.clone());
        vectors.push(v);
    }

    // Rayleigh–Ritz on span(vectors).
    let m = vectors.len();
    let bv: Vec<Vec<f64>> = vectors.iter().map(|v| mat_vec(&b, n, v)).collect();
    let h: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| dot(&vectors[i], &bv[j])).collect()).collect();
    let (theta, w) = jacobi(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &c| theta[c].total_cmp(&theta[a]));

    let mut coords = vec![vec![0.0; dims]; n];
    for (axis, &col) in order.iter().enumerate() {
        let mut v: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|r| vectors[r][i] * w[r][col]).sum())
            .collect();
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let scale = theta[col].max(0.0).sqrt();
        for i in 0..n {
            coords[i][axis] = v[i] * scale;
        }
    }
    Ok(coords)
}
