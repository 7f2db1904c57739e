//! The four-stage kmp clustering pipeline and its on-disk artifacts.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::augment::augment;
use crate::bisect::{iterative_split, recursive_split, BisectConfig};
use crate::cluster::Clustering;
use crate::error::{Error, Result};
use crate::graph::{Network, NodeSubset};
use crate::io;
use crate::kcore::ikc;
use crate::metrics::size_stats;
use crate::parse::{kmp_parse, validate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage2 {
    None,
    Recursive,
    Iterative,
}

impl FromStr for Stage2 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Stage2::None),
            "recursive" => Ok(Stage2::Recursive),
            "iterative" => Ok(Stage2::Iterative),
            other => Err(Error::Config(format!(
                "stage2 must be none, recursive or iterative, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Stage2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage2::None => "none",
            Stage2::Recursive => "recursive",
            Stage2::Iterative => "iterative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: u32,
    pub p: u32,
    pub stage2: Stage2,
    pub local_search_iters: u32,
    pub max_rounds: u32,
    pub stage3: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: 5,
            p: 2,
            stage2: Stage2::None,
            local_search_iters: 0,
            max_rounds: 10,
            stage3: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.bisect().validate()?;
        if self.p == 0 || self.p >= self.k {
            return Err(Error::Config(format!(
                "need 1 <= p < k (k = {}, p = {})",
                self.k, self.p
            )));
        }
        Ok(())
    }

    pub fn bisect(&self) -> BisectConfig {
        BisectConfig {
            local_search_iters: self.local_search_iters,
            max_rounds: self.max_rounds,
            k: self.k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: &'static str,
    pub seconds: f64,
    pub clusters: usize,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub clustering: Clustering,
    /// Nodes that some stage removed from a cluster and that are absent from
    /// the final clustering.
    pub discarded: NodeSubset,
    pub stages: Vec<StageReport>,
}

impl PipelineOutput {
    /// Nodes in no final cluster and never discarded.
    pub fn singletons(&self) -> NodeSubset {
        let clustered = self.clustering.roles();
        (0..self.clustering.universe() as u32)
            .filter(|&v| {
                clustered[v as usize] == crate::cluster::Role::Unclustered
                    && !self.discarded.contains(v)
            })
            .collect()
    }
}

fn timed<T>(stages: &mut Vec<StageReport>, stage: &'static str, f: impl FnOnce() -> T, count: impl Fn(&T) -> usize) -> T {
    let start = Instant::now();
    let out = f();
    let report = StageReport {
        stage,
        seconds: start.elapsed().as_secs_f64(),
        clusters: count(&out),
    };
    info!("{}: {} clusters in {:.3}s", report.stage, report.clusters, report.seconds);
    stages.push(report);
    out
}

/// Runs IKC, the optional split stage, optional augmentation, and
/// kmp-parsing. The result is kmp-valid for the configured `k` and `p`.
pub fn run_pipeline(net: &Network, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let mut stages = Vec::new();
    let mut dropped: Vec<u32> = Vec::new();

    let mut clustering = timed(&mut stages, "stage1-ikc", || ikc(net, cfg.k), Clustering::len);

    let bisect = cfg.bisect();
    let split = match cfg.stage2 {
        Stage2::None => None,
        Stage2::Recursive => Some(timed(
            &mut stages,
            "stage2-recursive",
            || recursive_split(net, &clustering, &bisect),
            |o| o.clustering.len(),
        )),
        Stage2::Iterative => Some(timed(
            &mut stages,
            "stage2-iterative",
            || iterative_split(net, &clustering, &bisect),
            |o| o.clustering.len(),
        )),
    };
    if let Some(split) = split {
        dropped.extend_from_slice(&split.discarded);
        clustering = split.clustering;
    }

    if cfg.stage3 {
        clustering = timed(
            &mut stages,
            "stage3-augment",
            || augment(net, &clustering, cfg.p),
            Clustering::len,
        );
    }

    let parsed = timed(
        &mut stages,
        "stage4-parse",
        || kmp_parse(net, &clustering, cfg.k, cfg.p),
        |r| r.as_ref().map_or(0, |o| o.clustering.len()),
    )?;
    dropped.extend_from_slice(&parsed.discarded);
    let roles = parsed.clustering.roles();
    let discarded = dropped
        .into_iter()
        .filter(|&v| roles[v as usize] == crate::cluster::Role::Unclustered)
        .collect();
    Ok(PipelineOutput {
        clustering: parsed.clustering,
        discarded,
        stages,
    })
}

/// Writes `clusters.tsv`, `validity.json`, `stats.json`, `stats.tsv`,
/// `discarded.tsv`, `singletons.tsv` and `config.json` into `dir`.
pub fn write_artifacts(net: &Network, cfg: &PipelineConfig, out: &PipelineOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    io::write_clustering(net, &out.clustering, dir.join("clusters.tsv"))?;
    io::write_json(&validate(net, &out.clustering, cfg.k, cfg.p), dir.join("validity.json"))?;
    let stats = size_stats(&out.clustering);
    io::write_json(&stats, dir.join("stats.json"))?;
    let tsv = format!("{}\n{}\n", crate::metrics::SizeStats::TSV_HEADER, stats.tsv_row());
    let stats_path = dir.join("stats.tsv");
    fs::write(&stats_path, tsv).map_err(|e| Error::io(&stats_path, e))?;
    io::write_node_list(net, &out.discarded, Some("discarded"), dir.join("discarded.tsv"))?;
    io::write_node_list(net, &out.singletons(), None, dir.join("singletons.tsv"))?;
    io::write_json(cfg, dir.join("config.json"))
}
