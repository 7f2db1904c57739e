//! Pipeline settings from flags and an optional key = value file.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use kmp_cluster::{PipelineConfig, Stage2};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage2Arg {
    None,
    Recursive,
    Iterative,
}

impl From<Stage2Arg> for Stage2 {
    fn from(s: Stage2Arg) -> Self {
        match s {
            Stage2Arg::None => Stage2::None,
            Stage2Arg::Recursive => Stage2::Recursive,
            Stage2Arg::Iterative => Stage2::Iterative,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct PipelineArgs {
    /// Settings file with `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge list, one `source target` pair per line.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, value_enum)]
    pub stage2: Option<Stage2Arg>,
    /// Local-search sweeps per bipartition (0 = spectral seed only).
    #[arg(long)]
    pub local_search: Option<u32>,
    /// Round cap for iterative splitting.
    #[arg(long)]
    pub max_rounds: Option<u32>,
    #[arg(long, value_enum)]
    pub stage3: Option<Toggle>,
    /// Directory for the output artifacts.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    edges: Option<PathBuf>,
    k: Option<u32>,
    p: Option<u32>,
    stage2: Option<Stage2Arg>,
    local_search: Option<u32>,
    max_rounds: Option<u32>,
    stage3: Option<Toggle>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Resolved {
    pub edges: PathBuf,
    pub out_dir: PathBuf,
    pub pipeline: PipelineConfig,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text)
        .map_err(|e| kmp_cluster::Error::Config(format!("{}: {}", path.display(), e.message())).into())
}

impl PipelineArgs {
    /// Merges flags over the file, then defaults for the optional knobs.
    /// `edges`, `k`, `p` and `out_dir` must come from one of the two.
    pub fn resolve(&self) -> Result<Resolved> {
        let file = match &self.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let defaults = PipelineConfig::default();
        let missing = |name: &str| kmp_cluster::Error::Config(format!("missing required setting `{name}`"));
        // Relative paths in a settings file are taken from its directory.
        let base = self.config.as_deref().and_then(Path::parent).map(Path::to_path_buf);
        let from_file = |p: Option<PathBuf>| {
            p.map(|p| match &base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            })
        };
        let edges = self.edges.clone().or(from_file(file.edges)).ok_or_else(|| missing("edges"))?;
        let out_dir = self.out_dir.clone().or(from_file(file.out_dir)).ok_or_else(|| missing("out_dir"))?;
        let pipeline = PipelineConfig {
            k: self.k.or(file.k).ok_or_else(|| missing("k"))?,
            p: self.p.or(file.p).ok_or_else(|| missing("p"))?,
            stage2: self.stage2.or(file.stage2).map_or(defaults.stage2, Stage2::from),
            local_search_iters: self.local_search.or(file.local_search).unwrap_or(defaults.local_search_iters),
            max_rounds: self.max_rounds.or(file.max_rounds).unwrap_or(defaults.max_rounds),
            stage3: self.stage3.or(file.stage3).map_or(defaults.stage3, |t| t == Toggle::On),
        };
        pipeline.validate()?;
        Ok(Resolved {
            edges,
            out_dir,
            pipeline,
        })
    }
}
