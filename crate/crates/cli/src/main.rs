//! `kmp`: command-line driver for the clustering pipeline and its analyses.

mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use kmp_cluster::io::{
    load_clustering, load_distances, write_clustering, write_coordinates, write_distances, write_json,
};
use kmp_cluster::kcore::{degeneracy, ikc, kcore_clusters};
use kmp_cluster::markers::{
    always_clustered, always_coclustered, classical_mds, marker_counts, mds_distances, smallest_common_cluster,
    MarkerPanel,
};
use kmp_cluster::metrics::{mcd, size_stats, SizeStats};
use kmp_cluster::parse::{extract_cores, kmp_parse, strict_filter, validate};
use kmp_cluster::pipeline::{run_pipeline, write_artifacts};
use kmp_cluster::{Clustering, Network};
use log::{info, warn};

use config::PipelineArgs;

#[derive(Debug, Parser)]
#[command(name = "kmp", version, about = "Well-connected clustering of citation networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterative k-core clustering (Stage 1 on its own).
    Ikc {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Connected components of the k-core.
    Kcore {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// The full pipeline: IKC, optional split, optional augmentation, kmp-parsing.
    Pipeline(PipelineArgs),
    /// kmp-parse an existing clustering.
    Parse {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        clustering: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        out: PathBuf,
        /// Keep only the positive-modularity components of each k-core.
        #[arg(long)]
        cores_only: bool,
    },
    /// Report k/m/p validity of a clustering as JSON.
    Validate {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        clustering: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        p: u32,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the kmp-valid clusters (strict filter) to this file.
        #[arg(long)]
        strict: Option<PathBuf>,
    },
    /// Size statistics, one row per clustering.
    Stats {
        #[arg(long)]
        edges: PathBuf,
        /// One or more clustering files.
        #[arg(long, required = true, num_args = 1..)]
        clustering: Vec<PathBuf>,
        /// Emit JSON lines instead of TSV.
        #[arg(long)]
        json: bool,
        /// Write per-cluster minimum core degree (`file<TAB>cluster<TAB>size<TAB>mcd`) here.
        #[arg(long)]
        mcd: Option<PathBuf>,
    },
    /// Marker analysis across several clusterings.
    Markers {
        #[arg(long)]
        edges: PathBuf,
        /// One external id per line.
        #[arg(long)]
        markers: PathBuf,
        /// Clustering files, one per run.
        #[arg(long, required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Classical MDS of a distance matrix written by `markers`.
    Mds {
        #[arg(long)]
        distances: PathBuf,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_network(path: &Path) -> Result<Network> {
    let start = Instant::now();
    let (net, report) = Network::load_edge_list(path)?;
    info!(
        "loaded {}: {} nodes, {} edges ({} self-loops, {} duplicates dropped) in {:.2}s",
        path.display(),
        report.nodes,
        report.edges,
        report.self_loops,
        report.duplicate_edges,
        start.elapsed().as_secs_f64()
    );
    Ok(net)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("KMP_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| kmp_cluster::Error::Config(format!("KMP_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the worker pool")?;
    Ok(())
}

fn ensure_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(kmp_cluster::Error::Config("k must be positive".into()).into());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Ikc { edges, k, out } => {
            ensure_k(k)?;
            let net = load_network(&edges)?;
            let c = ikc(&net, k);
            info!("ikc({k}): {} clusters; degeneracy {}", c.len(), degeneracy(&net));
            write_clustering(&net, &c, &out)?;
        }
        Command::Kcore { edges, k, out } => {
            let net = load_network(&edges)?;
            if k == 0 {
                warn!("k = 0: every node is in the 0-core; isolated nodes come back as singletons");
            }
            let c = kcore_clusters(&net, k);
            info!("{k}-core: {} components", c.len());
            write_clustering(&net, &c, &out)?;
        }
        Command::Pipeline(args) => {
            let resolved = args.resolve()?;
            let net = load_network(&resolved.edges)?;
            let out = run_pipeline(&net, &resolved.pipeline)?;
            write_artifacts(&net, &resolved.pipeline, &out, &resolved.out_dir)?;
            let peak = out.stages.iter().map(|s| s.clusters).max().unwrap_or(0);
            info!(
                "{} clusters, {} discarded nodes, peak {peak} clusters; artifacts in {}",
                out.clustering.len(),
                out.discarded.len(),
                resolved.out_dir.display()
            );
        }
        Command::Parse {
            edges,
            clustering,
            k,
            p,
            out,
            cores_only,
        } => {
            let net = load_network(&edges)?;
            let input = load_clustering(&net, &clustering)?;
            let parsed = if cores_only {
                ensure_k(k)?;
                extract_cores(&net, &input, k)
            } else {
                let outcome = kmp_parse(&net, &input, k, p)?;
                info!("{} nodes discarded", outcome.discarded.len());
                outcome.clustering
            };
            info!("{} clusters in, {} out", input.len(), parsed.len());
            write_clustering(&net, &parsed, &out)?;
        }
        Command::Validate {
            edges,
            clustering,
            k,
            p,
            out,
            strict,
        } => {
            let net = load_network(&edges)?;
            let input = load_clustering(&net, &clustering)?;
            let report = match &strict {
                Some(path) => {
                    let (kept, report) = strict_filter(&net, &input, k, p);
                    write_clustering(&net, &kept, path)?;
                    report
                }
                None => validate(&net, &input, k, p),
            };
            match out {
                Some(path) => write_json(&report, path)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    serde_json::to_writer_pretty(&mut stdout, &report)?;
                    writeln!(stdout)?;
                }
            }
        }
        Command::Stats {
            edges,
            clustering,
            json,
            mcd: mcd_out,
        } => {
            let net = load_network(&edges)?;
            let mut stdout = std::io::stdout().lock();
            if !json {
                writeln!(stdout, "file\t{}", SizeStats::TSV_HEADER)?;
            }
            let mut mcd_rows = String::new();
            for path in &clustering {
                let c = load_clustering(&net, path)?;
                let stats = size_stats(&c);
                if json {
                    let mut value = serde_json::to_value(&stats)?;
                    value["file"] = path.display().to_string().into();
                    writeln!(stdout, "{}", serde_json::to_string(&value)?)?;
                } else {
                    writeln!(stdout, "{}\t{}", path.display(), stats.tsv_row())?;
                }
                if mcd_out.is_some() {
                    for (ci, cluster) in c.clusters().iter().enumerate() {
                        if cluster.core().is_empty() {
                            continue;
                        }
                        let value = mcd(&net, cluster)?;
                        mcd_rows.push_str(&format!("{}\t{ci}\t{}\t{value}\n", path.display(), cluster.len()));
                    }
                }
            }
            if let Some(path) = mcd_out {
                fs::write(&path, mcd_rows).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Markers {
            edges,
            markers,
            runs,
            out_dir,
        } => markers_command(&edges, &markers, &runs, &out_dir)?,
        Command::Mds { distances, dims, out } => {
            if dims == 0 {
                bail!(kmp_cluster::Error::Config("dims must be at least 1".into()));
            }
            let (ids, d) = load_distances(&distances)?;
            let coords = classical_mds(&d, dims)?;
            write_coordinates(&ids, &coords, &out)?;
        }
    }
    Ok(())
}

fn markers_command(edges: &Path, markers: &Path, runs: &[PathBuf], out_dir: &Path) -> Result<()> {
    let net = load_network(edges)?;
    let panel = MarkerPanel::load(&net, markers)?;
    let clusterings: Vec<Clustering> = runs
        .iter()
        .map(|p| load_clustering(&net, p))
        .collect::<kmp_cluster::Result<_>>()?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let ext = |v: u32| net.ids().external(v).into_owned();

    let mut counts = String::from("run\tcluster\tsize\tmarkers\n");
    for (run, c) in clusterings.iter().enumerate() {
        for (ci, n) in marker_counts(c, &panel) {
            counts.push_str(&format!("{run}\t{ci}\t{}\t{n}\n", c.clusters()[ci].len()));
        }
    }
    fs::write(out_dir.join("marker_counts.tsv"), counts)?;

    let always = always_clustered(&panel, &clusterings);
    let lines: String = always.iter().map(|&v| ext(v) + "\n").collect();
    fs::write(out_dir.join("always_clustered.tsv"), lines)?;

    let groups = always_coclustered(&always, &clusterings);
    let mut rows = String::from("group\tmarker\n");
    let mut common = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        for &v in g {
            rows.push_str(&format!("{gi}\t{}\n", ext(v)));
        }
        let c = smallest_common_cluster(g, &clusterings)?;
        common.push(serde_json::json!({
            "group": gi,
            "markers": g.iter().map(|&v| ext(v)).collect::<Vec<_>>(),
            "run": c.run,
            "run_file": runs[c.run].display().to_string(),
            "cluster": c.cluster,
            "size": c.size,
        }));
    }
    fs::write(out_dir.join("coclustered.tsv"), rows)?;
    write_json(&common, out_dir.join("smallest_common.json"))?;

    let d = mds_distances(&panel, &clusterings);
    write_distances(&net, &panel, &d, out_dir.join("distances.tsv"))?;
    let ids: Vec<String> = panel.markers().iter().map(|&v| ext(v)).collect();
    write_coordinates(&ids, &classical_mds(&d, 2)?, out_dir.join("mds.tsv"))?;
    info!(
        "{} markers, {} always clustered, {} groups",
        panel.len(),
        always.len(),
        groups.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let config_error = matches!(e.downcast_ref(), Some(kmp_cluster::Error::Config(_)));
            if config_error {
                eprintln!("configuration error: {e:#}");
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        }
    }
}
