//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run one criterion with `cargo test --test acceptance -- <name>`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use kmp_cluster::augment::augment;
use kmp_cluster::bisect::{bipartition, normalized_cut, BisectConfig};
use kmp_cluster::io::write_clustering;
use kmp_cluster::kcore::{core_labels, ikc};
use kmp_cluster::markers::{classical_mds, DistanceMatrix};
use kmp_cluster::modularity::{modularity, ModularityTerms};
use kmp_cluster::parse::{kmp_parse, strict_filter, validate};
use kmp_cluster::pipeline::{run_pipeline, write_artifacts, PipelineConfig, Stage2};
use kmp_cluster::synth::{planted, scale_network, sweep_network, PlantedConfig};
use kmp_cluster::{Cluster, Clustering, Network, NodeSubset};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs as f64, || {
        format!("{what} took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn parse_validity_fuzz() -> Result<String, String> {
    let start = Instant::now();
    let mut emitted = 0usize;
    let mut runs = 0usize;
    for seed in 0..500u64 {
        let mut r = rng(seed);
        let (n, edges) = random_graph(&mut r, 300);
        let net = Network::from_edges(n, edges.iter().copied());
        let adj = adjacency(n, &edges);
        let inputs = [
            random_clustering(&mut r, n),
            block_clustering(n, r.gen_range(1..=6)),
            Clustering::new(n, vec![Cluster::all_core(NodeSubset::full(n))]).unwrap(),
        ];
        for input in &inputs {
            for (k, p) in [(5, 2), (10, 2), (3, 1)] {
                runs += 1;
                let out = kmp_parse(&net, input, k, p).map_err(|e| e.to_string())?;
                let report = validate(&net, &out.clustering, k, p);
                ensure(report.kmp_valid == report.clusters, || {
                    format!("seed {seed} (k={k}, p={p}): {} of {} clusters kmp-valid", report.kmp_valid, report.clusters)
                })?;
                for c in out.clustering.clusters() {
                    ensure(brute_kmp_valid(&adj, c, k, p), || {
                        format!("seed {seed} (k={k}, p={p}): oracle rejects cluster {:?}", c.core().as_slice())
                    })?;
                    let m = c.members();
                    ensure(
                        input.clusters().iter().any(|ic| m.iter().all(|&v| ic.members().contains(v))),
                        || format!("seed {seed}: output cluster not inside an input cluster"),
                    )?;
                }
                emitted += out.clustering.len();
            }
        }
    }
    within(start.elapsed(), 60, "fuzz")?;
    Ok(format!(
        "{runs} parses, {emitted} clusters all kmp-valid in {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn coreness_oracle() -> Result<String, String> {
    let mut checked = 0;
    for seed in 0..200u64 {
        let mut r = rng(1_000 + seed);
        let (n, edges) = random_graph(&mut r, 200);
        let net = Network::from_edges(n, edges.iter().copied());
        let adj = adjacency(n, &edges);
        let all: Vec<u32> = (0..n as u32).collect();
        let subset: Vec<u32> = all.iter().copied().filter(|_| r.gen_bool(0.6)).collect();
        for nodes in [all, subset] {
            let got = core_labels(&net, &NodeSubset::from(nodes.clone()));
            let want = brute_coreness(&adj, &nodes);
            ensure(got.labels() == want.as_slice(), || format!("seed {seed}: labels differ"))?;
            checked += nodes.len();
        }
    }
    Ok(format!("200 graphs, {checked} labels equal"))
}

fn ikc_nesting() -> Result<String, String> {
    let mut compared = 0;
    for seed in 0..100u64 {
        let mut r = rng(2_000 + seed);
        let (n, edges) = random_graph(&mut r, 250);
        let net = Network::from_edges(n, edges);
        let k = r.gen_range(3..12u32);
        let k2 = r.gen_range(k + 1..=12u32);
        let low: BTreeSet<Vec<u32>> = ikc(&net, k).clusters().iter().map(|c| c.core().to_vec()).collect();
        for c in ikc(&net, k2).clusters() {
            ensure(low.contains(c.core().as_slice()), || {
                format!("seed {seed}: a cluster of ikc({k2}) is missing from ikc({k})")
            })?;
            compared += 1;
        }
    }
    Ok(format!("100 graphs, {compared} nested clusters found"))
}

fn modularity_anchors() -> Result<String, String> {
    for seed in 0..50u64 {
        let mut r = rng(3_000 + seed);
        let (n, edges) = random_graph(&mut r, 120);
        let net = Network::from_edges(n, edges);
        let comps = net.connected_components(&net.all_nodes());
        let biggest = comps.iter().max_by_key(|c| c.len()).unwrap();
        let sub = Network::from_edges(
            n,
            (0..n as u32).flat_map(|a| {
                net.neighbors_of(a)
                    .iter()
                    .filter(move |&&b| a < b && biggest.contains(a))
                    .map(move |&b| (a, b))
            }),
        );
        ensure(modularity(&net, &net.all_nodes()) == 0.0, || format!("seed {seed}: whole network"))?;
        ensure(modularity(&sub, biggest) == 0.0, || format!("seed {seed}: connected component"))?;
    }

    let net = Network::from_edges(20, clique(0, 20));
    let inner = Clustering::new(20, vec![Cluster::all_core((0..10).collect())]).unwrap();
    for k in 1..=9 {
        let (kept, report) = strict_filter(&net, &inner, k, 1);
        let c = &report.per_cluster[0];
        ensure(kept.is_empty() && c.k_valid && !c.m_valid, || format!("nested clique kept at k = {k}"))?;
    }

    let mut subsets = 0;
    let mut positive = 0;
    for seed in 0..100u64 {
        let mut r = rng(4_000 + seed);
        let (n, edges) = random_graph(&mut r, 150);
        let net = Network::from_edges(n, edges.iter().copied());
        let adj = adjacency(n, &edges);
        for _ in 0..100 {
            let density = r.gen_range(0.02..0.9);
            let s: BTreeSet<u32> = (0..n as u32).filter(|_| r.gen_bool(density)).collect();
            let subset = NodeSubset::from(s.iter().copied().collect::<Vec<_>>());
            let exact = rational_modularity(&adj, &s);
            let terms = ModularityTerms::of(&net, &subset);
            ensure(terms.is_positive() == (exact > Ratio::from_integer(0)), || {
                format!("seed {seed}: sign disagrees on a subset of {}", s.len())
            })?;
            let approx = *exact.numer() as f64 / *exact.denom() as f64;
            ensure((terms.value() - approx).abs() <= 1e-12, || format!("seed {seed}: value drift"))?;
            subsets += 1;
            positive += terms.is_positive() as usize;
        }
    }
    Ok(format!(
        "whole-network zeros exact; nested clique rejected for k <= 9; {subsets} subsets agree ({positive} positive)"
    ))
}

/// Sequential augmentation in the given candidate order against fixed cores.
fn reference_augment(net: &Network, clustering: &Clustering, p: usize, order: &[u32]) -> Clustering {
    let roles = clustering.assignment();
    let mut added: Vec<Vec<u32>> = vec![Vec::new(); clustering.len()];
    for &x in order {
        if roles[x as usize].is_some() {
            continue;
        }
        let mut best: Option<(usize, Ratio<u64>)> = None;
        for (ci, c) in clustering.clusters().iter().enumerate() {
            let hits = net.neighbors_of(x).iter().filter(|&&u| c.core().contains(u)).count();
            if hits < p {
                continue;
            }
            let ratio = Ratio::new(hits as u64, c.core().len() as u64);
            if best.is_none_or(|(_, b)| ratio > b) {
                best = Some((ci, ratio));
            }
        }
        if let Some((ci, _)) = best {
            added[ci].push(x);
        }
    }
    let clusters = clustering
        .clusters()
        .iter()
        .zip(added)
        .map(|(c, add)| Cluster::new(c.core().clone(), c.noncore().union(&NodeSubset::from(add))))
        .collect();
    Clustering::new(clustering.universe(), clusters).unwrap()
}

fn tsv_bytes(net: &Network, c: &Clustering, dir: &Path, name: &str) -> Vec<u8> {
    let path = dir.join(name);
    write_clustering(net, c, &path).unwrap();
    std::fs::read(path).unwrap()
}

fn augmentation_anchor() -> Result<String, String> {
    let mut edges: Vec<(u32, u32)> = (0..999).map(|i| (i, i + 1)).collect();
    edges.extend((1000..1019).map(|i| (i, i + 1)));
    edges.extend((0..5).map(|i| (1020, i * 100)));
    edges.extend((0..10).map(|i| (1020, 1000 + i)));
    let net = Network::from_edges(1021, edges);
    let base = Clustering::new(
        1021,
        vec![Cluster::all_core((0..1000).collect()), Cluster::all_core((1000..1020).collect())],
    )
    .unwrap();
    let out = augment(&net, &base, 2);
    ensure(out.clusters()[1].noncore().as_slice() == [1020], || "x did not join C2".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for seed in 0..100u64 {
        let mut r = rng(5_000 + seed);
        let (n, mut edges) = random_graph(&mut r, 200);
        let net = Network::from_edges(n, edges.iter().copied());
        let p = r.gen_range(1..=3);
        let input = kmp_parse(&net, &random_clustering(&mut r, n), 3, 1)
            .map(|o| o.clustering)
            .unwrap_or_else(|_| Clustering::empty(n));
        let input = if input.is_empty() { block_clustering(n, 4) } else { input };
        let want = tsv_bytes(&net, &augment(&net, &input, p), dir.path(), "a.tsv");

        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut r);
        let reference = reference_augment(&net, &input, p as usize, &order);
        ensure(tsv_bytes(&net, &reference, dir.path(), "b.tsv") == want, || {
            format!("seed {seed}: sequential shuffled-order augmentation differs")
        })?;

        edges.shuffle(&mut r);
        let shuffled_net = Network::from_edges(n, edges.iter().map(|&(a, b)| if r.gen() { (a, b) } else { (b, a) }));
        let mut clusters = input.clone().into_clusters();
        clusters.shuffle(&mut r);
        let shuffled_input = Clustering::new(n, clusters).unwrap();
        let one_thread = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let again = one_thread.install(|| augment(&shuffled_net, &shuffled_input, p));
        ensure(tsv_bytes(&shuffled_net, &again, dir.path(), "c.tsv") == want, || {
            format!("seed {seed}: shuffled input order changed the output")
        })?;
    }
    Ok("worked example joins C2; 100 shuffled instances byte-identical".into())
}

fn bisection_optimality() -> Result<String, String> {
    let cfg = BisectConfig {
        local_search_iters: 2000,
        ..BisectConfig::new(3)
    };
    let mut worst_gap = 0.0f64;
    for case in 0..50u64 {
        let mut r = rng(6_000 + case);
        let size = r.gen_range(4..=14usize);
        let inner = random_graph_on(&mut r, size);
        // A few outside nodes so the cluster sits inside a larger network.
        let extra = r.gen_range(0..=5usize);
        let mut edges = inner;
        for x in size..size + extra {
            for _ in 0..r.gen_range(1..=3) {
                edges.push((x as u32, r.gen_range(0..size as u32)));
            }
        }
        let n = size + extra;
        let net = Network::from_edges(n, edges.iter().copied());
        let adj = adjacency(n, &edges);
        let cluster: Vec<u32> = (0..size as u32).collect();
        let (a, b) = bipartition(&net, &NodeSubset::from(cluster.clone()), &cfg).map_err(|e| e.to_string())?;
        let got = normalized_cut(&net, &a, &b).map_err(|e| e.to_string())?;
        match exhaustive_min_ncut(&adj, &cluster) {
            None => ensure(got.is_infinite(), || format!("case {case}: finite cut where none exists"))?,
            Some(best) => {
                let best = *best.numer() as f64 / *best.denom() as f64;
                worst_gap = worst_gap.max(got - best);
                ensure(got <= best + 1e-12, || {
                    format!("case {case} ({size} nodes): ncut {got:.6} above optimum {best:.6}")
                })?;
            }
        }
    }
    for s in 4..=8u32 {
        let (net, left, right) = bridged_cliques(s);
        for iters in [0, 2000] {
            let cfg = BisectConfig {
                local_search_iters: iters,
                ..BisectConfig::new(3)
            };
            let got = bipartition(&net, &net.all_nodes(), &cfg).map_err(|e| e.to_string())?;
            ensure(got == (left.clone(), right.clone()), || {
                format!("two {s}-cliques with l = {iters}: split {:?}", got.0.as_slice())
            })?;
        }
    }
    Ok(format!("50 cases optimal (largest gap {worst_gap:.1e}); clique pairs 4..8 split at the bridge"))
}

fn planted_recovery() -> Result<String, String> {
    let mut cores_total = 0;
    let mut attached = 0;
    let mut periphery_total = 0;
    for seed in 0..25u64 {
        let cliques = 4 + (seed % 5) as usize;
        let p = planted(&PlantedConfig {
            cliques,
            clique_size: 7,
            periphery_per_clique: 5,
            periphery_wiring: 3,
            noise_edges: cliques,
            seed,
        });
        for stage2 in [Stage2::Recursive, Stage2::Iterative] {
            for iters in [0, 2000] {
                let cfg = PipelineConfig {
                    k: 5,
                    p: 2,
                    stage2,
                    local_search_iters: iters,
                    ..PipelineConfig::default()
                };
                let out = run_pipeline(&p.network, &cfg).map_err(|e| e.to_string())?;
                let mut run_attached = 0;
                for (core, pend) in p.cores.iter().zip(&p.periphery) {
                    let found = out.clustering.clusters().iter().find(|c| c.core() == core);
                    let Some(found) = found else {
                        return Err(format!("seed {seed}, {stage2}({iters}): planted core {:?} not recovered", core.as_slice()));
                    };
                    run_attached += pend.iter().filter(|&&x| found.noncore().contains(x)).count();
                }
                let run_total: usize = p.periphery.iter().map(|s| s.len()).sum();
                ensure(run_attached * 100 >= run_total * 95, || {
                    format!("seed {seed}, {stage2}({iters}): {run_attached} of {run_total} periphery attached")
                })?;
                cores_total += p.cores.len();
                attached += run_attached;
                periphery_total += run_total;
            }
        }
    }
    Ok(format!(
        "{cores_total} planted cores recovered exactly; {attached}/{periphery_total} periphery attached"
    ))
}

fn mds_check() -> Result<String, String> {
    let mut worst = 0.0f64;
    for side in [1.0, 3.5] {
        let d = DistanceMatrix::from_rows(vec![
            vec![0.0, side, side],
            vec![side, 0.0, side],
            vec![side, side, 0.0],
        ])
        .map_err(|e| e.to_string())?;
        let x = classical_mds(&d, 2).map_err(|e| e.to_string())?;
        for i in 0..3 {
            for j in 0..3 {
                let dist = ((x[i][0] - x[j][0]).powi(2) + (x[i][1] - x[j][1]).powi(2)).sqrt();
                worst = worst.max((dist - d.get(i, j)).abs());
            }
        }
    }
    ensure(worst < 1e-6, || format!("triangle distance error {worst:.2e}"))?;
    let zero = classical_mds(&DistanceMatrix::zeros(5), 2).map_err(|e| e.to_string())?;
    ensure(zero.iter().flatten().all(|&v| v == 0.0), || "zero matrix not at the origin".into())?;
    Ok(format!("triangle error {worst:.1e}; zero matrix at the origin"))
}

fn sweep_variants() -> Vec<(String, PipelineConfig)> {
    let mut out = Vec::new();
    for k in [5, 10] {
        let base = PipelineConfig {
            k,
            p: 2,
            ..PipelineConfig::default()
        };
        out.push((format!("k{k}-none"), PipelineConfig { stage3: false, ..base }));
        for (name, stage2) in [("ig", Stage2::Iterative), ("rg", Stage2::Recursive)] {
            for iters in [0, 2000] {
                out.push((
                    format!("k{k}-{name}{iters}"),
                    PipelineConfig {
                        stage2,
                        local_search_iters: iters,
                        ..base
                    },
                ));
            }
        }
        out.push((format!("k{k}-stage3"), base));
    }
    out
}

fn sweep_once(net: &Network, threads: usize, dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    let mut files = BTreeMap::new();
    for (name, cfg) in sweep_variants() {
        let out_dir = dir.join(&name);
        pool.install(|| -> Result<(), String> {
            let out = run_pipeline(net, &cfg).map_err(|e| e.to_string())?;
            write_artifacts(net, &cfg, &out, &out_dir).map_err(|e| e.to_string())
        })?;
        let mut entries: Vec<_> = std::fs::read_dir(&out_dir).map_err(|e| e.to_string())?.collect();
        entries.sort_by_key(|e| e.as_ref().map(|e| e.file_name()).ok());
        for entry in entries {
            let path = entry.map_err(|e| e.to_string())?.path();
            let key = format!("{name}/{}", path.file_name().unwrap().to_string_lossy());
            files.insert(key, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(files)
}

fn determinism() -> Result<String, String> {
    let start = Instant::now();
    let net = sweep_network(2024);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = sweep_once(&net, 8, &dir.path().join("a"))?;
    let second = sweep_once(&net, 8, &dir.path().join("b"))?;
    let serial = sweep_once(&net, 1, &dir.path().join("c"))?;
    for (other, label) in [(&second, "second 8-thread run"), (&serial, "1-thread run")] {
        ensure(first.keys().eq(other.keys()), || format!("{label}: different file set"))?;
        for (name, bytes) in &first {
            ensure(other[name] == *bytes, || format!("{label}: {name} differs"))?;
        }
    }
    within(start.elapsed(), 300, "sweep")?;
    let clustered: usize = first
        .iter()
        .filter(|(k, _)| k.ends_with("clusters.tsv"))
        .map(|(_, v)| v.iter().filter(|&&b| b == b'\n').count())
        .sum();
    Ok(format!(
        "12 variants x 3 runs on {} nodes / {} edges, {} files identical, {clustered} clustered rows, {:.1}s",
        net.len(),
        net.edge_count(),
        first.len(),
        start.elapsed().as_secs_f64()
    ))
}

fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn scale_smoke() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("edges.tsv");
    let gen_start = Instant::now();
    {
        let net = scale_network(1_000_000, 10_000_000, 7);
        net.write_edge_list(&path).map_err(|e| e.to_string())?;
    }
    let generation = gen_start.elapsed();

    let start = Instant::now();
    let (net, report) = Network::load_edge_list(&path).map_err(|e| e.to_string())?;
    let loaded = start.elapsed();
    ensure(net.len() >= 990_000 && net.edge_count() == 10_000_000, || {
        format!("loaded {} nodes / {} edges", net.len(), net.edge_count())
    })?;
    let stage1 = ikc(&net, 10);
    let parsed = kmp_parse(&net, &stage1, 10, 2).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    within(elapsed, 600, "load + ikc + parse")?;
    let rss = peak_rss_kib().ok_or("VmHWM unavailable")?;
    ensure(rss < 8 * 1024 * 1024, || format!("peak RSS {} MiB", rss / 1024))?;
    Ok(format!(
        "{} nodes / {} edges ({} lines); load {:.1}s, total {:.1}s (generation {:.1}s); {} IKC clusters, {} parsed; peak RSS {} MiB",
        net.len(),
        net.edge_count(),
        report.lines,
        loaded.as_secs_f64(),
        elapsed.as_secs_f64(),
        generation.as_secs_f64(),
        stage1.len(),
        parsed.clustering.len(),
        rss / 1024
    ))
}

const CRITERIA: [(&str, Check); 10] = [
    ("parse-validity-fuzz", parse_validity_fuzz),
    ("coreness-oracle", coreness_oracle),
    ("ikc-nesting", ikc_nesting),
    ("modularity-anchors", modularity_anchors),
    ("augmentation-anchor", augmentation_anchor),
    ("bisection-optimality", bisection_optimality),
    ("planted-recovery", planted_recovery),
    ("mds-check", mds_check),
    ("determinism", determinism),
    ("scale-smoke", scale_smoke),
];

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in CRITERIA.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
