mod common;

use std::collections::BTreeSet;

use kmp_cluster::markers::{
    always_clustered, always_coclustered, classical_mds, marker_counts, mds_distances, smallest_common_cluster,
    DistanceMatrix, MarkerPanel,
};
use kmp_cluster::{Clustering, NodeId};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use common::*;

fn runs_and_panel(seed: u64) -> (Vec<Clustering>, MarkerPanel) {
    let mut r = rng(seed);
    let n = r.gen_range(4..40);
    let runs = (0..r.gen_range(1..5)).map(|_| random_clustering(&mut r, n)).collect();
    let mut nodes: Vec<NodeId> = (0..n as u32).collect();
    nodes.shuffle(&mut r);
    let m = r.gen_range(1..=n.min(12));
    (runs, MarkerPanel::new(nodes[..m].to_vec()))
}

fn home(run: &Clustering, v: NodeId) -> Option<usize> {
    run.clusters().iter().position(|c| c.members().contains(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn counts_and_always_clustered_match_direct_lookup(seed in any::<u64>()) {
        let (runs, panel) = runs_and_panel(seed);
        for run in &runs {
            let counts = marker_counts(run, &panel);
            for (ci, c) in run.clusters().iter().enumerate() {
                let direct = panel.markers().iter().filter(|&&v| c.members().contains(v)).count();
                prop_assert_eq!(counts.get(&ci).copied().unwrap_or(0), direct);
            }
        }
        let always = always_clustered(&panel, &runs);
        let direct: Vec<NodeId> = panel
            .markers()
            .iter()
            .copied()
            .filter(|&v| runs.iter().all(|r| home(r, v).is_some()))
            .collect();
        prop_assert_eq!(always, direct);
    }

    #[test]
    fn coclustered_groups_match_pairwise_relation(seed in any::<u64>()) {
        let (runs, panel) = runs_and_panel(seed);
        let always = always_clustered(&panel, &runs);
        let groups = always_coclustered(&always, &runs);
        let together = |a: NodeId, b: NodeId| runs.iter().all(|r| home(r, a) == home(r, b));
        let covered: BTreeSet<NodeId> = groups.iter().flatten().copied().collect();
        prop_assert_eq!(covered.len(), always.len());
        prop_assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), always.len());
        for g in &groups {
            for &a in g {
                for &b in g {
                    prop_assert!(together(a, b));
                }
            }
            for h in &groups {
                if h != g {
                    prop_assert!(!together(g[0], h[0]));
                }
            }
            let common = smallest_common_cluster(g, &runs).unwrap();
            let direct = runs
                .iter()
                .enumerate()
                .map(|(i, r)| (r.clusters()[home(r, g[0]).unwrap()].len(), i))
                .min()
                .unwrap();
            prop_assert_eq!((common.size, common.run), direct);
        }
    }

    #[test]
    fn distances_count_runs_apart(seed in any::<u64>()) {
        let (runs, panel) = runs_and_panel(seed);
        let d = mds_distances(&panel, &runs);
        let m = panel.markers();
        for i in 0..m.len() {
            prop_assert_eq!(d.get(i, i), 0.0);
            for j in 0..m.len() {
                if i == j {
                    continue;
                }
                let apart = runs
                    .iter()
                    .filter(|r| {
                        let (a, b) = (home(r, m[i]), home(r, m[j]));
                        a.is_none() || a != b
                    })
                    .count();
                prop_assert_eq!(d.get(i, j), apart as f64);
            }
        }
    }

    #[test]
    fn mds_reproduces_planar_distances(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(3..10);
        let points: Vec<(f64, f64)> = (0..n).map(|_| (r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0))).collect();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|a| points.iter().map(|b| dist(&[a.0, a.1], &[b.0, b.1])).collect())
            .collect();
        let d = DistanceMatrix::from_rows(rows).unwrap();
        let coords = classical_mds(&d, 2).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((dist(&coords[i], &coords[j]) - d.get(i, j)).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn markers_never_clustered_share_nothing() {
    let runs = vec![block_clustering(6, 3), block_clustering(6, 3)];
    let panel = MarkerPanel::new([0, 1, 2]);
    let groups = always_coclustered(&always_clustered(&panel, &runs), &runs);
    assert_eq!(groups, vec![vec![0, 1], vec![2]]);
    assert!(smallest_common_cluster(&[0, 2], &runs).is_err());
}
