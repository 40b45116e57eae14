use serde::Serialize;

use super::{
    build_coexposure, density, louvain_partition, modularity, permutation_test, weighted_clustering,
    community_continuity, CoExposureNetwork, CoExposureOptions, Partition, PermutationOutcome,
};
use crate::datamodel::{AnalysisWindow, Dataset, Group};
use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions {
    /// Main network: window, threshold, political filter.
    pub coexposure: CoExposureOptions,
    /// Window compared with the main one for community continuity.
    pub early_window: AnalysisWindow,
    pub resolution: f64,
    /// Reshuffles per permutation test; 0 skips the tests.
    pub n_permutations: usize,
    pub seed: u64,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        NetworkOptions {
            coexposure: CoExposureOptions::default(),
            early_window: AnalysisWindow::FirstK(50),
            resolution: 1.0,
            n_permutations: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupNetwork {
    pub group: Group,
    pub nodes: usize,
    pub edges: usize,
    pub density: Option<f64>,
    pub clustering: f64,
    pub modularity: Option<f64>,
    pub n_communities: Option<usize>,
    pub early_modularity: Option<f64>,
    /// Agreement between early- and main-window communities.
    pub continuity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkTest {
    pub metric: &'static str,
    pub outcome: PermutationOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    pub options: NetworkOptions,
    /// Network over all accounts; each group network is its induced part.
    pub combined: CoExposureNetwork,
    pub groups: Vec<GroupNetwork>,
    pub networks: Vec<(Group, CoExposureNetwork)>,
    pub partitions: Vec<(Group, Partition)>,
    pub tests: Vec<NetworkTest>,
}

fn louvain_modularity(net: &CoExposureNetwork, resolution: f64, seed: u64) -> Result<f64> {
    let p = louvain_partition(net, resolution, seed)?;
    modularity(net, &p)
}

fn group_indices(net: &CoExposureNetwork, dataset: &Dataset, g: Group) -> Vec<usize> {
    let groups = dataset.groups();
    (0..net.len())
        .filter(|&i| groups.get(&net.nodes()[i]) == Some(&g))
        .collect()
}

/// Group co-exposure networks with their metrics, communities, and
/// permutation tests of the male-minus-female difference in density,
/// clustering and Louvain modularity.
pub fn analyze_networks(dataset: &Dataset, opts: &NetworkOptions) -> Result<NetworkReport> {
    let combined = build_coexposure(&dataset.records, &opts.coexposure)?;
    let early = build_coexposure(
        &dataset.records,
        &CoExposureOptions {
            window: opts.early_window,
            ..opts.coexposure
        },
    )
    .ok();
    let louvain_seed = seed::derive(opts.seed, seed::stream_id("louvain"));

    let mut groups = Vec::new();
    let mut networks = Vec::new();
    let mut partitions = Vec::new();
    for g in Group::ALL {
        let net = combined.induced(&group_indices(&combined, dataset, g));
        let part = louvain_partition(&net, opts.resolution, louvain_seed).ok();
        let early_part = early.as_ref().and_then(|e| {
            let en = e.induced(&group_indices(e, dataset, g));
            louvain_partition(&en, opts.resolution, louvain_seed)
                .ok()
                .map(|p| (en, p))
        });
        groups.push(GroupNetwork {
            group: g,
            nodes: net.len(),
            edges: net.edge_count(),
            density: density(&net).ok(),
            clustering: weighted_clustering(&net).mean,
            modularity: part.as_ref().and_then(|p| modularity(&net, p).ok()),
            n_communities: part.as_ref().map(Partition::n_communities),
            early_modularity: early_part.as_ref().and_then(|(en, p)| modularity(en, p).ok()),
            continuity: match (&early_part, &part) {
                (Some((_, e)), Some(l)) => community_continuity(e, l).ok(),
                _ => None,
            },
        });
        if let Some(p) = part {
            partitions.push((g, p));
        }
        networks.push((g, net));
    }

    let mut tests = Vec::new();
    if opts.n_permutations > 0 {
        let groups_map = dataset.groups();
        let perm_seed = |name: &str| seed::derive(opts.seed, seed::stream_id(name));
        let resolution = opts.resolution;
        tests.push(NetworkTest {
            metric: "density",
            outcome: permutation_test(
                density,
                &combined,
                &groups_map,
                opts.n_permutations,
                perm_seed("perm-density"),
            )?,
        });
        tests.push(NetworkTest {
            metric: "clustering",
            outcome: permutation_test(
                |n| Ok(weighted_clustering(n).mean),
                &combined,
                &groups_map,
                opts.n_permutations,
                perm_seed("perm-clustering"),
            )?,
        });
        tests.push(NetworkTest {
            metric: "modularity",
            outcome: permutation_test(
                |n| louvain_modularity(n, resolution, louvain_seed),
                &combined,
                &groups_map,
                opts.n_permutations,
                perm_seed("perm-modularity"),
            )?,
        });
    }
    Ok(NetworkReport {
        options: *opts,
        combined,
        groups,
        networks,
        partitions,
        tests,
    })
}
