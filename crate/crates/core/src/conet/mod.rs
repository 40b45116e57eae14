//! Account co-exposure networks: construction, topology metrics, community
//! structure and group-difference permutation tests.

mod louvain;
mod permutation;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::datamodel::{
    build_issue_vector, ideology_shares, AnalysisWindow, ExposureRecord, IssueVector, Kind,
};
use crate::error::{Error, Result};

pub use louvain::louvain_partition;
pub use permutation::{permutation_test, PermutationOutcome};
pub use report::{analyze_networks, GroupNetwork, NetworkOptions, NetworkReport, NetworkTest};

/// Default edge threshold on shared videos.
pub const DEFAULT_THETA: u32 = 20;

/// Weighted undirected account graph. An edge exists where the number of
/// shared videos exceeds the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CoExposureNetwork {
    nodes: Vec<String>,
    /// Row-major symmetric shared-video counts with a zero diagonal.
    weights: Vec<u32>,
    threshold: u32,
}

impl CoExposureNetwork {
    /// Builds a network from a full symmetric weight matrix.
    pub fn from_matrix(nodes: Vec<String>, weights: Vec<Vec<u32>>, threshold: u32) -> Result<Self> {
        let n = nodes.len();
        if nodes.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::InvalidArgument("duplicate node ids".into()));
        }
        if weights.len() != n || weights.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!(
                "weight matrix must be {n} x {n}"
            )));
        }
        let mut flat = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                if weights[i][j] != weights[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "weights not symmetric at ({i}, {j})"
                    )));
                }
                if i != j {
                    flat[i * n + j] = weights[i][j];
                }
            }
        }
        Ok(CoExposureNetwork {
            nodes,
            weights: flat,
            threshold,
        })
    }

    /// Builds a network from per-account video sets (binary incidence).
    pub fn from_video_sets(
        nodes: Vec<String>,
        sets: &[BTreeSet<String>],
        threshold: u32,
    ) -> Result<Self> {
        if nodes.len() != sets.len() {
            return Err(Error::InvalidArgument("one video set per node".into()));
        }
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let encoded: Vec<Vec<u32>> = sets
            .iter()
            .map(|s| {
                let mut v: Vec<u32> = s
                    .iter()
                    .map(|vid| {
                        let next = ids.len() as u32;
                        *ids.entry(vid.as_str()).or_insert(next)
                    })
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        let n = nodes.len();
        let mut weights = vec![vec![0u32; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let w = sorted_intersection(&encoded[i], &encoded[j]);
                weights[i][j] = w;
                weights[j][i] = w;
            }
        }
        Self::from_matrix(nodes, weights, threshold)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn index_of(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    /// Raw shared-video count, regardless of threshold.
    pub fn raw_weight(&self, i: usize, j: usize) -> u32 {
        self.weights[i * self.nodes.len() + j]
    }

    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.raw_weight(i, j) > self.threshold
    }

    /// Weight of a retained edge, 0 otherwise.
    pub fn edge_weight(&self, i: usize, j: usize) -> f64 {
        if self.is_edge(i, j) {
            f64::from(self.raw_weight(i, j))
        } else {
            0.0
        }
    }

    /// Retained edges as `(i, j, weight)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        let n = self.nodes.len();
        (0..n).flat_map(move |i| {
            (i + 1..n)
                .filter(move |&j| self.is_edge(i, j))
                .map(move |j| (i, j, self.raw_weight(i, j)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn degree(&self, i: usize) -> usize {
        (0..self.len()).filter(|&j| self.is_edge(i, j)).count()
    }

    /// Sum of retained edge weights at node `i`.
    pub fn strength(&self, i: usize) -> f64 {
        (0..self.len()).map(|j| self.edge_weight(i, j)).sum()
    }

    /// Neighbor lists with retained weights, neighbors in index order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| self.is_edge(i, j))
                    .map(|j| (j, f64::from(self.raw_weight(i, j))))
                    .collect()
            })
            .collect()
    }

    /// Same weights under another threshold.
    pub fn with_threshold(&self, threshold: u32) -> Self {
        CoExposureNetwork {
            threshold,
            ..self.clone()
        }
    }

    /// Induced subnetwork on the given node indices, in the given order.
    pub fn induced(&self, indices: &[usize]) -> Self {
        let n = self.len();
        let m = indices.len();
        let mut weights = vec![0u32; m * m];
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                weights[a * m + b] = self.weights[i * n + j];
            }
        }
        CoExposureNetwork {
            nodes: indices.iter().map(|&i| self.nodes[i].clone()).collect(),
            weights,
            threshold: self.threshold,
        }
    }

    /// Induced subnetwork on the named nodes that are present, keeping this
    /// network's node order.
    pub fn subnetwork<S: AsRef<str>>(&self, keep: &[S]) -> Self {
        let wanted: BTreeSet<&str> = keep.iter().map(|s| s.as_ref()).collect();
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| wanted.contains(self.nodes[i].as_str()))
            .collect();
        self.induced(&idx)
    }
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> u32 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoExposureOptions {
    pub political_only: bool,
    pub window: AnalysisWindow,
    pub t_max: u32,
    pub threshold: u32,
    /// Keep every account present in the input as a node, even without
    /// qualifying exposures in the window.
    pub retain_all: bool,
}

impl Default for CoExposureOptions {
    fn default() -> Self {
        CoExposureOptions {
            political_only: true,
            window: AnalysisWindow::LastK(50),
            t_max: crate::datamodel::DEFAULT_T_MAX,
            threshold: DEFAULT_THETA,
            retain_all: false,
        }
    }
}

/// Co-exposure network over the accounts in `records`.
///
/// Weights count distinct videos both accounts were exposed to inside the
/// window. By default only accounts with at least one qualifying exposure
/// become nodes.
pub fn build_coexposure(
    records: &[ExposureRecord],
    opts: &CoExposureOptions,
) -> Result<CoExposureNetwork> {
    let range = opts.window.resolve(opts.t_max)?;
    let mut sets: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    if opts.retain_all {
        for r in records {
            sets.entry(r.account_id.as_str()).or_default();
        }
    }
    let mut qualifying = 0usize;
    for r in records {
        if r.kind != Kind::Exposure
            || !range.contains(&r.step)
            || (opts.political_only && !r.is_political)
        {
            continue;
        }
        qualifying += 1;
        sets.entry(r.account_id.as_str())
            .or_default()
            .insert(r.video_id.clone());
    }
    if qualifying == 0 {
        return Err(Error::Empty(format!(
            "no qualifying exposures in window {}",
            opts.window
        )));
    }
    if sets.len() < 2 {
        return Err(Error::InvalidArgument(
            "co-exposure network needs at least two accounts".into(),
        ));
    }
    let nodes: Vec<String> = sets.keys().map(|k| k.to_string()).collect();
    let sets: Vec<BTreeSet<String>> = sets.into_values().collect();
    CoExposureNetwork::from_video_sets(nodes, &sets, opts.threshold)
}

/// Share of possible node pairs joined by a retained edge.
pub fn density(net: &CoExposureNetwork) -> Result<f64> {
    let n = net.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "density needs at least two nodes".into(),
        ));
    }
    Ok(2.0 * net.edge_count() as f64 / (n * (n - 1)) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Mean over all nodes, including those of degree < 2.
    pub mean: f64,
    pub per_node: Vec<f64>,
}

/// Weighted (Barrat) clustering on retained edges. Nodes of degree below
/// two get 0.
pub fn weighted_clustering(net: &CoExposureNetwork) -> Clustering {
    let adj = net.adjacency();
    let per_node: Vec<f64> = adj
        .iter()
        .map(|nbrs| {
            let k = nbrs.len();
            if k < 2 {
                return 0.0;
            }
            let s: f64 = nbrs.iter().map(|(_, w)| w).sum();
            let mut acc = 0.0;
            for (a, &(j, wij)) in nbrs.iter().enumerate() {
                for &(h, wih) in &nbrs[a + 1..] {
                    if net.is_edge(j, h) {
                        // ordered pairs (j,h) and (h,j) each contribute (wij+wih)/2
                        acc += wij + wih;
                    }
                }
            }
            acc / (s * (k - 1) as f64)
        })
        .collect();
    let mean = if per_node.is_empty() {
        0.0
    } else {
        per_node.iter().sum::<f64>() / per_node.len() as f64
    };
    Clustering { mean, per_node }
}

/// Community assignment over an ordered node list. Labels are contiguous
/// from 0 in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    nodes: Vec<String>,
    labels: Vec<usize>,
    pub resolution: f64,
    pub rng_seed: u64,
}

impl Partition {
    pub fn new(nodes: Vec<String>, labels: Vec<usize>, resolution: f64, rng_seed: u64) -> Result<Self> {
        if nodes.len() != labels.len() {
            return Err(Error::InvalidArgument(
                "one community label per node".into(),
            ));
        }
        if !(resolution > 0.0) {
            return Err(Error::InvalidArgument("resolution must be positive".into()));
        }
        if nodes.iter().collect::<BTreeSet<_>>().len() != nodes.len() {
            return Err(Error::InvalidArgument("duplicate node ids".into()));
        }
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(l).or_insert(next)
            })
            .collect();
        Ok(Partition {
            nodes,
            labels,
            resolution,
            rng_seed,
        })
    }

    pub fn singletons(nodes: Vec<String>, resolution: f64) -> Result<Self> {
        let labels = (0..nodes.len()).collect();
        Self::new(nodes, labels, resolution, 0)
    }

    pub fn all_in_one(nodes: Vec<String>, resolution: f64) -> Result<Self> {
        let labels = vec![0; nodes.len()];
        Self::new(nodes, labels, resolution, 0)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_communities(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn community_of(&self, node: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n == node)
            .map(|i| self.labels[i])
    }

    pub fn assignment(&self) -> BTreeMap<String, usize> {
        self.nodes
            .iter()
            .cloned()
            .zip(self.labels.iter().copied())
            .collect()
    }

    /// Member node names per community.
    pub fn members(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.n_communities()];
        for (n, &l) in self.nodes.iter().zip(&self.labels) {
            out[l].push(n.clone());
        }
        out
    }
}

/// Labels of `partition` aligned with `net`'s node order.
fn aligned_labels(net: &CoExposureNetwork, partition: &Partition) -> Result<Vec<usize>> {
    if partition.nodes == net.nodes {
        return Ok(partition.labels.clone());
    }
    let lookup: HashMap<&str, usize> = partition
        .nodes
        .iter()
        .map(|s| s.as_str())
        .zip(partition.labels.iter().copied())
        .collect();
    net.nodes
        .iter()
        .map(|n| {
            lookup.get(n.as_str()).copied().ok_or_else(|| {
                Error::InvalidArgument(format!("node {n} missing from partition"))
            })
        })
        .collect()
}

/// Weighted modularity of `partition` on `net` at the partition's resolution.
pub fn modularity(net: &CoExposureNetwork, partition: &Partition) -> Result<f64> {
    let labels = aligned_labels(net, partition)?;
    let strengths: Vec<f64> = (0..net.len()).map(|i| net.strength(i)).collect();
    let two_m: f64 = strengths.iter().sum();
    if two_m == 0.0 {
        return Err(Error::Undefined("modularity of an edgeless network".into()));
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (i, &c) in labels.iter().enumerate() {
        total[c] += strengths[i];
    }
    for (i, j, w) in net.edges() {
        if labels[i] == labels[j] {
            internal[labels[i]] += 2.0 * f64::from(w);
        }
    }
    let gamma = partition.resolution;
    let q: f64 = internal
        .iter()
        .zip(&total)
        .map(|(inn, tot)| inn - gamma * tot * tot / two_m)
        .sum();
    Ok(q / two_m)
}

/// Pairwise co-membership agreement (Rand index) on nodes present in both
/// partitions.
pub fn community_continuity(early: &Partition, late: &Partition) -> Result<f64> {
    let late_map: HashMap<&str, usize> = late
        .nodes
        .iter()
        .map(|s| s.as_str())
        .zip(late.labels.iter().copied())
        .collect();
    let shared: Vec<(usize, usize)> = early
        .nodes
        .iter()
        .zip(&early.labels)
        .filter_map(|(n, &a)| late_map.get(n.as_str()).map(|&b| (a, b)))
        .collect();
    if shared.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "continuity needs two shared nodes, found {}",
            shared.len()
        )));
    }
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..shared.len() {
        for j in i + 1..shared.len() {
            let same_early = shared[i].0 == shared[j].0;
            let same_late = shared[i].1 == shared[j].1;
            agree += u64::from(same_early == same_late);
            total += 1;
        }
    }
    Ok(agree as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityProfile {
    pub community: usize,
    pub members: usize,
    /// Members with a nonzero issue vector.
    pub with_evidence: usize,
    pub issue: IssueVector,
    /// Mean left / neutral / right shares over members with ideology labels.
    pub ideology: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityProfiles {
    pub profiles: Vec<CommunityProfile>,
    /// Communities whose members all lack issue evidence.
    pub excluded: Vec<usize>,
}

/// Mean issue and ideology composition of each community, from members'
/// exposure records.
pub fn community_profile(
    partition: &Partition,
    records_by_account: &BTreeMap<String, Vec<ExposureRecord>>,
) -> Result<CommunityProfiles> {
    let mut profiles = Vec::new();
    let mut excluded = Vec::new();
    for (c, members) in partition.members().into_iter().enumerate() {
        let mut vectors = Vec::new();
        let mut ideologies = Vec::new();
        for m in &members {
            let recs = records_by_account.get(m).ok_or_else(|| {
                Error::InvalidArgument(format!("no records for partition node {m}"))
            })?;
            let exposures: Vec<&ExposureRecord> =
                recs.iter().filter(|r| r.kind == Kind::Exposure).collect();
            vectors.push(build_issue_vector(exposures.iter().copied(), Kind::Exposure));
            if let Some(shares) = ideology_shares(exposures.iter().copied()) {
                ideologies.push(shares);
            }
        }
        let Some(issue) = IssueVector::mean(&vectors) else {
            excluded.push(c);
            continue;
        };
        let ideology = (!ideologies.is_empty()).then(|| {
            let mut acc = [0.0; 3];
            for s in &ideologies {
                for (a, v) in acc.iter_mut().zip(s) {
                    *a += v;
                }
            }
            acc.map(|a| a / ideologies.len() as f64)
        });
        profiles.push(CommunityProfile {
            community: c,
            members: members.len(),
            with_evidence: vectors.iter().filter(|v| !v.is_zero()).count(),
            issue,
            ideology,
        });
    }
    Ok(CommunityProfiles { profiles, excluded })
}
