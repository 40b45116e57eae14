use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::CoExposureNetwork;
use crate::datamodel::Group;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationOutcome {
    /// metric(male network) − metric(female network).
    pub observed_diff: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    /// Reshuffles at least as extreme as the observed difference.
    pub n_extreme: usize,
    /// Reshuffles where the metric failed; they count toward the
    /// denominator only.
    pub n_incomparable: usize,
}

/// Label-reshuffling test for a difference in a network metric between the
/// two groups.
///
/// `network` is the co-exposure network over all accounts. Because edge
/// weights depend only on the pair of accounts, the network of any group
/// labeling is the induced subnetwork on that group's accounts, so each
/// reshuffle rebuilds both group networks from it. Group sizes are
/// preserved. Reshuffle `k` draws from its own stream derived from
/// `(seed, k)`, so results do not depend on thread count.
pub fn permutation_test<F>(
    metric: F,
    network: &CoExposureNetwork,
    groups: &BTreeMap<String, Group>,
    n_permutations: usize,
    seed: u64,
) -> Result<PermutationOutcome>
where
    F: Fn(&CoExposureNetwork) -> Result<f64> + Sync,
{
    if n_permutations < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 permutations, got {n_permutations}"
        )));
    }
    let mut indices = Vec::new();
    let mut labels = Vec::new();
    for (i, node) in network.nodes().iter().enumerate() {
        if let Some(g) = groups.get(node) {
            indices.push(i);
            labels.push(*g);
        }
    }
    let n_a = labels.iter().filter(|g| **g == Group::MaleCoded).count();
    if n_a == 0 || n_a == labels.len() {
        return Err(Error::InvalidArgument(
            "permutation test needs both groups present".into(),
        ));
    }
    let diff_for = |labels: &[Group]| -> Result<f64> {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (&i, g) in indices.iter().zip(labels) {
            match g {
                Group::MaleCoded => a.push(i),
                Group::FemaleCoded => b.push(i),
            }
        }
        Ok(metric(&network.induced(&a))? - metric(&network.induced(&b))?)
    };
    let observed = diff_for(&labels)?;
    let bound = observed.abs() - 1e-12 * observed.abs().max(1.0);

    let (n_extreme, n_incomparable) = (0..n_permutations)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::rng(seed, k as u64);
            let mut shuffled = labels.clone();
            shuffled.shuffle(&mut rng);
            match diff_for(&shuffled) {
                Ok(d) if d.abs() >= bound => (1usize, 0usize),
                Ok(_) => (0, 0),
                Err(_) => (0, 1),
            }
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));

    Ok(PermutationOutcome {
        observed_diff: observed,
        p_value: (1 + n_extreme) as f64 / (1 + n_permutations) as f64,
        n_permutations,
        n_extreme,
        n_incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conet::density;

    fn clique_vs_empty(n: usize) -> (CoExposureNetwork, BTreeMap<String, Group>) {
        let nodes: Vec<String> = (0..2 * n).map(|i| format!("a{i:02}")).collect();
        let mut w = vec![vec![0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w[i][j] = 5;
                }
            }
        }
        let groups = nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), if i < n { Group::MaleCoded } else { Group::FemaleCoded }))
            .collect();
        (CoExposureNetwork::from_matrix(nodes, w, 0).unwrap(), groups)
    }

    #[test]
    fn extreme_split_hits_minimum_p() {
        let (net, groups) = clique_vs_empty(10);
        let out = permutation_test(density, &net, &groups, 1000, 1).unwrap();
        assert_eq!(out.observed_diff, 1.0);
        assert_eq!(out.n_extreme, 0);
        assert_eq!(out.p_value, 1.0 / 1001.0);
    }

    #[test]
    fn constant_metric_gives_p_one() {
        let (net, groups) = clique_vs_empty(5);
        let out = permutation_test(|_| Ok(0.25), &net, &groups, 200, 9).unwrap();
        assert_eq!(out.p_value, 1.0);
    }

    #[test]
    fn failures_are_incomparable() {
        let (net, groups) = clique_vs_empty(5);
        // fails whenever a00 and a09 land in the same group; the observed
        // labeling keeps them apart
        let metric = |n: &CoExposureNetwork| {
            if n.index_of("a00").is_some() && n.index_of("a09").is_some() {
                Err(Error::Undefined("paired".into()))
            } else {
                density(n)
            }
        };
        let out = permutation_test(metric, &net, &groups, 200, 2).unwrap();
        assert!(out.n_incomparable > 0);
        assert_eq!(out.p_value, (1 + out.n_extreme) as f64 / 201.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (net, groups) = clique_vs_empty(5);
        assert!(permutation_test(density, &net, &groups, 50, 0).is_err());
        let one_group: BTreeMap<_, _> = groups.keys().map(|k| (k.clone(), Group::MaleCoded)).collect();
        assert!(permutation_test(density, &net, &one_group, 100, 0).is_err());
    }
}
