mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use recaudit::conet::{louvain_partition, modularity, CoExposureNetwork, Partition};

use common::*;

/// Calls `visit` with every set partition of `n` items as a restricted
/// growth string.
fn for_each_partition(n: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(labels: &mut Vec<usize>, n: usize, max: usize, visit: &mut impl FnMut(&[usize])) {
        if labels.len() == n {
            visit(labels);
            return;
        }
        for l in 0..=max + 1 {
            labels.push(l);
            rec(labels, n, max.max(l), visit);
            labels.pop();
        }
    }
    let mut labels = vec![0];
    rec(&mut labels, n, 0, visit);
}

fn bridged_cliques() -> Vec<Vec<u32>> {
    let mut w = vec![vec![0u32; 10]; 10];
    for i in 0..10 {
        for j in 0..10 {
            if i != j && (i < 5) == (j < 5) {
                w[i][j] = 1;
            }
        }
    }
    w[4][5] = 1;
    w[5][4] = 1;
    w
}

#[test]
fn bell_ten_enumeration_count() {
    let mut count = 0usize;
    for_each_partition(10, &mut |_| count += 1);
    assert_eq!(count, 115_975);
}

#[test]
fn two_bridged_cliques_reach_the_exhaustive_optimum() {
    let w = bridged_cliques();
    let mut best = f64::NEG_INFINITY;
    let mut best_labels = Vec::new();
    for_each_partition(10, &mut |labels| {
        let q = modularity_oracle(&w, 0, labels, 1.0);
        if q > best + 1e-15 {
            best = q;
            best_labels = labels.to_vec();
        }
    });
    assert_eq!(best_labels, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);

    let net = CoExposureNetwork::from_matrix(node_names(10), w, 0).unwrap();
    for seed in 0..10 {
        let p = louvain_partition(&net, 1.0, seed).unwrap();
        assert!((modularity(&net, &p).unwrap() - best).abs() < 1e-12);
        assert_eq!(rand_index(p.labels(), &best_labels), 1.0);
    }
}

#[test]
fn planted_blocks_are_recovered() {
    let mut good = 0;
    for k in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k);
        let w = planted_two_blocks(&mut rng, 20, 0.9, 0.05);
        let net = CoExposureNetwork::from_matrix(node_names(40), w.clone(), 0).unwrap();
        let p = louvain_partition(&net, 1.0, k).unwrap();
        let truth: Vec<usize> = (0..40).map(|i| i / 20).collect();
        if rand_index(p.labels(), &truth) > 0.95 {
            good += 1;
        }
        let q = modularity(&net, &p).unwrap();
        assert!((q - modularity_oracle(&w, 0, p.labels(), 1.0)).abs() < 1e-12);
    }
    assert!(good >= 19, "{good}/20 recovered");
}

#[test]
fn result_beats_trivial_partitions_and_is_seed_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..30 {
        let n = 6 + trial % 10;
        let w = random_weights(&mut rng, n, 5);
        let net = CoExposureNetwork::from_matrix(node_names(n), w, 1).unwrap();
        if net.edge_count() == 0 {
            continue;
        }
        let p = louvain_partition(&net, 1.0, trial as u64).unwrap();
        let q = modularity(&net, &p).unwrap();
        let single = modularity(&net, &Partition::singletons(node_names(n), 1.0).unwrap()).unwrap();
        let whole = modularity(&net, &Partition::all_in_one(node_names(n), 1.0).unwrap()).unwrap();
        assert!(q >= single - 1e-12 && q >= whole - 1e-12);
        assert_eq!(p, louvain_partition(&net, 1.0, trial as u64).unwrap());
    }
}

#[test]
fn isolated_nodes_stay_alone() {
    let mut w = bridged_cliques();
    for row in &mut w {
        row.push(0);
    }
    w.push(vec![0; 11]);
    let net = CoExposureNetwork::from_matrix(node_names(11), w, 0).unwrap();
    let p = louvain_partition(&net, 1.0, 3).unwrap();
    let lone = p.labels()[10];
    assert_eq!(p.labels().iter().filter(|&&l| l == lone).count(), 1);
}
