//! Brute-force reference implementations and random instance generators
//! shared by the integration tests. Each oracle is written from the textbook
//! definition with no shortcuts, so it can be checked against the library.
#![allow(dead_code)]

pub mod planted;

use std::collections::BTreeSet;

use rand::Rng;

/// Entropy in bits, written as Σ (w/T) log2(T/w) over positive weights.
pub fn entropy_oracle(weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .filter(|w| **w > 0.0)
        .map(|w| (w / total) * (total / w).log2())
        .sum()
}

/// Cosine computed by normalizing both vectors first.
pub fn cosine_oracle(x: &[f64], y: &[f64]) -> f64 {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().zip(y).map(|(a, b)| (a / nx) * (b / ny)).sum()
}

pub fn jaccard_oracle(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    let union: BTreeSet<_> = a.union(b).collect();
    if union.is_empty() {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union.len() as f64
}

/// Shared-item counts as the product of the binary incidence matrix with its
/// transpose, diagonal zeroed.
pub fn coexposure_oracle(sets: &[BTreeSet<String>]) -> Vec<Vec<u32>> {
    let universe: Vec<&String> = sets.iter().flatten().collect::<BTreeSet<_>>().into_iter().collect();
    let x: Vec<Vec<u32>> = sets
        .iter()
        .map(|s| universe.iter().map(|v| u32::from(s.contains(*v))).collect())
        .collect();
    let n = sets.len();
    let mut w = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i][j] = (0..universe.len()).map(|k| x[i][k] * x[j][k]).sum();
            }
        }
    }
    w
}

fn thresholded(w: &[Vec<u32>], theta: u32) -> Vec<Vec<f64>> {
    w.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| if i != j && v > theta { f64::from(v) } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn density_oracle(w: &[Vec<u32>], theta: u32) -> f64 {
    let n = w.len();
    let mut edges = 0usize;
    let mut pairs = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            pairs += 1;
            edges += usize::from(w[i][j] > theta);
        }
    }
    edges as f64 / pairs as f64
}

/// Barrat clustering by enumerating every ordered neighbour pair.
pub fn clustering_oracle(w: &[Vec<u32>], theta: u32) -> Vec<f64> {
    let a = thresholded(w, theta);
    let n = a.len();
    (0..n)
        .map(|i| {
            let k = (0..n).filter(|&j| a[i][j] > 0.0).count();
            if k < 2 {
                return 0.0;
            }
            let s: f64 = a[i].iter().sum();
            let mut acc = 0.0;
            for j in 0..n {
                for h in 0..n {
                    if j != h && a[i][j] > 0.0 && a[i][h] > 0.0 && a[j][h] > 0.0 {
                        acc += (a[i][j] + a[i][h]) / 2.0;
                    }
                }
            }
            acc / (s * (k as f64 - 1.0))
        })
        .collect()
}

/// Modularity as the literal double sum over node pairs.
pub fn modularity_oracle(w: &[Vec<u32>], theta: u32, labels: &[usize], gamma: f64) -> f64 {
    let a = thresholded(w, theta);
    let n = a.len();
    let k: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - gamma * k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

pub fn rand_index(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            agree += usize::from((a[i] == a[j]) == (b[i] == b[j]));
        }
    }
    agree as f64 / total as f64
}

/// Holm adjustment from the step-down definition:
/// adj(p_(i)) = max over j ≤ i of min(1, (m − j + 1) p_(j)).
pub fn holm_oracle(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    for (rank, &idx) in order.iter().enumerate() {
        let mut best: f64 = 0.0;
        for (j, &jdx) in order[..=rank].iter().enumerate() {
            best = best.max(((m - j) as f64 * p[jdx]).min(1.0));
        }
        out[idx] = best;
    }
    out
}

/// Holm rejections at level alpha, stopping at the first acceptance.
pub fn holm_rejections(p: &[f64], alpha: f64) -> Vec<bool> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));
    let mut out = vec![false; m];
    for (rank, &idx) in order.iter().enumerate() {
        if p[idx] * (m - rank) as f64 <= alpha {
            out[idx] = true;
        } else {
            break;
        }
    }
    out
}

pub fn node_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i:02}")).collect()
}

/// Random per-node video sets over a small universe.
pub fn random_sets(rng: &mut impl Rng, n: usize, universe: usize, p: f64) -> Vec<BTreeSet<String>> {
    (0..n)
        .map(|_| {
            (0..universe)
                .filter(|_| rng.gen::<f64>() < p)
                .map(|v| format!("v{v}"))
                .collect()
        })
        .collect()
}

/// Random symmetric weight matrix with a zero diagonal.
pub fn random_weights(rng: &mut impl Rng, n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut w = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(0..=max);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

/// Two dense blocks of `size` nodes with sparse links between them.
pub fn planted_two_blocks(rng: &mut impl Rng, size: usize, p_in: f64, p_out: f64) -> Vec<Vec<u32>> {
    let n = 2 * size;
    let mut w = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < size) == (j < size) { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                w[i][j] = 1;
                w[j][i] = 1;
            }
        }
    }
    w
}

/// Error structure for synthetic panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    None,
    /// Independent unit-variance errors.
    Iid,
    /// A persistent account-by-issue effect plus an independent term, with
    /// predictors that persist the same way.
    NodeCorrelated,
}

/// Long-format panel of `accounts × transitions × issues` rows with the
/// same fixed-effect layout as the lagged feedback design. Predictor `c`
/// has raw slope `slopes[c]`.
pub fn synthetic_panel(
    rng: &mut impl Rng,
    accounts: usize,
    transitions: usize,
    issues: usize,
    slopes: &[f64],
    noise: Noise,
) -> recaudit::feedback::Design {
    use rand_distr::{Distribution, StandardNormal};
    let z = |rng: &mut dyn rand::RngCore| -> f64 { StandardNormal.sample(rng) };
    let k = slopes.len();
    let issue_effect: Vec<f64> = (0..issues).map(|_| z(rng)).collect();
    let stage_effect: Vec<f64> = (0..transitions).map(|_| z(rng)).collect();
    let persistent: Vec<Vec<Vec<f64>>> = (0..accounts)
        .map(|_| (0..issues).map(|_| (0..k).map(|_| z(rng)).collect()).collect())
        .collect();
    let account_issue: Vec<Vec<f64>> = (0..accounts)
        .map(|_| (0..issues).map(|_| z(rng)).collect())
        .collect();
    let mut outcome = Vec::new();
    let mut cols = vec![Vec::new(); k];
    let mut fe = vec![Vec::new(); issues + transitions];
    let mut clusters = Vec::new();
    for a in 0..accounts {
        for t in 0..transitions {
            for l in 0..issues {
                let mut y = issue_effect[l] + stage_effect[t] + if a % 2 == 1 { 0.7 } else { 0.0 };
                for c in 0..k {
                    let x = match noise {
                        Noise::NodeCorrelated => persistent[a][l][c] + 0.3 * z(rng),
                        _ => z(rng),
                    };
                    y += slopes[c] * x;
                    cols[c].push(x);
                }
                y += match noise {
                    Noise::None => 0.0,
                    Noise::Iid => z(rng),
                    Noise::NodeCorrelated => account_issue[a][l] + 0.5 * z(rng),
                };
                outcome.push(y);
                for (f, col) in fe.iter_mut().enumerate() {
                    let on = if f < issues { f == l } else { f - issues == t };
                    col.push(if on { 1.0 } else { 0.0 });
                }
                clusters.push(format!("acct{a}"));
            }
        }
    }
    let mut fixed: Vec<(String, Vec<f64>)> = fe
        .into_iter()
        .enumerate()
        // the first stage dummy is dropped; issue dummies span the intercept
        .filter(|(f, _)| *f != issues)
        .map(|(f, col)| (format!("fe{f}"), col))
        .collect();
    let female = (0..accounts)
        .flat_map(|a| std::iter::repeat(if a % 2 == 1 { 1.0 } else { 0.0 }).take(transitions * issues))
        .collect();
    fixed.push(("female".into(), female));
    let predictors = cols
        .into_iter()
        .enumerate()
        .map(|(c, col)| (format!("x{c}"), col))
        .collect();
    recaudit::feedback::Design::new(outcome, predictors, fixed, clusters).unwrap()
}
