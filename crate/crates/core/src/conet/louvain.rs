//! Multi-level Louvain modularity maximization.
//!
//! Each level repeatedly sweeps the nodes in a seeded random order, moving a
//! node to the neighboring community with the largest modularity gain when
//! that gain beats staying put by more than `MIN_GAIN`. Once a sweep makes no
//! move the communities are collapsed into super-nodes and the next level
//! starts. The run ends when a level makes no move at all.

use rand::seq::SliceRandom;

use super::{CoExposureNetwork, Partition};
use crate::error::{Error, Result};
use crate::seed;

const MIN_GAIN: f64 = 1e-9;

struct Level {
    /// Off-diagonal neighbors with weights.
    adj: Vec<Vec<(usize, f64)>>,
    /// Self-loop weight (twice the internal edge weight of a collapsed
    /// community).
    loops: Vec<f64>,
}

impl Level {
    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degrees(&self) -> Vec<f64> {
        self.adj
            .iter()
            .zip(&self.loops)
            .map(|(nbrs, l)| nbrs.iter().map(|(_, w)| w).sum::<f64>() + l)
            .collect()
    }

    fn aggregate(&self, labels: &[usize], n_comms: usize) -> Level {
        let mut loops = vec![0.0; n_comms];
        let mut dense: Vec<std::collections::BTreeMap<usize, f64>> =
            vec![Default::default(); n_comms];
        for (i, nbrs) in self.adj.iter().enumerate() {
            let ci = labels[i];
            loops[ci] += self.loops[i];
            for &(j, w) in nbrs {
                let cj = labels[j];
                if ci == cj {
                    loops[ci] += w;
                } else {
                    *dense[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adj: dense.into_iter().map(|m| m.into_iter().collect()).collect(),
            loops,
        }
    }
}

/// Local moving phase. Returns whether any node moved.
fn move_nodes(
    level: &Level,
    labels: &mut [usize],
    gamma: f64,
    two_m: f64,
    rng: &mut impl rand::Rng,
) -> bool {
    let n = level.len();
    let k = level.degrees();
    let mut tot = vec![0.0; n];
    for i in 0..n {
        tot[labels[i]] += k[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &i in &order {
            let own = labels[i];
            tot[own] -= k[i];
            for &(j, w) in &level.adj[i] {
                let c = labels[j];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            let gain = |c: usize, link: f64| (link - gamma * tot[c] * k[i] / two_m) / (two_m / 2.0);
            let stay = gain(own, links[own]);
            let mut best = own;
            let mut best_gain = stay;
            for &c in &touched {
                let g = gain(c, links[c]);
                if g > best_gain {
                    best = c;
                    best_gain = g;
                }
            }
            if best != own && best_gain - stay <= MIN_GAIN {
                best = own;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
            tot[best] += k[i];
            if best != own {
                labels[i] = best;
                moved = true;
                any_move = true;
            }
        }
        if !moved {
            break;
        }
    }
    any_move
}

fn compact(labels: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; labels.len()];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    next
}

/// Louvain communities of `net` at resolution `resolution`, reproducible for
/// a given `seed`.
pub fn louvain_partition(net: &CoExposureNetwork, resolution: f64, seed: u64) -> Result<Partition> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    if net.edge_count() == 0 {
        return Err(Error::InvalidArgument(
            "Louvain needs at least one edge".into(),
        ));
    }
    let mut rng = seed::rng(seed, seed::stream_id("louvain"));
    let mut level = Level {
        adj: net.adjacency(),
        loops: vec![0.0; net.len()],
    };
    let two_m: f64 = level.degrees().iter().sum();
    // community of each original node
    let mut membership: Vec<usize> = (0..net.len()).collect();
    loop {
        let mut labels: Vec<usize> = (0..level.len()).collect();
        if !move_nodes(&level, &mut labels, resolution, two_m, &mut rng) {
            break;
        }
        let n_comms = compact(&mut labels);
        for m in membership.iter_mut() {
            *m = labels[*m];
        }
        level = level.aggregate(&labels, n_comms);
        if n_comms == 1 {
            break;
        }
    }
    Partition::new(net.nodes().to_vec(), membership, resolution, seed)
}
