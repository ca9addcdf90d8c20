//! Modularity clustering by multi-level local moving.
//!
//! Each level visits nodes in a seeded random order and moves a node to the
//! neighbouring community with the largest strictly positive modularity gain,
//! breaking ties toward the smallest community index. Converged communities are
//! collapsed into weighted super-nodes and the process repeats until a level
//! makes no move. All accumulation runs over index-ordered vectors, so the
//! result is a pure function of (graph, resolution, seed).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::egonet::UndirectedFollowGraph;
use crate::ingest::AccountId;

const MAX_PASSES: usize = 200;
const MAX_LEVELS: usize = 32;
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Labels are `0..k`, ordered by cluster size (largest first), then smallest member id.
    pub assignment: BTreeMap<AccountId, usize>,
    pub modularity: f64,
    pub resolution: f64,
    pub seed: u64,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        self.assignment.values().max().map_or(0, |m| m + 1)
    }

    /// Sizes indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count()];
        for &c in self.assignment.values() {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Weighted graph at one aggregation level. `adj[i]` excludes self-loops.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn n(&self) -> usize {
        self.adj.len()
    }

    fn degrees(&self) -> Vec<f64> {
        self.adj
            .iter()
            .zip(&self.self_loops)
            .map(|(nbrs, sl)| nbrs.iter().map(|(_, w)| w).sum::<f64>() + 2.0 * sl)
            .collect()
    }
}

/// Modularity of a labelling on an unweighted undirected graph given as index adjacency.
pub(crate) fn modularity_indexed(adj: &[Vec<usize>], labels: &[usize], resolution: f64) -> f64 {
    let two_m: f64 = adj.iter().map(|a| a.len() as f64).sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; k];
    let mut total = vec![0.0; k];
    for (i, nbrs) in adj.iter().enumerate() {
        total[labels[i]] += nbrs.len() as f64;
        for &j in nbrs {
            if labels[j] == labels[i] {
                internal[labels[i]] += 1.0;
            }
        }
    }
    (0..k)
        .map(|c| internal[c] / two_m - resolution * (total[c] / two_m).powi(2))
        .sum()
}

/// Modularity of `assignment` on `g`. Nodes missing from the assignment are singletons.
pub fn modularity(g: &UndirectedFollowGraph, assignment: &BTreeMap<AccountId, usize>, resolution: f64) -> f64 {
    let (ids, adj) = g.indexed();
    let mut next = assignment.values().max().map_or(0, |m| m + 1);
    let labels: Vec<usize> = ids
        .iter()
        .map(|id| {
            assignment.get(id).copied().unwrap_or_else(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    modularity_indexed(&adj, &labels, resolution)
}

fn local_moving(level: &Level, resolution: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
    let n = level.n();
    let k = level.degrees();
    let two_m: f64 = k.iter().sum();
    let mut community: Vec<usize> = (0..n).collect();
    if two_m == 0.0 {
        return (community, false);
    }
    let mut tot = k.clone();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut weight_to = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &i in &order {
            let own = community[i];
            tot[own] -= k[i];

            for &(j, w) in &level.adj[i] {
                let c = community[j];
                if weight_to[c] == 0.0 {
                    touched.push(c);
                }
                weight_to[c] += w;
            }
            touched.sort_unstable();
            touched.dedup();

            let gain = |c: usize, w_in: f64| w_in - resolution * tot[c] * k[i] / two_m;
            let stay = gain(own, weight_to[own]);
            let mut best = own;
            let mut best_gain = stay;
            for &c in &touched {
                let g = gain(c, weight_to[c]);
                if g > best_gain + GAIN_EPS || (best != own && (g - best_gain).abs() <= GAIN_EPS && c < best) {
                    best = c;
                    best_gain = g;
                }
            }
            for &c in &touched {
                weight_to[c] = 0.0;
            }
            touched.clear();

            tot[best] += k[i];
            if best != own {
                community[i] = best;
                moved = true;
                moved_any = true;
            }
        }
        if !moved {
            break;
        }
    }
    (community, moved_any)
}

/// Renumber labels densely in order of first appearance by node index.
fn compact(labels: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

fn aggregate(level: &Level, labels: &[usize], count: usize) -> Level {
    let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
    let mut self_loops = vec![0.0; count];
    for (i, nbrs) in level.adj.iter().enumerate() {
        let ci = labels[i];
        self_loops[ci] += level.self_loops[i];
        for &(j, w) in nbrs {
            let cj = labels[j];
            if ci == cj {
                // each internal edge is seen from both ends
                self_loops[ci] += w / 2.0;
            } else {
                *weights[ci].entry(cj).or_insert(0.0) += w;
            }
        }
    }
    Level {
        adj: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
        self_loops,
    }
}

pub fn cluster(g: &UndirectedFollowGraph, resolution: f64, seed: u64) -> Clustering {
    assert!(resolution > 0.0, "resolution must be positive");
    let (ids, adj) = g.indexed();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut node_label: Vec<usize> = (0..n).collect();
    let mut level = Level {
        adj: adj
            .iter()
            .map(|nbrs| nbrs.iter().map(|&j| (j, 1.0)).collect())
            .collect(),
        self_loops: vec![0.0; n],
    };
    for _ in 0..MAX_LEVELS {
        let (mut labels, moved) = local_moving(&level, resolution, &mut rng);
        if !moved {
            break;
        }
        let count = compact(&mut labels);
        for l in node_label.iter_mut() {
            *l = labels[*l];
        }
        level = aggregate(&level, &labels, count);
    }

    // Never worse than lumping every non-isolated node together.
    let mut q = modularity_indexed(&adj, &node_label, resolution);
    let has_edges = adj.iter().any(|a| !a.is_empty());
    if has_edges {
        let lumped: Vec<usize> = (0..n).map(|i| if adj[i].is_empty() { i + 1 } else { 0 }).collect();
        let q_lumped = modularity_indexed(&adj, &lumped, resolution);
        if q_lumped > q + GAIN_EPS {
            node_label = lumped;
            q = q_lumped;
        }
    }

    let labels = canonical_labels(&node_label, &ids);
    let assignment = ids.into_iter().zip(labels).collect();
    Clustering {
        assignment,
        modularity: q,
        resolution,
        seed,
    }
}

/// Relabel to `0..k` by descending size, ties by smallest member index (ids are sorted).
fn canonical_labels(labels: &[usize], ids: &[AccountId]) -> Vec<usize> {
    let mut groups: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        let e = groups.entry(l).or_insert((0, i));
        e.0 += 1;
        e.1 = e.1.min(i);
    }
    let mut order: Vec<(usize, usize, usize)> = groups.into_iter().map(|(l, (size, first))| (l, size, first)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let relabel: BTreeMap<usize, usize> = order.iter().enumerate().map(|(new, (old, _, _))| (*old, new)).collect();
    debug_assert_eq!(labels.len(), ids.len());
    labels.iter().map(|l| relabel[l]).collect()
}
