//! Binary decision trees on numeric features, split by gain ratio.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::seed::argmax_lowest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { class: usize },
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root is `nodes[0]`.
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
pub struct GrowConfig {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

/// Gain ratios closer than this are treated as tied.
const TIE_EPS: f64 = 1e-12;

/// A chosen split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain_ratio: f64,
}

pub fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Gain ratio of a binary partition given class counts on each side.
pub fn gain_ratio(left: &[usize], right: &[usize]) -> Option<f64> {
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let n = nl + nr;
    if nl == 0 || nr == 0 {
        return None;
    }
    let parent: Vec<usize> = left.iter().zip(right).map(|(a, b)| a + b).collect();
    let (pl, pr) = (nl as f64 / n as f64, nr as f64 / n as f64);
    let gain = entropy(&parent, n) - pl * entropy(left, nl) - pr * entropy(right, nr);
    let split_info = -pl * pl.log2() - pr * pr.log2();
    Some(gain / split_info).filter(|_| gain > 1e-12)
}

/// Midpoint threshold that keeps `lo` left and `hi` right even when the
/// two are adjacent floats.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Best gain-ratio split over `features` for the rows in `idx`. Candidate
/// thresholds are midpoints between consecutive distinct values; both sides
/// must hold at least `min_leaf` rows. Ties go to the first feature in
/// `features` and then to the lowest threshold.
pub fn best_split(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    idx: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let n = idx.len();
    let mut parent = vec![0usize; n_classes];
    for &i in idx {
        parent[y[i]] += 1;
    }
    let mut best: Option<Split> = None;
    let mut order = idx.to_vec();
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &f in features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        left.iter_mut().for_each(|c| *c = 0);
        for k in 0..n - 1 {
            left[y[order[k]]] += 1;
            let (lo, hi) = (x[order[k]][f], x[order[k + 1]][f]);
            let nl = k + 1;
            if lo == hi || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            for c in 0..n_classes {
                right[c] = parent[c] - left[c];
            }
            if let Some(ratio) = gain_ratio(&left, &right) {
                if best.is_none_or(|b| ratio > b.gain_ratio + TIE_EPS) {
                    best = Some(Split { feature: f, threshold: midpoint(lo, hi), gain_ratio: ratio });
                }
            }
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    config: GrowConfig,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x[0].len();
        match self.config.max_features {
            Some(m) if m < d => {
                let mut f = sample(&mut self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &i in idx {
            counts[self.y[i]] += 1;
        }
        let majority = argmax_lowest(&counts);
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf { class: majority });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.config.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || idx.len() < 2 * self.config.min_leaf.max(1) {
            return slot;
        }
        let features = self.candidate_features();
        let Some(split) = best_split(self.x, self.y, self.n_classes, idx, &features, self.config.min_leaf.max(1)) else {
            return slot;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[slot] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        slot
    }
}

impl DecisionTree {
    /// Grows a tree on the rows `idx` (duplicates allowed, as produced by
    /// bootstrap sampling). `seed` only matters when `max_features` limits
    /// the candidate set.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, idx: &[usize], config: GrowConfig, seed: u64) -> Self {
        let mut grower = Grower { x, y, n_classes, config, rng: ChaCha8Rng::seed_from_u64(seed), nodes: Vec::new() };
        if idx.is_empty() {
            return DecisionTree { nodes: vec![Node::Leaf { class: 0 }] };
        }
        grower.grow(idx, 0);
        DecisionTree { nodes: grower.nodes }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
