//! Random forest of gain-ratio trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, GrowConfig};
use crate::seed::{argmax_lowest, derive_seed, derive_seed2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, Copy)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Candidate features per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Seed of tree `t`'s feature sampling.
pub fn tree_seed(seed: u64, t: usize) -> u64 {
    derive_seed(seed, t as u64)
}

pub fn default_max_features(d: usize) -> usize {
    ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1))
}

impl RandomForest {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: ForestConfig, seed: u64) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let grow = GrowConfig {
            min_leaf: cfg.min_leaf,
            max_depth: cfg.max_depth,
            max_features: Some(cfg.max_features.unwrap_or_else(|| default_max_features(d))),
        };
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let idx: Vec<usize> = if cfg.bootstrap {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed2(seed, t as u64, 1));
                    let mut idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    idx.sort_unstable();
                    idx
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, n_classes, &idx, grow, tree_seed(seed, t))
            })
            .collect();
        RandomForest { trees }
    }

    pub fn votes(&self, row: &[f64], n_classes: usize) -> Vec<usize> {
        let mut votes = vec![0usize; n_classes];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        votes
    }

    pub fn predict(&self, row: &[f64], n_classes: usize) -> usize {
        argmax_lowest(&self.votes(row, n_classes))
    }
}
