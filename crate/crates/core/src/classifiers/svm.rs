//! Linear one-vs-rest SVM trained by full-batch hinge-loss subgradient
//! descent on standardized features.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::argmax_lowest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub mean: Vec<f64>,
    /// Training standard deviations; zero-variance features use 1.
    pub scale: Vec<f64>,
    /// One weight vector per class.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
}

fn standardize(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    let mut mean = vec![0.0; d];
    for r in x {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut scale = vec![0.0; d];
    for r in x {
        for j in 0..d {
            scale[j] += (r[j] - mean[j]).powi(2);
        }
    }
    for s in scale.iter_mut() {
        *s = (*s / n).sqrt();
        if *s == 0.0 || !s.is_finite() {
            *s = 1.0;
        }
    }
    let z = x.iter().map(|r| r.iter().zip(&mean).zip(&scale).map(|((v, m), s)| (v - m) / s).collect()).collect();
    (mean, scale, z)
}

fn train_binary(z: &[Vec<f64>], target: &[f64], cfg: SvmConfig) -> (Vec<f64>, f64) {
    let d = z.first().map_or(0, Vec::len);
    let n = z.len() as f64;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut grad = vec![0.0; d];
    for epoch in 1..=cfg.epochs {
        grad.iter_mut().zip(&w).for_each(|(g, wi)| *g = cfg.lambda * wi);
        let mut grad_b = 0.0;
        for (row, &t) in z.iter().zip(target) {
            let margin = t * (row.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, v) in grad.iter_mut().zip(row) {
                    *g -= t * v / n;
                }
                grad_b -= t / n;
            }
        }
        let eta = cfg.learning_rate / (epoch as f64).sqrt();
        for (wi, g) in w.iter_mut().zip(&grad) {
            *wi -= eta * g;
        }
        b -= eta * grad_b;
    }
    (w, b)
}

impl LinearSvm {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: SvmConfig) -> Self {
        let (mean, scale, z) = standardize(x);
        let machines: Vec<(Vec<f64>, f64)> = (0..n_classes)
            .into_par_iter()
            .map(|c| {
                let target: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
                train_binary(&z, &target, cfg)
            })
            .collect();
        let (weights, biases) = machines.into_iter().unzip();
        LinearSvm { mean, scale, weights, biases }
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect();
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(&z).map(|(a, c)| a * c).sum::<f64>() + b)
            .collect()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax_lowest(&self.scores(row))
    }
}
