//! Feature ranking by two attribute evaluators and top-k intersection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::oner;
use crate::dataset::LabeledDataset;
use crate::error::{invalid_input, invalid_param, Error, Result};

pub const DEFAULT_K: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    Correlation,
    OneR,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub evaluator: Evaluator,
    /// Feature names in canonical (dataset column) order.
    pub names: Vec<String>,
    /// `scores[i]` belongs to `names[i]`.
    pub scores: Vec<f64>,
    /// Names by descending score; ties keep canonical order.
    pub order: Vec<String>,
}

impl FeatureRanking {
    fn new(evaluator: Evaluator, names: Vec<String>, scores: Vec<f64>) -> Self {
        let mut idx: Vec<usize> = (0..names.len()).collect();
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let order = idx.iter().map(|&i| names[i].clone()).collect();
        FeatureRanking { evaluator, names, scores, order }
    }

    pub fn score(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.scores[i])
    }

    pub fn top(&self, k: usize) -> &[String] {
        &self.order[..k.min(self.order.len())]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedFeatureSet {
    pub k: usize,
    pub names: Vec<String>,
    pub top_a: Vec<String>,
    pub top_b: Vec<String>,
}

fn check_classes(ds: &LabeledDataset) -> Result<(Vec<String>, Vec<usize>)> {
    ds.validate()?;
    let classes = ds.class_set();
    if classes.len() < 2 {
        return Err(invalid_input(format!("ranking needs at least 2 classes, found {}", classes.len())));
    }
    let y = ds.targets(&classes)?;
    for (c, name) in classes.iter().enumerate() {
        let n = y.iter().filter(|&&l| l == c).count();
        if n < 2 {
            return Err(invalid_input(format!("class {name} has {n} row(s); at least 2 are required")));
        }
    }
    Ok((classes, y))
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
}

/// Prior-weighted mean of |point-biserial correlation| against each
/// one-vs-rest class indicator.
pub fn correlation_rank(ds: &LabeledDataset) -> Result<FeatureRanking> {
    let (classes, y) = check_classes(ds)?;
    let n = y.len() as f64;
    let indicators: Vec<(f64, Vec<f64>)> = (0..classes.len())
        .map(|c| {
            let ind: Vec<f64> = y.iter().map(|&l| f64::from(u8::from(l == c))).collect();
            (ind.iter().sum::<f64>() / n, ind)
        })
        .collect();
    let scores = (0..ds.width())
        .into_par_iter()
        .map(|j| {
            let col = ds.column(j);
            indicators.iter().map(|(prior, ind)| prior * pearson(&col, ind).abs()).sum()
        })
        .collect();
    Ok(FeatureRanking::new(Evaluator::Correlation, ds.feature_names.clone(), scores))
}

/// Training accuracy of a one-feature rule per column.
pub fn oner_rank(ds: &LabeledDataset, min_bucket: usize) -> Result<FeatureRanking> {
    if min_bucket == 0 {
        return Err(invalid_param("min_bucket must be at least 1"));
    }
    let (classes, y) = check_classes(ds)?;
    let scores = (0..ds.width())
        .into_par_iter()
        .map(|j| oner::fit_column(&ds.column(j), &y, classes.len(), min_bucket, j).1)
        .collect();
    Ok(FeatureRanking::new(Evaluator::OneR, ds.feature_names.clone(), scores))
}

/// Names in both top-k lists, in canonical order of `a`.
pub fn select_intersection(a: &FeatureRanking, b: &FeatureRanking, k: usize) -> Result<SelectedFeatureSet> {
    if a.names != b.names {
        return Err(invalid_input("rankings cover different feature lists"));
    }
    if k == 0 || k > a.names.len() {
        return Err(invalid_param(format!("k must be in [1, {}], got {k}", a.names.len())));
    }
    let (ta, tb) = (a.top(k), b.top(k));
    let names: Vec<String> = a.names.iter().filter(|n| ta.contains(n) && tb.contains(n)).cloned().collect();
    if names.is_empty() {
        return Err(Error::Selection(format!(
            "top-{k} lists share no feature: [{}] vs [{}]",
            ta.join(", "),
            tb.join(", ")
        )));
    }
    Ok(SelectedFeatureSet { k, names, top_a: ta.to_vec(), top_b: tb.to_vec() })
}
