//! One-feature rule learner.
//!
//! Values are sorted and cut into buckets: a bucket grows until one class
//! has at least `min_bucket` members, then keeps absorbing rows while they
//! share the last value or belong to the bucket's majority class. Adjacent
//! buckets with the same majority are merged and each bucket predicts its
//! majority (ties to the lower class index).

use serde::{Deserialize, Serialize};

use super::tree::midpoint;
use crate::seed::argmax_lowest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneRRule {
    pub feature: usize,
    /// Upper bounds of every bucket but the last; `x <= thresholds[i]`
    /// selects bucket `i`.
    pub thresholds: Vec<f64>,
    /// Predicted class per bucket (`thresholds.len() + 1` entries).
    pub classes: Vec<usize>,
}

impl OneRRule {
    pub fn predict_value(&self, v: f64) -> usize {
        let bucket = self.thresholds.iter().position(|&t| v <= t).unwrap_or(self.thresholds.len());
        self.classes[bucket]
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        self.predict_value(row[self.feature])
    }
}

/// Builds the rule for one column and returns it with its training
/// accuracy.
pub fn fit_column(values: &[f64], y: &[usize], n_classes: usize, min_bucket: usize, feature: usize) -> (OneRRule, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(y[a].cmp(&y[b])));

    // (counts, first value, last value)
    let mut buckets: Vec<(Vec<usize>, f64, f64)> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut counts = vec![0usize; n_classes];
        let first = values[order[i]];
        while i < n && counts.iter().max().copied().unwrap_or(0) < min_bucket.max(1) {
            counts[y[order[i]]] += 1;
            i += 1;
        }
        while i < n {
            let next = order[i];
            let same_value = values[next] == values[order[i - 1]];
            if same_value || y[next] == argmax_lowest(&counts) {
                counts[y[next]] += 1;
                i += 1;
            } else {
                break;
            }
        }
        buckets.push((counts, first, values[order[i - 1]]));
    }

    let mut merged: Vec<(Vec<usize>, usize, f64, f64)> = Vec::new();
    for (counts, lo, hi) in buckets {
        let class = argmax_lowest(&counts);
        match merged.last_mut() {
            Some(last) if last.1 == class => {
                for (a, b) in last.0.iter_mut().zip(&counts) {
                    *a += b;
                }
                last.3 = hi;
            }
            _ => merged.push((counts, class, lo, hi)),
        }
    }

    let correct: usize = merged.iter().map(|(c, class, _, _)| c[*class]).sum();
    let thresholds = merged.windows(2).map(|w| midpoint(w[0].3, w[1].2)).collect();
    let classes = merged.iter().map(|m| m.1).collect();
    let accuracy = if n == 0 { 0.0 } else { correct as f64 / n as f64 };
    (OneRRule { feature, thresholds, classes }, accuracy)
}

/// Rule on the single most accurate feature; ties go to the lower feature index.
pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, min_bucket: usize) -> OneRRule {
    let d = x.first().map_or(0, Vec::len);
    let mut best: Option<(OneRRule, f64)> = None;
    for f in 0..d {
        let col: Vec<f64> = x.iter().map(|r| r[f]).collect();
        let (rule, acc) = fit_column(&col, y, n_classes, min_bucket, f);
        if best.as_ref().is_none_or(|(_, b)| acc > *b) {
            best = Some((rule, acc));
        }
    }
    best.map(|b| b.0).unwrap_or(OneRRule { feature: 0, thresholds: vec![], classes: vec![0] })
}
