//! Gaussian naive Bayes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::seed::argmax_lowest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_priors: Vec<f64>,
    /// `means[class][feature]`
    pub means: Vec<Vec<f64>>,
    /// Maximum-likelihood variances, floored.
    pub variances: Vec<Vec<f64>>,
}

/// Sum of `values` after sorting, so the result does not depend on row order.
fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, var_floor: f64) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut log_priors = Vec::with_capacity(n_classes);
        let mut means = Vec::with_capacity(n_classes);
        let mut variances = Vec::with_capacity(n_classes);
        for c in 0..n_classes {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
            let m = rows.len() as f64;
            log_priors.push(if rows.is_empty() { f64::NEG_INFINITY } else { (m / n).ln() });
            let mut mu = vec![0.0; d];
            let mut var = vec![var_floor; d];
            if !rows.is_empty() {
                for j in 0..d {
                    let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                    mu[j] = ordered_sum(&mut col) / m;
                    let mut sq: Vec<f64> = col.iter().map(|v| (v - mu[j]).powi(2)).collect();
                    var[j] = (ordered_sum(&mut sq) / m).max(var_floor);
                }
            }
            means.push(mu);
            variances.push(var);
        }
        GaussianNb { log_priors, means, variances }
    }

    /// `ln p(class) + sum_j ln N(x_j; mu, var)` per class.
    pub fn log_joint(&self, row: &[f64]) -> Vec<f64> {
        self.log_priors
            .iter()
            .enumerate()
            .map(|(c, &lp)| {
                if lp == f64::NEG_INFINITY {
                    return f64::MIN;
                }
                let ll: f64 = row
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, mu), var)| -0.5 * (2.0 * PI * var).ln() - (x - mu).powi(2) / (2.0 * var))
                    .sum();
                lp + ll
            })
            .collect()
    }

    /// Normalized posteriors via log-sum-exp.
    pub fn posteriors(&self, row: &[f64]) -> Vec<f64> {
        let lj = self.log_joint(row);
        let max = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = lj.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax_lowest(&self.log_joint(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn closed_form_posterior() {
        // two classes, one feature, means 0 and 2, unit variance, equal priors
        let x = vec![vec![-1.0], vec![1.0], vec![1.0], vec![3.0]];
        let y = vec![0, 0, 1, 1];
        let nb = GaussianNb::fit(&x, &y, 2, 1e-9);
        assert_eq!(nb.means, vec![vec![0.0], vec![2.0]]);
        assert_eq!(nb.variances, vec![vec![1.0], vec![1.0]]);
        // p(1|x) = 1 / (1 + exp(-(2x - 2)))
        for xv in [-2.0, 0.0, 0.7, 1.0, 4.0] {
            let want = 1.0 / (1.0 + (-(2.0 * xv - 2.0f64)).exp());
            let got = nb.posteriors(&[xv])[1];
            assert!((got - want).abs() < 1e-12, "x={xv}: {got} vs {want}");
        }
    }

    #[test]
    fn separated_gaussians() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = (Normal::new(0.0, 1.0).unwrap(), Normal::new(10.0, 1.0).unwrap());
        let sample = |rng: &mut ChaCha8Rng, n: usize| -> (Vec<Vec<f64>>, Vec<usize>) {
            (0..n)
                .map(|i| if i % 2 == 0 { (vec![a.sample(rng)], 0) } else { (vec![b.sample(rng)], 1) })
                .unzip()
        };
        let (x, y) = sample(&mut rng, 1000);
        let nb = GaussianNb::fit(&x, &y, 2, 1e-9);
        let (tx, ty) = sample(&mut rng, 1000);
        let correct = tx.iter().zip(&ty).filter(|(r, &c)| nb.predict(r) == c).count();
        assert!(correct as f64 / 1000.0 >= 0.99);
    }

    #[test]
    fn variance_floor_keeps_scores_finite() {
        let x = vec![vec![1.0, 5.0], vec![1.0, 5.0], vec![2.0, 5.0], vec![2.0, 5.0]];
        let y = vec![0, 0, 1, 1];
        let nb = GaussianNb::fit(&x, &y, 2, 1e-9);
        for row in [[1.0, 5.0], [1e6, -1e6], [1.5, 5.0]] {
            assert!(nb.log_joint(&row).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin() * 1e3, i as f64 * 0.1]).collect();
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let a = GaussianNb::fit(&x, &y, 3, 1e-9);
        let (xr, yr): (Vec<_>, Vec<_>) = x.iter().cloned().zip(y.iter().copied()).rev().unzip();
        assert_eq!(a, GaussianNb::fit(&xr, &yr, 3, 1e-9));
    }
}
