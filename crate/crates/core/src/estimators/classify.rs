//! Classifiers used by the intervention-based metrics and by SAP.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
        }
    }
}

/// Multinomial logistic model; row `c` of `weights` holds the `D` feature
/// weights of class `c` followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Vec<Vec<f64>>,
}

impl LinearClassifier {
    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|w| {
                let (bias, coef) = w.split_last().expect("bias column");
                coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + bias
            })
            .collect()
    }

    /// Highest-scoring class; ties go to the smallest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    pub fn accuracy(&self, points: &[Vec<f64>], labels: &[usize]) -> f64 {
        if points.is_empty() {
            return 0.0;
        }
        let hits = points
            .iter()
            .zip(labels)
            .filter(|(x, &y)| self.predict(x) == y)
            .count();
        hits as f64 / points.len() as f64
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Trains a softmax regression by full-batch gradient descent on the mean
/// cross-entropy, starting from zero weights.
///
/// Features are standardized internally and the scaling is folded back into
/// the returned weights, so the model applies directly to raw features.
pub fn fit_linear_classifier(
    points: &[Vec<f64>],
    labels: &[usize],
    config: &LogisticConfig,
) -> Result<LinearClassifier> {
    if points.len() != labels.len() || points.is_empty() {
        return Err(Error::Contract("classifier needs matching, non-empty inputs".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
        return Err(Error::Contract("classifier points must be finite and equal-length".into()));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut present = vec![false; classes];
    for &l in labels {
        present[l] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::DegenerateLabels("need at least two classes".into()));
    }

    let n = points.len() as f64;
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v / n;
        }
    }
    let mut scale = vec![0.0; dim];
    for p in points {
        for ((s, v), m) in scale.iter_mut().zip(p).zip(&mean) {
            *s += (v - m).powi(2) / n;
        }
    }
    for s in &mut scale {
        *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
    }
    let std_points: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();

    let mut w = vec![vec![0.0; dim + 1]; classes];
    let mut grad = vec![vec![0.0; dim + 1]; classes];
    let mut probs = vec![0.0; classes];
    for _ in 0..config.epochs {
        for g in &mut grad {
            g.fill(0.0);
        }
        for (x, &y) in std_points.iter().zip(labels) {
            for (p, wc) in probs.iter_mut().zip(&w) {
                *p = wc[..dim].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + wc[dim];
            }
            let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for p in &mut probs {
                *p = (*p - max).exp();
                z += *p;
            }
            for (c, (p, g)) in probs.iter().zip(&mut grad).enumerate() {
                let err = p / z - if c == y { 1.0 } else { 0.0 };
                for (gi, xi) in g[..dim].iter_mut().zip(x) {
                    *gi += err * xi;
                }
                g[dim] += err;
            }
        }
        for (wc, g) in w.iter_mut().zip(&grad) {
            for (a, b) in wc.iter_mut().zip(g) {
                *a -= config.learning_rate * b / n;
            }
        }
    }

    // w·((x - m)/s) + b  ==  (w/s)·x + (b - Σ w m / s)
    let weights = w
        .into_iter()
        .map(|wc| {
            let mut out: Vec<f64> = wc[..dim].iter().zip(&scale).map(|(a, s)| a / s).collect();
            let shift: f64 = out.iter().zip(&mean).map(|(a, m)| a * m).sum();
            out.push(wc[dim] - shift);
            out
        })
        .collect();
    Ok(LinearClassifier { weights })
}

/// Vote counts of `(latent index -> factor index)` training pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorityVoteTable {
    pub votes: Vec<Vec<usize>>,
}

impl MajorityVoteTable {
    pub fn predict(&self, latent: usize) -> usize {
        match self.votes.get(latent) {
            Some(row) => {
                let mut best = 0;
                for (j, &v) in row.iter().enumerate().skip(1) {
                    if v > row[best] {
                        best = j;
                    }
                }
                best
            }
            None => 0,
        }
    }

    pub fn total(&self) -> usize {
        self.votes.iter().flatten().sum()
    }

    pub fn accuracy(&self, pairs: &[(usize, usize)]) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let hits = pairs.iter().filter(|(i, j)| self.predict(*i) == *j).count();
        hits as f64 / pairs.len() as f64
    }
}

/// Builds the vote table; ties in prediction go to the smallest factor index.
pub fn majority_vote(pairs: &[(usize, usize)]) -> MajorityVoteTable {
    let rows = pairs.iter().map(|p| p.0).max().map_or(0, |m| m + 1);
    let cols = pairs.iter().map(|p| p.1).max().map_or(0, |m| m + 1);
    let mut votes = vec![vec![0; cols]; rows];
    for &(i, j) in pairs {
        votes[i][j] += 1;
    }
    MajorityVoteTable { votes }
}

/// Accuracy of the best single-threshold classifier of `labels` from one
/// feature, rescaled so that majority-class guessing scores 0 and a perfect
/// split scores 1.
///
/// Each side of the threshold predicts its own majority label.
pub fn stump_accuracy(x: &[f64], labels: &[usize]) -> f64 {
    let n = x.len();
    if n == 0 {
        return 0.0;
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut total = vec![0usize; classes];
    for &l in labels {
        total[l] += 1;
    }
    let chance = *total.iter().max().unwrap_or(&0);
    if chance == n {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut left = vec![0usize; classes];
    let mut best = chance;
    for (pos, &idx) in order.iter().enumerate().take(n - 1) {
        left[labels[idx]] += 1;
        if x[idx] == x[order[pos + 1]] {
            continue;
        }
        let left_best = *left.iter().max().unwrap_or(&0);
        let right_best = left
            .iter()
            .zip(&total)
            .map(|(l, t)| t - l)
            .max()
            .unwrap_or(0);
        best = best.max(left_best + right_best);
    }
    let acc = best as f64 / n as f64;
    let base = chance as f64 / n as f64;
    ((acc - base) / (1.0 - base)).clamp(0.0, 1.0)
}
