//! Bagged CART regression trees, used only for their impurity-decrease
//! feature importances.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::RepresentationDataset;
use crate::error::{Error, Result};
use crate::estimators::linear::{lasso, LassoConfig};
use crate::rng::{stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub max_depth: usize,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub bagging_fraction: f64,
    pub min_samples_split: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            trees: 50,
            max_depth: 5,
            bagging_fraction: 0.8,
            min_samples_split: 2,
        }
    }
}

/// Summed impurity decrease per feature over all trees, plus the total
/// decrease as a fraction of the summed root impurity.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestImportances {
    pub raw: Vec<f64>,
    pub explained_fraction: f64,
}

/// Grows `config.trees` trees predicting `target` from `features` (one vector
/// per feature) and accumulates split gains.
///
/// Tree `t` draws its rows from stream `(seed, TREE_BASE + t)`; nothing else
/// is random and features are scanned in index order, so permuting the
/// feature columns permutes the output (up to exact-gain ties).
pub fn forest_importances(
    features: &[Vec<f64>],
    target: &[f64],
    config: &ForestConfig,
    seed: u64,
) -> ForestImportances {
    let n = target.len();
    let bag = ((n as f64 * config.bagging_fraction).round() as usize).clamp(1, n.max(1));
    let sorted: Vec<Vec<u32>> = features
        .iter()
        .map(|column| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            order.sort_by(|&a, &b| column[a as usize].total_cmp(&column[b as usize]).then(a.cmp(&b)));
            order
        })
        .collect();
    let per_tree: Vec<(Vec<f64>, f64)> = (0..config.trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, streams::TREE_BASE + t as u64);
            let mut in_bag = vec![false; n];
            for r in index::sample(&mut rng, n, bag) {
                in_bag[r] = true;
            }
            let mut tree = Tree {
                features,
                target,
                orders: sorted
                    .iter()
                    .map(|o| o.iter().copied().filter(|&r| in_bag[r as usize]).collect())
                    .collect(),
                goes_left: vec![false; n],
                scratch: Vec::with_capacity(bag),
                gains: vec![0.0; features.len()],
            };
            let (root, _) = node_moments(target, &tree.orders[0]);
            tree.grow(0, bag, 0, config);
            (tree.gains, root)
        })
        .collect();
    let mut raw = vec![0.0; features.len()];
    let mut root_total = 0.0;
    for (gains, root) in &per_tree {
        for (a, g) in raw.iter_mut().zip(gains) {
            *a += g;
        }
        root_total += root;
    }
    let explained = if root_total > 0.0 {
        (raw.iter().sum::<f64>() / root_total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ForestImportances {
        raw,
        explained_fraction: explained,
    }
}

/// Sum of squared deviations from the mean and the mean itself.
fn node_moments(target: &[f64], rows: &[u32]) -> (f64, f64) {
    let m = rows.len() as f64;
    let mean = rows.iter().map(|&r| target[r as usize]).sum::<f64>() / m;
    let ss = rows.iter().map(|&r| (target[r as usize] - mean).powi(2)).sum::<f64>();
    (ss, mean)
}

struct Split {
    /// Features whose best threshold yields this exact partition and gain.
    features: Vec<usize>,
    threshold: f64,
    gain: f64,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    left: usize,
}

fn sse(sum: f64, sum_sq: f64, count: f64) -> f64 {
    (sum_sq - sum * sum / count).max(0.0)
}

/// One tree's state. Every node is a range `lo..hi` shared by all
/// `orders[f]`, each holding the node's rows sorted by feature `f`.
struct Tree<'a> {
    features: &'a [Vec<f64>],
    target: &'a [f64],
    orders: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    gains: Vec<f64>,
}

impl Tree<'_> {
    fn grow(&mut self, lo: usize, hi: usize, depth: usize, config: &ForestConfig) {
        if depth >= config.max_depth || hi - lo < config.min_samples_split.max(2) {
            return;
        }
        let Some(split) = self.best_split(lo, hi) else {
            return;
        };
        let share = split.gain / split.features.len() as f64;
        for &f in &split.features {
            self.gains[f] += share;
        }
        let feature = split.features[0];
        let column = &self.features[feature];
        for &r in &self.orders[feature][lo..hi] {
            self.goes_left[r as usize] = column[r as usize] <= split.threshold;
        }
        let mut mid = lo;
        for order in &mut self.orders {
            // stable partition keeps each side sorted
            self.scratch.clear();
            mid = lo;
            for i in lo..hi {
                let r = order[i];
                if self.goes_left[r as usize] {
                    order[mid] = r;
                    mid += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            order[mid..hi].copy_from_slice(&self.scratch);
        }
        self.grow(lo, mid, depth + 1, config);
        self.grow(mid, hi, depth + 1, config);
    }

    /// Each feature's gain is computed from its own ordering alone, and exact
    /// ties are resolved by the rows they send left, so the chosen split and
    /// its credit do not depend on where a feature sits among the others.
    fn best_split(&self, lo: usize, hi: usize) -> Option<Split> {
        let m = (hi - lo) as f64;
        let mut best_gain = 1e-12;
        let mut tied: Vec<Candidate> = Vec::new();
        for (f, column) in self.features.iter().enumerate() {
            let rows = &self.orders[f][lo..hi];
            let (parent, mean) = node_moments(self.target, rows);
            if parent <= 1e-12 {
                return None;
            }
            // center the node target to keep the running sums well conditioned
            let (sum, sum_sq) = rows.iter().fold((0.0, 0.0), |(s, q), &r| {
                let y = self.target[r as usize] - mean;
                (s + y, q + y * y)
            });
            let (mut ls, mut lq) = (0.0, 0.0);
            for i in 0..rows.len() - 1 {
                let x = column[rows[i] as usize];
                let next = column[rows[i + 1] as usize];
                let y = self.target[rows[i] as usize] - mean;
                ls += y;
                lq += y * y;
                if x == next {
                    continue;
                }
                let lc = (i + 1) as f64;
                let rc = m - lc;
                let gain = sse(sum, sum_sq, m) - sse(ls, lq, lc) - sse(sum - ls, sum_sq - lq, rc);
                let candidate = Candidate {
                    feature: f,
                    threshold: 0.5 * (x + next),
                    left: i + 1,
                };
                if gain > best_gain {
                    best_gain = gain;
                    tied.clear();
                    tied.push(candidate);
                } else if gain == best_gain {
                    tied.push(candidate);
                }
            }
        }
        if tied.is_empty() {
            return None;
        }
        let left_rows = |c: &Candidate| {
            let mut rows = self.orders[c.feature][lo..lo + c.left].to_vec();
            rows.sort_unstable();
            rows
        };
        let keys: Vec<Vec<u32>> = tied.iter().map(left_rows).collect();
        // the first of equal minima, so `tied[chosen].feature == features[0]`
        let chosen = (0..tied.len()).min_by(|&a, &b| keys[a].cmp(&keys[b])).expect("non-empty");
        let features: Vec<usize> = (0..tied.len())
            .filter(|&c| keys[c] == keys[chosen])
            .map(|c| tied[c].feature)
            .collect();
        Some(Split {
            threshold: tied[chosen].threshold,
            features,
            gain: best_gain,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImportanceMethod {
    Forest(ForestConfig),
    Lasso(LassoConfig),
}

impl Default for ImportanceMethod {
    fn default() -> Self {
        ImportanceMethod::Forest(ForestConfig::default())
    }
}

impl ImportanceMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ImportanceMethod::Forest(_) => "forest",
            ImportanceMethod::Lasso(_) => "lasso",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "forest" => Ok(ImportanceMethod::Forest(ForestConfig::default())),
            "lasso" => Ok(ImportanceMethod::Lasso(LassoConfig::default())),
            other => Err(Error::InvalidParameter(format!(
                "unknown importance method {other:?} (expected forest or lasso)"
            ))),
        }
    }
}

/// Importance of every latent for predicting one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceColumn {
    /// Forest: impurity decrease normalized to sum 1 (all zero if nothing
    /// was split). Lasso: absolute standardized coefficients.
    pub importances: Vec<f64>,
    /// Share of the factor's variance the regressor explains in-sample.
    pub explained_fraction: f64,
}

/// `P[·][factor]`: per-latent importances for predicting `z_factor` from all
/// latents.
pub fn feature_importances(
    dataset: &RepresentationDataset,
    factor: usize,
    method: &ImportanceMethod,
    seed: u64,
) -> Result<ImportanceColumn> {
    let target = &dataset
        .factors
        .get(factor)
        .ok_or_else(|| Error::Contract(format!("no factor with index {factor}")))?
        .values;
    let features: Vec<Vec<f64>> = dataset.latents.iter().map(|l| l.values.clone()).collect();
    let column = match method {
        ImportanceMethod::Forest(cfg) => {
            let fi = forest_importances(&features, target, cfg, seed);
            let total: f64 = fi.raw.iter().sum();
            let importances = if total > 0.0 {
                fi.raw.iter().map(|v| v / total).collect()
            } else {
                vec![0.0; features.len()]
            };
            ImportanceColumn {
                importances,
                explained_fraction: fi.explained_fraction,
            }
        }
        ImportanceMethod::Lasso(cfg) => {
            let fit = lasso(&features, target, cfg);
            ImportanceColumn {
                importances: fit.coefficients.iter().map(|w| w.abs()).collect(),
                explained_fraction: fit.r2,
            }
        }
    };
    Ok(column)
}
