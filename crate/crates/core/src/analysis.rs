//! Cross-metric analysis: rank correlation over populations of
//! representations and pairwise disagreement reports.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::RepresentationDataset;
use crate::error::{Error, Result};
use crate::matrix::{InformativenessMatrix, Provenance};
use crate::metrics::{evaluate_all, EvalConfig, EvalInput};
use crate::report::{Metric, MetricReport};
use crate::synth::gen_entangled_family;

/// Something every metric can be evaluated on.
#[derive(Debug, Clone)]
pub enum Representation {
    Dataset(RepresentationDataset),
    Matrix(InformativenessMatrix),
}

impl Representation {
    fn input(&self) -> EvalInput<'_> {
        match self {
            Representation::Dataset(ds) => EvalInput::Dataset(ds),
            Representation::Matrix(m) => EvalInput::Matrix(m),
        }
    }
}

/// A labelled representation.
#[derive(Debug, Clone)]
pub struct Labelled {
    pub label: String,
    pub representation: Representation,
}

impl Labelled {
    pub fn new(label: impl Into<String>, representation: Representation) -> Self {
        Self {
            label: label.into(),
            representation,
        }
    }
}

/// Fractional ranks (1-based); tied values share the mean of their ranks.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
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
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "spearman needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter("spearman needs at least 2 values".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("spearman needs finite values".into()));
    }
    pearson(&average_ranks(a), &average_ranks(b)).ok_or_else(|| {
        Error::not_computable("spearman", "a sequence is constant, correlation is undefined")
    })
}

/// Scores of every kept metric on every representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PopulationResult {
    pub metrics: Vec<Metric>,
    pub representations: Vec<String>,
    /// `scores[m][r]`.
    pub scores: Vec<Vec<f64>>,
    /// Metrics removed because at least one representation could not score them.
    pub dropped: Vec<DroppedMetric>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedMetric {
    pub metric: Metric,
    pub representation: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    /// `matrix[a][b]` is the Spearman correlation of metrics `a` and `b`.
    pub matrix: Vec<Vec<f64>>,
    pub population: PopulationResult,
}

impl CorrelationResult {
    pub fn get(&self, a: Metric, b: Metric) -> Option<f64> {
        let ia = self.population.metrics.iter().position(|&m| m == a)?;
        let ib = self.population.metrics.iter().position(|&m| m == b)?;
        Some(self.matrix[ia][ib])
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = self.population.metrics.iter().map(|m| m.name()).collect();
        let mut out = format!("metric,{}\n", names.join(","));
        for (name, row) in names.iter().zip(&self.matrix) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("{name},{}\n", cells.join(",")));
        }
        out
    }
}

/// Evaluates every metric on every representation (in parallel) and returns
/// the Spearman matrix over the metrics that scored everywhere.
pub fn correlate_metrics(
    population: &[Labelled],
    metrics: &[Metric],
    config: &EvalConfig,
) -> Result<CorrelationResult> {
    if population.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "correlation needs at least 5 representations, got {}",
            population.len()
        )));
    }
    let reports: Vec<Vec<MetricReport>> = population
        .par_iter()
        .map(|rep| evaluate_all(rep.representation.input(), metrics, config))
        .collect::<Result<_>>()?;

    let mut kept = Vec::new();
    let mut scores = Vec::new();
    let mut dropped = Vec::new();
    for (m, &metric) in metrics.iter().enumerate() {
        let skip = reports
            .iter()
            .zip(population)
            .find(|(r, _)| r[m].skipped);
        match skip {
            Some((r, rep)) => dropped.push(DroppedMetric {
                metric,
                representation: rep.label.clone(),
                reason: r[m].skip_reason.clone().unwrap_or_default(),
            }),
            None => {
                kept.push(metric);
                scores.push(reports.iter().map(|r| r[m].value()).collect::<Vec<f64>>());
            }
        }
    }
    if kept.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "fewer than 2 metrics are computable on every representation (dropped: {})",
            dropped
                .iter()
                .map(|d| format!("{} on {}: {}", d.metric, d.representation, d.reason))
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }

    let m = kept.len();
    let mut matrix = vec![vec![1.0; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let rho = spearman(&scores[a], &scores[b]).map_err(|e| match e {
                Error::NotComputable { .. } => Error::not_computable(
                    "correlation",
                    format!("{} or {} is constant over the population", kept[a], kept[b]),
                ),
                other => other,
            })?;
            matrix[a][b] = rho;
            matrix[b][a] = rho;
        }
    }
    Ok(CorrelationResult {
        matrix,
        population: PopulationResult {
            metrics: kept,
            representations: population.iter().map(|r| r.label.clone()).collect(),
            scores,
            dropped,
        },
    })
}

/// `count` entangled-family datasets with levels evenly spaced over [0, 1];
/// representation `i` uses seed `seed + i`.
pub fn entangled_population(count: usize, k: usize, n: usize, seed: u64) -> Result<Vec<Labelled>> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let level = if count > 1 {
                i as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let g = gen_entangled_family(level, k, n, seed.wrapping_add(i as u64))?;
            Ok(Labelled::new(
                format!("entangled-{i}-level-{level:.3}"),
                Representation::Dataset(g.dataset),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: Metric,
    pub score_a: f64,
    pub score_b: f64,
    /// `score_b - score_a`.
    pub delta: f64,
    /// Label of the higher-scoring representation; `None` on a tie.
    pub preferred: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub metrics: Vec<MetricComparison>,
    /// Metric pairs whose preferences point at different representations.
    pub disagreements: Vec<(Metric, Metric)>,
}

impl ComparisonReport {
    pub fn preferred(&self, metric: Metric) -> Option<&str> {
        self.metrics
            .iter()
            .find(|c| c.metric == metric)
            .and_then(|c| c.preferred.as_deref())
    }

    pub fn disagree(&self, a: Metric, b: Metric) -> bool {
        self.disagreements.contains(&(a, b)) || self.disagreements.contains(&(b, a))
    }
}

/// Scores closer than this count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn compare(
    a: &Labelled,
    b: &Labelled,
    metrics: &[Metric],
    config: &EvalConfig,
) -> Result<ComparisonReport> {
    let ra = evaluate_all(a.representation.input(), metrics, config)?;
    let rb = evaluate_all(b.representation.input(), metrics, config)?;
    let mut rows = Vec::with_capacity(metrics.len());
    for ((&metric, x), y) in metrics.iter().zip(&ra).zip(&rb) {
        for (rep, r) in [(a, x), (b, y)] {
            if r.skipped {
                return Err(Error::not_computable(
                    metric.name(),
                    format!(
                        "cannot compare: not computable on {}: {}",
                        rep.label,
                        r.skip_reason.as_deref().unwrap_or("skipped")
                    ),
                ));
            }
        }
        let (sa, sb) = (x.value(), y.value());
        let delta = sb - sa;
        let preferred = if delta.abs() <= TIE_TOLERANCE {
            None
        } else if delta > 0.0 {
            Some(b.label.clone())
        } else {
            Some(a.label.clone())
        };
        rows.push(MetricComparison {
            metric,
            score_a: sa,
            score_b: sb,
            delta,
            preferred,
        });
    }
    let mut disagreements = Vec::new();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            if let (Some(p), Some(q)) = (&rows[i].preferred, &rows[j].preferred) {
                if p != q {
                    disagreements.push((rows[i].metric, rows[j].metric));
                }
            }
        }
    }
    Ok(ComparisonReport {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        metrics: rows,
        disagreements,
    })
}

fn unit_entropy_matrix(rows: Vec<Vec<f64>>) -> InformativenessMatrix {
    let k = rows[0].len();
    InformativenessMatrix::new(rows, vec![1.0; k], Provenance::External)
        .expect("constructed matrices are valid")
}

/// Two factors, each captured cleanly by one latent and again by a redundant
/// near-copy. Completeness suffers, per-latent disentanglement does not.
pub fn redundant_carriers_matrix() -> InformativenessMatrix {
    unit_entropy_matrix(vec![
        vec![1.0, 0.0],
        vec![0.9, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 0.9],
    ])
}

/// One carrier per factor, each leaking some information about the other.
pub fn compact_entangled_matrix() -> InformativenessMatrix {
    unit_entropy_matrix(vec![vec![0.8, 0.3], vec![0.3, 0.8]])
}

/// Many weak, perfectly disentangled latents plus two entangled ones.
pub fn many_disentangled_matrix() -> InformativenessMatrix {
    let mut rows = vec![vec![0.2, 0.0]; 4];
    rows.extend(vec![vec![0.0, 0.2]; 4]);
    rows.push(vec![0.5, 0.45]);
    rows.push(vec![0.45, 0.5]);
    unit_entropy_matrix(rows)
}

/// One clean latent per factor next to four fully entangled latents.
pub fn clean_best_latent_matrix() -> InformativenessMatrix {
    let mut rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    rows.extend(vec![vec![0.5, 0.5]; 4]);
    unit_entropy_matrix(rows)
}
