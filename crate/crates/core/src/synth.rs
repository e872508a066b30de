//! Seeded generators: the counterexample representations, sanity datasets
//! with known structure, and the two-parameter informativeness matrix.
//!
//! Every generator is a pure function of its parameters and seed.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::data::{FactorKind, RepresentationDataset};
use crate::error::{Error, Result};
use crate::matrix::{ImportanceMatrix, InformativenessMatrix, Provenance};
use crate::oracle::{sample_dataset, RepresentationOracle};
use crate::rng::{stream_rng, streams, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "distribution")]
pub enum FactorPrior {
    Uniform { low: f64, high: f64 },
    StandardNormal,
}

impl FactorPrior {
    fn draw(&self, rng: &mut SeededRng) -> f64 {
        match *self {
            FactorPrior::Uniform { low, high } => rng.random_range(low..high),
            FactorPrior::StandardNormal => StandardNormal.sample(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Linear,
    Cubic,
}

impl MapKind {
    fn apply(&self, x: f64) -> f64 {
        match self {
            MapKind::Linear => x,
            MapKind::Cubic => x * x * x,
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(MapKind::Linear),
            "cubic" => Ok(MapKind::Cubic),
            _ => Err(Error::InvalidParameter(format!("unknown map kind {s:?}"))),
        }
    }
}

/// How latent codes are produced from factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "encoder")]
pub enum Encoder {
    /// `c = z`.
    Identity,
    /// Latents are fresh standard-normal noise, independent of `z`.
    Noise { latents: usize },
    /// Latents are all zero.
    Constant { latents: usize },
    /// Latent `k` copies factor `j` with probability `probs[k][j]`, chosen
    /// independently for every sample and latent.
    RandomCopy { probs: Vec<Vec<f64>> },
    /// `c_k = Σ_j weights[k][j] · z_j`.
    Linear { weights: Vec<Vec<f64>> },
    /// `c_k = Σ_j coef · z_j^power` over the listed `(factor, coef, power)` terms.
    Polynomial { terms: Vec<Vec<(usize, f64, i32)>> },
    /// `c_i = map(z_{perm[i]}) + noise_std · ε`.
    Permuted {
        perm: Vec<usize>,
        map: MapKind,
        noise_std: f64,
    },
    /// `c = mixing · map(z_perm)`, with `mixing` stored row-major.
    Mixed {
        perm: Vec<usize>,
        map: MapKind,
        mixing: Vec<Vec<f64>>,
    },
}

impl Encoder {
    fn latents(&self, factors: usize) -> usize {
        match self {
            Encoder::Identity => factors,
            Encoder::Noise { latents } | Encoder::Constant { latents } => *latents,
            Encoder::RandomCopy { probs } => probs.len(),
            Encoder::Linear { weights } => weights.len(),
            Encoder::Polynomial { terms } => terms.len(),
            Encoder::Permuted { perm, .. } => perm.len(),
            Encoder::Mixed { mixing, .. } => mixing.len(),
        }
    }

    fn encode(&self, z: &[f64], rng: &mut SeededRng) -> Vec<f64> {
        match self {
            Encoder::Identity => z.to_vec(),
            Encoder::Noise { latents } => {
                (0..*latents).map(|_| StandardNormal.sample(rng)).collect()
            }
            Encoder::Constant { latents } => vec![0.0; *latents],
            Encoder::RandomCopy { probs } => probs
                .iter()
                .map(|row| {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = row.len() - 1;
                    for (j, p) in row.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = j;
                            break;
                        }
                    }
                    z[pick]
                })
                .collect(),
            Encoder::Linear { weights } => weights
                .iter()
                .map(|w| w.iter().zip(z).map(|(a, b)| a * b).sum())
                .collect(),
            Encoder::Polynomial { terms } => terms
                .iter()
                .map(|t| t.iter().map(|&(j, coef, pow)| coef * z[j].powi(pow)).sum())
                .collect(),
            Encoder::Permuted {
                perm,
                map,
                noise_std,
            } => perm
                .iter()
                .map(|&j| {
                    let e: f64 = if *noise_std > 0.0 {
                        StandardNormal.sample(rng)
                    } else {
                        0.0
                    };
                    map.apply(z[j]) + noise_std * e
                })
                .collect(),
            Encoder::Mixed { perm, map, mixing } => {
                let x: Vec<f64> = perm.iter().map(|&j| map.apply(z[j])).collect();
                mixing
                    .iter()
                    .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
                    .collect()
            }
        }
    }
}

/// Independent factors pushed through an [`Encoder`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticOracle {
    pub name: String,
    pub priors: Vec<FactorPrior>,
    pub encoder: Encoder,
}

impl RepresentationOracle for SyntheticOracle {
    fn name(&self) -> &str {
        &self.name
    }

    fn factor_kinds(&self) -> Vec<FactorKind> {
        vec![FactorKind::Continuous; self.priors.len()]
    }

    fn num_latents(&self) -> usize {
        self.encoder.latents(self.priors.len())
    }

    fn sample_factor(&self, j: usize, rng: &mut SeededRng) -> f64 {
        self.priors[j].draw(rng)
    }

    fn encode(&self, z: &[f64], rng: &mut SeededRng) -> Vec<f64> {
        self.encoder.encode(z, rng)
    }
}

impl SyntheticOracle {
    pub fn ground_truth(&self) -> Value {
        serde_json::to_value(self).expect("oracle serializes")
    }
}

const UNIT: FactorPrior = FactorPrior::Uniform { low: 0.0, high: 1.0 };
const SYMMETRIC: FactorPrior = FactorPrior::Uniform {
    low: -1.0,
    high: 1.0,
};

/// Latent probabilities of copying each factor in the BetaVAE counterexample.
pub const BETAVAE_COPY_PROBS: [[f64; 3]; 3] = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];

/// Mixing weights of the FactorVAE counterexample.
pub const FACTORVAE_WEIGHTS: [[f64; 3]; 3] = [[0.5, 0.4, 0.5], [0.4, 0.5, 0.5], [0.4, 0.4, 0.6]];

/// Three U[0,1] factors; each latent copies one of two factors, chosen per
/// sample according to [`BETAVAE_COPY_PROBS`].
pub fn betavae_counterexample() -> SyntheticOracle {
    SyntheticOracle {
        name: "betavae-counterexample".into(),
        priors: vec![UNIT; 3],
        encoder: Encoder::RandomCopy {
            probs: BETAVAE_COPY_PROBS.iter().map(|r| r.to_vec()).collect(),
        },
    }
}

/// Three standard-normal factors mixed by [`FACTORVAE_WEIGHTS`].
pub fn factorvae_counterexample() -> SyntheticOracle {
    SyntheticOracle {
        name: "factorvae-counterexample".into(),
        priors: vec![FactorPrior::StandardNormal; 3],
        encoder: Encoder::Linear {
            weights: FACTORVAE_WEIGHTS.iter().map(|r| r.to_vec()).collect(),
        },
    }
}

/// Two U[-1,1] factors, `c_1 = z_1^15`, `c_2 = z_2^15`.
pub fn sap_nonlinear_oracle() -> SyntheticOracle {
    SyntheticOracle {
        name: "sap-nonlinear".into(),
        priors: vec![SYMMETRIC; 2],
        encoder: Encoder::Polynomial {
            terms: vec![vec![(0, 1.0, 15)], vec![(1, 1.0, 15)]],
        },
    }
}

/// Two U[-1,1] factors, `c = (z_1, z_1^25 + z_2^25, z_2)`.
pub fn sap_duplicate_oracle() -> SyntheticOracle {
    SyntheticOracle {
        name: "sap-duplicate".into(),
        priors: vec![SYMMETRIC; 2],
        encoder: Encoder::Polynomial {
            terms: vec![
                vec![(0, 1.0, 1)],
                vec![(0, 1.0, 25), (1, 1.0, 25)],
                vec![(1, 1.0, 1)],
            ],
        },
    }
}

/// `k` U[0,1] factors with `c = z`.
pub fn identity_oracle(k: usize) -> SyntheticOracle {
    SyntheticOracle {
        name: "identity".into(),
        priors: vec![UNIT; k],
        encoder: Encoder::Identity,
    }
}

/// `k` U[0,1] factors and `latents` noise dimensions independent of them.
pub fn noise_oracle(k: usize, latents: usize) -> SyntheticOracle {
    SyntheticOracle {
        name: "noise".into(),
        priors: vec![UNIT; k],
        encoder: Encoder::Noise { latents },
    }
}

/// Latents that never move.
pub fn constant_oracle(k: usize, latents: usize) -> SyntheticOracle {
    SyntheticOracle {
        name: "constant".into(),
        priors: vec![UNIT; k],
        encoder: Encoder::Constant { latents },
    }
}

fn seeded_permutation(k: usize, seed: u64) -> Vec<usize> {
    let mut rng = stream_rng(seed, streams::PERMUTATION);
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(&mut rng);
    perm
}

/// `k` U[-1,1] factors; latent `i` is `map(z_{perm[i]})` plus Gaussian noise,
/// with `perm` drawn from `seed`.
pub fn disentangled_oracle(k: usize, noise_std: f64, map: MapKind, seed: u64) -> SyntheticOracle {
    SyntheticOracle {
        name: "disentangled".into(),
        priors: vec![SYMMETRIC; k],
        encoder: Encoder::Permuted {
            perm: seeded_permutation(k, seed),
            map,
            noise_std,
        },
    }
}

/// Haar-distributed `k×k` orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal(k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, streams::MIXING);
    let g = DMatrix::<f64>::from_fn(k, k, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
                    q[(i, j)] * s
                })
                .collect()
        })
        .collect()
}

/// Column order and signs for `Q` that put large entries on a non-negative
/// diagonal: repeatedly pair the unassigned row and column holding the
/// largest remaining magnitude.
fn diagonal_alignment(q: &[Vec<f64>]) -> Vec<(usize, f64)> {
    let k = q.len();
    let mut column_for_row = vec![(0, 1.0); k];
    let (mut free_rows, mut free_cols) = (vec![true; k], vec![true; k]);
    for _ in 0..k {
        let mut best = (0, 0, -1.0);
        for i in (0..k).filter(|&i| free_rows[i]) {
            for j in (0..k).filter(|&j| free_cols[j]) {
                if q[i][j].abs() > best.2 {
                    best = (i, j, q[i][j].abs());
                }
            }
        }
        let (i, j, _) = best;
        free_rows[i] = false;
        free_cols[j] = false;
        column_for_row[i] = (j, if q[i][j] < 0.0 { -1.0 } else { 1.0 });
    }
    column_for_row
}

/// `c = ((1 - level) I + level Q) x` where `x` is the noiseless linear
/// disentangled code and `Q` a seeded random orthogonal matrix with columns
/// reordered and sign-flipped by [`diagonal_alignment`]. The diagonal then
/// never cancels, and each off-diagonal to diagonal ratio grows with `level`.
pub fn entangled_oracle(level: f64, k: usize, seed: u64) -> Result<SyntheticOracle> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!("level {level} outside [0, 1]")));
    }
    let q = random_orthogonal(k, seed);
    let align = diagonal_alignment(&q);
    let aligned: Vec<Vec<f64>> = (0..k)
        .map(|i| align.iter().map(|&(col, sign)| q[i][col] * sign).collect())
        .collect();
    let mixing = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| level * aligned[i][j] + if i == j { 1.0 - level } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(SyntheticOracle {
        name: "entangled".into(),
        priors: vec![SYMMETRIC; k],
        encoder: Encoder::Mixed {
            perm: seeded_permutation(k, seed),
            map: MapKind::Linear,
            mixing,
        },
    })
}

/// A generated dataset and a JSON description of how it was made.
#[derive(Debug, Clone)]
pub struct Generated {
    pub dataset: RepresentationDataset,
    pub metadata: Value,
}

fn generated(oracle: &SyntheticOracle, n: usize, seed: u64, params: Value) -> Result<Generated> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let dataset = sample_dataset(oracle, n, seed)?;
    let metadata = json!({
        "generator": oracle.name,
        "params": params,
        "n": n,
        "seed": seed,
        "ground_truth": oracle.ground_truth(),
    });
    Ok(Generated { dataset, metadata })
}

pub fn gen_betavae_counterexample(n: usize, seed: u64) -> Result<Generated> {
    generated(&betavae_counterexample(), n, seed, json!({}))
}

pub fn gen_factorvae_counterexample(n: usize, seed: u64) -> Result<Generated> {
    generated(&factorvae_counterexample(), n, seed, json!({}))
}

pub fn gen_sap_nonlinear(n: usize, seed: u64) -> Result<Generated> {
    generated(&sap_nonlinear_oracle(), n, seed, json!({}))
}

pub fn gen_sap_duplicate(n: usize, seed: u64) -> Result<Generated> {
    generated(&sap_duplicate_oracle(), n, seed, json!({}))
}

pub fn gen_disentangled(
    k: usize,
    n: usize,
    noise_std: f64,
    map: MapKind,
    seed: u64,
) -> Result<Generated> {
    if k < 2 {
        return Err(Error::InvalidParameter("disentangled needs K >= 2".into()));
    }
    let oracle = disentangled_oracle(k, noise_std, map, seed);
    generated(
        &oracle,
        n,
        seed,
        json!({"K": k, "noise_std": noise_std, "map": map}),
    )
}

pub fn gen_entangled_family(level: f64, k: usize, n: usize, seed: u64) -> Result<Generated> {
    if k < 2 {
        return Err(Error::InvalidParameter("entangled needs K >= 2".into()));
    }
    let oracle = entangled_oracle(level, k, seed)?;
    generated(&oracle, n, seed, json!({"level": level, "K": k}))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DciCase {
    ElevenFactor,
    TwoFactor,
}

impl std::str::FromStr for DciCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eleven_factor" | "eleven-factor" => Ok(DciCase::ElevenFactor),
            "two_factor" | "two-factor" => Ok(DciCase::TwoFactor),
            _ => Err(Error::InvalidParameter(format!("unknown DCI case {s:?}"))),
        }
    }
}

/// The importance matrices of the two DCI counterexamples.
pub fn gen_dci_matrix(case: DciCase) -> ImportanceMatrix {
    let rows = match case {
        DciCase::ElevenFactor => (0..11)
            .map(|i| (0..11).map(|k| if i == k { 0.8 } else { 0.02 }).collect())
            .collect(),
        DciCase::TwoFactor => vec![vec![1.0, 0.0], vec![0.01, 0.09]],
    };
    ImportanceMatrix::new(rows).expect("constant matrices are valid")
}

/// Two factors, three latents, unit factor entropies:
/// `c_1 = (ε, 0)`, `c_2 = (ε₁, ε₁)`, `c_3 = (0, ε)` as `I[latent][factor]`.
pub fn gen_parametric_matrix(eps: f64, eps1: f64) -> Result<InformativenessMatrix> {
    for (name, v) in [("eps", eps), ("eps1", eps1)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} = {v} outside [0, 1]")));
        }
    }
    InformativenessMatrix::new(
        vec![vec![eps, 0.0], vec![eps1, eps1], vec![0.0, eps]],
        vec![1.0, 1.0],
        Provenance::External,
    )
}

/// `name:key=value,...` description of a generator run.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub name: String,
    pub params: BTreeMap<String, String>,
}

pub const GENERATORS: [&str; 8] = [
    "betavae",
    "factorvae",
    "sap-nonlinear",
    "sap-duplicate",
    "disentangled",
    "entangled",
    "identity",
    "noise",
];

impl GeneratorSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got {kv:?}")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let name = name.trim().to_string();
        if !GENERATORS.contains(&name.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "unknown generator {name:?} (available: {})",
                GENERATORS.join(", ")
            )));
        }
        Ok(Self { name, params })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad value for {key}: {v:?}"))),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Generated> {
        let n = self.get("n", 10_000usize)?;
        let k = self.get("K", 3usize)?;
        match self.name.as_str() {
            "betavae" => gen_betavae_counterexample(n, seed),
            "factorvae" => gen_factorvae_counterexample(n, seed),
            "sap-nonlinear" => gen_sap_nonlinear(n, seed),
            "sap-duplicate" => gen_sap_duplicate(n, seed),
            "disentangled" => gen_disentangled(
                k,
                n,
                self.get("noise", 0.0)?,
                self.get("map", MapKind::Linear)?,
                seed,
            ),
            "entangled" => gen_entangled_family(self.get("level", 0.5)?, k, n, seed),
            "identity" => generated(&identity_oracle(k), n, seed, json!({"K": k})),
            "noise" => {
                let latents = self.get("N", k)?;
                generated(&noise_oracle(k, latents), n, seed, json!({"K": k, "N": latents}))
            }
            _ => unreachable!("validated in parse"),
        }
    }
}

pub const ORACLES: [&str; 6] = [
    "betavae-counterexample",
    "factorvae-counterexample",
    "sap-nonlinear",
    "sap-duplicate",
    "identity",
    "noise",
];

/// Built-in oracles addressable by name.
pub fn oracle_by_name(name: &str) -> Result<SyntheticOracle> {
    match name {
        "betavae-counterexample" => Ok(betavae_counterexample()),
        "factorvae-counterexample" => Ok(factorvae_counterexample()),
        "sap-nonlinear" => Ok(sap_nonlinear_oracle()),
        "sap-duplicate" => Ok(sap_duplicate_oracle()),
        "identity" => Ok(identity_oracle(3)),
        "noise" => Ok(noise_oracle(3, 3)),
        _ => Err(Error::InvalidParameter(format!(
            "unknown oracle {name:?} (available: {})",
            ORACLES.join(", ")
        ))),
    }
}
