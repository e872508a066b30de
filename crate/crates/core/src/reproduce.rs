//! Registry of the published counterexamples and closed forms, each run with
//! pinned seeds and compared against its expected value and tolerance.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{
    beta_vae_score, dci_score, factor_vae_score, mig_score, sap_score, three_charm_score,
    InterventionConfig,
};
use crate::oracle::sample_dataset;
use crate::rng::stream_rng;
use crate::synth::{
    betavae_counterexample, factorvae_counterexample, gen_dci_matrix, gen_parametric_matrix,
    sap_duplicate_oracle, sap_nonlinear_oracle, DciCase,
};

/// Seeds every stochastic case is run with.
pub const PINNED_SEEDS: [u64; 3] = [2020, 2021, 2022];

/// Sample size of the dataset-based cases.
pub const DATASET_ROWS: usize = 10_000;

/// Slack added to every tolerance comparison to absorb rounding.
const FLOAT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub case: String,
    pub quantity: String,
    pub seed: Option<u64>,
    pub expected: f64,
    pub tolerance: f64,
    pub observed: f64,
    pub pass: bool,
}

impl CaseRow {
    fn new(case: &str, quantity: impl Into<String>, expected: f64, tolerance: f64, observed: f64) -> Self {
        Self {
            case: case.to_string(),
            quantity: quantity.into(),
            seed: None,
            expected,
            tolerance,
            observed,
            pass: (observed - expected).abs() <= tolerance + FLOAT_SLACK,
        }
    }

    fn seeded(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub const CASES: [(&str, &str); 9] = [
    ("betavae-fails-p2", "BetaVAE scores near 1 on a representation where no latent is disentangled"),
    ("factorvae-fails-p2", "FactorVAE scores 1 on a dense linear mixing"),
    ("dci-eleven-factor", "DCI of the 11x11 diagonal-dominant importance matrix"),
    ("dci-two-factor", "DCI of the 2x2 matrix with one nearly silent latent"),
    ("sap-nonlinear", "SAP of c_i = z_i^15"),
    ("sap-duplicate", "SAP of c = (z_1, z_1^25 + z_2^25, z_2)"),
    ("parametric-closed-forms", "3CharM = eps, MIG = |eps - eps1|, DCI = eps/(eps + eps1) on 20 random pairs"),
    ("parametric-table", "the five (eps, eps1) regimes of the parametric example"),
    ("parametric-zero", "eps = eps1 = 0 scores zero everywhere"),
];

pub fn case_names() -> Vec<&'static str> {
    CASES.iter().map(|(n, _)| *n).collect()
}

/// Runs one registered case, or every case for `"all"`.
pub fn run(name: &str) -> Result<Vec<CaseRow>> {
    if name == "all" {
        let mut rows = Vec::new();
        for (case, _) in CASES {
            rows.extend(run(case)?);
        }
        return Ok(rows);
    }
    match name {
        "betavae-fails-p2" => betavae_case(),
        "factorvae-fails-p2" => factorvae_case(),
        "dci-eleven-factor" => dci_case(name, DciCase::ElevenFactor, 0.600, 0.005),
        "dci-two-factor" => dci_case(name, DciCase::TwoFactor, 0.957, 0.001),
        "sap-nonlinear" => sap_case(name, &sap_nonlinear_oracle(), 0.32, 0.05),
        "sap-duplicate" => sap_case(name, &sap_duplicate_oracle(), 0.98, 0.02),
        "parametric-closed-forms" => closed_forms_case(),
        "parametric-table" => table_case(),
        "parametric-zero" => zero_case(),
        _ => Err(Error::InvalidParameter(format!(
            "unknown case {name:?} (available: all, {})",
            case_names().join(", ")
        ))),
    }
}

fn betavae_case() -> Result<Vec<CaseRow>> {
    let oracle = betavae_counterexample();
    PINNED_SEEDS
        .iter()
        .map(|&seed| {
            let cfg = InterventionConfig {
                seed,
                ..InterventionConfig::default()
            };
            let score = beta_vae_score(&oracle, &cfg)?.value();
            Ok(CaseRow::new("betavae-fails-p2", "betavae", 0.9967, 0.02, score).seeded(seed))
        })
        .collect()
}

fn factorvae_case() -> Result<Vec<CaseRow>> {
    let oracle = factorvae_counterexample();
    PINNED_SEEDS
        .iter()
        .map(|&seed| {
            let cfg = InterventionConfig {
                seed,
                ..InterventionConfig::default()
            };
            let score = factor_vae_score(&oracle, &cfg)?.value();
            Ok(CaseRow::new("factorvae-fails-p2", "factorvae", 1.0, 0.02, score).seeded(seed))
        })
        .collect()
}

fn dci_case(name: &str, case: DciCase, expected: f64, tol: f64) -> Result<Vec<CaseRow>> {
    let score = dci_score(&gen_dci_matrix(case))?.value();
    Ok(vec![CaseRow::new(name, "dci", expected, tol, score)])
}

fn sap_case(
    name: &str,
    oracle: &crate::synth::SyntheticOracle,
    expected: f64,
    tol: f64,
) -> Result<Vec<CaseRow>> {
    PINNED_SEEDS
        .iter()
        .map(|&seed| {
            let ds = sample_dataset(oracle, DATASET_ROWS, seed)?;
            let score = sap_score(&ds)?.value();
            Ok(CaseRow::new(name, "sap", expected, tol, score).seeded(seed))
        })
        .collect()
}

/// Scores of the parametric matrix. DCI reads the matrix as importances;
/// when every entry is zero it is not computable and reported as 0 with the
/// flag set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParametricScores {
    pub eps: f64,
    pub eps1: f64,
    pub three_charm: f64,
    pub mig: f64,
    pub dci: f64,
    pub dci_not_computable: bool,
}

pub fn parametric_scores(eps: f64, eps1: f64) -> Result<ParametricScores> {
    let m = gen_parametric_matrix(eps, eps1)?;
    let three_charm = three_charm_score(&m)?.value();
    let mig = mig_score(&m)?.value();
    let (dci, dci_not_computable) = match dci_score(&m.as_importance()?) {
        Ok(r) => (r.value(), false),
        Err(Error::NotComputable { .. }) => (0.0, true),
        Err(e) => return Err(e),
    };
    Ok(ParametricScores {
        eps,
        eps1,
        three_charm,
        mig,
        dci,
        dci_not_computable,
    })
}

/// One row per `(eps, eps1)` in the Cartesian product of the grids.
pub fn parametric_sweep(eps_grid: &[f64], eps1_grid: &[f64]) -> Result<Vec<ParametricScores>> {
    let mut rows = Vec::with_capacity(eps_grid.len() * eps1_grid.len());
    for &e in eps_grid {
        for &e1 in eps1_grid {
            rows.push(parametric_scores(e, e1)?);
        }
    }
    Ok(rows)
}

fn closed_forms_case() -> Result<Vec<CaseRow>> {
    let name = "parametric-closed-forms";
    let mut rng = stream_rng(PINNED_SEEDS[0], 0);
    let (mut e3, mut em, mut ed) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let eps: f64 = rng.random_range(0.0..=1.0);
        let eps1: f64 = rng.random_range(0.0..=1.0);
        let s = parametric_scores(eps, eps1)?;
        e3 = e3.max((s.three_charm - eps).abs());
        em = em.max((s.mig - (eps - eps1).abs()).abs());
        ed = ed.max((s.dci - eps / (eps + eps1)).abs());
    }
    Ok(vec![
        CaseRow::new(name, "max |3charm - eps|", 0.0, 1e-9, e3),
        CaseRow::new(name, "max |mig - |eps - eps1||", 0.0, 1e-9, em),
        CaseRow::new(name, "max |dci - eps/(eps + eps1)|", 0.0, 1e-9, ed),
    ])
}

/// Representative points of the five table regimes and the printed
/// `(3CharM, DCI, MIG)` pattern for each.
pub const TABLE_REGIMES: [(&str, f64, f64, [f64; 3]); 5] = [
    ("eps~0, eps1~1", 0.01, 0.99, [0.0, 0.0, 1.0]),
    ("eps~0, eps1/eps~0", 0.05, 0.0001, [0.0, 1.0, 0.0]),
    ("eps~0, eps1~0, eps1/eps>>1", 0.0001, 0.05, [0.0, 0.0, 0.0]),
    ("eps~1, eps1~1", 0.99, 0.99, [1.0, 0.0, 0.5]),
    ("eps~1, eps1~0", 0.99, 0.01, [1.0, 1.0, 1.0]),
];

/// Allowed distance from each printed `~` value.
pub const TABLE_TOLERANCE: f64 = 0.1;

fn table_case() -> Result<Vec<CaseRow>> {
    let name = "parametric-table";
    let mut rows = Vec::new();
    for (label, eps, eps1, [t3, td, tm]) in TABLE_REGIMES {
        let s = parametric_scores(eps, eps1)?;
        rows.push(CaseRow::new(name, format!("{label}: 3charm"), t3, TABLE_TOLERANCE, s.three_charm));
        rows.push(CaseRow::new(name, format!("{label}: dci"), td, TABLE_TOLERANCE, s.dci));
        rows.push(CaseRow::new(name, format!("{label}: mig"), tm, TABLE_TOLERANCE, s.mig));
    }
    Ok(rows)
}

fn zero_case() -> Result<Vec<CaseRow>> {
    let name = "parametric-zero";
    let s = parametric_scores(0.0, 0.0)?;
    Ok(vec![
        CaseRow::new(name, "3charm", 0.0, 0.0, s.three_charm),
        CaseRow::new(name, "mig", 0.0, 0.0, s.mig),
        CaseRow::new(name, "dci", 0.0, 0.0, s.dci),
    ])
}

/// Fixed-width expected-vs-observed table.
pub fn render_table(rows: &[CaseRow]) -> String {
    let mut out = format!(
        "{:<24} {:<40} {:>6} {:>10} {:>10} {:>10}  {}\n",
        "case", "quantity", "seed", "expected", "tolerance", "observed", "result"
    );
    for r in rows {
        let seed = r.seed.map_or("-".to_string(), |s| s.to_string());
        out.push_str(&format!(
            "{:<24} {:<40} {:>6} {:>10.4} {:>10.3e} {:>10.4}  {}\n",
            r.case,
            r.quantity,
            seed,
            r.expected,
            r.tolerance,
            r.observed,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}
