//! Latent-by-factor score matrices and the `.matrix` text format.
//!
//! ```text
//! # comment lines are allowed anywhere before the first row
//! K,N
//! H(z_1),...,H(z_K)
//! I[1][1],...,I[1][K]
//! ...
//! I[N][1],...,I[N][K]
//! ```
//!
//! Numbers are parsed with Rust's `f64::from_str` (correctly rounded) and
//! written with the shortest representation that parses back bit-exactly.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    MutualInformation,
    LinearR2,
    Importance,
    External,
}

/// N×K matrix `I[i][j]`: informativeness of latent `i` about factor `j`,
/// together with the factor entropies in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InformativenessMatrix {
    pub rows: Vec<Vec<f64>>,
    pub factor_entropies: Vec<f64>,
    pub provenance: Provenance,
}

const MI_TOLERANCE: f64 = 1e-9;

impl InformativenessMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        factor_entropies: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        let k = factor_entropies.len();
        if k == 0 {
            return Err(Error::Contract("matrix needs at least one factor".into()));
        }
        if rows.is_empty() {
            return Err(Error::Contract("matrix needs at least one latent".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Contract(format!(
                    "row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Contract(format!("entry ({i},{j}) = {v} is not >= 0")));
                }
                if provenance == Provenance::MutualInformation
                    && v > factor_entropies[j] + MI_TOLERANCE
                {
                    return Err(Error::Contract(format!(
                        "entry ({i},{j}) = {v} exceeds factor entropy {}",
                        factor_entropies[j]
                    )));
                }
            }
        }
        if factor_entropies.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::Contract("factor entropies must be finite and >= 0".into()));
        }
        Ok(Self {
            rows,
            factor_entropies,
            provenance,
        })
    }

    pub fn num_latents(&self) -> usize {
        self.rows.len()
    }

    pub fn num_factors(&self) -> usize {
        self.factor_entropies.len()
    }

    pub fn get(&self, latent: usize, factor: usize) -> f64 {
        self.rows[latent][factor]
    }

    pub fn column(&self, factor: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[factor]).collect()
    }

    /// Reorders latents so that new row `i` is old row `perm[i]`.
    pub fn permute_latents(&self, perm: &[usize]) -> Self {
        Self {
            rows: perm.iter().map(|&i| self.rows[i].clone()).collect(),
            factor_entropies: self.factor_entropies.clone(),
            provenance: self.provenance,
        }
    }

    /// Reinterprets the informativeness scores as DCI importances.
    pub fn as_importance(&self) -> Result<ImportanceMatrix> {
        ImportanceMatrix::new(self.rows.clone())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next_numbers = |what: &str| -> Result<(usize, Vec<f64>)> {
            let (lineno, line) = lines
                .next()
                .ok_or_else(|| Error::Schema(format!("matrix file: missing {what}")))?;
            let values = line
                .split(',')
                .enumerate()
                .map(|(col, cell)| {
                    cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                        row: lineno + 1,
                        column: format!("{}", col + 1),
                        message: format!("{cell:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((lineno + 1, values))
        };
        let (_, dims) = next_numbers("dimension header")?;
        let [k, n] = dims[..] else {
            return Err(Error::Schema("matrix header must be `K,N`".into()));
        };
        if k.fract() != 0.0 || n.fract() != 0.0 || k < 1.0 || n < 1.0 {
            return Err(Error::Schema(format!("bad matrix dimensions {k},{n}")));
        }
        let (k, n) = (k as usize, n as usize);
        let (line, entropies) = next_numbers("entropy line")?;
        if entropies.len() != k {
            return Err(Error::Schema(format!(
                "line {line}: expected {k} entropies, found {}",
                entropies.len()
            )));
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let (line, row) = next_numbers(&format!("row {}", i + 1))?;
            if row.len() != k {
                return Err(Error::Schema(format!(
                    "line {line}: expected {k} values, found {}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Schema(format!("matrix file: more than {n} rows")));
        }
        Self::new(rows, entropies, Provenance::External)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut out = format!("{},{}\n", self.num_factors(), self.num_latents());
        out.push_str(&join(&self.factor_entropies));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&join(row));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// N×K matrix of regressor feature importances `P[i][j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceMatrix {
    pub rows: Vec<Vec<f64>>,
}

impl ImportanceMatrix {
    /// Requires a rectangular, non-negative matrix. An all-zero matrix is
    /// accepted here; DCI rejects it as not computable.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || k == 0 {
            return Err(Error::Contract("importance matrix must be non-empty".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Contract(format!("row {i} is ragged")));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Contract(format!("row {i} has a negative or non-finite entry")));
            }
        }
        Ok(Self { rows })
    }

    pub fn num_latents(&self) -> usize {
        self.rows.len()
    }

    pub fn num_factors(&self) -> usize {
        self.rows[0].len()
    }

    pub fn permute_latents(&self, perm: &[usize]) -> Self {
        Self {
            rows: perm.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}
