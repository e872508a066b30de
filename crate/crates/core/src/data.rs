//! Paired generative-factor / latent-code datasets.
//!
//! A dataset is stored column-wise. Factors carry a [`FactorKind`]; discrete
//! factors hold integral values in `0..cardinality` as `f64`. The on-disk
//! format is comma-separated text with a header row. Column roles come either
//! from inline header suffixes (`z_1:d3`, `z_2:c`, bare names are latents) or
//! from a sidecar schema of `name=factor:d<k>|factor:c|latent` lines.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FactorKind {
    Discrete { cardinality: usize },
    Continuous,
}

impl FactorKind {
    fn suffix(&self) -> String {
        match self {
            FactorKind::Discrete { cardinality } => format!("d{cardinality}"),
            FactorKind::Continuous => "c".to_string(),
        }
    }

    fn parse_suffix(s: &str) -> Option<FactorKind> {
        if s == "c" {
            return Some(FactorKind::Continuous);
        }
        let card = s.strip_prefix('d')?.parse::<usize>().ok()?;
        (card >= 1).then_some(FactorKind::Discrete { cardinality: card })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorColumn {
    pub name: String,
    pub kind: FactorKind,
    pub values: Vec<f64>,
}

impl FactorColumn {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            kind: FactorKind::Continuous,
            values,
        }
    }

    pub fn discrete(name: impl Into<String>, cardinality: usize, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            kind: FactorKind::Discrete { cardinality },
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentColumn {
    pub name: String,
    pub values: Vec<f64>,
}

impl LatentColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// Generative factors `z` (K columns) paired row-by-row with latent codes `c`
/// (N columns).
///
/// Fields are public so that malformed data can be represented and reported
/// by [`RepresentationDataset::validate`]; use [`RepresentationDataset::new`]
/// to get a checked value.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationDataset {
    pub factors: Vec<FactorColumn>,
    pub latents: Vec<LatentColumn>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub location: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.kind, self.location)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, kind: &str, location: String) {
        self.violations.push(Violation {
            kind: kind.to_string(),
            location,
        });
    }
}

impl RepresentationDataset {
    pub fn new(factors: Vec<FactorColumn>, latents: Vec<LatentColumn>) -> Result<Self> {
        let ds = Self { factors, latents };
        let report = ds.validate();
        if report.is_pass() {
            Ok(ds)
        } else {
            let msg = report
                .violations
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::Validation(msg))
        }
    }

    /// Sample count, taken from the first column.
    pub fn n(&self) -> usize {
        self.factors
            .first()
            .map(|c| c.values.len())
            .or_else(|| self.latents.first().map(|c| c.values.len()))
            .unwrap_or(0)
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn num_latents(&self) -> usize {
        self.latents.len()
    }

    /// Checks every dataset invariant and reports each violation with its
    /// location. Rows are reported 1-based, excluding the header.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.factors.is_empty() {
            report.push("no factors", "dataset".into());
        }
        if self.latents.is_empty() {
            report.push("no latents", "dataset".into());
        }
        let n = self.n();
        if n == 0 && (!self.factors.is_empty() || !self.latents.is_empty()) {
            report.push("empty dataset", "dataset".into());
        }
        for col in &self.factors {
            if col.values.len() != n {
                report.push(
                    "length mismatch",
                    format!("column {} ({} vs {})", col.name, col.values.len(), n),
                );
            }
            for (r, &v) in col.values.iter().enumerate() {
                if !v.is_finite() {
                    report.push("non-finite value", format!("row {}, column {}", r + 1, col.name));
                    continue;
                }
                if let FactorKind::Discrete { cardinality } = col.kind {
                    if v.fract() != 0.0 || v < 0.0 || v >= cardinality as f64 {
                        report.push(
                            "discrete value out of range",
                            format!(
                                "row {}, column {} (value {v}, cardinality {cardinality})",
                                r + 1,
                                col.name
                            ),
                        );
                    }
                }
            }
        }
        for col in &self.latents {
            if col.values.len() != n {
                report.push(
                    "length mismatch",
                    format!("column {} ({} vs {})", col.name, col.values.len(), n),
                );
            }
            for (r, &v) in col.values.iter().enumerate() {
                if !v.is_finite() {
                    report.push("non-finite value", format!("row {}, column {}", r + 1, col.name));
                }
            }
        }
        report
    }

    /// Returns a copy with latent columns reordered so that new column `i` is
    /// old column `perm[i]`.
    pub fn permute_latents(&self, perm: &[usize]) -> Self {
        Self {
            factors: self.factors.clone(),
            latents: perm.iter().map(|&i| self.latents[i].clone()).collect(),
        }
    }

    /// Returns a copy with rows reordered so that new row `r` is old row `order[r]`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        let pick = |v: &[f64]| order.iter().map(|&r| v[r]).collect::<Vec<_>>();
        Self {
            factors: self
                .factors
                .iter()
                .map(|c| FactorColumn {
                    name: c.name.clone(),
                    kind: c.kind,
                    values: pick(&c.values),
                })
                .collect(),
            latents: self
                .latents
                .iter()
                .map(|c| LatentColumn::new(c.name.clone(), pick(&c.values)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Factor(FactorKind),
    Latent,
}

/// Ordered mapping from column name to role.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub columns: Vec<(String, ColumnRole)>,
}

impl Schema {
    /// Parses sidecar text: one `name=factor:d<k>|factor:c|latent` per line.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse_sidecar(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, role) = line.split_once('=').ok_or_else(|| {
                Error::Schema(format!("line {}: expected name=role", lineno + 1))
            })?;
            let role = match role.trim() {
                "latent" => ColumnRole::Latent,
                other => {
                    let kind = other
                        .strip_prefix("factor:")
                        .and_then(FactorKind::parse_suffix)
                        .ok_or_else(|| {
                            Error::Schema(format!("line {}: unknown role {other:?}", lineno + 1))
                        })?;
                    ColumnRole::Factor(kind)
                }
            };
            columns.push((name.trim().to_string(), role));
        }
        Ok(Self { columns })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_sidecar(&text)
    }

    /// Derives a schema from inline header suffixes: `name:d<k>` and `name:c`
    /// are factors, anything else a latent.
    pub fn from_header<'a>(header: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut columns = Vec::new();
        for raw in header {
            let raw = raw.trim();
            match raw.rsplit_once(':') {
                Some((name, suffix)) => {
                    let kind = FactorKind::parse_suffix(suffix).ok_or_else(|| {
                        Error::Schema(format!("column {raw:?}: unknown kind suffix {suffix:?}"))
                    })?;
                    columns.push((name.to_string(), ColumnRole::Factor(kind)));
                }
                None => columns.push((raw.to_string(), ColumnRole::Latent)),
            }
        }
        Ok(Self { columns })
    }

    pub fn to_sidecar(&self) -> String {
        let mut out = String::new();
        for (name, role) in &self.columns {
            let role = match role {
                ColumnRole::Latent => "latent".to_string(),
                ColumnRole::Factor(kind) => format!("factor:{}", kind.suffix()),
            };
            out.push_str(&format!("{name}={role}\n"));
        }
        out
    }
}

fn strip_suffix(name: &str) -> &str {
    name.trim().split(':').next().unwrap_or(name)
}

/// Loads a CSV dataset. With `schema = None` the roles come from inline
/// header suffixes; otherwise the schema selects and orders the columns.
pub fn load_dataset(path: &Path, schema: Option<&Schema>) -> Result<RepresentationDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, schema)
}

pub fn parse_dataset(text: &str, schema: Option<&Schema>) -> Result<RepresentationDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let inline;
    let schema = match schema {
        Some(s) => s,
        None => {
            inline = Schema::from_header(header.iter().map(String::as_str))?;
            &inline
        }
    };
    let plain: Vec<&str> = header.iter().map(|h| strip_suffix(h)).collect();
    let mut positions = Vec::with_capacity(schema.columns.len());
    for (name, _) in &schema.columns {
        let pos = plain
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))?;
        positions.push(pos);
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.columns.len()];
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        for (slot, (&pos, (name, _))) in positions.iter().zip(&schema.columns).enumerate() {
            let cell = record.get(pos).ok_or_else(|| Error::Parse {
                row: r + 1,
                column: name.clone(),
                message: "missing cell".into(),
            })?;
            let value = cell.parse::<f64>().map_err(|e| Error::Parse {
                row: r + 1,
                column: name.clone(),
                message: format!("{cell:?}: {e}"),
            })?;
            columns[slot].push(value);
        }
    }

    let mut factors = Vec::new();
    let mut latents = Vec::new();
    for ((name, role), values) in schema.columns.iter().zip(columns) {
        match role {
            ColumnRole::Factor(kind) => factors.push(FactorColumn {
                name: name.clone(),
                kind: *kind,
                values,
            }),
            ColumnRole::Latent => latents.push(LatentColumn::new(name.clone(), values)),
        }
    }
    RepresentationDataset::new(factors, latents)
}

/// Serializes a dataset as CSV with inline kind suffixes on factor columns.
/// Values use the shortest decimal form that parses back to the same `f64`.
pub fn dataset_to_csv(ds: &RepresentationDataset) -> Vec<u8> {
    let mut out = Vec::new();
    let header: Vec<String> = ds
        .factors
        .iter()
        .map(|f| format!("{}:{}", f.name, f.kind.suffix()))
        .chain(ds.latents.iter().map(|l| l.name.clone()))
        .collect();
    writeln!(out, "{}", header.join(",")).expect("write to vec");
    let cols: Vec<&[f64]> = ds
        .factors
        .iter()
        .map(|f| f.values.as_slice())
        .chain(ds.latents.iter().map(|l| l.values.as_slice()))
        .collect();
    let mut line = String::new();
    for r in 0..ds.n() {
        line.clear();
        for (i, col) in cols.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&col[r].to_string());
        }
        line.push('\n');
        out.extend_from_slice(line.as_bytes());
    }
    out
}

pub fn save_dataset(ds: &RepresentationDataset, path: &Path) -> Result<()> {
    write_atomic(path, &dataset_to_csv(ds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_loads() {
        let text = "z_1:d3,c_1\n0,0.5\n1,1.5\n2,-3\n1,0\n";
        let ds = parse_dataset(text, None).unwrap();
        assert_eq!(ds.num_factors(), 1);
        assert_eq!(ds.num_latents(), 1);
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.factors[0].kind, FactorKind::Discrete { cardinality: 3 });
    }

    #[test]
    fn nan_is_reported_with_row_and_column() {
        let mut text = String::from("z_1:c,c_1,c_2\n");
        for r in 1..=8 {
            let c2 = if r == 7 { "NaN".to_string() } else { r.to_string() };
            text.push_str(&format!("{r},{r},{c2}\n"));
        }
        let err = parse_dataset(&text, None).unwrap_err().to_string();
        assert!(err.contains("row 7"), "{err}");
        assert!(err.contains("column c_2"), "{err}");
    }

    #[test]
    fn non_numeric_cell_is_a_parse_error() {
        let err = parse_dataset("z:c,c\n1,abc\n", None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "c");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_schema_column_is_named() {
        let schema = Schema::parse_sidecar("z=factor:c\nc_9=latent\n").unwrap();
        let err = parse_dataset("z,c_1\n1,2\n", Some(&schema)).unwrap_err();
        assert!(matches!(err, Error::Schema(ref m) if m.contains("c_9")), "{err}");
    }

    #[test]
    fn sidecar_orders_columns() {
        let schema = Schema::parse_sidecar("b=latent\nz=factor:d2\na=latent\n").unwrap();
        let ds = parse_dataset("a,z,b\n1,0,2\n3,1,4\n", Some(&schema)).unwrap();
        assert_eq!(ds.latents[0].name, "b");
        assert_eq!(ds.latents[0].values, vec![2.0, 4.0]);
        assert_eq!(ds.latents[1].name, "a");
        let round = Schema::parse_sidecar(&schema.to_sidecar()).unwrap();
        assert_eq!(round, schema);
    }

    #[test]
    fn out_of_range_discrete_is_a_validation_error() {
        let err = parse_dataset("z:d3,c\n0,1\n5,2\n", None).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("row 2")), "{err}");
    }

    #[test]
    fn validate_reports_length_mismatch() {
        let ds = RepresentationDataset {
            factors: vec![FactorColumn::continuous("z", vec![1.0, 2.0, 3.0])],
            latents: vec![LatentColumn::new("c", vec![1.0, 2.0])],
        };
        let report = ds.validate();
        assert!(!report.is_pass());
        assert!(report.violations.iter().any(|v| v.kind == "length mismatch"));
    }

    #[test]
    fn validate_names_the_bad_discrete_cell() {
        let ds = RepresentationDataset {
            factors: vec![FactorColumn::discrete("z", 3, vec![0.0, 5.0])],
            latents: vec![LatentColumn::new("c", vec![1.0, 2.0])],
        };
        let report = ds.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].location.contains("row 2, column z"));
    }

    #[test]
    fn well_formed_dataset_passes() {
        let ds = RepresentationDataset {
            factors: vec![FactorColumn::discrete("z", 2, vec![0.0, 1.0])],
            latents: vec![LatentColumn::new("c", vec![0.1, 0.2])],
        };
        assert!(ds.validate().is_pass());
    }
}
