//! Metric reports and their JSON form.
//!
//! Serialized shape (keys are stable, maps are emitted in sorted order):
//!
//! ```json
//! {"metric": "mig", "score": 0.93, "skipped": false, "skip_reason": null,
//!  "intermediates": {...}, "config": {...}, "seed": 2020}
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    BetaVae,
    FactorVae,
    Dci,
    Sap,
    Mig,
    ThreeCharm,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::BetaVae,
        Metric::FactorVae,
        Metric::Dci,
        Metric::Sap,
        Metric::Mig,
        Metric::ThreeCharm,
    ];

    /// Metrics computable from a plain dataset.
    pub const DATASET: [Metric; 4] = [Metric::Dci, Metric::Sap, Metric::Mig, Metric::ThreeCharm];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::BetaVae => "betavae",
            Metric::FactorVae => "factorvae",
            Metric::Dci => "dci",
            Metric::Sap => "sap",
            Metric::Mig => "mig",
            Metric::ThreeCharm => "3charm",
        }
    }

    pub fn needs_oracle(&self) -> bool {
        matches!(self, Metric::BetaVae | Metric::FactorVae)
    }

    /// Parses a comma-separated selection such as `mig,3charm`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>> {
        let metrics = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(Metric::from_str)
            .collect::<Result<Vec<_>>>()?;
        if metrics.is_empty() {
            return Err(Error::InvalidParameter("no metrics selected".into()));
        }
        Ok(metrics)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "betavae" => Ok(Metric::BetaVae),
            "factorvae" => Ok(Metric::FactorVae),
            "dci" => Ok(Metric::Dci),
            "sap" => Ok(Metric::Sap),
            "mig" => Ok(Metric::Mig),
            "3charm" | "threecharm" => Ok(Metric::ThreeCharm),
            _ => Err(Error::InvalidParameter(format!(
                "unknown metric {s:?} (expected one of betavae, factorvae, dci, sap, mig, 3charm)"
            ))),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric: Metric,
    pub score: Option<f64>,
    pub skipped: bool,
    pub skip_reason: Option<String>,
    pub intermediates: BTreeMap<String, Value>,
    pub config: BTreeMap<String, Value>,
    pub seed: Option<u64>,
}

impl MetricReport {
    pub fn new(metric: Metric, score: f64) -> Self {
        Self {
            metric,
            score: Some(score),
            skipped: false,
            skip_reason: None,
            intermediates: BTreeMap::new(),
            config: BTreeMap::new(),
            seed: None,
        }
    }

    pub fn skipped(metric: Metric, reason: impl Into<String>) -> Self {
        Self {
            metric,
            score: None,
            skipped: true,
            skip_reason: Some(reason.into()),
            intermediates: BTreeMap::new(),
            config: BTreeMap::new(),
            seed: None,
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.intermediates.insert(
            key.to_string(),
            serde_json::to_value(value).expect("intermediate serializes"),
        );
        self
    }

    pub fn with_config(mut self, key: &str, value: impl Serialize) -> Self {
        self.config.insert(
            key.to_string(),
            serde_json::to_value(value).expect("config serializes"),
        );
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Score of a computed report; panics on a skipped one.
    pub fn value(&self) -> f64 {
        self.score
            .unwrap_or_else(|| panic!("{} was skipped: {:?}", self.metric, self.skip_reason))
    }

    /// Looks up a numeric-vector intermediate.
    pub fn vector(&self, key: &str) -> Option<Vec<f64>> {
        self.intermediates
            .get(key)?
            .as_array()?
            .iter()
            .map(Value::as_f64)
            .collect()
    }

    pub fn indices(&self, key: &str) -> Option<Vec<Option<usize>>> {
        self.intermediates
            .get(key)?
            .as_array()?
            .iter()
            .map(|v| Some(v.as_u64().map(|x| x as usize)))
            .collect()
    }
}
