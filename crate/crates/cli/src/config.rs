//! Run configuration: one JSON document naming a command, the frequency
//! system, the torus and command parameters.
//!
//! `system` and `torus` may be inline documents or paths to JSON files,
//! resolved relative to the config file. The resolved document (with the
//! effective seed) is what gets hashed into every report.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use inftorus::schema::{SystemDoc, TorusDoc};
use inftorus::{FrequencySystem, TorusSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Classify,
    Simulate,
    ErgodicTest,
    Recurrence,
    PeriodTable,
}

impl Command {
    pub const ALL: [(&'static str, Command); 5] = [
        ("classify", Command::Classify),
        ("simulate", Command::Simulate),
        ("ergodic-test", Command::ErgodicTest),
        ("recurrence", Command::Recurrence),
        ("period-table", Command::PeriodTable),
    ];

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL.iter().find(|(n, _)| *n == s).map(|(_, c)| *c).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
            CliError::Config(format!("command: unknown command {s:?} (expected one of {})", names.join(", ")))
        })
    }

    pub fn name(&self) -> &'static str {
        Self::ALL.iter().find(|(_, c)| c == self).map(|(n, _)| *n).unwrap()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDoc {
    pub radians: Option<Vec<f64>>,
    /// Exact fractions of a turn, `"num/den"`.
    pub turns: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub t_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub seed: Option<u64>,
    pub upto: Option<usize>,
    pub n_max: Option<usize>,
    pub point: Option<PointDoc>,
    // simulate
    pub times: Option<Vec<f64>>,
    pub turns: Option<Vec<String>>,
    pub grid: Option<GridDoc>,
    pub include_qp: Option<bool>,
    pub csv: Option<String>,
    // ergodic-test
    pub character: Option<Vec<(usize, i64)>>,
    #[serde(rename = "T")]
    pub average_horizon: Option<f64>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub equidist_dims: Option<Vec<usize>>,
    pub equidist_samples: Option<usize>,
    // recurrence
    pub eps: Option<f64>,
    pub t_floor: Option<f64>,
    pub horizon: Option<f64>,
    pub grid_dt: Option<f64>,
    pub grid_window: Option<f64>,
    pub max_hits: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub system: FrequencySystem,
    pub torus: Option<TorusSpec>,
    pub params: Params,
    /// The resolved configuration document, seed included.
    pub resolved: Value,
}

impl RunConfig {
    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("--config: cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_str(&text, &base, seed_override)
    }

    pub fn from_str(text: &str, base: &Path, seed_override: Option<u64>) -> Result<Self, CliError> {
        let mut doc: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: malformed JSON: {e}")))?;
        let obj = doc.as_object_mut().ok_or_else(|| CliError::Config("config: expected a JSON object".into()))?;
        if let Some(k) = obj.keys().find(|k| !["command", "system", "torus", "params"].contains(&k.as_str())) {
            return Err(CliError::Config(format!("{k}: unknown top-level field")));
        }
        let command = match obj.get("command") {
            Some(Value::String(s)) => Command::parse(s)?,
            Some(_) => return Err(CliError::Config("command: expected a string".into())),
            None => return Err(CliError::Config("command: missing".into())),
        };
        for field in ["system", "torus"] {
            if let Some(Value::String(p)) = obj.get(field) {
                let resolved = read_referenced(field, &base.join(p))?;
                obj.insert(field.to_string(), resolved);
            }
        }
        let params = obj.entry("params").or_insert_with(|| Value::Object(Default::default()));
        let params_obj = params.as_object_mut().ok_or_else(|| CliError::Config("params: expected an object".into()))?;
        if let Some(seed) = seed_override {
            params_obj.insert("seed".into(), Value::from(seed));
        }
        let params: Params = serde_json::from_value(params.clone()).map_err(|e| CliError::Config(format!("params: {e}")))?;

        let system_doc: SystemDoc = match obj.get("system") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("system: {e}")))?,
            None => return Err(CliError::Config("system: missing".into())),
        };
        let system = system_doc.to_system().map_err(|e| CliError::Config(format!("system: {e}")))?;
        let torus = match obj.get("torus") {
            Some(v) => {
                let t: TorusDoc =
                    serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("torus: {e}")))?;
                Some(t.to_torus().map_err(|e| CliError::Config(format!("torus: {e}")))?)
            }
            None => None,
        };
        Ok(Self { command, system, torus, params, resolved: doc })
    }

    /// SHA-256 of the canonical resolved document.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.resolved).expect("JSON values serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn torus(&self) -> Result<&TorusSpec, CliError> {
        self.torus.as_ref().ok_or_else(|| CliError::Config(format!("torus: required by {}", self.command.name())))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.params
            .seed
            .ok_or_else(|| CliError::Config(format!("params.seed: {} needs an explicit seed (or --seed)", self.command.name())))
    }
}

fn read_referenced(field: &str, path: &PathBuf) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{field}: cannot read referenced file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{field}: malformed JSON in {}: {e}", path.display())))
}

pub fn positive(field: &str, v: Option<f64>, default: Option<f64>) -> Result<f64, CliError> {
    match v.or(default) {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(CliError::Config(format!("params.{field}: must be positive, got {x}"))),
        None => Err(CliError::Config(format!("params.{field}: missing"))),
    }
}
