//! JSON run configurations read by the `gkdv` command line.
//!
//! Every file is an object with `"schema": 1` next to the fields of the
//! configuration itself. Unknown fields are rejected, and parse errors carry
//! the path of the offending field (`evolver.n_modes: invalid type ...`).

use std::path::Path;

use gkdv_core::Nonlinearity;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, LabError, Result};
use crate::evolver::EvolverConfig;
use crate::harness::ExperimentConfig;

pub const SCHEMA_VERSION: u64 = 1;

fn default_half_width() -> f64 {
    40.0
}

fn default_points() -> usize {
    4097
}

/// `gkdv soliton`: one soliton sampled on a symmetric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonConfig {
    pub nonlinearity: Nonlinearity,
    pub c: f64,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

/// `gkdv coeffs`: the cascade on a symmetric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    pub nonlinearity: Nonlinearity,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_coeff_points")]
    pub points: usize,
}

fn default_coeff_points() -> usize {
    gkdv_core::cascade::DEFAULT_POINTS
}

/// A soliton `Q_c(x − x0)` in the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSeed {
    pub c: f64,
    pub x0: f64,
    /// `−1` for the negative soliton of odd nonlinearities.
    #[serde(default = "default_sign")]
    pub sign: f64,
}

fn default_sign() -> f64 {
    1.0
}

/// `gkdv evolve`: a sum of solitons evolved to `t_final`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub nonlinearity: Nonlinearity,
    pub evolver: EvolverConfig,
    pub solitons: Vec<SolitonSeed>,
    pub t_final: f64,
    #[serde(default = "default_evolve_checkpoints")]
    pub checkpoints: usize,
}

fn default_evolve_checkpoints() -> usize {
    20
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        self.evolver.validate()?;
        if self.solitons.is_empty() {
            invalid!("solitons: at least one soliton is needed");
        }
        for (i, s) in self.solitons.iter().enumerate() {
            if !(s.c > 0.0 && s.c.is_finite()) {
                invalid!("solitons[{i}].c must be positive, got {}", s.c);
            }
            if s.sign != 1.0 && s.sign != -1.0 {
                invalid!("solitons[{i}].sign must be 1 or -1, got {}", s.sign);
            }
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            invalid!("t_final must be positive, got {}", self.t_final);
        }
        if self.checkpoints == 0 {
            invalid!("checkpoints must be at least 1");
        }
        Ok(())
    }
}

/// `(c, ε)` grid for a scaling study around the base experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub c_values: Vec<f64>,
    pub eps_values: Vec<f64>,
}

/// `gkdv collide`: an experiment, optionally expanded into a study.
#[derive(Debug, Clone, PartialEq)]
pub struct CollideConfig {
    pub experiment: ExperimentConfig,
    pub study: Option<StudySpec>,
}

fn field_error(prefix: Option<&str>, e: serde_path_to_error::Error<serde_json::Error>) -> LabError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let field = match (prefix, path.as_str()) {
        (None, ".") => return LabError::InvalidArgument(format!("config: {inner}")),
        (None, p) => p.to_string(),
        (Some(pre), ".") => pre.to_string(),
        (Some(pre), p) => format!("{pre}.{p}"),
    };
    LabError::InvalidArgument(format!("config field `{field}`: {inner}"))
}

fn typed<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| field_error(None, e))
}

/// Parses the JSON text, checks `"schema"` and hands back the remaining
/// object.
fn versioned(text: &str) -> Result<serde_json::Map<String, Value>> {
    let v: Value = serde_json::from_str(text).map_err(|e| LabError::InvalidArgument(format!("config is not valid JSON: {e}")))?;
    let Value::Object(mut obj) = v else {
        invalid!("config must be a JSON object");
    };
    match obj.remove("schema") {
        Some(Value::Number(n)) if n.as_u64() == Some(SCHEMA_VERSION) => Ok(obj),
        Some(other) => invalid!("config field `schema`: expected {SCHEMA_VERSION}, got {other}"),
        None => invalid!("config field `schema` is missing (expected {SCHEMA_VERSION})"),
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    typed(Value::Object(versioned(text)?))
}

pub fn parse_collide(text: &str) -> Result<CollideConfig> {
    let mut obj = versioned(text)?;
    let study = obj.remove("study").map(|v| serde_path_to_error::deserialize(v).map_err(|e| field_error(Some("study"), e))).transpose()?;
    let experiment: ExperimentConfig = typed(Value::Object(obj))?;
    Ok(CollideConfig { experiment, study })
}

/// A nonlinearity given inline as JSON or as the path of a JSON file. The
/// bare object is accepted, without the `schema` wrapper.
pub fn nonlinearity_arg(arg: &str) -> Result<Nonlinearity> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { read(Path::new(arg))? };
    let v: Value = serde_json::from_str(&text).map_err(|e| LabError::InvalidArgument(format!("--nl is not valid JSON: {e}")))?;
    let nl: Nonlinearity = serde_path_to_error::deserialize(v).map_err(|e| field_error(Some("nl"), e))?;
    nl.validate()?;
    Ok(nl)
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| LabError::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}
