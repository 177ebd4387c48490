use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::design::PlantSpec;
use crate::exactmath::{serde_bigint, serde_rational, Rational, RationalMatrix};
use crate::he::Backend;
use crate::simloop::{InitialConditions, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub plant: PlantSection,
    pub exosystem: ExosystemSection,
    pub gains: GainsSection,
    pub initial_bounds: InitialBounds,
    pub design: DesignSection,
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    #[serde(rename = "A", with = "serde_rational::matrix")]
    pub a: RationalMatrix,
    #[serde(rename = "B", with = "serde_rational::matrix")]
    pub b: RationalMatrix,
    #[serde(rename = "C", with = "serde_rational::matrix")]
    pub c: RationalMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExosystemSection {
    #[serde(rename = "S", with = "serde_rational::matrix")]
    pub s: RationalMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(rename = "K", with = "serde_rational::matrix")]
    pub k: RationalMatrix,
    #[serde(rename = "L", with = "serde_rational::matrix")]
    pub l: RationalMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialBounds {
    #[serde(rename = "C_xp0", with = "serde_rational")]
    pub c_xp0: Rational,
    #[serde(rename = "C_vp0", with = "serde_rational")]
    pub c_vp0: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    #[serde(with = "serde_rational")]
    pub gamma: Rational,
    #[serde(with = "serde_rational")]
    pub s: Rational,
    #[serde(with = "serde_rational")]
    pub l0: Rational,
}

fn default_key_bits() -> u64 {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub horizon: usize,
    pub scheme: Scheme,
    pub backend: Backend,
    /// Mock modulus. Paillier always runs with `q = N`.
    #[serde(default, with = "serde_bigint::option", skip_serializing_if = "Option::is_none")]
    pub q: Option<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_key_bits")]
    pub key_bits: u64,
    #[serde(with = "serde_rational::vec")]
    pub x_p0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub v_p0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub xhat0: Vec<Rational>,
    #[serde(with = "serde_rational::vec")]
    pub vhat0: Vec<Rational>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ConfigFile = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.spec().dims().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.initial()
            .check_dims(&self.spec())
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.sim.backend == crate::he::Backend::Mock && self.sim.q.is_none() {
            return Err(ConfigError::Invalid("sim.q is required for the mock backend".into()));
        }
        Ok(())
    }

    pub fn spec(&self) -> PlantSpec {
        PlantSpec {
            a: self.plant.a.clone(),
            b: self.plant.b.clone(),
            c: self.plant.c.clone(),
            s: self.exosystem.s.clone(),
            k: self.gains.k.clone(),
            l: self.gains.l.clone(),
            c_xp0: self.initial_bounds.c_xp0.clone(),
            c_vp0: self.initial_bounds.c_vp0.clone(),
        }
    }

    pub fn initial(&self) -> InitialConditions {
        InitialConditions {
            x_p0: self.sim.x_p0.clone(),
            v_p0: self.sim.v_p0.clone(),
            x_hat0: self.sim.xhat0.clone(),
            v_hat0: self.sim.vhat0.clone(),
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ConfigFile, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ConfigFile::from_json(&text)
}
