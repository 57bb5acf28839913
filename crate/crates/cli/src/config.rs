//! Run configuration as read from a JSON document.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qsl_core::bounds::MlMode;
use qsl_core::qdyn::GroundShiftMode;
use qsl_core::{CMatrix, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_STEPS: usize = 2048;
pub const MIN_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Constant,
    PiecewiseConst,
    RabiQubit,
    LandauZener,
    ModulatedOscillator,
    MatrixSamples,
}

/// A matrix entry, either a bare real number or `{re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex { re, im } => C64::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub matrix: MatrixSpec,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSample {
    pub t: f64,
    pub matrix: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Label(StateLabel),
    Pure { pure: Vec<Entry> },
    Density { density: MatrixSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateLabel {
    /// Ground state of `H(0)`.
    Ground,
    /// Equal-weight superposition of the basis states.
    EqualSuperposition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub dim: usize,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    pub duration: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<Segment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<MatrixSample>>,
    /// Path to a JSON list of samples, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_file: Option<PathBuf>,
    pub initial_state: InitialState,
    #[serde(default)]
    pub ground_shift_mode: GroundShiftMode,
    #[serde(default)]
    pub ml_mode: MlMode,
    /// Read `duration` and every time-dependent parameter in units of `ħ`:
    /// the state path is then independent of `hbar` and every bound scales
    /// linearly in it.
    #[serde(default)]
    pub natural_time: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn default_hbar() -> f64 {
    1.0
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

impl ProtocolConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative `samples_file` is resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    /// Makes a relative `samples_file` relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        if let Some(file) = self.samples_file.as_mut() {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::field("dim", "must be positive"));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(CliError::field("hbar", "must be a positive number"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(CliError::field("duration", "must be a positive number"));
        }
        if self.steps < MIN_STEPS {
            return Err(CliError::field(
                "steps",
                &format!("must be at least {MIN_STEPS}"),
            ));
        }
        Ok(())
    }

    pub fn param(&self, name: &str) -> Result<f64, CliError> {
        let v = self.params.get(name).copied().ok_or_else(|| {
            CliError::field(&format!("params.{name}"), "is required for this kind")
        })?;
        if !v.is_finite() {
            return Err(CliError::field(&format!("params.{name}"), "must be finite"));
        }
        Ok(v)
    }

    pub fn param_or(&self, name: &str, default: f64) -> Result<f64, CliError> {
        match self.params.get(name) {
            None => Ok(default),
            Some(_) => self.param(name),
        }
    }

    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            serde_json::to_value(self.kind)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default()
        })
    }
}

/// Dense matrix from nested rows, checked to be `dim × dim`.
pub fn build_matrix(spec: &MatrixSpec, dim: usize, field: &str) -> Result<CMatrix, CliError> {
    if spec.len() != dim || spec.iter().any(|row| row.len() != dim) {
        return Err(CliError::field(
            field,
            &format!("must be a {dim}x{dim} matrix"),
        ));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| spec[i][j].value()))
}

/// Replaces the number at a dot-separated path, e.g. `params.gamma`. A
/// missing top-level key is inserted, so defaulted fields such as `hbar`
/// can be swept; unknown names are still rejected when the config is parsed.
pub fn override_path(
    value: &mut serde_json::Value,
    path: &str,
    number: f64,
) -> Result<(), CliError> {
    let number = serde_json::Number::from_f64(number)
        .map(serde_json::Value::Number)
        .ok_or_else(|| CliError::Config(format!("sweep value {number} is not finite")))?;
    if let (serde_json::Value::Object(map), false) = (&mut *value, path.contains('.')) {
        if !map.contains_key(path) {
            map.insert(path.to_owned(), number);
            return Ok(());
        }
    }
    let mut cursor = value;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        let next = match cursor {
            serde_json::Value::Object(map) => map.get_mut(key),
            serde_json::Value::Array(items) => {
                key.parse::<usize>().ok().and_then(|i| items.get_mut(i))
            }
            _ => None,
        };
        let Some(next) = next else {
            return Err(CliError::Config(format!(
                "sweep parameter `{path}` does not resolve"
            )));
        };
        if parts.peek().is_none() {
            if !next.is_number() {
                return Err(CliError::Config(format!(
                    "sweep parameter `{path}` is not a number"
                )));
            }
            *next = number;
            return Ok(());
        }
        cursor = next;
    }
    Err(CliError::Config("empty sweep parameter path".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kind": "constant", "dim": 2, "duration": 3.14,
        "matrix": [[0, 0], [0, 1]],
        "initial_state": "equal_superposition"
    }"#;

    #[test]
    fn defaults_are_filled_in() {
        let cfg = ProtocolConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.hbar, 1.0);
        assert_eq!(cfg.steps, DEFAULT_STEPS);
        assert_eq!(cfg.ground_shift_mode, GroundShiftMode::Instantaneous);
        assert_eq!(cfg.ml_mode, MlMode::Linear);
        assert_eq!(
            cfg.initial_state,
            InitialState::Label(StateLabel::EqualSuperposition)
        );
    }

    #[test]
    fn missing_field_is_named() {
        let err = ProtocolConfig::from_json(
            r#"{"kind": "constant", "dim": 2, "initial_state": "ground"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duration"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn entries_accept_real_and_complex_forms() {
        let spec: MatrixSpec =
            serde_json::from_str(r#"[[1, {"re": 0, "im": -1}], [{"re": 0, "im": 1}, 2.5]]"#)
                .unwrap();
        let m = build_matrix(&spec, 2, "matrix").unwrap();
        assert_eq!(m[(0, 1)], C64::new(0.0, -1.0));
        assert_eq!(m[(1, 1)], C64::new(2.5, 0.0));
        assert!(build_matrix(&spec, 3, "matrix").is_err());
    }

    #[test]
    fn state_forms() {
        let pure: InitialState =
            serde_json::from_str(r#"{"pure": [1, {"re": 0, "im": 1}]}"#).unwrap();
        assert!(matches!(pure, InitialState::Pure { .. }));
        let rho: InitialState =
            serde_json::from_str(r#"{"density": [[0.5, 0], [0, 0.5]]}"#).unwrap();
        assert!(matches!(rho, InitialState::Density { .. }));
        let ground: InitialState = serde_json::from_str(r#""ground""#).unwrap();
        assert_eq!(ground, InitialState::Label(StateLabel::Ground));
    }

    #[test]
    fn overrides_follow_dot_paths() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        override_path(&mut v, "duration", 2.0).unwrap();
        assert_eq!(v["duration"], 2.0);
        override_path(&mut v, "matrix.1.1", 4.0).unwrap();
        assert_eq!(v["matrix"][1][1], 4.0);
        assert!(override_path(&mut v, "params.gamma", 1.0).is_err());
        assert!(override_path(&mut v, "kind", 1.0).is_err());
        assert!(override_path(&mut v, "matrix.2.0", 1.0).is_err());
        override_path(&mut v, "hbar", 0.5).unwrap();
        assert_eq!(ProtocolConfig::from_value(v.clone()).unwrap().hbar, 0.5);
        override_path(&mut v, "hbr", 0.5).unwrap();
        assert!(ProtocolConfig::from_value(v).is_err());
    }

    #[test]
    fn bad_values_are_config_errors() {
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["steps"] = 8.into();
        let err = ProtocolConfig::from_value(v).unwrap_err();
        assert!(err.to_string().contains("steps"));
        let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        v["hbar"] = (-1.0).into();
        assert!(ProtocolConfig::from_value(v).is_err());
    }
}
