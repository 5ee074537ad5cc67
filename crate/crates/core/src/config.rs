//! JSON system definitions and run manifests.
//!
//! A config names a builtin,
//!
//! ```json
//! {"builtin": "paper-planar-c10", "nu": 0.2}
//! ```
//!
//! or spells out both pieces, each either affine or as component expressions:
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "left": {"expressions": ["-0.2*x1 + x2", "-x1 - 0.2*x2"]},
//!   "right": {"affine": {"M": [[0, 1], [0, 0]], "b": [0, -1]}}
//! }
//! ```
//!
//! An optional `"section"` object overrides the return-map section
//! interval and the starting angle of the orbit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::builtin::{self, Builtin};
use crate::linalg::Matrix;
use crate::parser::{parse_field_expression, ParseError};
use crate::system::{PiecewiseSystem, ReducedSystem, SystemError, VectorFieldSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown builtin `{0}` (available: paper-4d, paper-planar-c10, paper-planar-c10-reduced)")]
    UnknownBuiltin(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{side} expression {index}: {source}")]
    Expression {
        side: &'static str,
        index: usize,
        source: ParseError,
    },
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceConfig {
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    Expressions(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<PieceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<PieceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionOverride>,
}

/// A resolved system. `reduced` is set when the definition is already in
/// reduced form (linear left piece, constant right piece).
#[derive(Debug, Clone)]
pub struct SystemDefinition {
    pub name: String,
    pub system: PiecewiseSystem,
    pub reduced: Option<ReducedSystem>,
    pub section: Option<SectionOverride>,
}

impl SystemConfig {
    pub fn builtin(name: &str) -> Self {
        Self {
            builtin: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("configs always serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn resolve(&self) -> Result<SystemDefinition, ConfigError> {
        let explicit = self.dimension.is_some() || self.left.is_some() || self.right.is_some();
        match (&self.builtin, explicit) {
            (Some(_), true) => Err(ConfigError::Invalid(
                "give either `builtin` or `dimension`/`left`/`right`, not both".into(),
            )),
            (Some(name), false) => {
                let nu = self.nu.unwrap_or(builtin::DEFAULT_NU);
                if !(nu > 0.0) {
                    return Err(ConfigError::Invalid(format!("nu must be positive, got {nu}")));
                }
                let b = builtin::lookup(name, nu)
                    .ok_or_else(|| ConfigError::UnknownBuiltin(name.clone()))?;
                let reduced = match &b {
                    Builtin::Reduced(r) => Some(r.clone()),
                    Builtin::Full(_) => None,
                };
                Ok(SystemDefinition {
                    name: name.clone(),
                    system: b.system(),
                    reduced,
                    section: self.section,
                })
            }
            (None, _) => {
                if self.nu.is_some() {
                    return Err(ConfigError::Invalid("`nu` only applies to builtins".into()));
                }
                let (Some(n), Some(left), Some(right)) = (self.dimension, &self.left, &self.right)
                else {
                    return Err(ConfigError::Invalid(
                        "explicit systems need `dimension`, `left` and `right`".into(),
                    ));
                };
                if n == 0 {
                    return Err(ConfigError::Invalid("dimension must be >= 1".into()));
                }
                let l = piece_spec(left, n, "left")?;
                let r = piece_spec(right, n, "right")?;
                let reduced = match (left, right) {
                    (PieceConfig::Affine { m: ml, b: bl }, PieceConfig::Affine { m: mr, b: br })
                        if bl.iter().all(|v| *v == 0.0)
                            && mr.iter().flatten().all(|v| *v == 0.0) =>
                    {
                        Some(ReducedSystem::new(
                            Matrix::from_rows(ml).expect("checked by piece_spec"),
                            br.clone(),
                        )?)
                    }
                    _ => None,
                };
                Ok(SystemDefinition {
                    name: "custom".into(),
                    system: PiecewiseSystem::new(l, r)?,
                    reduced,
                    section: self.section,
                })
            }
        }
    }

    /// Explicit form of the resolved system: builtins expand to their
    /// affine pieces, expressions are printed fully parenthesized.
    pub fn expanded(&self) -> Result<SystemConfig, ConfigError> {
        let def = self.resolve()?;
        let piece = |spec: &VectorFieldSpec| match spec {
            VectorFieldSpec::Affine { matrix, offset } => PieceConfig::Affine {
                m: matrix.to_rows(),
                b: offset.clone(),
            },
            VectorFieldSpec::Expression(es) => {
                PieceConfig::Expressions(es.iter().map(|e| e.to_string()).collect())
            }
        };
        Ok(SystemConfig {
            dimension: Some(def.system.dimension()),
            left: Some(piece(def.system.piece(crate::system::Side::Left))),
            right: Some(piece(def.system.piece(crate::system::Side::Right))),
            section: self.section,
            ..Default::default()
        })
    }
}

fn piece_spec(p: &PieceConfig, n: usize, side: &'static str) -> Result<VectorFieldSpec, ConfigError> {
    match p {
        PieceConfig::Affine { m, b } => {
            let matrix = Matrix::from_rows(m)
                .filter(|m| m.rows() == n && m.cols() == n)
                .ok_or_else(|| ConfigError::Invalid(format!("{side} `M` must be {n}x{n}")))?;
            if b.len() != n {
                return Err(ConfigError::Invalid(format!("{side} `b` must have {n} entries")));
            }
            Ok(VectorFieldSpec::affine(matrix, b.clone()))
        }
        PieceConfig::Expressions(es) => {
            if es.len() != n {
                return Err(ConfigError::Invalid(format!(
                    "{side} needs {n} expressions, got {}",
                    es.len()
                )));
            }
            let parsed = es
                .iter()
                .enumerate()
                .map(|(index, e)| {
                    parse_field_expression(e, n).map_err(|source| ConfigError::Expression {
                        side,
                        index,
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(VectorFieldSpec::Expression(parsed))
        }
    }
}

/// Record written as `manifest.json` next to the outputs of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub system: String,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifests always serialize");
        std::fs::write(dir.join("manifest.json"), text + "\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Side;

    #[test]
    fn builtin_and_explicit_agree() {
        let explicit = SystemConfig::from_json(
            r#"{"dimension": 2,
                "left": {"expressions": ["-0.2*x1 + x2", "-x1 - 0.2*x2"]},
                "right": {"affine": {"M": [[0, 1], [0, 0]], "b": [0, -1]}}}"#,
        )
        .unwrap()
        .resolve()
        .unwrap();
        let b = SystemConfig::builtin("paper-planar-c10").resolve().unwrap();
        assert!(b.reduced.is_none() && explicit.reduced.is_none());
        for x in [[0.3, -0.7], [-1.0, 2.0]] {
            for side in [Side::Left, Side::Right] {
                let u = b.system.eval_field(side, &x).unwrap();
                let v = explicit.system.eval_field(side, &x).unwrap();
                assert!(u.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn reduced_form_is_recognised() {
        let def = SystemConfig::builtin("paper-4d").expanded().unwrap().resolve().unwrap();
        assert_eq!(def.reduced.unwrap(), builtin::paper_4d());
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"builtin": "paper-4d", "dimension": 4}"#,
            r#"{"builtin": "nope"}"#,
            r#"{"dimension": 2, "left": {"expressions": ["x1"]}, "right": {"affine": {"M": [[0,0],[0,0]], "b": [0,-1]}}}"#,
            r#"{"dimension": 2, "left": {"expressions": ["x1", "x3"]}, "right": {"affine": {"M": [[0,0],[0,0]], "b": [0,-1]}}}"#,
            r#"{"dimension": 2, "left": {"affine": {"M": [[0,0]], "b": [0,0]}}, "right": {"affine": {"M": [[0,0],[0,0]], "b": [0,-1]}}}"#,
            r#"{"dimension": 2}"#,
            r#"{"builtin": "paper-4d", "colour": 1}"#,
        ];
        for text in bad {
            let r = SystemConfig::from_json(text).and_then(|c| c.resolve());
            assert!(r.is_err(), "{text}");
        }
    }

    #[test]
    fn digest_is_stable() {
        let a = SystemConfig::builtin("paper-4d");
        assert_eq!(a.digest(), SystemConfig::builtin("paper-4d").digest());
        assert_ne!(a.digest(), SystemConfig::builtin("paper-planar-c10").digest());
        assert_eq!(a.digest().len(), 64);
    }
}
