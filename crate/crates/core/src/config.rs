//! Run configuration: physical constants, manifold parameters, defect
//! orientation, seed, and output directory.
//!
//! The on-disk format is plain `section.key = value` lines. Lines starting
//! with `#` and blank lines are ignored. Unknown keys are rejected so that
//! typos fail loudly instead of silently using defaults.
//!
//! ```text
//! # SnV- with a slightly tweaked ground spin-orbit constant
//! ground.lambda_so_ghz = 842
//! orientation.axis = 111
//! run.seed = 7
//! ```

use thiserror::Error;

use crate::geometry::DefectOrientation;
use crate::hamiltonian::{HamiltonianError, ManifoldParameters, PhysicalConstants};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub constants: PhysicalConstants,
    pub ground: ManifoldParameters,
    pub excited: ManifoldParameters,
    pub orientation: DefectOrientation,
    pub seed: u64,
    pub out_dir: String,
}

impl Default for RunConfig {
    /// SnV⁻ defaults: λ = {850, 3000} GHz, f = {0.154, 0.098},
    /// δf = {0.014, 0.238}, gS = 2.0023, μB/h = 13.996245 GHz/T,
    /// orientation `[111]`.
    fn default() -> Self {
        Self {
            constants: PhysicalConstants::default(),
            ground: ManifoldParameters::snv_ground(),
            excited: ManifoldParameters::snv_excited(),
            orientation: DefectOrientation::Axis111,
            seed: 0,
            out_dir: ".".into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error(transparent)]
    Invariant(#[from] HamiltonianError),
}

impl RunConfig {
    /// Parse a config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        config.apply(text)?;
        Ok(config)
    }

    /// Apply `section.key = value` lines to this config.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line,
                    text: trimmed.to_string(),
                });
            };
            let key = key.trim();
            let value = value.trim();

            let parse_f64 = |key: &str| -> Result<f64, ConfigError> {
                value.parse::<f64>().map_err(|e| ConfigError::InvalidValue {
                    line,
                    key: key.to_string(),
                    reason: e.to_string(),
                })
            };

            match key {
                "constants.g_s" => self.constants.g_s = parse_f64(key)?,
                "constants.mu_b_over_h_ghz_per_t" => {
                    self.constants.mu_b_over_h_ghz_per_t = parse_f64(key)?
                }
                "ground.lambda_so_ghz" => self.ground.lambda_so_ghz = parse_f64(key)?,
                "ground.f" => self.ground.f = parse_f64(key)?,
                "ground.delta_f" => self.ground.delta_f = parse_f64(key)?,
                "excited.lambda_so_ghz" => self.excited.lambda_so_ghz = parse_f64(key)?,
                "excited.f" => self.excited.f = parse_f64(key)?,
                "excited.delta_f" => self.excited.delta_f = parse_f64(key)?,
                "orientation.axis" => {
                    self.orientation = DefectOrientation::from_token(value).ok_or_else(|| {
                        ConfigError::InvalidValue {
                            line,
                            key: key.to_string(),
                            reason: format!("expected one of 111, -111, 1-11, 11-1; got `{value}`"),
                        }
                    })?
                }
                "run.seed" => {
                    self.seed = value
                        .parse::<u64>()
                        .map_err(|e| ConfigError::InvalidValue {
                            line,
                            key: key.to_string(),
                            reason: e.to_string(),
                        })?
                }
                "run.out_dir" => self.out_dir = value.to_string(),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        self.validate()?;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.constants.validate()?;
        self.ground.validate()?;
        self.excited.validate()?;
        Ok(())
    }

    /// Effective configuration as stable-ordered key/value pairs; parsing
    /// the echo back reproduces this config exactly.
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("constants.g_s".into(), format!("{:e}", self.constants.g_s)),
            (
                "constants.mu_b_over_h_ghz_per_t".into(),
                format!("{:e}", self.constants.mu_b_over_h_ghz_per_t),
            ),
            (
                "ground.lambda_so_ghz".into(),
                format!("{:e}", self.ground.lambda_so_ghz),
            ),
            ("ground.f".into(), format!("{:e}", self.ground.f)),
            (
                "ground.delta_f".into(),
                format!("{:e}", self.ground.delta_f),
            ),
            (
                "excited.lambda_so_ghz".into(),
                format!("{:e}", self.excited.lambda_so_ghz),
            ),
            ("excited.f".into(), format!("{:e}", self.excited.f)),
            (
                "excited.delta_f".into(),
                format!("{:e}", self.excited.delta_f),
            ),
            ("orientation.axis".into(), self.orientation.token().into()),
            ("run.seed".into(), self.seed.to_string()),
            ("run.out_dir".into(), self.out_dir.clone()),
        ]
    }
}
