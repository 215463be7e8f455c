//! Run configuration: a flat key = value file with sections for
//! classifiers, outputs, and sweep grids; every scalar key can be
//! overridden from the command line. Validation is field-level and the
//! canonicalized configuration is hashed into every output file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sops_core::config::Setting;
use sops_core::dynamics::Model;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub setting: Setting,
    pub model: Model,
    pub l: u32,
    pub n: usize,
    pub q: u8,
    pub lambda: f64,
    /// Required in the connected setting; must be absent in the general
    /// setting, which couples attraction and alignment through lambda.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub steps: u64,
    pub seed: u64,
    #[serde(default = "default_interval")]
    pub sample_interval: u64,
    #[serde(default)]
    pub initial: Initial,
    #[serde(default)]
    pub classifiers: Classifiers,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

fn default_interval() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    #[default]
    Line,
    Spiral,
    UniformRandom,
    FromSnapshot(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Classifiers {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub eps: f64,
}

impl Default for Classifiers {
    fn default() -> Self {
        Self { alpha: 2.0, beta: 0.5, delta: 0.2, eps: 0.1 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render_svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_csv: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SweepGrid {
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub gammas: Vec<f64>,
    pub seeds: Vec<u64>,
}

#[derive(Debug)]
pub struct ValidationError {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        // Reject a gamma key in general-setting configs before serde fills
        // defaults, so the misuse is reported by name.
        let value: toml::Value = text.parse().map_err(|e| format!("config parse error: {e}"))?;
        let cfg: RunConfig =
            value.clone().try_into().map_err(|e| format!("config schema error: {e}"))?;
        if cfg.setting == Setting::General && value.get("gamma").is_some() {
            return Err(
                "config field `gamma`: forbidden in the general setting (lambda couples both interactions)"
                    .into(),
            );
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let err = |field: &'static str, message: String| Err(ValidationError { field, message });
        if self.l < 3 {
            return err("l", format!("lattice side must be >= 3, got {}", self.l));
        }
        if self.q < 2 {
            return err("q", format!("q must be >= 2, got {}", self.q));
        }
        if self.n == 0 || self.n > (self.l * self.l) as usize {
            return err("n", format!("particle count {} out of range", self.n));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return err("lambda", format!("must be finite and positive, got {}", self.lambda));
        }
        match (self.setting, self.gamma) {
            (Setting::Connected, None) => {
                return err("gamma", "required in the connected setting".into());
            }
            (Setting::Connected, Some(g)) if !(g.is_finite() && g > 0.0) => {
                return err("gamma", format!("must be finite and positive, got {g}"));
            }
            (Setting::General, Some(_)) => {
                return err("gamma", "forbidden in the general setting".into());
            }
            _ => {}
        }
        let n_sites = (self.l as u64) * (self.l as u64);
        match self.setting {
            Setting::Connected => {
                let need = ((self.n + 1) * (self.n + 1)) as u64;
                if n_sites < need {
                    return err(
                        "l",
                        format!(
                            "connected setting needs L^2 >= (n+1)^2: {} < {need}",
                            n_sites
                        ),
                    );
                }
            }
            Setting::General => {
                if 3 * self.n as u64 >= n_sites {
                    return err(
                        "n",
                        format!("general setting needs n/L^2 < 1/3, got {}/{n_sites}", self.n),
                    );
                }
            }
        }
        if self.sample_interval == 0 {
            return err("sample_interval", "must be at least 1".into());
        }
        if matches!(self.initial, Initial::UniformRandom) && self.setting == Setting::Connected {
            return err("initial", "uniform_random requires the general setting".into());
        }
        let c = &self.classifiers;
        if !(c.alpha > 1.0) {
            return err("classifiers.alpha", format!("must exceed 1, got {}", c.alpha));
        }
        if !(c.beta > 0.0 && c.beta < 1.0) {
            return err("classifiers.beta", format!("must be in (0,1), got {}", c.beta));
        }
        if !(c.delta > 0.0 && c.delta < 1.0) {
            return err("classifiers.delta", format!("must be in (0,1), got {}", c.delta));
        }
        if !(c.eps > 0.0 && c.eps < 1.0 / self.q as f64) {
            return err("classifiers.eps", format!("must be in (0, 1/q), got {}", c.eps));
        }
        Ok(())
    }

    /// Effective gamma for chain parameters (1.0 placeholder in the general
    /// setting where it is unused).
    pub fn gamma_or_default(&self) -> f64 {
        self.gamma.unwrap_or(1.0)
    }

    /// Hash of the canonical serialized configuration. Output paths do not
    /// participate: two runs of the same physics share a hash regardless of
    /// where their files land.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.outputs = Outputs::default();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        let digest = hasher.finalize();
        hex_prefix(&digest, 16)
    }
}

fn hex_prefix(bytes: &[u8], len: usize) -> String {
    bytes.iter().take(len).map(|b| format!("{b:02x}")).collect()
}

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");
