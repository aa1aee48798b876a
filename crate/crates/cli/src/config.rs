use std::path::{Path, PathBuf};

use serde::Deserialize;
use sme_core::experiments::NoiseFamily;

use crate::CliError;

/// `bandwidth` in a config file: a number, or the string `"sweep"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum BandwidthChoice {
    Fixed(f64),
    Sweep(SweepTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTag {
    Sweep,
}

impl std::str::FromStr for BandwidthChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("sweep") {
            return Ok(BandwidthChoice::Sweep(SweepTag::Sweep));
        }
        s.parse::<f64>()
            .map(BandwidthChoice::Fixed)
            .map_err(|_| format!("expected a number or `sweep`, got `{s}`"))
    }
}

/// Noise level: one value for every component, or one per component.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Sigma {
    Scalar(f64),
    PerComponent(Vec<f64>),
}

impl Sigma {
    pub fn for_dim(&self, d: usize) -> Result<Vec<f64>, CliError> {
        match self {
            Sigma::Scalar(s) => Ok(vec![*s; d]),
            Sigma::PerComponent(v) if v.len() == d => Ok(v.clone()),
            Sigma::PerComponent(v) => Err(CliError::config(format!(
                "sigma has {} entries but the system has {d} components",
                v.len()
            ))),
        }
    }

    pub fn first(&self) -> f64 {
        match self {
            Sigma::Scalar(s) => *s,
            Sigma::PerComponent(v) => v.first().copied().unwrap_or(0.0),
        }
    }
}

/// One run, as a flat JSON document. Every field is optional; missing
/// values fall back to per-system defaults. Command-line flags override
/// the file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin name or path to a polynomial system JSON file.
    pub system: Option<String>,
    pub theta_true: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub window: Option<(f64, f64)>,
    pub n: Option<usize>,
    pub sigma: Option<Sigma>,
    pub noise: Option<NoiseFamily>,
    pub seed: Option<u64>,
    pub kernel_order: Option<u32>,
    pub bandwidth: Option<BandwidthChoice>,
    /// Candidate bandwidths for `sweep`.
    pub candidates: Option<Vec<f64>>,
    pub grid_step: Option<f64>,
    /// `(c, beta, margin_scale)` of the weight function.
    pub weight: Option<(f64, f64, f64)>,
    pub multistart: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub ols_max_iter: Option<usize>,
    pub ols_step: Option<f64>,
    /// Observation CSV for `estimate`, `compare-ols` and `sweep`.
    pub data: Option<PathBuf>,
    /// Output directory.
    pub out: Option<PathBuf>,
    pub n_values: Option<Vec<usize>>,
    pub replications: Option<usize>,
    pub gamma: Option<f64>,
    pub interval: Option<(f64, f64)>,
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        // serde_json messages already end in "at line L column C".
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }
}
