use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::forge::{content_hash, WindowConfig};
use crate::quadrature::{QuadratureConfig, TestFunctionSpec};

/// Which stages a run executes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stages {
    #[serde(default = "yes")]
    pub identities: bool,
    #[serde(default = "default_identities_max_m")]
    pub identities_max_m: u32,
    #[serde(default = "yes")]
    pub moments: bool,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "yes")]
    pub build: bool,
    /// Evaluate `b_n` without the interpolation memo.
    #[serde(default)]
    pub exact: bool,
    #[serde(default = "yes")]
    pub verify: bool,
    #[serde(default = "default_d_max")]
    pub d_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hooley_alpha: Option<f64>,
    #[serde(default = "yes")]
    pub report: bool,
}

fn yes() -> bool {
    true
}

fn default_identities_max_m() -> u32 {
    10
}

fn default_k_max() -> u32 {
    3
}

fn default_d_max() -> u64 {
    1000
}

impl Default for Stages {
    fn default() -> Self {
        Self {
            identities: true,
            identities_max_m: default_identities_max_m(),
            moments: true,
            k_max: default_k_max(),
            build: true,
            exact: false,
            verify: true,
            d_max: default_d_max(),
            hooley_alpha: None,
            report: true,
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub window: WindowConfig,
    pub test_function: TestFunctionSpec,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub stages: Stages,
    /// Extra window starts; each gets `y = x · window.y / window.x`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_levels: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// 0 lets the thread pool decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("parity-out")
}

/// The fields that determine artifact content.
#[derive(Serialize)]
struct HashView<'a> {
    window: &'a WindowConfig,
    test_function: &'a TestFunctionSpec,
    quadrature: &'a QuadratureConfig,
    stages: &'a Stages,
    x_levels: &'a [u64],
    seed: u64,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self, PipelineError> {
        toml::from_str(s).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, PipelineError> {
        toml::to_string(self).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// SHA-256 over everything except the output location and thread count.
    pub fn config_hash(&self) -> String {
        content_hash(&HashView {
            window: &self.window,
            test_function: &self.test_function,
            quadrature: &self.quadrature,
            stages: &self.stages,
            x_levels: &self.x_levels,
            seed: self.seed,
        })
    }

    /// The windows of the run, in increasing `x`.
    pub fn windows(&self) -> Vec<WindowConfig> {
        let mut xs = self.x_levels.clone();
        if xs.is_empty() {
            xs.push(self.window.x);
        }
        xs.sort_unstable();
        xs.dedup();
        xs.into_iter()
            .map(|x| {
                let mut w = self.window.clone();
                if x != self.window.x {
                    w.x = x;
                    w.y = ((x as u128 * self.window.y as u128) / self.window.x.max(1) as u128) as u64;
                }
                w
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for w in self.windows() {
            w.validate()?;
        }
        let t = &self.test_function;
        if t.m != self.window.m || t.delta != self.window.delta {
            return Err(PipelineError::Config(format!(
                "test function (M, delta) = ({}, {}) differs from window ({}, {})",
                t.m, t.delta, self.window.m, self.window.delta
            )));
        }
        t.validate()?;
        Ok(())
    }
}
