//! Study configuration, read from JSON.

use crate::adjust::Method;
use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize};

/// Censoring pattern: the rate of the exponential draw capped at 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Censoring {
    A,
    B,
}

impl Censoring {
    pub fn rate(&self) -> f64 {
        match self {
            Censoring::A => 0.1,
            Censoring::B => 0.2,
        }
    }
}

fn default_n() -> usize {
    300
}
fn default_replications() -> usize {
    2000
}
fn default_bootstrap_b() -> usize {
    300
}
fn default_tau() -> f64 {
    0.7
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_truth_points() -> usize {
    10_000
}
fn default_truth_repeats() -> usize {
    100
}

/// Accept either a single case number or a list of them.
fn de_cases<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<u8>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(u8),
        Many(Vec<u8>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(c) => vec![c],
        OneOrMany::Many(v) => v,
    })
}

/// One experiment: scenario × censoring × case(s) × methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: u8,
    pub censoring: Censoring,
    #[serde(alias = "cases", deserialize_with = "de_cases")]
    pub case: Vec<u8>,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_bootstrap_b")]
    pub bootstrap_b: usize,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Enter the generative X5² term in the outcome designs instead of the
    /// linear X5 the case model formulas state.
    #[serde(default)]
    pub outcome_x5_squared: bool,
    /// Stabilize IPTW weights.
    #[serde(default)]
    pub stabilized: bool,
    #[serde(default = "default_truth_points")]
    pub truth_points: usize,
    #[serde(default = "default_truth_repeats")]
    pub truth_repeats: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.scenario == 1 || self.scenario == 2) {
            problems.push("scenario must be 1 or 2".to_string());
        }
        if self.case.is_empty() || self.case.iter().any(|c| !(1..=5).contains(c)) {
            problems.push("case must list values in 1..=5".to_string());
        }
        if self.n < 20 {
            problems.push("n must be at least 20".to_string());
        }
        if self.replications < 1 {
            problems.push("replications must be at least 1".to_string());
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            problems.push("tau must be positive".to_string());
        }
        if self.bootstrap_b == 1 {
            problems.push("bootstrap_b must be 0 (off) or at least 2".to_string());
        }
        if self.methods.is_empty() {
            problems.push("methods must be nonempty".to_string());
        }
        if self.truth_points < 1000 {
            problems.push("truth_points must be at least 1000".to_string());
        }
        if self.truth_repeats < 1 {
            problems.push("truth_repeats must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::invalid(problems.join("; ")))
        }
    }

    pub fn from_json(text: &str) -> Result<SimConfig> {
        let cfg: SimConfig =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
