//! The four performance metrics aggregated over replicates.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parameter {
    #[serde(rename = "eta0")]
    Eta0,
    #[serde(rename = "eta1")]
    Eta1,
    #[serde(rename = "dah")]
    Dah,
    #[serde(rename = "log_rah")]
    LogRah,
}

impl Parameter {
    pub const ALL: [Parameter; 4] = [
        Parameter::Eta0,
        Parameter::Eta1,
        Parameter::Dah,
        Parameter::LogRah,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Parameter::Eta0 => "eta0",
            Parameter::Eta1 => "eta1",
            Parameter::Dah => "dah",
            Parameter::LogRah => "log_rah",
        }
    }
}

impl std::fmt::Display for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Aggregated metrics for one (parameter, method, case) cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Metrics {
    pub relative_bias: f64,
    pub rmse: f64,
    /// Fraction of intervals containing the truth; absent without bootstrap.
    pub coverage: Option<f64>,
    /// Median interval length; absent without bootstrap.
    pub median_ci_length: Option<f64>,
}

/// Compute the four metrics from per-replicate estimates against the truth.
/// `ci_bounds`, when present, must align with `estimates`.
pub fn performance_metrics(
    estimates: &[f64],
    ci_bounds: Option<&[(f64, f64)]>,
    truth: f64,
) -> Result<Metrics> {
    if estimates.is_empty() {
        return Err(Error::invalid("no replicate estimates"));
    }
    if truth == 0.0 {
        return Err(Error::Domain(
            "relative bias undefined: true parameter value is zero".into(),
        ));
    }
    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let relative_bias = (mean - truth) / truth;
    let rmse = (estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / m).sqrt();

    let (coverage, median_ci_length) = match ci_bounds {
        Some(bounds) => {
            if bounds.len() != estimates.len() {
                return Err(Error::invalid("ci bounds length mismatch"));
            }
            let covered = bounds
                .iter()
                .filter(|(lo, hi)| *lo <= truth && truth <= *hi)
                .count();
            let mut lengths: Vec<f64> = bounds.iter().map(|(lo, hi)| hi - lo).collect();
            lengths.sort_by(|a, b| a.total_cmp(b));
            let mid = lengths.len() / 2;
            let median = if lengths.len() % 2 == 1 {
                lengths[mid]
            } else {
                0.5 * (lengths[mid - 1] + lengths[mid])
            };
            (Some(covered as f64 / m), Some(median))
        }
        None => (None, None),
    };

    Ok(Metrics {
        relative_bias,
        rmse,
        coverage,
        median_ci_length,
    })
}
