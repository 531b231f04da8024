//! Average-hazard contrasts between groups and their bootstrap inference.

use crate::adjust::{estimate, AdjustOptions, CurvePair, Method, ModelSpec};
use crate::cohort::CohortDataset;
use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use rayon::prelude::*;
use serde::Serialize;

/// Normal quantile multiplier for the 0.95 intervals.
const Z_95: f64 = 1.96;

/// Point estimates of the four parameters at one truncation time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AhPoint {
    pub tau: f64,
    pub eta0: f64,
    pub eta1: f64,
    /// Difference in average hazard, `η₁ − η₀`.
    pub dah: f64,
    /// Log of the AH ratio; `None` when a group's AH is not positive.
    pub log_rah: Option<f64>,
}

/// Average hazards, their contrasts and the truncation time, computed from a
/// pair of adjusted curves.
pub fn ah_contrast(pair: &CurvePair, tau: f64) -> Result<AhPoint> {
    let eta0 = pair.curve0.average_hazard(tau)?;
    let eta1 = pair.curve1.average_hazard(tau)?;
    let log_rah = (eta0 > 0.0 && eta1 > 0.0).then(|| (eta1 / eta0).ln());
    Ok(AhPoint {
        tau,
        eta0,
        eta1,
        dah: eta1 - eta0,
        log_rah,
    })
}

/// How the 0.95 interval is built from the replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CiMethod {
    /// Point estimate ± 1.96 · bootstrap SE (log scale for the ratio).
    Normal,
    /// Empirical 2.5 and 97.5 percentiles of the replicates.
    Percentile,
}

#[derive(Debug, Clone, Copy)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub ci: CiMethod,
    /// Resample within groups instead of over the pooled rows.
    pub stratified: bool,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            replicates: 300,
            seed: 0,
            ci: CiMethod::Normal,
            stratified: false,
        }
    }
}

/// Point estimates with bootstrap standard errors and 0.95 intervals.
#[derive(Debug, Clone, Serialize)]
pub struct AhContrast {
    pub tau: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub dah: f64,
    pub log_rah: Option<f64>,
    pub se_eta0: f64,
    pub se_eta1: f64,
    pub se_dah: f64,
    pub se_log_rah: Option<f64>,
    pub ci_eta0: (f64, f64),
    pub ci_eta1: (f64, f64),
    pub ci_dah: (f64, f64),
    /// Interval for the ratio itself (exponentiated from the log scale).
    pub ci_rah: Option<(f64, f64)>,
    pub boot_replicates_used: usize,
    pub boot_failures: usize,
    /// Set when `τ` exceeds the largest observed time in either group.
    pub tau_beyond_followup: bool,
}

fn sample_sd(values: &[f64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / m as f64;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (ss / (m as f64 - 1.0)).sqrt()
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn interval(point: f64, replicates: &[f64], ci: CiMethod) -> (f64, (f64, f64)) {
    let se = sample_sd(replicates);
    match ci {
        CiMethod::Normal => (se, (point - Z_95 * se, point + Z_95 * se)),
        CiMethod::Percentile => {
            let mut sorted = replicates.to_vec();
            sorted.sort_by(|a, b| a.total_cmp(b));
            if sorted.is_empty() {
                (se, (point, point))
            } else {
                (se, (quantile(&sorted, 0.025), quantile(&sorted, 0.975)))
            }
        }
    }
}

/// Nonparametric bootstrap of one estimator: each replicate resamples rows
/// with replacement and re-runs the full pipeline, nuisance fits included.
///
/// Replicate streams derive from `(seed, replicate index)` so the result is
/// identical however the replicates are scheduled. Replicates in which the
/// estimator fails are skipped and counted; more than 10% failures is an
/// error.
pub fn bootstrap_ci(
    dataset: &CohortDataset,
    method: Method,
    spec: &ModelSpec,
    tau: f64,
    opts: &BootstrapOptions,
    adjust: &AdjustOptions,
) -> Result<AhContrast> {
    if opts.replicates < 2 {
        return Err(Error::invalid("bootstrap needs at least 2 replicates"));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::invalid("tau must be positive"));
    }

    let pair = estimate(method, dataset, spec, adjust)?;
    let point = ah_contrast(&pair, tau)?;

    let draws: Vec<Option<AhPoint>> = (0..opts.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(&[opts.seed, tag::BOOT, b as u64]);
            let resampled = if opts.stratified {
                dataset.resample_stratified(&mut rng)
            } else {
                dataset.resample(&mut rng)
            };
            estimate(method, &resampled, spec, adjust)
                .and_then(|p| ah_contrast(&p, tau))
                .ok()
        })
        .collect();

    let used: Vec<AhPoint> = draws.iter().filter_map(|d| *d).collect();
    let failures = opts.replicates - used.len();
    if failures * 10 > opts.replicates {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: opts.replicates,
            detail: format!("bootstrap of {method}"),
        });
    }

    let eta0s: Vec<f64> = used.iter().map(|p| p.eta0).collect();
    let eta1s: Vec<f64> = used.iter().map(|p| p.eta1).collect();
    let dahs: Vec<f64> = used.iter().map(|p| p.dah).collect();
    let log_rahs: Vec<f64> = used.iter().filter_map(|p| p.log_rah).collect();

    let (se_eta0, ci_eta0) = interval(point.eta0, &eta0s, opts.ci);
    let (se_eta1, ci_eta1) = interval(point.eta1, &eta1s, opts.ci);
    let (se_dah, ci_dah) = interval(point.dah, &dahs, opts.ci);
    let (se_log_rah, ci_rah) = match point.log_rah {
        Some(lr) if !log_rahs.is_empty() => {
            let (se, (lo, hi)) = interval(lr, &log_rahs, opts.ci);
            (Some(se), Some((lo.exp(), hi.exp())))
        }
        _ => (None, None),
    };

    let tau_beyond_followup =
        tau > dataset.max_observed_time(0) || tau > dataset.max_observed_time(1);

    Ok(AhContrast {
        tau,
        eta0: point.eta0,
        eta1: point.eta1,
        dah: point.dah,
        log_rah: point.log_rah,
        se_eta0,
        se_eta1,
        se_dah,
        se_log_rah,
        ci_eta0,
        ci_eta1,
        ci_dah,
        ci_rah,
        boot_replicates_used: used.len(),
        boot_failures: failures,
        tau_beyond_followup,
    })
}
