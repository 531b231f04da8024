//! Inverse probability of treatment weighting: the weighted Kaplan-Meier
//! variant and the weighted cumulative-hazard (stratified zero-parameter
//! Cox) variant.

use crate::adjust::{require_two_groups, AdjustOptions, CurvePair, Diagnostics, ModelSpec};
use crate::cohort::{CohortDataset, WeightVector};
use crate::error::Result;
use crate::models::{cox_fit, km_fit, logistic_fit};

/// ATE weights from the fitted propensity score: `Z/π̂ + (1−Z)/(1−π̂)`,
/// optionally stabilized by the marginal group prevalences.
pub fn iptw_weights(
    dataset: &CohortDataset,
    spec: &ModelSpec,
    stabilized: bool,
) -> Result<(WeightVector, Diagnostics)> {
    let fit = logistic_fit(dataset, &spec.treatment_covariates)?;
    let n = dataset.len();
    let p_treated = dataset.group_indices(1).len() as f64 / n as f64;
    let mut weights = Vec::with_capacity(n);
    for (s, &pi) in dataset.subjects().iter().zip(&fit.fitted_probabilities) {
        let w = if s.group == 1 { 1.0 / pi } else { 1.0 / (1.0 - pi) };
        let w = if stabilized {
            if s.group == 1 {
                w * p_treated
            } else {
                w * (1.0 - p_treated)
            }
        } else {
            w
        };
        weights.push(w);
    }
    let weights = WeightVector::new(weights)?;
    let diagnostics = Diagnostics {
        weight_range: Some(weights.min_max()),
        propensity_clipped: Some(fit.clipped),
        ..Diagnostics::default()
    };
    Ok((weights, diagnostics))
}

/// Weighted Kaplan-Meier per group under IPTW weights.
pub fn iptw_km(
    dataset: &CohortDataset,
    spec: &ModelSpec,
    opts: &AdjustOptions,
) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let (weights, diagnostics) = iptw_weights(dataset, spec, opts.stabilized)?;
    let mut curves = Vec::with_capacity(2);
    for k in 0..=1u8 {
        let idx = dataset.group_indices(k);
        let times: Vec<f64> = idx
            .iter()
            .map(|&i| dataset.subjects()[i].observed_time)
            .collect();
        let events: Vec<bool> = idx.iter().map(|&i| dataset.subjects()[i].event).collect();
        let w = WeightVector::new(idx.iter().map(|&i| weights.as_slice()[i]).collect())?;
        curves.push(km_fit(&times, &events, Some(&w))?);
    }
    let curve1 = curves.pop().unwrap();
    let curve0 = curves.pop().unwrap();
    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics,
    })
}

/// IPTW survival via the cumulative hazard: a zero-parameter Cox model
/// stratified by group with IPTW weights, exponentiated per stratum.
pub fn iptw_ch(
    dataset: &CohortDataset,
    spec: &ModelSpec,
    opts: &AdjustOptions,
) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let (weights, diagnostics) = iptw_weights(dataset, spec, opts.stabilized)?;
    let strata: Vec<u8> = dataset.subjects().iter().map(|s| s.group).collect();
    let fit = cox_fit(dataset, &[], false, Some(&weights), Some(&strata))?;
    let curve0 = fit
        .baseline(0)
        .expect("stratified fit has a group-0 baseline")
        .survival();
    let curve1 = fit
        .baseline(1)
        .expect("stratified fit has a group-1 baseline")
        .survival();
    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics,
    })
}
