//! Augmented IPTW: a doubly robust one-step estimator of each arm's
//! cumulative incidence, combining the Cox outcome model with the propensity
//! model and inverse-probability-of-censoring weights from the pooled
//! censoring Kaplan-Meier.

use crate::adjust::{require_two_groups, CurvePair, Diagnostics, ModelSpec};
use crate::cohort::CohortDataset;
use crate::error::{Error, Result};
use crate::models::{censoring_km, cox_fit, logistic_fit};
use crate::Curve;

pub fn aiptw(dataset: &CohortDataset, spec: &ModelSpec) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let n = dataset.len();
    let nf = n as f64;

    // IPCW factor per subject: Δ_i / Ĝ(Y_i−); only events contribute. The
    // reverse-KM left limit stays positive at every in-sample event time
    // (any event at or past a censoring time keeps its risk set nonempty),
    // so the guard below only trips on a curve supplied with a different
    // tie convention.
    let ghat = censoring_km(dataset)?;
    let mut ipcw = vec![0.0f64; n];
    for (i, s) in dataset.subjects().iter().enumerate() {
        if s.event {
            let g = ghat.eval_left(s.observed_time);
            if g <= 0.0 {
                return Err(Error::Domain(format!(
                    "censoring survival vanishes before the event at t={}",
                    s.observed_time
                )));
            }
            ipcw[i] = 1.0 / g;
        }
    }

    let prop = logistic_fit(dataset, &spec.treatment_covariates)?;
    let outcome = cox_fit(dataset, &spec.outcome_covariates, true, None, None)?;

    let base = outcome.baseline(0).expect("unstratified fit has a baseline");
    let grid = base.jump_times().to_vec();
    let lambdas = base.values();

    let mut curves = Vec::with_capacity(2);
    for k in 0..=1u8 {
        // Model term coefficient (1 − I(Z=k)/π̂_k) and the weighted event
        // contributions I(Z=k)·Δ/(π̂_k·Ĝ(Y−)) placed at each subject's time.
        let mut coef = vec![0.0f64; n];
        let mut event_terms: Vec<(f64, f64)> = Vec::new();
        for (i, s) in dataset.subjects().iter().enumerate() {
            let pi_k = if k == 1 {
                prop.fitted_probabilities[i]
            } else {
                1.0 - prop.fitted_probabilities[i]
            };
            if s.group == k {
                coef[i] = 1.0 - 1.0 / pi_k;
                if ipcw[i] > 0.0 {
                    event_terms.push((s.observed_time, ipcw[i] / pi_k));
                }
            } else {
                coef[i] = 1.0;
            }
        }
        event_terms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let risks: Vec<f64> = dataset
            .subjects()
            .iter()
            .map(|s| outcome.risk_score(&s.covariates, k))
            .collect::<Result<_>>()?;

        let mut values = Vec::with_capacity(grid.len());
        let mut ptr = 0usize;
        let mut acc_events = 0.0f64;
        let mut running_max = 0.0f64;
        for (t, l) in grid.iter().zip(lambdas) {
            let mut model_sum = 0.0;
            for i in 0..n {
                model_sum += coef[i] * (1.0 - (-l * risks[i]).exp());
            }
            while ptr < event_terms.len() && event_terms[ptr].0 <= *t {
                acc_events += event_terms[ptr].1;
                ptr += 1;
            }
            let cif = (model_sum + acc_events) / nf;
            // Raw augmented estimates can be locally non-monotone; enforce a
            // valid distribution function before taking survival.
            running_max = running_max.max(cif.clamp(0.0, 1.0));
            values.push(1.0 - running_max);
        }
        curves.push(Curve::new(grid.clone(), values)?);
    }
    let curve1 = curves.pop().unwrap();
    let curve0 = curves.pop().unwrap();
    let mut diagnostics = Diagnostics {
        propensity_clipped: Some(prop.clipped),
        ..Diagnostics::default()
    };
    diagnostics.notes.push(format!(
        "outcome model converged in {} iterations, treatment model in {}",
        outcome.iterations, prop.iterations
    ));
    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics,
    })
}
