//! Direct standardization (G-formula): fit one Cox model with treatment and
//! confounders, predict every subject's curve under each forced treatment
//! arm, and average.

use crate::adjust::{require_two_groups, CurvePair, Diagnostics, ModelSpec};
use crate::cohort::CohortDataset;
use crate::error::Result;
use crate::models::cox_fit;
use crate::Curve;

pub fn direct_standardization(dataset: &CohortDataset, spec: &ModelSpec) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let fit = cox_fit(dataset, &spec.outcome_covariates, true, None, None)?;
    let base = fit.baseline(0).expect("unstratified fit has a baseline");
    let grid = base.jump_times().to_vec();
    let lambdas = base.values();
    let n = dataset.len() as f64;

    let mut curves = Vec::with_capacity(2);
    for k in 0..=1u8 {
        let risks: Vec<f64> = dataset
            .subjects()
            .iter()
            .map(|s| fit.risk_score(&s.covariates, k))
            .collect::<Result<_>>()?;
        let values: Vec<f64> = lambdas
            .iter()
            .map(|l| {
                let mean: f64 = risks.iter().map(|r| (-l * r).exp()).sum::<f64>() / n;
                mean
            })
            .collect();
        curves.push(Curve::new(grid.clone(), values)?);
    }
    let curve1 = curves.pop().unwrap();
    let curve0 = curves.pop().unwrap();
    let mut diagnostics = Diagnostics::default();
    diagnostics.notes.push(format!(
        "outcome model converged in {} iterations",
        fit.iterations
    ));
    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics,
    })
}
