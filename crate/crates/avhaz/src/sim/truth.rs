//! Numerical derivation of the true parameter values: large counterfactual
//! samples with both arms generated from the same covariates, no censoring,
//! Kaplan-Meier per arm, averaged over repeats.

use crate::error::Result;
use crate::models::km_fit;
use crate::rng::{stream, tag};
use crate::sim::generate::{generate_covariates, generate_event_time, EventCoeffs};
use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruthValues {
    pub eta0: f64,
    pub eta1: f64,
    pub dah: f64,
    pub log_rah: f64,
    pub monte_carlo_points: usize,
    pub repeats: usize,
}

impl TruthValues {
    pub fn parameter(&self, which: super::metrics::Parameter) -> f64 {
        use super::metrics::Parameter::*;
        match which {
            Eta0 => self.eta0,
            Eta1 => self.eta1,
            Dah => self.dah,
            LogRah => self.log_rah,
        }
    }
}

/// Truth oracle with explicit event-time coefficients (the default set is
/// the study's generative truth).
pub fn truth_oracle_with(
    scenario: u8,
    tau: f64,
    points: usize,
    repeats: usize,
    seed: u64,
    coeffs: &EventCoeffs,
) -> Result<TruthValues> {
    let mut sum = [0.0f64; 3]; // eta0, eta1, log_rah
    for rep in 0..repeats {
        let mut rng = stream(&[seed, tag::TRUTH, rep as u64]);
        let mut t0 = Vec::with_capacity(points);
        let mut t1 = Vec::with_capacity(points);
        for _ in 0..points {
            let x = generate_covariates(&mut rng);
            // Both counterfactual arms share the covariates.
            t1.push(generate_event_time(&x, 1, &mut rng, scenario, coeffs));
            t0.push(generate_event_time(&x, 0, &mut rng, scenario, coeffs));
        }
        let events = vec![true; points];
        let eta0 = km_fit(&t0, &events, None)?.average_hazard(tau)?;
        let eta1 = km_fit(&t1, &events, None)?.average_hazard(tau)?;
        sum[0] += eta0;
        sum[1] += eta1;
        sum[2] += (eta1 / eta0).ln();
    }
    let r = repeats as f64;
    let eta0 = sum[0] / r;
    let eta1 = sum[1] / r;
    Ok(TruthValues {
        eta0,
        eta1,
        dah: eta1 - eta0,
        log_rah: sum[2] / r,
        monte_carlo_points: points,
        repeats,
    })
}

/// Truth under the study's data-generating process.
pub fn truth_oracle(
    scenario: u8,
    tau: f64,
    points: usize,
    repeats: usize,
    seed: u64,
) -> Result<TruthValues> {
    truth_oracle_with(scenario, tau, points, repeats, seed, &EventCoeffs::default())
}
