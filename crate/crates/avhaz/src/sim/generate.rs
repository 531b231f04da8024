//! Data generation for the numerical study: covariates, treatment
//! assignment, event times under two scenarios, censoring patterns, and the
//! per-case model specifications.

use crate::adjust::ModelSpec;
use crate::cohort::{CohortDataset, Subject};
use crate::error::{Error, Result};
use crate::models::expit;
use crate::sim::config::Censoring;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Names of the materialized covariate columns; the squared X5 term used by
/// the outcome designs is an explicit seventh column.
pub const COVARIATE_NAMES: [&str; 7] = ["x1", "x2", "x3", "x4", "x5", "x6", "x5sq"];
pub const X5SQ: usize = 6;

/// Treatment-assignment coefficients: `a = −1.2 + log3·X2 + log1.5·X3 +
/// log1.5·X5 + log2·X6`.
pub fn treatment_linear_predictor(x: &[f64; 6]) -> f64 {
    -1.2 + 3.0f64.ln() * x[1] + 1.5f64.ln() * x[2] + 1.5f64.ln() * x[4] + 2.0f64.ln() * x[5]
}

/// Event-time coefficients on the log-hazard scale.
#[derive(Debug, Clone, Copy)]
pub struct EventCoeffs {
    pub x1: f64,
    pub x2: f64,
    pub x4: f64,
    pub x5sq: f64,
    pub z: f64,
}

impl Default for EventCoeffs {
    fn default() -> Self {
        EventCoeffs {
            x1: 1.8f64.ln(),
            x2: 1.8f64.ln(),
            x4: 1.8f64.ln(),
            x5sq: 2.3f64.ln(),
            z: -1.0,
        }
    }
}

impl EventCoeffs {
    pub fn linear_predictor(&self, x: &[f64; 6], z: u8) -> f64 {
        self.x1 * x[0] + self.x2 * x[1] + self.x4 * x[3] + self.x5sq * x[4] * x[4]
            + self.z * z as f64
    }
}

/// Draw one covariate vector `X1..X6`. X3 is drawn before X2 and X6 before
/// X5, matching the dependency structure.
pub fn generate_covariates<R: Rng + ?Sized>(rng: &mut R) -> [f64; 6] {
    let x1 = f64::from(rng.random::<f64>() < 0.5);
    let x3 = f64::from(rng.random::<f64>() < 0.5);
    let x2 = f64::from(rng.random::<f64>() < 0.3 + 0.1 * x3);
    let x4: f64 = StandardNormal.sample(rng);
    let x6: f64 = StandardNormal.sample(rng);
    let noise: f64 = StandardNormal.sample(rng);
    let x5 = 0.3 + 0.1 * x6 + noise;
    [x1, x2, x3, x4, x5, x6]
}

/// Draw the treatment indicator given covariates.
pub fn generate_treatment<R: Rng + ?Sized>(x: &[f64; 6], rng: &mut R) -> u8 {
    let p = expit(treatment_linear_predictor(x));
    u8::from(rng.random::<f64>() < p)
}

/// Event time from an explicit uniform draw: Scenario 2 is conditionally
/// exponential with rate `exp(lp)`, Scenario 1 takes its square root
/// (Weibull with shape 2).
pub fn event_time_from_uniform(
    x: &[f64; 6],
    z: u8,
    u: f64,
    scenario: u8,
    coeffs: &EventCoeffs,
) -> f64 {
    let base = -u.ln() / coeffs.linear_predictor(x, z).exp();
    match scenario {
        1 => base.sqrt(),
        _ => base,
    }
}

pub fn generate_event_time<R: Rng + ?Sized>(
    x: &[f64; 6],
    z: u8,
    rng: &mut R,
    scenario: u8,
    coeffs: &EventCoeffs,
) -> f64 {
    // Uniform on (0, 1); avoid ln(0).
    let mut u = rng.random::<f64>();
    while u <= 0.0 {
        u = rng.random::<f64>();
    }
    event_time_from_uniform(x, z, u, scenario, coeffs)
}

/// Censoring time: exponential with the pattern's rate, administratively
/// capped at 1.0.
pub fn generate_censoring<R: Rng + ?Sized>(rng: &mut R, pattern: Censoring) -> f64 {
    let mut u = rng.random::<f64>();
    while u <= 0.0 {
        u = rng.random::<f64>();
    }
    let c_star = -u.ln() / pattern.rate();
    c_star.min(1.0)
}

/// Generate one observable cohort of size `n`.
pub fn generate_cohort<R: Rng + ?Sized>(
    scenario: u8,
    censoring: Censoring,
    n: usize,
    rng: &mut R,
) -> CohortDataset {
    let coeffs = EventCoeffs::default();
    let mut subjects = Vec::with_capacity(n);
    for _ in 0..n {
        let x = generate_covariates(rng);
        let z = generate_treatment(&x, rng);
        let t = generate_event_time(&x, z, rng, scenario, &coeffs);
        let c = generate_censoring(rng, censoring);
        let covs = vec![x[0], x[1], x[2], x[3], x[4], x[5], x[4] * x[4]];
        subjects.push(
            Subject::new(t.min(c), t <= c, z, covs).expect("generated rows are valid"),
        );
    }
    CohortDataset::new(
        subjects,
        COVARIATE_NAMES.iter().map(|s| s.to_string()).collect(),
    )
    .expect("generated cohort is valid")
}

/// The per-case outcome/treatment designs. Covariate indices refer to the
/// materialized columns: 0..=5 for X1..X6 and 6 for X5².
///
/// The outcome designs enter X5 linearly by default, as the case model
/// formulas state; `x5_squared` switches to the generative X5² term.
pub fn case_model_spec(case: u8, x5_squared: bool) -> Result<ModelSpec> {
    let x5t = if x5_squared { X5SQ } else { 4 };
    let spec = match case {
        1 => ModelSpec {
            outcome_covariates: vec![0, 1, 3, x5t],
            treatment_covariates: vec![1, 2, 4, 5],
        },
        2 => ModelSpec {
            outcome_covariates: vec![0, 1, 2, 3, x5t, 5],
            treatment_covariates: vec![0, 1, 2, 3, 4, 5],
        },
        3 => ModelSpec {
            outcome_covariates: vec![0, 3, x5t],
            treatment_covariates: vec![1, 2, 4, 5],
        },
        4 => ModelSpec {
            outcome_covariates: vec![0, 1, 3, x5t],
            treatment_covariates: vec![2, 4, 5],
        },
        5 => ModelSpec {
            outcome_covariates: vec![0, 3, x5t],
            treatment_covariates: vec![2, 4, 5],
        },
        other => return Err(Error::invalid(format!("case must be 1..=5, got {other}"))),
    };
    Ok(spec)
}

/// One dataset plus the model spec of the requested case.
pub fn generate_dataset<R: Rng + ?Sized>(
    scenario: u8,
    censoring: Censoring,
    case: u8,
    n: usize,
    outcome_x5_squared: bool,
    rng: &mut R,
) -> Result<(CohortDataset, ModelSpec)> {
    let spec = case_model_spec(case, outcome_x5_squared)?;
    Ok((generate_cohort(scenario, censoring, n, rng), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn treatment_probability_at_zero_covariates() {
        let p = expit(treatment_linear_predictor(&[0.0; 6]));
        assert!((p - 0.23147521650098238).abs() < 1e-12);
    }

    #[test]
    fn treatment_probability_with_x2() {
        let mut x = [0.0; 6];
        x[1] = 1.0;
        let p = expit(treatment_linear_predictor(&x));
        // a = -1.2 + log 3, so p = expit(-0.101388...) ≈ 0.475
        let expect = expit(-1.2 + 3.0f64.ln());
        assert!((p - expect).abs() < 1e-15);
        assert!((p - 0.4747).abs() < 1e-4);
    }

    #[test]
    fn covariate_moments_match_design() {
        let mut rng = stream(&[99]);
        let n = 1_000_000usize;
        let mut sum_x2 = 0.0;
        let mut sum_x2_given_x3 = 0.0;
        let mut n_x3 = 0.0;
        let mut sum_x5 = 0.0;
        let mut sum_x5x6 = 0.0;
        let mut sum_x6 = 0.0;
        for _ in 0..n {
            let x = generate_covariates(&mut rng);
            sum_x2 += x[1];
            if x[2] == 1.0 {
                sum_x2_given_x3 += x[1];
                n_x3 += 1.0;
            }
            sum_x5 += x[4];
            sum_x6 += x[5];
            sum_x5x6 += x[4] * x[5];
        }
        let nf = n as f64;
        // P(X2=1) = 0.3 + 0.1 * 0.5 = 0.35 marginally; 0.4 given X3 = 1;
        // 0.3 given X3 = 0.
        assert!((sum_x2 / nf - 0.35).abs() < 0.002);
        assert!((sum_x2_given_x3 / n_x3 - 0.4).abs() < 0.003);
        let x2_given_not_x3 = (sum_x2 - sum_x2_given_x3) / (nf - n_x3);
        assert!((x2_given_not_x3 - 0.3).abs() < 0.003);
        // E[X5] = 0.3 and cov(X5, X6) = 0.1 * var(X6) = 0.1.
        assert!((sum_x5 / nf - 0.3).abs() < 0.01);
        let cov = sum_x5x6 / nf - (sum_x5 / nf) * (sum_x6 / nf);
        assert!((cov - 0.1).abs() < 0.01, "cov(x5,x6) = {cov}");
    }

    #[test]
    fn scenario_one_is_sqrt_of_scenario_two() {
        let coeffs = EventCoeffs::default();
        let x = [1.0, 0.0, 1.0, 0.4, -0.3, 1.1];
        for u in [0.1, 0.5, 0.9] {
            let t2 = event_time_from_uniform(&x, 1, u, 2, &coeffs);
            let t1 = event_time_from_uniform(&x, 1, u, 1, &coeffs);
            assert!((t1 - t2.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_linear_predictor_gives_unit_exponential() {
        let coeffs = EventCoeffs {
            x1: 0.0,
            x2: 0.0,
            x4: 0.0,
            x5sq: 0.0,
            z: -1.0,
        };
        let x = [1.0, 1.0, 1.0, 2.0, 3.0, -1.0];
        let u = 0.37;
        let t = event_time_from_uniform(&x, 0, u, 2, &coeffs);
        assert!((t - (-u.ln())).abs() < 1e-15);
    }

    #[test]
    fn conditional_event_rate_matches_exp_lp() {
        // Scenario 2 given (X, Z) is exponential with rate exp(lp):
        // the sample mean of T approaches 1/exp(lp).
        let coeffs = EventCoeffs::default();
        let x = [1.0, 0.0, 1.0, -0.5, 0.8, 0.2];
        let mut rng = stream(&[5]);
        let m = 100_000;
        let mean: f64 = (0..m)
            .map(|_| generate_event_time(&x, 1, &mut rng, 2, &coeffs))
            .sum::<f64>()
            / m as f64;
        let rate = coeffs.linear_predictor(&x, 1).exp();
        assert!(
            (mean * rate - 1.0).abs() < 0.02,
            "mean*rate = {}",
            mean * rate
        );
    }

    #[test]
    fn censoring_cap_probabilities() {
        let mut rng = stream(&[17]);
        let n = 200_000;
        for (pattern, p_cap) in [(Censoring::A, (-0.1f64).exp()), (Censoring::B, (-0.2f64).exp())]
        {
            let capped = (0..n)
                .filter(|_| generate_censoring(&mut rng, pattern) == 1.0)
                .count();
            assert!(
                (capped as f64 / n as f64 - p_cap).abs() < 0.005,
                "{pattern:?}"
            );
        }
    }

    #[test]
    fn observable_times_are_capped() {
        let mut rng = stream(&[23]);
        let ds = generate_cohort(1, Censoring::A, 500, &mut rng);
        assert!(ds.subjects().iter().all(|s| s.observed_time <= 1.0));
    }

    #[test]
    fn generate_dataset_bundles_cohort_and_case_spec() {
        let mut rng = stream(&[29]);
        let (ds, spec) = generate_dataset(2, Censoring::B, 4, 50, false, &mut rng).unwrap();
        assert_eq!(ds.len(), 50);
        assert_eq!(ds.arity(), 7);
        assert_eq!(spec, case_model_spec(4, false).unwrap());
        assert!(generate_dataset(1, Censoring::A, 9, 50, false, &mut rng).is_err());
    }

    #[test]
    fn case_specs_match_designs() {
        let s1 = case_model_spec(1, false).unwrap();
        assert_eq!(s1.outcome_covariates, vec![0, 1, 3, 4]);
        assert_eq!(s1.treatment_covariates, vec![1, 2, 4, 5]);
        let s5 = case_model_spec(5, false).unwrap();
        assert_eq!(s5.outcome_covariates, vec![0, 3, 4]);
        assert_eq!(s5.treatment_covariates, vec![2, 4, 5]);
        let s1sq = case_model_spec(1, true).unwrap();
        assert_eq!(s1sq.outcome_covariates, vec![0, 1, 3, 6]);
        assert!(case_model_spec(0, false).is_err());
    }
}
