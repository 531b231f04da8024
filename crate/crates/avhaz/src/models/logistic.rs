//! Logistic regression of the group indicator on covariates (the propensity
//! model), fitted by iteratively reweighted least squares.

use crate::cohort::CohortDataset;
use crate::error::{Error, Result};
use crate::models::linalg::solve_in_place;

/// Fitted probabilities are clamped into this range before any weighting.
pub const PROPENSITY_CLIP: f64 = 1e-6;

const IRLS_TOL: f64 = 1e-8;
const IRLS_MAX_ITER: usize = 25;

#[derive(Debug, Clone)]
pub struct LogisticFit {
    /// Intercept first, then one coefficient per selected covariate.
    pub coefficients: Vec<f64>,
    /// Per-subject fitted probabilities `P(Z=1|X)`, clipped away from 0 and 1.
    pub fitted_probabilities: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// How many fitted probabilities the clip actually moved.
    pub clipped: usize,
}

/// The logistic link `exp(x) / (1 + exp(x))`, evaluated stably.
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Maximum-likelihood logistic fit of `Z` on the selected covariate columns
/// (an intercept is always included).
pub fn logistic_fit(dataset: &CohortDataset, covariate_subset: &[usize]) -> Result<LogisticFit> {
    let n = dataset.len();
    let arity = dataset.arity();
    for &j in covariate_subset {
        if j >= arity {
            return Err(Error::invalid(format!(
                "covariate index {j} out of range (arity {arity})"
            )));
        }
    }
    let n1 = dataset.group_indices(1).len();
    if n1 == 0 || n1 == n {
        return Err(Error::Degenerate(
            "logistic fit needs both groups present".into(),
        ));
    }

    let p = covariate_subset.len() + 1;
    // Row-major design with leading intercept column.
    let mut design = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for s in dataset.subjects() {
        design.push(1.0);
        for &j in covariate_subset {
            design.push(s.covariates[j]);
        }
        y.push(s.group as f64);
    }

    let mut beta = vec![0.0f64; p];
    let mut pi = vec![0.0f64; n];
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=IRLS_MAX_ITER {
        iterations = iter;
        for i in 0..n {
            let row = &design[i * p..(i + 1) * p];
            let eta: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            if !eta.is_finite() || eta.abs() > 700.0 {
                return Err(Error::NonConvergence {
                    method: "logistic_fit",
                    iterations: iter,
                    detail: "linear predictor diverged (perfect separation?)".into(),
                });
            }
            pi[i] = expit(eta);
        }

        // Newton step: (X' W X) delta = X' (y - pi), W = diag(pi (1 - pi)).
        let mut hess = vec![0.0f64; p * p];
        let mut score = vec![0.0f64; p];
        for i in 0..n {
            let row = &design[i * p..(i + 1) * p];
            let w = (pi[i] * (1.0 - pi[i])).max(1e-10);
            let r = y[i] - pi[i];
            for a in 0..p {
                score[a] += row[a] * r;
                for b in a..p {
                    hess[a * p + b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[a * p + b] = hess[b * p + a];
            }
        }

        let mut delta = score.clone();
        solve_in_place(&mut hess, &mut delta, p).ok_or(Error::Singular("logistic_fit"))?;

        let mut max_step = 0.0f64;
        for a in 0..p {
            beta[a] += delta[a];
            max_step = max_step.max(delta[a].abs());
        }
        if max_step < IRLS_TOL {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::NonConvergence {
            method: "logistic_fit",
            iterations,
            detail: "coefficient changes did not fall below tolerance".into(),
        });
    }

    for i in 0..n {
        let row = &design[i * p..(i + 1) * p];
        let eta: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
        pi[i] = expit(eta);
    }
    let mut clipped = 0;
    for v in pi.iter_mut() {
        let raw = *v;
        *v = raw.clamp(PROPENSITY_CLIP, 1.0 - PROPENSITY_CLIP);
        if *v != raw {
            clipped += 1;
        }
    }

    Ok(LogisticFit {
        coefficients: beta,
        fitted_probabilities: pi,
        converged,
        iterations,
        clipped,
    })
}
