//! Empirical likelihood: per group, reweight subjects so the balancing
//! covariates' weighted means match the pooled sample means, by maximizing
//! `Σ log p_i` subject to those moment constraints. Solved through the
//! Lagrangian dual with a damped Newton iteration.

use crate::adjust::{require_two_groups, CurvePair, Diagnostics, ModelSpec};
use crate::cohort::{CohortDataset, WeightVector};
use crate::error::{Error, Result};
use crate::models::km_fit;
use crate::models::linalg::solve_in_place;
use crate::Curve;

const EL_MAX_ITER: usize = 50;
const EL_TOL: f64 = 1e-9;

/// Solve for the dual multiplier of one group. `u` holds the centered
/// balancing covariates row-major (`n_k` rows, `q` columns). Returns the
/// per-subject weights `1 / (1 + λᵀu_i)` (which equal `n_k · p_i`) and the
/// iteration count.
fn solve_dual(u: &[f64], nk: usize, q: usize) -> Result<(Vec<f64>, usize)> {
    if q == 0 {
        return Ok((vec![1.0; nk], 0));
    }
    let scale = u.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut lambda = vec![0.0f64; q];
    let mut denom = vec![1.0f64; nk];

    let eval = |lambda: &[f64], denom: &mut [f64]| -> Option<f64> {
        // Dual objective f(λ) = −Σ log(1 + λᵀu_i); None when infeasible.
        let mut f = 0.0;
        for i in 0..nk {
            let d = 1.0
                + u[i * q..(i + 1) * q]
                    .iter()
                    .zip(lambda)
                    .map(|(x, l)| x * l)
                    .sum::<f64>();
            if d <= 1e-12 {
                return None;
            }
            denom[i] = d;
            f -= d.ln();
        }
        Some(f)
    };

    let mut f = eval(&lambda, &mut denom).expect("λ = 0 is always feasible");

    for iter in 1..=EL_MAX_ITER {
        // Gradient of f is −Σ u_i/d_i; Hessian is Σ u_i u_iᵀ / d_i².
        let mut grad = vec![0.0f64; q];
        let mut hess = vec![0.0f64; q * q];
        let mut sum_inv = 0.0f64;
        for i in 0..nk {
            let d = denom[i];
            let row = &u[i * q..(i + 1) * q];
            sum_inv += 1.0 / d;
            for a in 0..q {
                grad[a] -= row[a] / d;
                for b in a..q {
                    hess[a * q + b] += row[a] * row[b] / (d * d);
                }
            }
        }
        for a in 0..q {
            for b in 0..a {
                hess[a * q + b] = hess[b * q + a];
            }
        }

        // Converged when the primal constraints hold: weighted residual
        // zero and the weights summing to one.
        let resid = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())) / nk as f64;
        let mass_gap = (sum_inv / nk as f64 - 1.0).abs();
        if resid < EL_TOL * scale && mass_gap < 1e-8 {
            let weights = denom.iter().map(|d| 1.0 / d).collect();
            return Ok((weights, iter - 1));
        }

        let mut step_dir = grad.iter().map(|g| -g).collect::<Vec<_>>();
        solve_in_place(&mut hess, &mut step_dir, q).ok_or_else(|| Error::NonConvergence {
            method: "empirical_likelihood",
            iterations: iter,
            detail: format!(
                "singular dual Hessian (residual {resid:.3e}); the balance \
                 constraints are likely infeasible"
            ),
        })?;

        // Backtrack into the feasible region and require descent.
        let mut step = 1.0f64;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = lambda
                .iter()
                .zip(&step_dir)
                .map(|(l, d)| l + step * d)
                .collect();
            if let Some(f_new) = eval(&cand, &mut denom) {
                if f_new <= f + 1e-14 {
                    lambda = cand;
                    f = f_new;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            return Err(Error::NonConvergence {
                method: "empirical_likelihood",
                iterations: iter,
                detail: format!(
                    "backtracking stalled at residual {resid:.3e}; the pooled means \
                     may lie outside the group's covariate hull"
                ),
            });
        }
    }

    Err(Error::NonConvergence {
        method: "empirical_likelihood",
        iterations: EL_MAX_ITER,
        detail: "dual Newton did not satisfy the balance constraints; the pooled \
                 means may lie outside the group's covariate hull"
            .into(),
    })
}

pub fn empirical_likelihood(dataset: &CohortDataset, spec: &ModelSpec) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let cols = &spec.treatment_covariates;
    let q = cols.len();
    let n = dataset.len() as f64;

    // Pooled means of the balancing covariates.
    let mut pooled = vec![0.0f64; q];
    for s in dataset.subjects() {
        for (a, &j) in cols.iter().enumerate() {
            pooled[a] += s.covariates[j];
        }
    }
    for v in pooled.iter_mut() {
        *v /= n;
    }

    let mut curves = Vec::with_capacity(2);
    let mut iterations = [0usize; 2];
    let mut weight_range = (f64::INFINITY, 0.0f64);
    for k in 0..=1u8 {
        let idx = dataset.group_indices(k);
        let nk = idx.len();
        let mut u = Vec::with_capacity(nk * q);
        for &i in &idx {
            for (a, &j) in cols.iter().enumerate() {
                u.push(dataset.subjects()[i].covariates[j] - pooled[a]);
            }
        }
        let (w, iters) = solve_dual(&u, nk, q)?;
        iterations[k as usize] = iters;

        let times: Vec<f64> = idx
            .iter()
            .map(|&i| dataset.subjects()[i].observed_time)
            .collect();
        let events: Vec<bool> = idx.iter().map(|&i| dataset.subjects()[i].event).collect();
        let (lo, hi) = w
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        weight_range = (weight_range.0.min(lo), weight_range.1.max(hi));
        let w = WeightVector::new(w)?;
        curves.push(km_fit(&times, &events, Some(&w))?);
    }
    let curve1: Curve = curves.pop().unwrap();
    let curve0: Curve = curves.pop().unwrap();
    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics: Diagnostics {
            weight_range: Some(weight_range),
            el_iterations: Some((iterations[0], iterations[1])),
            ..Diagnostics::default()
        },
    })
}
