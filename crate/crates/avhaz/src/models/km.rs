//! Product-limit (Kaplan-Meier) and Nelson-Aalen estimators, weighted and
//! unweighted.

use crate::cohort::{CohortDataset, WeightVector};
use crate::curve::CumulativeHazard;
use crate::error::{Error, Result};
use crate::Curve;

/// Shared sweep over distinct times: at each distinct observed time,
/// yields `(time, weighted events, weighted number at risk)`.
fn risk_sweep(
    times: &[f64],
    events: &[bool],
    weights: Option<&WeightVector>,
) -> Result<Vec<(f64, f64, f64)>> {
    let n = times.len();
    if n == 0 {
        return Err(Error::invalid("empty input"));
    }
    if events.len() != n {
        return Err(Error::invalid("times/events length mismatch"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("times must be finite and >= 0"));
    }
    let w: &[f64] = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::invalid("weights length mismatch"));
            }
            w.as_slice()
        }
        None => &[],
    };
    let wt = |i: usize| if w.is_empty() { 1.0 } else { w[i] };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));

    let mut at_risk: f64 = (0..n).map(wt).sum();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let t = times[order[i]];
        let mut d = 0.0;
        let mut group_w = 0.0;
        while i < n && times[order[i]] == t {
            let idx = order[i];
            group_w += wt(idx);
            if events[idx] {
                d += wt(idx);
            }
            i += 1;
        }
        out.push((t, d, at_risk));
        at_risk -= group_w;
    }
    Ok(out)
}

/// Weighted product-limit estimator. With `weights = None` all weights are 1.
///
/// `S(t) = Π_{t_j <= t} (1 − d_j / n_j)` with `d_j` the weighted events at
/// `t_j` and `n_j` the weighted size of the risk set `{Y_i >= t_j}`.
pub fn km_fit(
    times: &[f64],
    events: &[bool],
    weights: Option<&WeightVector>,
) -> Result<Curve> {
    let sweep = risk_sweep(times, events, weights)?;
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut surv = 1.0f64;
    for (t, d, at_risk) in sweep {
        if d <= 0.0 {
            continue;
        }
        // Weighted sums can drift by an ulp; keep the factor in [0, 1].
        let factor = ((at_risk - d) / at_risk).clamp(0.0, 1.0);
        surv *= factor;
        jump_times.push(t);
        values.push(surv);
    }
    Curve::new(jump_times, values)
}

/// Weighted Nelson-Aalen cumulative hazard: `Λ(t) = Σ_{t_j <= t} d_j / n_j`.
pub fn nelson_aalen(
    times: &[f64],
    events: &[bool],
    weights: Option<&WeightVector>,
) -> Result<CumulativeHazard<f64>> {
    let sweep = risk_sweep(times, events, weights)?;
    let mut jump_times = Vec::new();
    let mut values = Vec::new();
    let mut cum = 0.0f64;
    for (t, d, at_risk) in sweep {
        if d <= 0.0 {
            continue;
        }
        cum += d / at_risk;
        jump_times.push(t);
        values.push(cum);
    }
    CumulativeHazard::new(jump_times, values)
}

/// Kaplan-Meier estimate of the censoring distribution `G(t)`: the roles of
/// events and censorings are swapped on the pooled sample.
pub fn censoring_km(dataset: &CohortDataset) -> Result<Curve> {
    let times: Vec<f64> = dataset.subjects().iter().map(|s| s.observed_time).collect();
    let cens: Vec<bool> = dataset.subjects().iter().map(|s| !s.event).collect();
    km_fit(&times, &cens, None)
}
