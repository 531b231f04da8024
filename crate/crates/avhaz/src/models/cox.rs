//! Cox proportional hazards regression: Newton-Raphson on the (optionally
//! weighted, optionally stratified) log partial likelihood, with a Breslow
//! baseline cumulative hazard per stratum.
//!
//! Tie handling follows the crate convention: Efron for unweighted fits,
//! Breslow for weighted fits.

use crate::cohort::{CohortDataset, WeightVector};
use crate::curve::CumulativeHazard;
use crate::error::{Error, Result};
use crate::models::linalg::solve_in_place;
use crate::Curve;

const NEWTON_TOL: f64 = 1e-9;
const NEWTON_MAX_ITER: usize = 20;
const MAX_STEP_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ties {
    Efron,
    Breslow,
}

/// A fitted Cox model together with everything needed to predict per-subject
/// survival curves.
#[derive(Debug, Clone)]
pub struct CoxFit {
    /// Coefficients in design order: treatment first (when included), then
    /// the selected covariates.
    pub coefficients: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub log_partial_likelihood: f64,
    include_treatment: bool,
    covariate_subset: Vec<usize>,
    arity: usize,
    /// Column means subtracted from the design before fitting.
    means: Vec<f64>,
    /// Breslow baseline cumulative hazard per stratum label.
    baselines: Vec<(u8, CumulativeHazard<f64>)>,
    stratified: bool,
}

/// One stratum's data, sorted by descending time.
struct Stratum {
    times: Vec<f64>,
    events: Vec<bool>,
    weights: Vec<f64>,
    design: Vec<f64>, // row-major, p columns, centered
}

struct Engine {
    strata: Vec<Stratum>,
    p: usize,
    ties: Ties,
}

impl Engine {
    /// Log partial likelihood, score vector and observed information at `beta`.
    /// Returns `None` when the linear predictor overflows.
    fn eval(&self, beta: &[f64], with_derivs: bool) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let p = self.p;
        let mut ll = 0.0f64;
        let mut grad = vec![0.0f64; p];
        let mut info = vec![0.0f64; p * p];

        for st in &self.strata {
            let n = st.times.len();
            let mut eta = vec![0.0f64; n];
            let mut risk = vec![0.0f64; n];
            for i in 0..n {
                let row = &st.design[i * p..(i + 1) * p];
                let e: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
                if !e.is_finite() || e.abs() > 700.0 {
                    return None;
                }
                eta[i] = e;
                risk[i] = e.exp();
            }

            // Sweep descending time: s0/s1/s2 accumulate the risk set sums.
            let mut s0 = 0.0f64;
            let mut s1 = vec![0.0f64; p];
            let mut s2 = vec![0.0f64; p * p];
            let mut i = 0;
            while i < n {
                let t = st.times[i];
                let group_start = i;
                while i < n && st.times[i] == t {
                    let w = st.weights[i] * risk[i];
                    s0 += w;
                    let row = &st.design[i * p..(i + 1) * p];
                    for a in 0..p {
                        s1[a] += w * row[a];
                        for b in a..p {
                            s2[a * p + b] += w * row[a] * row[b];
                        }
                    }
                    i += 1;
                }

                // Event contributions within this tie group.
                let mut m = 0usize; // unweighted event count (Efron)
                let mut d0 = 0.0f64; // weighted event total
                let mut eta_sum = 0.0f64;
                let mut x_sum = vec![0.0f64; p];
                let mut e0 = 0.0f64;
                let mut e1 = vec![0.0f64; p];
                let mut e2 = vec![0.0f64; p * p];
                for j in group_start..i {
                    if !st.events[j] {
                        continue;
                    }
                    let w = st.weights[j];
                    m += 1;
                    d0 += w;
                    eta_sum += w * eta[j];
                    let row = &st.design[j * p..(j + 1) * p];
                    let wr = w * risk[j];
                    e0 += wr;
                    for a in 0..p {
                        x_sum[a] += w * row[a];
                        e1[a] += wr * row[a];
                        for b in a..p {
                            e2[a * p + b] += wr * row[a] * row[b];
                        }
                    }
                }
                if m == 0 {
                    continue;
                }

                ll += eta_sum;
                match self.ties {
                    Ties::Breslow => {
                        ll -= d0 * s0.ln();
                        if with_derivs {
                            for a in 0..p {
                                let mu_a = s1[a] / s0;
                                grad[a] += x_sum[a] - d0 * mu_a;
                                for b in a..p {
                                    info[a * p + b] +=
                                        d0 * (s2[a * p + b] / s0 - mu_a * s1[b] / s0);
                                }
                            }
                        }
                    }
                    Ties::Efron => {
                        // Unweighted fits only; weights are all 1 here.
                        let mf = m as f64;
                        for r in 0..m {
                            let frac = r as f64 / mf;
                            let d0r = s0 - frac * e0;
                            ll -= d0r.ln();
                            if with_derivs {
                                for a in 0..p {
                                    let mu_a = (s1[a] - frac * e1[a]) / d0r;
                                    grad[a] -= mu_a;
                                    for b in a..p {
                                        let mu_b = (s1[b] - frac * e1[b]) / d0r;
                                        info[a * p + b] +=
                                            (s2[a * p + b] - frac * e2[a * p + b]) / d0r
                                                - mu_a * mu_b;
                                    }
                                }
                            }
                        }
                        if with_derivs {
                            for a in 0..p {
                                grad[a] += x_sum[a];
                            }
                        }
                    }
                }
            }
        }

        if with_derivs {
            for a in 0..p {
                for b in 0..a {
                    info[a * p + b] = info[b * p + a];
                }
            }
        }
        Some((ll, grad, info))
    }

    /// Breslow baseline increments per stratum at the converged `beta`.
    fn baselines(&self, beta: &[f64]) -> Vec<CumulativeHazard<f64>> {
        let p = self.p;
        let mut out = Vec::with_capacity(self.strata.len());
        for st in &self.strata {
            let n = st.times.len();
            let mut s0 = 0.0f64;
            let mut steps: Vec<(f64, f64)> = Vec::new(); // (time, increment), descending
            let mut i = 0;
            while i < n {
                let t = st.times[i];
                let mut d0 = 0.0f64;
                while i < n && st.times[i] == t {
                    let row = &st.design[i * p..(i + 1) * p];
                    let e: f64 = row.iter().zip(beta).map(|(x, b)| x * b).sum();
                    s0 += st.weights[i] * e.exp();
                    if st.events[i] {
                        d0 += st.weights[i];
                    }
                    i += 1;
                }
                if d0 > 0.0 {
                    steps.push((t, d0 / s0));
                }
            }
            steps.reverse();
            let mut cum = 0.0;
            let (times, values): (Vec<f64>, Vec<f64>) = steps
                .into_iter()
                .map(|(t, inc)| {
                    cum += inc;
                    (t, cum)
                })
                .unzip();
            out.push(
                CumulativeHazard::new(times, values)
                    .expect("baseline increments are nonnegative at event times"),
            );
        }
        out
    }
}

/// Fit a Cox model.
///
/// The design holds the treatment indicator first (when `include_treatment`)
/// followed by the selected covariate columns. `strata`, when given, carries
/// one label per subject and the partial likelihood is computed within
/// stratum; the empty design is allowed only for stratified fits, where the
/// baseline reduces to the weighted Nelson-Aalen per stratum.
pub fn cox_fit(
    dataset: &CohortDataset,
    covariate_subset: &[usize],
    include_treatment: bool,
    weights: Option<&WeightVector>,
    strata: Option<&[u8]>,
) -> Result<CoxFit> {
    let n = dataset.len();
    let arity = dataset.arity();
    for &j in covariate_subset {
        if j >= arity {
            return Err(Error::invalid(format!(
                "covariate index {j} out of range (arity {arity})"
            )));
        }
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::invalid("weights length mismatch"));
        }
    }
    if let Some(s) = strata {
        if s.len() != n {
            return Err(Error::invalid("strata length mismatch"));
        }
    }
    if !dataset.subjects().iter().any(|s| s.event) {
        return Err(Error::Degenerate("cox fit needs at least one event".into()));
    }
    let p = covariate_subset.len() + usize::from(include_treatment);
    if p == 0 && strata.is_none() {
        return Err(Error::invalid(
            "empty design requires strata (the zero-parameter stratified path)",
        ));
    }

    let ties = if weights.is_some() {
        Ties::Breslow
    } else {
        Ties::Efron
    };

    // Assemble and center the design.
    let mut rows = vec![0.0f64; n * p];
    let mut means = vec![0.0f64; p];
    for (i, s) in dataset.subjects().iter().enumerate() {
        let mut c = 0;
        if include_treatment {
            rows[i * p + c] = s.group as f64;
            c += 1;
        }
        for &j in covariate_subset {
            rows[i * p + c] = s.covariates[j];
            c += 1;
        }
    }
    for a in 0..p {
        let mut m = 0.0;
        for i in 0..n {
            m += rows[i * p + a];
        }
        m /= n as f64;
        means[a] = m;
        for i in 0..n {
            rows[i * p + a] -= m;
        }
    }

    // Split into strata and sort each by descending time.
    let mut labels: Vec<u8> = match strata {
        Some(s) => {
            let mut u: Vec<u8> = s.to_vec();
            u.sort_unstable();
            u.dedup();
            u
        }
        None => vec![0],
    };
    labels.sort_unstable();
    let stratum_of = |i: usize| -> u8 {
        match strata {
            Some(s) => s[i],
            None => 0,
        }
    };

    let mut strata_data = Vec::with_capacity(labels.len());
    for &lab in &labels {
        let mut idx: Vec<usize> = (0..n).filter(|&i| stratum_of(i) == lab).collect();
        idx.sort_by(|&a, &b| {
            dataset.subjects()[b]
                .observed_time
                .total_cmp(&dataset.subjects()[a].observed_time)
        });
        let times = idx
            .iter()
            .map(|&i| dataset.subjects()[i].observed_time)
            .collect();
        let events = idx.iter().map(|&i| dataset.subjects()[i].event).collect();
        let w = idx
            .iter()
            .map(|&i| weights.map_or(1.0, |w| w.as_slice()[i]))
            .collect();
        let mut design = Vec::with_capacity(idx.len() * p);
        for &i in &idx {
            design.extend_from_slice(&rows[i * p..(i + 1) * p]);
        }
        strata_data.push(Stratum {
            times,
            events,
            weights: w,
            design,
        });
    }

    let engine = Engine {
        strata: strata_data,
        p,
        ties,
    };

    let mut beta = vec![0.0f64; p];
    let mut iterations = 0;
    let mut converged = p == 0;
    let mut ll = 0.0f64;

    if p > 0 {
        let (ll0, mut grad, mut info) = engine
            .eval(&beta, true)
            .expect("linear predictor is zero at beta = 0");
        ll = ll0;

        for iter in 1..=NEWTON_MAX_ITER {
            iterations = iter;
            let mut delta = grad.clone();
            let mut info_copy = info.clone();
            solve_in_place(&mut info_copy, &mut delta, p).ok_or(Error::Singular("cox_fit"))?;

            // Step halving until the likelihood does not decrease.
            let mut step = 1.0f64;
            let mut accepted = None;
            for _ in 0..=MAX_STEP_HALVINGS {
                let cand: Vec<f64> = beta
                    .iter()
                    .zip(&delta)
                    .map(|(b, d)| b + step * d)
                    .collect();
                if let Some((ll_new, _, _)) = engine.eval(&cand, false) {
                    if ll_new >= ll - 1e-13 {
                        accepted = Some((cand, ll_new));
                        break;
                    }
                }
                step *= 0.5;
            }
            let (cand, ll_new) = accepted.ok_or(Error::NonConvergence {
                method: "cox_fit",
                iterations: iter,
                detail: "step halving failed to improve the partial likelihood \
                         (monotone likelihood?)"
                    .into(),
            })?;

            let delta_ll = (ll_new - ll).abs();
            beta = cand;
            ll = ll_new;
            if delta_ll < NEWTON_TOL {
                converged = true;
                break;
            }
            let (_, g, h) = engine.eval(&beta, true).ok_or(Error::NonConvergence {
                method: "cox_fit",
                iterations: iter,
                detail: "linear predictor diverged".into(),
            })?;
            grad = g;
            info = h;
        }

        if !converged {
            return Err(Error::NonConvergence {
                method: "cox_fit",
                iterations,
                detail: "partial likelihood change did not fall below tolerance".into(),
            });
        }
    }

    let baselines = engine
        .baselines(&beta)
        .into_iter()
        .zip(labels.iter())
        .map(|(bh, &lab)| (lab, bh))
        .collect();

    Ok(CoxFit {
        coefficients: beta,
        converged,
        iterations,
        log_partial_likelihood: ll,
        include_treatment,
        covariate_subset: covariate_subset.to_vec(),
        arity,
        means,
        baselines,
        stratified: strata.is_some(),
    })
}

impl CoxFit {
    /// `exp(βᵀ(v − v̄))` for a subject with the given covariates and group.
    pub fn risk_score(&self, covariates: &[f64], group: u8) -> Result<f64> {
        if covariates.len() != self.arity {
            return Err(Error::invalid(format!(
                "covariate arity mismatch: got {}, fit expects {}",
                covariates.len(),
                self.arity
            )));
        }
        let mut eta = 0.0;
        let mut c = 0;
        if self.include_treatment {
            eta += self.coefficients[c] * (group as f64 - self.means[c]);
            c += 1;
        }
        for &j in &self.covariate_subset {
            eta += self.coefficients[c] * (covariates[j] - self.means[c]);
            c += 1;
        }
        Ok(eta.exp())
    }

    /// Baseline cumulative hazard for a stratum label (the single baseline
    /// for unstratified fits).
    pub fn baseline(&self, stratum: u8) -> Option<&CumulativeHazard<f64>> {
        if !self.stratified {
            return self.baselines.first().map(|(_, b)| b);
        }
        self.baselines
            .iter()
            .find(|(lab, _)| *lab == stratum)
            .map(|(_, b)| b)
    }

    /// Predicted survival curve `exp(−Λ̂₀(t) · exp(βᵀv))` for one subject.
    pub fn predict_survival(&self, covariates: &[f64], group: u8) -> Result<Curve> {
        if !self.converged {
            return Err(Error::invalid("prediction from a non-converged fit"));
        }
        let r = self.risk_score(covariates, group)?;
        let base = self.baseline(group).ok_or_else(|| {
            Error::invalid(format!("no baseline for stratum {group}"))
        })?;
        let values = base.values().iter().map(|l| (-l * r).exp()).collect();
        Curve::new(base.jump_times().to_vec(), values)
    }

    pub fn n_parameters(&self) -> usize {
        self.coefficients.len()
    }
}
