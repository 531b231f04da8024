//! Propensity score matching: 1:1 nearest neighbor with replacement, run in
//! both directions (every subject is matched to its nearest opposite-group
//! neighbor). Distance ties split the match weight evenly across all tied
//! neighbors, so the output is deterministic and independent of row order.

use crate::adjust::{require_two_groups, AdjustOptions, CurvePair, Diagnostics, ModelSpec};
use crate::cohort::{CohortDataset, WeightVector};
use crate::error::Result;
use crate::models::{km_fit, logistic_fit};

/// Sorted pool of candidate matches for one group.
struct Pool {
    /// (propensity, original index), sorted by propensity.
    entries: Vec<(f64, usize)>,
}

/// The tied-nearest neighbors of `p`: all entries at the minimal distance.
struct NearestSet<'a> {
    tied: Vec<&'a (f64, usize)>,
}

impl Pool {
    fn build(ps: &[f64], members: &[usize]) -> Pool {
        let mut entries: Vec<(f64, usize)> = members.iter().map(|&i| (ps[i], i)).collect();
        entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Pool { entries }
    }

    fn nearest(&self, p: f64) -> NearestSet<'_> {
        let n = self.entries.len();
        let mut lo = 0usize;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.entries[mid].0 < p {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let d_left = lo.checked_sub(1).map(|i| p - self.entries[i].0);
        let d_right = (lo < n).then(|| self.entries[lo].0 - p);
        let distance = match (d_left, d_right) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => unreachable!("pools are nonempty"),
        };

        let mut tied = Vec::new();
        if let Some(a) = d_left {
            if a == distance {
                // Walk the run of entries at value p - distance.
                let v = self.entries[lo - 1].0;
                let mut i = lo - 1;
                loop {
                    if self.entries[i].0 == v {
                        tied.push(&self.entries[i]);
                    } else {
                        break;
                    }
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                }
            }
        }
        if let Some(b) = d_right {
            // The left run sits strictly below p, so the two runs are
            // disjoint whenever both are at the minimal distance.
            if b == distance {
                let v = self.entries[lo].0;
                let mut i = lo;
                while i < n && self.entries[i].0 == v {
                    tied.push(&self.entries[i]);
                    i += 1;
                }
            }
        }
        NearestSet { tied }
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn ps_matching(
    dataset: &CohortDataset,
    spec: &ModelSpec,
    opts: &AdjustOptions,
) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let fit = logistic_fit(dataset, &spec.treatment_covariates)?;
    let ps = &fit.fitted_probabilities;
    let n = dataset.len();

    let g0 = dataset.group_indices(0);
    let g1 = dataset.group_indices(1);
    let pools = [Pool::build(ps, &g0), Pool::build(ps, &g1)];

    // Caliper threshold on the logit scale, when enabled.
    let caliper_abs = opts.caliper.map(|c| {
        let logits: Vec<f64> = ps.iter().map(|&p| logit(p)).collect();
        let mean = logits.iter().sum::<f64>() / n as f64;
        let var = logits.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        c * var.sqrt()
    });

    // Multiplicity weights: self plus every (possibly fractional) time a
    // subject is chosen as a counterpart.
    let mut mult = vec![0.0f64; n];
    let mut dropped = 0usize;
    for (i, s) in dataset.subjects().iter().enumerate() {
        let opposite = &pools[usize::from(s.group == 0)];
        let near = opposite.nearest(ps[i]);
        if let Some(cal) = caliper_abs {
            let gap = near
                .tied
                .iter()
                .map(|&&(pj, _)| (logit(ps[i]) - logit(pj)).abs())
                .fold(f64::INFINITY, f64::min);
            if gap > cal {
                dropped += 1;
                continue;
            }
        }
        mult[i] += 1.0;
        let share = 1.0 / near.tied.len() as f64;
        for &&(_, j) in &near.tied {
            mult[j] += share;
        }
    }

    let total: f64 = mult.iter().sum();
    let mut diagnostics = Diagnostics {
        matched_multiplicity: Some(total),
        propensity_clipped: Some(fit.clipped),
        ..Diagnostics::default()
    };
    if dropped > 0 {
        diagnostics
            .notes
            .push(format!("{dropped} subjects dropped by the caliper"));
    }

    let mut curves = Vec::with_capacity(2);
    for members in [&g0, &g1] {
        let kept: Vec<usize> = members.iter().copied().filter(|&i| mult[i] > 0.0).collect();
        let times: Vec<f64> = kept
            .iter()
            .map(|&i| dataset.subjects()[i].observed_time)
            .collect();
        let events: Vec<bool> = kept.iter().map(|&i| dataset.subjects()[i].event).collect();
        let w = WeightVector::new(kept.iter().map(|&i| mult[i]).collect())?;
        curves.push(km_fit(&times, &events, Some(&w))?);
    }
    let curve1 = curves.pop().unwrap();
    let curve0 = curves.pop().unwrap();

    let (lo, hi) = {
        let kept: Vec<f64> = mult.iter().copied().filter(|&m| m > 0.0).collect();
        (
            kept.iter().copied().fold(f64::INFINITY, f64::min),
            kept.iter().copied().fold(0.0, f64::max),
        )
    };
    diagnostics.weight_range = Some((lo, hi));

    Ok(CurvePair {
        curve0,
        curve1,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::Subject;

    /// Pairs share covariates; assignment is perfectly balanced, so every
    /// propensity ties and the match weight spreads uniformly.
    fn paired_dataset() -> CohortDataset {
        let mut subjects = Vec::new();
        for i in 0..12 {
            let x = i as f64 * 0.37 - 2.0;
            let t = 1.0 + (i % 5) as f64;
            let e = i % 3 != 0;
            subjects.push(Subject::new(t, e, 0, vec![x]).unwrap());
            subjects.push(Subject::new(t, e, 1, vec![x]).unwrap());
        }
        CohortDataset::new(subjects, vec!["x".into()]).unwrap()
    }

    #[test]
    fn pairwise_identical_covariates_reproduce_unadjusted_km() {
        let ds = paired_dataset();
        let spec = ModelSpec {
            outcome_covariates: vec![],
            treatment_covariates: vec![0],
        };
        let pair = ps_matching(&ds, &spec, &AdjustOptions::default()).unwrap();
        let km = crate::adjust::unadjusted_km(&ds).unwrap();
        assert!(pair.curve0.sup_distance(&km.curve0) < 1e-10);
        assert!(pair.curve1.sup_distance(&km.curve1) < 1e-10);
        // Every subject carries itself plus one unit of match weight.
        let total = pair.diagnostics.matched_multiplicity.unwrap();
        assert!((total - 2.0 * ds.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn distinct_propensities_match_exact_pairs() {
        // Unbalanced assignment over a binary covariate: fitted propensities
        // differ by x, and each subject's distance-zero tie set is exactly
        // the opposite subjects sharing its x.
        let mut subjects = Vec::new();
        for i in 0..4 {
            subjects.push(Subject::new(1.0 + i as f64, true, u8::from(i < 1), vec![0.0]).unwrap());
        }
        for i in 0..4 {
            subjects.push(Subject::new(2.0 + i as f64, true, u8::from(i < 3), vec![1.0]).unwrap());
        }
        let ds = CohortDataset::new(subjects, vec!["x".into()]).unwrap();
        let spec = ModelSpec {
            outcome_covariates: vec![],
            treatment_covariates: vec![0],
        };
        let pair = ps_matching(&ds, &spec, &AdjustOptions::default()).unwrap();
        // x=0: one treated, three controls; x=1: three treated, one control.
        // The single x=0 treated absorbs a third of each control's unit and
        // vice versa: weights stay positive and group totals are 8 each.
        let total = pair.diagnostics.matched_multiplicity.unwrap();
        assert!((total - 16.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_and_order_invariant() {
        let ds = paired_dataset();
        let spec = ModelSpec {
            outcome_covariates: vec![],
            treatment_covariates: vec![0],
        };
        let a = ps_matching(&ds, &spec, &AdjustOptions::default()).unwrap();
        let b = ps_matching(&ds, &spec, &AdjustOptions::default()).unwrap();
        assert_eq!(a.curve0, b.curve0);
        assert_eq!(a.curve1, b.curve1);

        // Reversing the subject order permutes nothing observable.
        let rev = CohortDataset::new(
            ds.subjects().iter().rev().cloned().collect(),
            ds.covariate_names().to_vec(),
        )
        .unwrap();
        let c = ps_matching(&rev, &spec, &AdjustOptions::default()).unwrap();
        assert!(a.curve0.sup_distance(&c.curve0) < 1e-12);
        assert!(a.curve1.sup_distance(&c.curve1) < 1e-12);
    }

    #[test]
    fn all_tied_propensities_spread_weight_uniformly() {
        // Intercept-only model: every opposite-group subject ties, each
        // getting an equal share, so curves equal the unadjusted KM.
        let mut subjects = Vec::new();
        for i in 0..4 {
            subjects.push(Subject::new(1.0 + i as f64, true, 0, vec![]).unwrap());
        }
        for i in 0..4 {
            subjects.push(Subject::new(5.0 + i as f64, true, 1, vec![]).unwrap());
        }
        let ds = CohortDataset::new(subjects, vec![]).unwrap();
        let pair = ps_matching(&ds, &ModelSpec::default(), &AdjustOptions::default()).unwrap();
        let km = crate::adjust::unadjusted_km(&ds).unwrap();
        assert!(pair.curve0.sup_distance(&km.curve0) < 1e-12);
        assert!(pair.curve1.sup_distance(&km.curve1) < 1e-12);
    }

    #[test]
    fn caliper_drops_distant_subjects() {
        // One control far out in propensity space.
        let mut subjects = Vec::new();
        for i in 0..10 {
            subjects.push(Subject::new(1.0 + i as f64, true, 0, vec![0.1 * i as f64]).unwrap());
            subjects.push(Subject::new(1.5 + i as f64, true, 1, vec![0.1 * i as f64]).unwrap());
        }
        subjects.push(Subject::new(20.0, true, 0, vec![40.0]).unwrap());
        let ds = CohortDataset::new(subjects, vec!["x".into()]).unwrap();
        let spec = ModelSpec {
            outcome_covariates: vec![],
            treatment_covariates: vec![0],
        };
        let with_caliper = ps_matching(
            &ds,
            &spec,
            &AdjustOptions {
                stabilized: false,
                caliper: Some(0.2),
            },
        )
        .unwrap();
        assert!(with_caliper
            .diagnostics
            .notes
            .iter()
            .any(|n| n.contains("dropped")));
    }
}
