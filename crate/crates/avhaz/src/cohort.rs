//! Observed cohort data: one row per subject plus validated collections.

use crate::error::{Error, Result};
use rand::Rng;

/// One observed row: follow-up time, event indicator, group and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    /// Observed time `Y = min(T, C)`.
    pub observed_time: f64,
    /// Event indicator `Δ = I(T <= C)`.
    pub event: bool,
    /// Group indicator `Z`, 0 or 1.
    pub group: u8,
    /// Covariate vector; arity is fixed within a dataset.
    pub covariates: Vec<f64>,
}

impl Subject {
    pub fn new(observed_time: f64, event: bool, group: u8, covariates: Vec<f64>) -> Result<Self> {
        if !observed_time.is_finite() || observed_time < 0.0 {
            return Err(Error::invalid("observed_time must be finite and >= 0"));
        }
        if group > 1 {
            return Err(Error::invalid("group must be 0 or 1"));
        }
        if covariates.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("covariates must be finite"));
        }
        Ok(Subject {
            observed_time,
            event,
            group,
            covariates,
        })
    }
}

/// A validated collection of subjects with named covariate columns.
#[derive(Debug, Clone)]
pub struct CohortDataset {
    subjects: Vec<Subject>,
    covariate_names: Vec<String>,
}

impl CohortDataset {
    pub fn new(subjects: Vec<Subject>, covariate_names: Vec<String>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::invalid("dataset must be nonempty"));
        }
        let arity = covariate_names.len();
        for (i, s) in subjects.iter().enumerate() {
            if s.covariates.len() != arity {
                return Err(Error::invalid(format!(
                    "subject {i} has {} covariates, expected {arity}",
                    s.covariates.len()
                )));
            }
        }
        Ok(CohortDataset {
            subjects,
            covariate_names,
        })
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn arity(&self) -> usize {
        self.covariate_names.len()
    }

    /// Indices of subjects in group `k`.
    pub fn group_indices(&self, k: u8) -> Vec<usize> {
        self.subjects
            .iter()
            .enumerate()
            .filter(|(_, s)| s.group == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of events observed in group `k`.
    pub fn event_count(&self, k: u8) -> usize {
        self.subjects
            .iter()
            .filter(|s| s.group == k && s.event)
            .count()
    }

    /// Whether both groups carry at least `min_subjects` subjects and at
    /// least one event each, the precondition for the two-group estimators.
    pub fn supports_two_groups(&self, min_subjects: usize) -> bool {
        (0..=1u8).all(|k| {
            self.group_indices(k).len() >= min_subjects && self.event_count(k) >= 1
        })
    }

    /// Largest observed time in group `k` (0 when the group is empty).
    pub fn max_observed_time(&self, k: u8) -> f64 {
        self.subjects
            .iter()
            .filter(|s| s.group == k)
            .map(|s| s.observed_time)
            .fold(0.0, f64::max)
    }

    /// With-replacement row resample of the same size.
    pub fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> CohortDataset {
        let n = self.subjects.len();
        let subjects = (0..n)
            .map(|_| self.subjects[rng.random_range(0..n)].clone())
            .collect();
        CohortDataset {
            subjects,
            covariate_names: self.covariate_names.clone(),
        }
    }

    /// With-replacement resample drawn within each group separately.
    pub fn resample_stratified<R: Rng + ?Sized>(&self, rng: &mut R) -> CohortDataset {
        let mut subjects = Vec::with_capacity(self.subjects.len());
        for k in 0..=1u8 {
            let idx = self.group_indices(k);
            if idx.is_empty() {
                continue;
            }
            for _ in 0..idx.len() {
                subjects.push(self.subjects[idx[rng.random_range(0..idx.len())]].clone());
            }
        }
        CohortDataset {
            subjects,
            covariate_names: self.covariate_names.clone(),
        }
    }
}

/// Positive, finite per-subject weights.
#[derive(Debug, Clone)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::invalid("weights must be positive and finite"));
        }
        Ok(WeightVector(weights))
    }

    pub fn unit(n: usize) -> Self {
        WeightVector(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &w in &self.0 {
            lo = lo.min(w);
            hi = hi.max(w);
        }
        (lo, hi)
    }
}

/// Person-time incidence rate: observed events over total observation time.
pub fn person_time_ir(dataset: &CohortDataset) -> Result<f64> {
    let total_time: f64 = dataset.subjects().iter().map(|s| s.observed_time).sum();
    if total_time <= 0.0 {
        return Err(Error::Domain(
            "person-time incidence rate undefined: total observation time is zero".into(),
        ));
    }
    let events = dataset.subjects().iter().filter(|s| s.event).count();
    Ok(events as f64 / total_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subj(t: f64, event: bool, group: u8) -> Subject {
        Subject::new(t, event, group, vec![]).unwrap()
    }

    #[test]
    fn person_time_ir_both_events() {
        let ds = CohortDataset::new(vec![subj(1.0, true, 0), subj(1.0, true, 1)], vec![]).unwrap();
        assert_eq!(person_time_ir(&ds).unwrap(), 1.0);
    }

    #[test]
    fn person_time_ir_mixed() {
        let ds = CohortDataset::new(vec![subj(2.0, true, 0), subj(2.0, false, 1)], vec![]).unwrap();
        assert_eq!(person_time_ir(&ds).unwrap(), 0.25);
    }

    #[test]
    fn person_time_ir_zero_time_errors() {
        let ds = CohortDataset::new(vec![subj(0.0, false, 0)], vec![]).unwrap();
        assert!(person_time_ir(&ds).is_err());
    }

    #[test]
    fn dataset_rejects_arity_mismatch() {
        let a = Subject::new(1.0, true, 0, vec![1.0]).unwrap();
        let b = Subject::new(2.0, false, 1, vec![1.0, 2.0]).unwrap();
        assert!(CohortDataset::new(vec![a, b], vec!["x1".into()]).is_err());
    }

    #[test]
    fn subject_rejects_bad_fields() {
        assert!(Subject::new(-1.0, true, 0, vec![]).is_err());
        assert!(Subject::new(f64::NAN, true, 0, vec![]).is_err());
        assert!(Subject::new(1.0, true, 2, vec![]).is_err());
        assert!(Subject::new(1.0, true, 0, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn weights_must_be_positive() {
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![1.0, -2.0]).is_err());
        assert!(WeightVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(WeightVector::new(vec![0.5, 2.0]).is_ok());
    }
}
