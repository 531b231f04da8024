//! The confounding-adjustment estimators: each maps a cohort plus model
//! specifications to a pair of adjusted survival curves, one per group.

mod aiptw;
mod ds;
mod el;
mod iptw;
mod matching;

pub use aiptw::aiptw;
pub use ds::direct_standardization;
pub use el::empirical_likelihood;
pub use iptw::{iptw_ch, iptw_km, iptw_weights};
pub use matching::ps_matching;

use crate::cohort::CohortDataset;
use crate::error::{Error, Result};
use crate::models::km_fit;
use crate::Curve;
use serde::{Deserialize, Serialize};

/// Which covariate columns feed the outcome and treatment models.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelSpec {
    /// Outcome-model design (the treatment indicator is always added).
    pub outcome_covariates: Vec<usize>,
    /// Treatment-model design (also the EL balancing set).
    pub treatment_covariates: Vec<usize>,
}

impl ModelSpec {
    pub fn validate(&self, dataset: &CohortDataset) -> Result<()> {
        let arity = dataset.arity();
        for &j in self
            .outcome_covariates
            .iter()
            .chain(self.treatment_covariates.iter())
        {
            if j >= arity {
                return Err(Error::invalid(format!(
                    "model spec references covariate {j}, dataset arity is {arity}"
                )));
            }
        }
        Ok(())
    }
}

/// The seven estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "km")]
    Km,
    #[serde(rename = "ds")]
    Ds,
    #[serde(rename = "iptw-km")]
    IptwKm,
    #[serde(rename = "iptw-ch")]
    IptwCh,
    #[serde(rename = "matching")]
    Matching,
    #[serde(rename = "el")]
    El,
    #[serde(rename = "aiptw")]
    Aiptw,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Km,
        Method::Ds,
        Method::IptwKm,
        Method::IptwCh,
        Method::Matching,
        Method::El,
        Method::Aiptw,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Method::Km => "km",
            Method::Ds => "ds",
            Method::IptwKm => "iptw-km",
            Method::IptwCh => "iptw-ch",
            Method::Matching => "matching",
            Method::El => "el",
            Method::Aiptw => "aiptw",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.id() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected one of km, ds, iptw-km, iptw-ch, \
                     matching, el, aiptw)"
                ))
            })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Method-specific notes attached to a [`CurvePair`].
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    /// Range of the weights actually used (IPTW, matching multiplicities,
    /// EL weights).
    pub weight_range: Option<(f64, f64)>,
    /// Fitted propensities moved by the clip.
    pub propensity_clipped: Option<usize>,
    /// Dual-solver iterations per group (EL).
    pub el_iterations: Option<(usize, usize)>,
    /// Total multiplicity of the matched dataset (matching).
    pub matched_multiplicity: Option<f64>,
    /// Free-form notes (caliper drops, convergence remarks).
    pub notes: Vec<String>,
}

/// Adjusted survival curves for group 0 and group 1.
#[derive(Debug, Clone)]
pub struct CurvePair {
    pub curve0: Curve,
    pub curve1: Curve,
    pub diagnostics: Diagnostics,
}

/// Estimator tuning knobs shared across methods.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdjustOptions {
    /// Stabilize IPTW weights by the marginal group prevalences.
    pub stabilized: bool,
    /// Matching caliper as a multiple of the SD of the logit propensity;
    /// `None` disables the caliper.
    pub caliper: Option<f64>,
}

/// Per-group split of times, events, and member indices.
pub(crate) fn group_rows(dataset: &CohortDataset, k: u8) -> (Vec<usize>, Vec<f64>, Vec<bool>) {
    let idx = dataset.group_indices(k);
    let times = idx
        .iter()
        .map(|&i| dataset.subjects()[i].observed_time)
        .collect();
    let events = idx.iter().map(|&i| dataset.subjects()[i].event).collect();
    (idx, times, events)
}

pub(crate) fn require_two_groups(dataset: &CohortDataset) -> Result<()> {
    if !dataset.supports_two_groups(2) {
        return Err(Error::Degenerate(
            "two-group estimation needs at least 2 subjects and 1 event per group".into(),
        ));
    }
    Ok(())
}

/// Unadjusted per-group Kaplan-Meier, the reference method.
pub fn unadjusted_km(dataset: &CohortDataset) -> Result<CurvePair> {
    require_two_groups(dataset)?;
    let (_, t0, e0) = group_rows(dataset, 0);
    let (_, t1, e1) = group_rows(dataset, 1);
    Ok(CurvePair {
        curve0: km_fit(&t0, &e0, None)?,
        curve1: km_fit(&t1, &e1, None)?,
        diagnostics: Diagnostics::default(),
    })
}

/// Run one estimator.
pub fn estimate(
    method: Method,
    dataset: &CohortDataset,
    spec: &ModelSpec,
    opts: &AdjustOptions,
) -> Result<CurvePair> {
    spec.validate(dataset)?;
    match method {
        Method::Km => unadjusted_km(dataset),
        Method::Ds => direct_standardization(dataset, spec),
        Method::IptwKm => iptw_km(dataset, spec, opts),
        Method::IptwCh => iptw_ch(dataset, spec, opts),
        Method::Matching => ps_matching(dataset, spec, opts),
        Method::El => empirical_likelihood(dataset, spec),
        Method::Aiptw => aiptw(dataset, spec),
    }
}
