//! Likelihood-based model fitting: Kaplan-Meier / Nelson-Aalen, logistic
//! regression for propensity scores, and Cox proportional hazards.

mod cox;
mod km;
pub(crate) mod linalg;
mod logistic;

pub use cox::{cox_fit, CoxFit};
pub use km::{censoring_km, km_fit, nelson_aalen};
pub use logistic::{expit, logistic_fit, LogisticFit, PROPENSITY_CLIP};
