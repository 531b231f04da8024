//! The numerical study: data generation, truth oracle, performance metrics
//! and the replication runner.

pub mod config;
pub mod generate;
pub mod metrics;
pub mod runner;
pub mod truth;

pub use config::{Censoring, SimConfig};
pub use generate::{
    case_model_spec, generate_censoring, generate_cohort, generate_covariates,
    generate_dataset, generate_event_time, generate_treatment, EventCoeffs,
};
pub use metrics::{performance_metrics, Metrics, Parameter};
pub use runner::{run_study, PerfReport, PerfRow, ReplicateRecord, StudyResult};
pub use truth::{truth_oracle, truth_oracle_with, TruthValues};
