//! The replication runner: generate, analyze with every configured method,
//! aggregate against the truth oracle.

use crate::adjust::{estimate, AdjustOptions, Method};
use crate::error::{Error, Result};
use crate::inference::{ah_contrast, bootstrap_ci, BootstrapOptions, CiMethod};
use crate::rng::{mix_seed, stream, tag};
use crate::sim::config::SimConfig;
use crate::sim::generate::{case_model_spec, generate_cohort};
use crate::sim::metrics::{performance_metrics, Metrics, Parameter};
use crate::sim::truth::{truth_oracle, TruthValues};
use rayon::prelude::*;
use serde::Serialize;

const MAX_REGEN_ATTEMPTS: u64 = 100;

/// One estimate as recorded per replicate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub case: u8,
    pub method: Method,
    pub parameter: Parameter,
    pub estimate: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

/// Aggregated metrics for one (case, method, parameter) cell.
#[derive(Debug, Clone, Serialize)]
pub struct PerfRow {
    pub case: u8,
    pub method: Method,
    pub parameter: Parameter,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub replicates_used: usize,
    pub replicates_discarded: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerfReport {
    pub truth: TruthValues,
    pub rows: Vec<PerfRow>,
    /// Datasets regenerated because a group lacked events.
    pub datasets_regenerated: usize,
    pub replications: usize,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub report: PerfReport,
    pub records: Vec<ReplicateRecord>,
}

/// Per-replicate output: for each (case, method), the four estimates and
/// optional intervals, or a failure marker.
type CellOutcome = Option<[(f64, Option<(f64, f64)>); 4]>;

struct ReplicateOutput {
    cells: Vec<CellOutcome>, // indexed case-major then method
    regenerated: usize,
}

fn run_replicate(config: &SimConfig, rep: usize) -> ReplicateOutput {
    // Regenerate until both groups carry events; the attempt index keeps the
    // stream deterministic.
    let mut regenerated = 0usize;
    let mut dataset = None;
    for attempt in 0..MAX_REGEN_ATTEMPTS {
        let mut rng = stream(&[config.seed, tag::DATA, rep as u64, attempt]);
        let candidate = generate_cohort(config.scenario, config.censoring, config.n, &mut rng);
        if candidate.supports_two_groups(2) {
            dataset = Some(candidate);
            break;
        }
        regenerated += 1;
    }
    let Some(dataset) = dataset else {
        return ReplicateOutput {
            cells: vec![None; config.case.len() * config.methods.len()],
            regenerated,
        };
    };

    let adjust_opts = AdjustOptions {
        stabilized: config.stabilized,
        caliper: None,
    };

    let mut cells = Vec::with_capacity(config.case.len() * config.methods.len());
    for &case in &config.case {
        let spec = case_model_spec(case, config.outcome_x5_squared)
            .expect("config validated the cases");
        for &method in &config.methods {
            let outcome: CellOutcome = if config.bootstrap_b > 0 {
                let boot = BootstrapOptions {
                    replicates: config.bootstrap_b,
                    seed: mix_seed(&[
                        config.seed,
                        tag::BOOT,
                        rep as u64,
                        case as u64,
                        method as u64,
                    ]),
                    ci: CiMethod::Normal,
                    stratified: false,
                };
                bootstrap_ci(&dataset, method, &spec, config.tau, &boot, &adjust_opts)
                    .ok()
                    .map(|c| {
                        let log_rah = c.log_rah.unwrap_or(f64::NAN);
                        let ci_log_rah =
                            c.ci_rah.map(|(lo, hi)| (lo.ln(), hi.ln()));
                        [
                            (c.eta0, Some(c.ci_eta0)),
                            (c.eta1, Some(c.ci_eta1)),
                            (c.dah, Some(c.ci_dah)),
                            (log_rah, ci_log_rah),
                        ]
                    })
            } else {
                estimate(method, &dataset, &spec, &adjust_opts)
                    .and_then(|pair| ah_contrast(&pair, config.tau))
                    .ok()
                    .map(|p| {
                        [
                            (p.eta0, None),
                            (p.eta1, None),
                            (p.dah, None),
                            (p.log_rah.unwrap_or(f64::NAN), None),
                        ]
                    })
            };
            cells.push(outcome);
        }
    }
    ReplicateOutput { cells, regenerated }
}

/// Run the full study described by `config`.
pub fn run_study(config: &SimConfig) -> Result<StudyResult> {
    config.validate()?;
    let truth = truth_oracle(
        config.scenario,
        config.tau,
        config.truth_points,
        config.truth_repeats,
        mix_seed(&[config.seed, tag::TRUTH]),
    )?;

    let outputs: Vec<ReplicateOutput> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replicate(config, rep))
        .collect();

    let datasets_regenerated = outputs.iter().map(|o| o.regenerated).sum();

    let with_ci = config.bootstrap_b > 0;
    let mut records = Vec::new();
    let mut rows = Vec::new();

    for (ci_idx, &case) in config.case.iter().enumerate() {
        for (m_idx, &method) in config.methods.iter().enumerate() {
            let cell = ci_idx * config.methods.len() + m_idx;
            // Collect per-parameter estimate and CI vectors.
            let mut est: [Vec<f64>; 4] = Default::default();
            let mut cis: [Vec<(f64, f64)>; 4] = Default::default();
            let mut used = 0usize;
            for (rep, out) in outputs.iter().enumerate() {
                let Some(values) = &out.cells[cell] else {
                    continue;
                };
                used += 1;
                for (p_idx, param) in Parameter::ALL.iter().enumerate() {
                    let (e, ci) = values[p_idx];
                    records.push(ReplicateRecord {
                        replicate: rep,
                        case,
                        method,
                        parameter: *param,
                        estimate: e,
                        ci_low: ci.map(|c| c.0),
                        ci_high: ci.map(|c| c.1),
                    });
                    if e.is_finite() {
                        est[p_idx].push(e);
                        if let Some(c) = ci {
                            cis[p_idx].push(c);
                        }
                    }
                }
            }

            let discarded = config.replications - used;
            if discarded * 20 > config.replications {
                return Err(Error::TooManyFailures {
                    failed: discarded,
                    total: config.replications,
                    detail: format!("method {method}, case {case}"),
                });
            }

            for (p_idx, param) in Parameter::ALL.iter().enumerate() {
                let bounds = (with_ci && cis[p_idx].len() == est[p_idx].len())
                    .then_some(cis[p_idx].as_slice());
                let metrics = performance_metrics(
                    &est[p_idx],
                    bounds,
                    truth.parameter(*param),
                )?;
                rows.push(PerfRow {
                    case,
                    method,
                    parameter: *param,
                    metrics,
                    replicates_used: est[p_idx].len(),
                    replicates_discarded: discarded,
                });
            }
        }
    }

    Ok(StudyResult {
        report: PerfReport {
            truth,
            rows,
            datasets_regenerated,
            replications: config.replications,
        },
        records,
    })
}

impl PerfReport {
    /// Look up one aggregated cell.
    pub fn row(&self, case: u8, method: Method, parameter: Parameter) -> Option<&PerfRow> {
        self.rows
            .iter()
            .find(|r| r.case == case && r.method == method && r.parameter == parameter)
    }
}
