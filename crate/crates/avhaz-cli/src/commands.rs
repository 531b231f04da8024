//! Subcommand implementations shared by the binary and the integration
//! tests.

use crate::dataio::{materialize_squares, read_cohort, resolve_columns, CohortColumns};
use crate::report::{analyze_report, num, round_json, round_sig};
use avhaz::sim::{run_study, Parameter, SimConfig, StudyResult};
use avhaz::{
    bootstrap_ci, estimate, AdjustOptions, BootstrapOptions, CiMethod, Method, ModelSpec,
};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::fs;
use std::io::BufReader;
use std::path::Path;

/// Errors mapped to process exit codes: usage/validation problems exit 2,
/// estimation failures exit 3.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Estimation(String),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(m) | CmdError::Estimation(m) => f.write_str(m),
        }
    }
}

pub type CmdResult<T> = Result<T, CmdError>;

fn usage(msg: impl std::fmt::Display) -> CmdError {
    CmdError::Usage(msg.to_string())
}

fn estimation(msg: impl std::fmt::Display) -> CmdError {
    CmdError::Estimation(msg.to_string())
}

#[derive(Debug, Clone)]
pub struct AnalyzeRequest {
    pub input: String,
    pub time: String,
    pub event: String,
    pub group: String,
    pub method: String,
    pub tau: f64,
    pub boot: usize,
    pub seed: u64,
    pub outcome_model: Vec<String>,
    pub treatment_model: Vec<String>,
    pub stabilized: bool,
    pub caliper: Option<f64>,
    pub ci: CiMethod,
}

/// Split a comma-separated model list.
pub fn parse_columns(spec: &str) -> Vec<String> {
    spec.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

pub fn run_analyze(req: &AnalyzeRequest) -> CmdResult<Value> {
    if req.tau.is_nan() || req.tau <= 0.0 {
        return Err(usage("tau must be positive"));
    }
    if req.boot < 2 {
        return Err(usage("boot must be at least 2"));
    }
    let method = Method::parse(&req.method).map_err(usage)?;

    let file = fs::File::open(&req.input)
        .map_err(|e| usage(format!("cannot open {}: {e}", req.input)))?;
    let cols = CohortColumns {
        time: &req.time,
        event: &req.event,
        group: &req.group,
    };
    let dataset = read_cohort(BufReader::new(file), &cols).map_err(usage)?;

    let mut wanted = req.outcome_model.clone();
    wanted.extend(req.treatment_model.iter().cloned());
    let dataset = materialize_squares(&dataset, &wanted).map_err(usage)?;
    let spec = ModelSpec {
        outcome_covariates: resolve_columns(&dataset, &req.outcome_model).map_err(usage)?,
        treatment_covariates: resolve_columns(&dataset, &req.treatment_model).map_err(usage)?,
    };

    let adjust_opts = AdjustOptions {
        stabilized: req.stabilized,
        caliper: req.caliper,
    };
    // A point-estimate pass for the method diagnostics.
    let pair = estimate(method, &dataset, &spec, &adjust_opts).map_err(estimation)?;
    let boot_opts = BootstrapOptions {
        replicates: req.boot,
        seed: req.seed,
        ci: req.ci,
        stratified: false,
    };
    let contrast = bootstrap_ci(&dataset, method, &spec, req.tau, &boot_opts, &adjust_opts)
        .map_err(estimation)?;

    let diagnostics = round_json(serde_json::to_value(&pair.diagnostics).unwrap());
    Ok(analyze_report(method.id(), &contrast, diagnostics))
}

/// The method-by-case grid of DAH relative bias printed after a study.
pub fn bias_grid(result: &StudyResult, config: &SimConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "DAH relative bias (truth: eta0 {:.6}, eta1 {:.6}, dah {:.6})",
        result.report.truth.eta0, result.report.truth.eta1, result.report.truth.dah
    );
    let _ = write!(out, "{:<10}", "method");
    for case in &config.case {
        let _ = write!(out, "{:>12}", format!("case {case}"));
    }
    let _ = writeln!(out);
    for method in &config.methods {
        let _ = write!(out, "{:<10}", method.id());
        for &case in &config.case {
            match result.report.row(case, *method, Parameter::Dah) {
                Some(row) => {
                    let _ = write!(out, "{:>12.4}", row.metrics.relative_bias);
                }
                None => {
                    let _ = write!(out, "{:>12}", "-");
                }
            }
        }
        let _ = writeln!(out);
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| round_sig(x).to_string()).unwrap_or_default()
}

/// Aggregate metrics as CSV.
pub fn perf_report_csv(result: &StudyResult) -> String {
    let mut out = String::from(
        "case,method,parameter,relative_bias,rmse,coverage,median_ci_length,\
         replicates_used,replicates_discarded\n",
    );
    for row in &result.report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.case,
            row.method.id(),
            row.parameter.id(),
            round_sig(row.metrics.relative_bias),
            round_sig(row.metrics.rmse),
            fmt_opt(row.metrics.coverage),
            fmt_opt(row.metrics.median_ci_length),
            row.replicates_used,
            row.replicates_discarded,
        );
    }
    out
}

/// Per-replicate estimates for one case as CSV.
pub fn replicates_csv(result: &StudyResult, case: u8) -> String {
    let mut out = String::from("replicate,method,parameter,estimate,ci_low,ci_high\n");
    for r in result.records.iter().filter(|r| r.case == case) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.replicate,
            r.method.id(),
            r.parameter.id(),
            round_sig(r.estimate),
            fmt_opt(r.ci_low),
            fmt_opt(r.ci_high),
        );
    }
    out
}

pub fn run_simulate(config_path: &Path, out_dir: &Path) -> CmdResult<String> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", config_path.display())))?;
    let config = SimConfig::from_json(&text).map_err(usage)?;
    let result = run_study(&config).map_err(estimation)?;

    fs::create_dir_all(out_dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let summary = round_json(json!({
        "config": serde_json::to_value(&config).unwrap(),
        "truth": serde_json::to_value(result.report.truth).unwrap(),
        "rows": serde_json::to_value(&result.report.rows).unwrap(),
        "datasets_regenerated": result.report.datasets_regenerated,
        "replications": result.report.replications,
    }));
    fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).unwrap(),
    )
    .map_err(|e| estimation(format!("writing summary.json: {e}")))?;
    fs::write(out_dir.join("perf_report.csv"), perf_report_csv(&result))
        .map_err(|e| estimation(format!("writing perf_report.csv: {e}")))?;
    for &case in &config.case {
        fs::write(
            out_dir.join(format!("replicates_case{case}.csv")),
            replicates_csv(&result, case),
        )
        .map_err(|e| estimation(format!("writing replicates CSV: {e}")))?;
    }
    Ok(bias_grid(&result, &config))
}

pub fn run_truth(
    scenario: u8,
    tau: f64,
    points: usize,
    repeats: usize,
    seed: u64,
) -> CmdResult<Value> {
    if !(scenario == 1 || scenario == 2) {
        return Err(usage("scenario must be 1 or 2"));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(usage("tau must be positive"));
    }
    if points < 1000 {
        return Err(usage("m must be at least 1000"));
    }
    if repeats < 1 {
        return Err(usage("repeats must be at least 1"));
    }
    let truth = avhaz::sim::truth_oracle(scenario, tau, points, repeats, seed)
        .map_err(estimation)?;
    Ok(json!({
        "scenario": scenario,
        "tau": num(tau),
        "eta0": num(truth.eta0),
        "eta1": num(truth.eta1),
        "dah": num(truth.dah),
        "log_rah": num(truth.log_rah),
        "rah": num(truth.log_rah.exp()),
        "monte_carlo_points": truth.monte_carlo_points,
        "repeats": truth.repeats,
    }))
}
