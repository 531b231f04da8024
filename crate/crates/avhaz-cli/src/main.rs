//! `avhaz`: average-hazard contrasts for two-group cohorts.
//!
//! Subcommands: `analyze` a cohort CSV with one of seven adjustment methods,
//! `simulate` a configured Monte-Carlo study, and `truth` to compute the
//! study's true parameter values numerically.

use avhaz::CiMethod;
use avhaz_cli::commands::{
    parse_columns, run_analyze, run_simulate, run_truth, AnalyzeRequest, CmdError,
};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "avhaz", version, about = "Average hazard estimation with confounding adjustment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiKind {
    Normal,
    Percentile,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate per-group average hazards and their contrasts from a CSV.
    Analyze {
        /// Input cohort CSV (header row required).
        #[arg(long)]
        input: PathBuf,
        /// Follow-up time column.
        #[arg(long)]
        time: String,
        /// Event indicator column (0/1).
        #[arg(long)]
        event: String,
        /// Group indicator column (0/1).
        #[arg(long)]
        group: String,
        /// Estimator: km, ds, iptw-km, iptw-ch, matching, el, aiptw.
        #[arg(long)]
        method: String,
        /// Truncation time of the average hazard window.
        #[arg(long)]
        tau: f64,
        /// Bootstrap replicates.
        #[arg(long, default_value_t = 300)]
        boot: usize,
        /// Master seed for the bootstrap.
        #[arg(long)]
        seed: u64,
        /// Outcome-model columns, comma separated; `col^2` adds a squared term.
        #[arg(long, default_value = "")]
        outcome_model: String,
        /// Treatment-model columns, comma separated; `col^2` adds a squared term.
        #[arg(long, default_value = "")]
        treatment_model: String,
        /// Stabilize IPTW weights by the group prevalences.
        #[arg(long)]
        stabilized: bool,
        /// Matching caliper as a multiple of the SD of the logit propensity.
        #[arg(long)]
        caliper: Option<f64>,
        /// Confidence interval construction.
        #[arg(long, value_enum, default_value_t = CiKind::Normal)]
        ci: CiKind,
    },
    /// Run a Monte-Carlo study described by a JSON config.
    Simulate {
        /// Study configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV and JSON reports.
        #[arg(long)]
        out: PathBuf,
    },
    /// Numerically derive the true parameter values for a scenario.
    Truth {
        #[arg(long)]
        scenario: u8,
        #[arg(long)]
        tau: f64,
        /// Counterfactual sample size per repeat.
        #[arg(long, default_value_t = 10_000)]
        m: usize,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Analyze {
            input,
            time,
            event,
            group,
            method,
            tau,
            boot,
            seed,
            outcome_model,
            treatment_model,
            stabilized,
            caliper,
            ci,
        } => {
            let req = AnalyzeRequest {
                input: input.display().to_string(),
                time,
                event,
                group,
                method,
                tau,
                boot,
                seed,
                outcome_model: parse_columns(&outcome_model),
                treatment_model: parse_columns(&treatment_model),
                stabilized,
                caliper,
                ci: match ci {
                    CiKind::Normal => CiMethod::Normal,
                    CiKind::Percentile => CiMethod::Percentile,
                },
            };
            let report = run_analyze(&req)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        Command::Simulate { config, out } => {
            let grid = run_simulate(&config, &out)?;
            print!("{grid}");
            Ok(())
        }
        Command::Truth {
            scenario,
            tau,
            m,
            repeats,
            seed,
        } => {
            let report = run_truth(scenario, tau, m, repeats, seed)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CmdError::Estimation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
