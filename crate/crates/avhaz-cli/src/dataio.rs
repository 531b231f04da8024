//! Cohort CSV reading and writing.
//!
//! Dialect: comma-separated, UTF-8, header row required, decimal points, no
//! thousands separators, no quoting. Missing values are rejected with their
//! row and column location.

use anyhow::{anyhow, bail, Context, Result};
use avhaz::{CohortDataset, Subject};
use std::io::{BufRead, Write};

/// Column roles for reading a cohort file.
pub struct CohortColumns<'a> {
    pub time: &'a str,
    pub event: &'a str,
    pub group: &'a str,
}

/// Parse a cohort CSV. Every column other than the three designated ones
/// becomes a covariate, in header order.
pub fn read_cohort<R: BufRead>(reader: R, cols: &CohortColumns) -> Result<CohortDataset> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| anyhow!("empty input: a header row is required"))?
        .context("reading header")?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();

    let find = |name: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| anyhow!("column '{name}' not found in header"))
    };
    let time_idx = find(cols.time)?;
    let event_idx = find(cols.event)?;
    let group_idx = find(cols.group)?;
    if time_idx == event_idx || time_idx == group_idx || event_idx == group_idx {
        bail!("time, event and group must be distinct columns");
    }

    let covariate_cols: Vec<usize> = (0..names.len())
        .filter(|&i| i != time_idx && i != event_idx && i != group_idx)
        .collect();
    let covariate_names: Vec<String> =
        covariate_cols.iter().map(|&i| names[i].clone()).collect();

    let mut subjects = Vec::new();
    for (line_no, line) in lines.enumerate() {
        let row_no = line_no + 2; // 1-based, after the header
        let line = line.with_context(|| format!("reading row {row_no}"))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            bail!(
                "row {row_no}: expected {} fields, found {}",
                names.len(),
                fields.len()
            );
        }
        let parse = |idx: usize| -> Result<f64> {
            let raw = fields[idx].trim();
            if raw.is_empty() {
                bail!(
                    "row {row_no}, column '{}': missing value (complete cases required)",
                    names[idx]
                );
            }
            raw.parse::<f64>().map_err(|_| {
                anyhow!("row {row_no}, column '{}': cannot parse '{raw}' as a number", names[idx])
            })
        };

        let time = parse(time_idx)?;
        let event_raw = parse(event_idx)?;
        let event = if event_raw == 0.0 {
            false
        } else if event_raw == 1.0 {
            true
        } else {
            bail!(
                "row {row_no}, column '{}': event must be 0 or 1, got {event_raw}",
                names[event_idx]
            )
        };
        let group_raw = parse(group_idx)?;
        let group = if group_raw == 0.0 {
            0u8
        } else if group_raw == 1.0 {
            1u8
        } else {
            bail!(
                "row {row_no}, column '{}': group must be 0 or 1, got {group_raw}",
                names[group_idx]
            )
        };
        let covariates = covariate_cols
            .iter()
            .map(|&i| parse(i))
            .collect::<Result<Vec<f64>>>()?;

        subjects.push(
            Subject::new(time, event, group, covariates)
                .map_err(|e| anyhow!("row {row_no}: {e}"))?,
        );
    }

    CohortDataset::new(subjects, covariate_names).map_err(|e| anyhow!("{e}"))
}

/// Write a cohort as CSV with full round-trip float precision.
pub fn write_cohort<W: Write>(w: &mut W, dataset: &CohortDataset) -> Result<()> {
    write!(w, "time,event,group")?;
    for name in dataset.covariate_names() {
        write!(w, ",{name}")?;
    }
    writeln!(w)?;
    for s in dataset.subjects() {
        write!(w, "{},{},{}", s.observed_time, u8::from(s.event), s.group)?;
        for x in &s.covariates {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Materialize `name^2` columns referenced by the model lists, returning the
/// augmented dataset and a name resolver for both models.
pub fn materialize_squares(
    dataset: &CohortDataset,
    wanted: &[String],
) -> Result<CohortDataset> {
    let mut names = dataset.covariate_names().to_vec();
    let mut extra_bases = Vec::new();
    for term in wanted {
        if let Some(base) = term.strip_suffix("^2") {
            if names.iter().any(|n| n == term) {
                continue; // already materialized
            }
            let idx = dataset
                .covariate_names()
                .iter()
                .position(|n| n == base)
                .ok_or_else(|| anyhow!("column '{base}' (for '{term}') not found"))?;
            extra_bases.push(idx);
            names.push(term.clone());
        }
    }
    if extra_bases.is_empty() {
        return Ok(dataset.clone());
    }
    let subjects = dataset
        .subjects()
        .iter()
        .map(|s| {
            let mut covs = s.covariates.clone();
            for &idx in &extra_bases {
                covs.push(s.covariates[idx] * s.covariates[idx]);
            }
            Subject::new(s.observed_time, s.event, s.group, covs).expect("valid row")
        })
        .collect();
    CohortDataset::new(subjects, names).map_err(|e| anyhow!("{e}"))
}

/// Resolve a list of model column names (possibly with `^2` suffixes) to
/// covariate indices of the materialized dataset.
pub fn resolve_columns(dataset: &CohortDataset, wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|name| {
            dataset
                .covariate_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| anyhow!("model column '{name}' not found among covariates"))
        })
        .collect()
}
