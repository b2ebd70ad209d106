//! The `correlate` subcommand: join a bias report with ground-truth
//! proportions, report plain and inverse-variance-weighted Pearson r, and
//! emit plot-ready scatter data.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;

use pmibias::stats::correlation_study;

use crate::errors::CliError;
use crate::report::parse_tsv;
use crate::{CorrelateArgs, OutputFormat};

pub fn run(args: CorrelateArgs) -> Result<(), CliError> {
    let report_text = fs::read_to_string(&args.report)?;
    let rows = parse_tsv(&report_text, &args.report.display().to_string())?;
    let truth = read_ground_truth(&args.ground_truth)?;

    let mut joined: Vec<(String, f64, f64, f64, f64, f64)> = Vec::new();
    let mut skipped_rows: Vec<String> = Vec::new();
    let mut report_labels: BTreeMap<&str, ()> = BTreeMap::new();
    for row in &rows {
        report_labels.insert(&row.context, ());
        let Some(&proportion) = truth.get(&row.context) else {
            continue;
        };
        match (row.bias, row.se, row.ci_low, row.ci_high) {
            (Some(bias), Some(se), Some(lo), Some(hi)) if se > 0.0 => {
                joined.push((row.context.clone(), proportion, bias, se, lo, hi));
            }
            _ => skipped_rows.push(row.context.clone()),
        }
    }

    let unmatched_truth: Vec<&String> = truth
        .keys()
        .filter(|label| !report_labels.contains_key(label.as_str()))
        .collect();
    for label in &unmatched_truth {
        eprintln!("warning: ground-truth label {label:?} has no report row");
    }
    let unmatched_report: Vec<&str> = report_labels
        .keys()
        .copied()
        .filter(|label| !truth.contains_key(*label))
        .collect();
    for label in &unmatched_report {
        eprintln!("warning: report context {label:?} has no ground-truth entry");
    }
    for label in &skipped_rows {
        eprintln!("warning: context {label:?} skipped (no usable estimate)");
    }

    if joined.len() < 3 {
        return Err(CliError::Config(format!(
            "need at least 3 joined rows to correlate, got {}",
            joined.len()
        )));
    }

    let proportions: Vec<f64> = joined.iter().map(|j| j.1).collect();
    let biases: Vec<f64> = joined.iter().map(|j| j.2).collect();
    let weights: Vec<f64> = joined.iter().map(|j| 1.0 / (j.3 * j.3)).collect();
    let result = correlation_study(&proportions, &biases, Some(&weights))?;
    let weighted_r = result.weighted_r.expect("weights were supplied");

    let mut out = std::io::stdout().lock();
    match args.format {
        OutputFormat::Tsv => {
            writeln!(out, "n\t{}", result.n)?;
            writeln!(out, "r\t{}", result.r)?;
            writeln!(out, "weighted_r\t{weighted_r}")?;
        }
        OutputFormat::Json => {
            let summary = serde_json::json!({
                "n": result.n,
                "r": result.r,
                "weighted_r": weighted_r,
            });
            writeln!(out, "{summary}")?;
        }
    }

    if let Some(path) = &args.scatter_out {
        let mut scatter = Vec::new();
        writeln!(scatter, "proportion\tbias\tci_low\tci_high")?;
        for (_, proportion, bias, _, lo, hi) in &joined {
            writeln!(scatter, "{proportion}\t{bias}\t{lo}\t{hi}")?;
        }
        fs::write(path, scatter)?;
    }
    Ok(())
}

/// Ground truth CSV: `label,percent` with percents in [0, 100]; an optional
/// header line is recognized by its non-numeric second field.
fn read_ground_truth(path: &std::path::Path) -> Result<BTreeMap<String, f64>, CliError> {
    let text = fs::read_to_string(path)?;
    let mut truth = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((label, value)) = line.split_once(',') else {
            return Err(CliError::Config(format!(
                "{}:{}: expected label,percent",
                path.display(),
                no + 1
            )));
        };
        let label = label.trim();
        let value = value.trim();
        let Ok(percent) = value.parse::<f64>() else {
            if no == 0 {
                continue; // header line
            }
            return Err(CliError::Config(format!(
                "{}:{}: invalid percent {value:?}",
                path.display(),
                no + 1
            )));
        };
        if !(0.0..=100.0).contains(&percent) {
            return Err(CliError::Config(format!(
                "{}:{}: percent {percent} outside [0, 100]",
                path.display(),
                no + 1
            )));
        }
        if truth.insert(label.to_string(), percent / 100.0).is_some() {
            return Err(CliError::Config(format!(
                "{}:{}: duplicate label {label:?}",
                path.display(),
                no + 1
            )));
        }
    }
    if truth.is_empty() {
        return Err(CliError::Config(format!(
            "{}: no ground-truth rows",
            path.display()
        )));
    }
    Ok(truth)
}
