//! The `bias` subcommand: counts file -> per-context bias report.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;

use pmibias::bias::{estimate, BiasError, BiasMethod, EstimateOptions};
use pmibias::cooccur::{CooccurError, CountMode, CountsFile, RowGroup};
use pmibias::stats::bh_adjust;
use pmibias::wordlists::WordLists;

use crate::errors::CliError;
use crate::report::{write_json, write_tsv, ReportRow};
use crate::{BiasArgs, OutputFormat};

pub fn run(args: BiasArgs) -> Result<(), CliError> {
    let counts_file = CountsFile::load(&args.counts)?;
    let wordlists = WordLists::load(&args.wordlists)?;
    check_consistency(&counts_file, &wordlists)?;

    let opts = EstimateOptions {
        method: BiasMethod::LogOddsRatio,
        se_mode: args.se_mode.into(),
        smoothing: args.smoothing,
        ci_level: args.ci_level,
    };
    validate_options(&opts)?;

    let (group_a, group_b) = row_groups(&counts_file, &wordlists);
    let mut rows = Vec::new();
    let mut warnings = 0u64;
    for (name, context_words) in &wordlists.contexts {
        let row = context_row(&counts_file, &group_a, &group_b, name, context_words, &opts)?;
        if row.flags.iter().any(|f| f != "smoothed") {
            warnings += 1;
            eprintln!("warning: context {name:?} flagged: {}", row.flags.join(","));
        }
        rows.push(row);
    }

    // One BH pass across all testable rows of the run.
    let ps: Vec<f64> = rows.iter().filter_map(|r| r.p).collect();
    if !ps.is_empty() {
        let qs = bh_adjust(&ps)?;
        let mut qi = qs.into_iter();
        for row in rows.iter_mut() {
            if row.p.is_some() {
                row.q = qi.next();
            }
        }
    }

    let mut buf = Vec::new();
    match args.format {
        OutputFormat::Tsv => write_tsv(&mut buf, &rows)?,
        OutputFormat::Json => write_json(&mut buf, &rows)?,
    }
    match &args.output {
        Some(path) => fs::write(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    eprintln!("bias report: {} contexts, {} flagged", rows.len(), warnings);
    Ok(())
}

fn validate_options(opts: &EstimateOptions) -> Result<(), CliError> {
    if !(opts.ci_level > 0.0 && opts.ci_level < 1.0) {
        return Err(CliError::Config(format!(
            "--ci-level must lie strictly between 0 and 1, got {}",
            opts.ci_level
        )));
    }
    if !opts.smoothing.is_finite() || opts.smoothing < 0.0 {
        return Err(CliError::Config(format!(
            "--smoothing must be non-negative and finite, got {}",
            opts.smoothing
        )));
    }
    Ok(())
}

/// The word lists must be the ones the counts were produced with, otherwise
/// pooled rows would silently mean something else.
pub fn check_consistency(counts_file: &CountsFile, wordlists: &WordLists) -> Result<(), CliError> {
    let sets = counts_file.counts.sets();
    match counts_file.mode {
        CountMode::Pooled => {
            let ok = sets.len() == 2
                && sets.get("A") == Some(&wordlists.a)
                && sets.get("B") == Some(&wordlists.b);
            if !ok {
                return Err(CliError::Config(
                    "counts file was produced with different word lists than --wordlists"
                        .to_string(),
                ));
            }
        }
        CountMode::PerWord => {
            let expected: BTreeSet<String> = wordlists.all_targets();
            let have: BTreeSet<String> = sets.keys().cloned().collect();
            if expected != have {
                return Err(CliError::Config(
                    "counts file rows do not match the target words of --wordlists".to_string(),
                ));
            }
        }
    }
    Ok(())
}

pub fn row_groups(counts_file: &CountsFile, wordlists: &WordLists) -> (RowGroup, RowGroup) {
    match counts_file.mode {
        CountMode::Pooled => (RowGroup::single("A"), RowGroup::single("B")),
        CountMode::PerWord => (
            RowGroup::new("A", wordlists.a.iter().cloned()),
            RowGroup::new("B", wordlists.b.iter().cloned()),
        ),
    }
}

fn context_row(
    counts_file: &CountsFile,
    group_a: &RowGroup,
    group_b: &RowGroup,
    name: &str,
    context_words: &BTreeSet<String>,
    opts: &EstimateOptions,
) -> Result<ReportRow, CliError> {
    let table = match counts_file.contingency(group_a, group_b, name, context_words) {
        Ok(table) => table,
        Err(CooccurError::UndefinedContext { .. }) => {
            // Row totals are still known; the context cells are undefined.
            let row_a = counts_file.counts.pooled_row(&group_a.rows)?;
            let row_b = counts_file.counts.pooled_row(&group_b.rows)?;
            return Ok(ReportRow {
                context: name.to_string(),
                f_ac: 0,
                f_anc: row_a.total_pairs,
                f_bc: 0,
                f_bnc: row_b.total_pairs,
                bias: None,
                se: None,
                ci_low: None,
                ci_high: None,
                p: None,
                q: None,
                ratio_a: None,
                ratio_b: None,
                flags: vec!["undefined-context".to_string()],
            });
        }
        Err(other) => return Err(other.into()),
    };

    let mut row = ReportRow {
        context: name.to_string(),
        f_ac: table.f_ac,
        f_anc: table.f_anc,
        f_bc: table.f_bc,
        f_bnc: table.f_bnc,
        bias: None,
        se: None,
        ci_low: None,
        ci_high: None,
        p: None,
        q: None,
        ratio_a: None,
        ratio_b: None,
        flags: Vec::new(),
    };
    match estimate(&table, opts) {
        Ok(est) => {
            row.bias = Some(est.bias);
            row.se = Some(est.se);
            row.ci_low = Some(est.ci_low);
            row.ci_high = Some(est.ci_high);
            row.p = Some(est.p_value);
            row.ratio_a = Some(est.ratio_a);
            row.ratio_b = Some(est.ratio_b);
            if opts.smoothing > 0.0 {
                row.flags.push("smoothed".to_string());
            }
        }
        Err(BiasError::DegenerateCell(_)) | Err(BiasError::NoTargetEvents(_)) => {
            row.flags.push("degenerate".to_string());
        }
        Err(other) => return Err(other.into()),
    }
    Ok(row)
}
