//! The `permtest` subcommand: for every context set, the permutation test
//! over target-word re-partitions next to the odds-ratio z-test on the same
//! pooled table.
//!
//! Re-partitions re-assign *words*, not pooled counts, so the counts file
//! must carry per-word rows. Zero cells can appear under re-partitions even
//! when the observed table has none, so with `--smoothing 0` the statistic
//! falls back to 0.5-cell smoothing to stay finite and comparable across all
//! splits.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;

use pmibias::cooccur::{CountMode, CountsFile, TargetCounts};
use pmibias::stats::{permutation_test, two_sided_p};
use pmibias::wordlists::WordLists;

use crate::cmd_bias::check_consistency;
use crate::errors::CliError;
use crate::{OutputFormat, PermtestArgs, SeModeArg};

pub fn run(args: PermtestArgs) -> Result<(), CliError> {
    let counts_file = CountsFile::load(&args.counts)?;
    if counts_file.mode != CountMode::PerWord {
        return Err(CliError::Config(
            "counts file lacks per-word rows; re-run `pmibias count` with --per-word".to_string(),
        ));
    }
    let wordlists = WordLists::load(&args.wordlists)?;
    check_consistency(&counts_file, &wordlists)?;
    if !args.smoothing.is_finite() || args.smoothing < 0.0 {
        return Err(CliError::Config(format!(
            "--smoothing must be non-negative and finite, got {}",
            args.smoothing
        )));
    }

    let smoothing = if args.smoothing > 0.0 {
        args.smoothing
    } else {
        0.5
    };
    if args.smoothing == 0.0 {
        eprintln!("note: applying 0.5-cell smoothing inside the permutation statistic");
    }

    let a_words: Vec<String> = wordlists.a.iter().cloned().collect();
    let b_words: Vec<String> = wordlists.b.iter().cloned().collect();
    let targets = wordlists.all_targets();

    let mut lines: Vec<(String, f64, f64, f64)> = Vec::new();
    let mut exact_any = false;
    for (name, context_words) in &wordlists.contexts {
        if let Some(word) = context_words.iter().find(|w| targets.contains(*w)) {
            return Err(CliError::Config(format!(
                "context set {name:?} contains the target word {word:?}"
            )));
        }
        if !context_words
            .iter()
            .any(|w| counts_file.vocab_words.contains(w))
        {
            eprintln!("warning: context {name:?} skipped: not in the vocabulary");
            continue;
        }

        let stat = |a: &[String], b: &[String]| {
            log_odds_of_split(&counts_file.counts, a, b, context_words, smoothing)
        };
        let perm = permutation_test(stat, &a_words, &b_words, args.n_perm, args.seed)?;
        exact_any |= perm.exact;

        let or_p = z_test_p(
            &counts_file.counts,
            &a_words,
            &b_words,
            context_words,
            smoothing,
            args.se_mode,
        );
        lines.push((name.clone(), perm.observed, perm.p_value, or_p));
    }

    let mut buf = Vec::new();
    match args.format {
        OutputFormat::Tsv => {
            writeln!(buf, "context\tbias\tperm_p\tor_p")?;
            for (name, bias, perm_p, or_p) in &lines {
                writeln!(buf, "{name}\t{bias}\t{perm_p}\t{or_p}")?;
            }
        }
        OutputFormat::Json => {
            let objects: Vec<_> = lines
                .iter()
                .map(|(name, bias, perm_p, or_p)| {
                    serde_json::json!({
                        "context": name,
                        "bias": bias,
                        "perm_p": perm_p,
                        "or_p": or_p,
                    })
                })
                .collect();
            writeln!(buf, "{}", serde_json::Value::Array(objects))?;
        }
    }
    match &args.output {
        Some(path) => fs::write(path, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    eprintln!(
        "permtest: {} contexts, n_perm {}, seed {}, mode {}",
        lines.len(),
        args.n_perm,
        args.seed,
        if exact_any {
            "exact enumeration"
        } else {
            "sampled"
        }
    );
    Ok(())
}

/// Pools the per-word rows of one split and returns the smoothed log odds
/// ratio. Total over all re-partitions: smoothing keeps every cell positive.
fn log_odds_of_split(
    counts: &TargetCounts,
    a: &[String],
    b: &[String],
    context_words: &BTreeSet<String>,
    smoothing: f64,
) -> f64 {
    let (f_ac, total_a) = pool(counts, a, context_words);
    let (f_bc, total_b) = pool(counts, b, context_words);
    let ac = f_ac as f64 + smoothing;
    let anc = (total_a - f_ac) as f64 + smoothing;
    let bc = f_bc as f64 + smoothing;
    let bnc = (total_b - f_bc) as f64 + smoothing;
    ((ac * bnc) / (anc * bc)).ln()
}

fn pool(counts: &TargetCounts, words: &[String], context_words: &BTreeSet<String>) -> (u64, u64) {
    let mut joint = 0u64;
    let mut total = 0u64;
    for word in words {
        let row = counts
            .row(word)
            .expect("consistency checked: every target word has a row");
        total += row.total_pairs;
        joint += context_words
            .iter()
            .filter_map(|c| row.pair_counts.get(c))
            .sum::<u64>();
    }
    (joint, total)
}

fn z_test_p(
    counts: &TargetCounts,
    a: &[String],
    b: &[String],
    context_words: &BTreeSet<String>,
    smoothing: f64,
    se_mode: SeModeArg,
) -> f64 {
    let (f_ac, total_a) = pool(counts, a, context_words);
    let (f_bc, total_b) = pool(counts, b, context_words);
    let ac = f_ac as f64 + smoothing;
    let anc = (total_a - f_ac) as f64 + smoothing;
    let bc = f_bc as f64 + smoothing;
    let bnc = (total_b - f_bc) as f64 + smoothing;
    let bias = ((ac * bnc) / (anc * bc)).ln();
    let variance = match se_mode {
        SeModeArg::Full => 1.0 / ac + 1.0 / bc + 1.0 / anc + 1.0 / bnc,
        SeModeArg::Approx => 1.0 / ac + 1.0 / bc,
    };
    two_sided_p(bias / variance.sqrt())
}
