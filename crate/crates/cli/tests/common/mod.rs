//! Shared helpers for the CLI integration and acceptance suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pmibias::cooccur::{CooccurConfig, CountMode, CountRow, CountsFile, TargetCounts, TargetSet};
use pmibias::corpus::{TokenizedDocument, Vocabulary};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn run_cli(args: &[&str]) -> Output {
    run_cli_with_env(args, &[])
}

pub fn run_cli_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pmibias"));
    cmd.args(args);
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("failed to spawn pmibias binary")
}

pub fn assert_success(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed (status {:?})\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Brute-force co-occurrence counting, independent of the library's counting
/// path: a plain double loop over token positions with the window predicate
/// evaluated directly. Returns a counts artifact using the same container
/// types so it can be serialized for golden comparison.
pub fn oracle_counts_file(
    docs: &[TokenizedDocument],
    sets: &[TargetSet],
    config: CooccurConfig,
    mode: CountMode,
    vocab: &Vocabulary,
) -> CountsFile {
    let mut pair: BTreeMap<String, BTreeMap<String, u64>> = sets
        .iter()
        .map(|s| (s.label.clone(), BTreeMap::new()))
        .collect();
    let mut totals: BTreeMap<String, u64> = sets.iter().map(|s| (s.label.clone(), 0)).collect();

    for doc in docs {
        let spans: Vec<Vec<&str>> = if config.respect_sentence_boundaries {
            doc.sentences
                .iter()
                .map(|s| s.iter().map(String::as_str).collect())
                .collect()
        } else {
            vec![doc
                .sentences
                .iter()
                .flat_map(|s| s.iter().map(String::as_str))
                .collect()]
        };
        for span in spans {
            for i in 0..span.len() {
                if !vocab.contains(span[i]) {
                    continue;
                }
                let Some(label) = sets
                    .iter()
                    .find(|s| s.words.contains(span[i]))
                    .map(|s| s.label.clone())
                else {
                    continue;
                };
                #[allow(clippy::needless_range_loop)]
                for j in 0..span.len() {
                    if i == j || i.abs_diff(j) > config.window_k || !vocab.contains(span[j]) {
                        continue;
                    }
                    *pair
                        .get_mut(&label)
                        .unwrap()
                        .entry(span[j].to_string())
                        .or_insert(0) += 1;
                    *totals.get_mut(&label).unwrap() += 1;
                }
            }
        }
    }

    let rows: BTreeMap<String, CountRow> = sets
        .iter()
        .map(|s| {
            (
                s.label.clone(),
                CountRow {
                    pair_counts: pair[&s.label].clone(),
                    total_pairs: totals[&s.label],
                },
            )
        })
        .collect();
    let set_map: BTreeMap<String, BTreeSet<String>> = sets
        .iter()
        .map(|s| (s.label.clone(), s.words.clone()))
        .collect();
    CountsFile {
        config,
        mode,
        vocab_words: vocab.iter().map(|(_, w, _)| w.to_string()).collect(),
        counts: TargetCounts::from_parts(set_map, rows).expect("oracle parts are consistent"),
    }
}
