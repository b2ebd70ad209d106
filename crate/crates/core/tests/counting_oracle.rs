//! Counting correctness against a brute-force reference.
//!
//! The oracle walks every ordered token pair of every span and applies the
//! window predicate directly on string tokens, with none of the id-mapping
//! or accumulator machinery of the library path.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmibias::cooccur::{
    count_context_events, count_target_contexts, count_target_contexts_seq, CooccurConfig,
    TargetSet,
};
use pmibias::corpus::{build_vocabulary, TokenizedDocument, Vocabulary};

type OracleRows = BTreeMap<String, (BTreeMap<String, u64>, u64)>;

fn oracle_counts(
    docs: &[TokenizedDocument],
    sets: &[TargetSet],
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> OracleRows {
    let mut rows: OracleRows = sets
        .iter()
        .map(|s| (s.label.clone(), (BTreeMap::new(), 0)))
        .collect();
    let set_of = |word: &str| -> Option<&str> {
        sets.iter()
            .find(|s| s.words.contains(word))
            .map(|s| s.label.as_str())
    };
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
                let Some(label) = set_of(span[i]) else {
                    continue;
                };
                #[allow(clippy::needless_range_loop)]
                for j in 0..span.len() {
                    if i == j {
                        continue;
                    }
                    let dist = i.abs_diff(j);
                    if dist > config.window_k {
                        continue;
                    }
                    if !vocab.contains(span[j]) {
                        continue;
                    }
                    let row = rows.get_mut(label).unwrap();
                    *row.0.entry(span[j].to_string()).or_insert(0) += 1;
                    row.1 += 1;
                }
            }
        }
    }
    rows
}

fn oracle_context_totals(
    docs: &[TokenizedDocument],
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> (BTreeMap<String, u64>, u64) {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    let mut total = 0u64;
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
                #[allow(clippy::needless_range_loop)]
                for j in 0..span.len() {
                    if i == j || i.abs_diff(j) > config.window_k || !vocab.contains(span[j]) {
                        continue;
                    }
                    *counts.entry(span[j].to_string()).or_insert(0) += 1;
                    total += 1;
                }
            }
        }
    }
    (counts, total)
}

fn random_corpus(rng: &mut ChaCha8Rng, max_tokens: usize) -> Vec<TokenizedDocument> {
    let n_types = rng.random_range(15..60);
    let words: Vec<String> = (0..n_types).map(|i| format!("w{i}")).collect();
    let mut docs = Vec::new();
    let mut tokens = 0usize;
    let mut d = 0;
    while tokens < max_tokens {
        let n_sent = rng.random_range(1..6);
        let sentences: Vec<Vec<String>> = (0..n_sent)
            .map(|_| {
                let len = rng.random_range(1..25);
                (0..len)
                    .map(|_| {
                        // Quadratic skew keeps low-index words frequent so
                        // min-count filtering produces genuine OOV tokens.
                        let r: f64 = rng.random_range(0.0..1.0);
                        let idx = ((n_types as f64) * r * r) as usize;
                        words[idx.min(n_types - 1)].clone()
                    })
                    .collect()
            })
            .collect();
        tokens += sentences.iter().map(Vec::len).sum::<usize>();
        docs.push(TokenizedDocument {
            id: format!("d{d}"),
            sentences,
        });
        d += 1;
    }
    docs
}

fn random_sets(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> Vec<TargetSet> {
    let mut available: Vec<String> = vocab.iter().map(|(_, w, _)| w.to_string()).collect();
    let n_sets = rng.random_range(1..4).min(available.len());
    let mut sets = Vec::new();
    for s in 0..n_sets {
        let take = rng.random_range(1..4).min(available.len());
        if take == 0 || available.is_empty() {
            break;
        }
        let mut words = BTreeSet::new();
        for _ in 0..take {
            let i = rng.random_range(0..available.len());
            words.insert(available.swap_remove(i));
            if available.is_empty() {
                break;
            }
        }
        sets.push(TargetSet {
            label: format!("S{s}"),
            words,
        });
    }
    sets
}

#[test]
fn counting_matches_brute_force_on_randomized_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut compared = 0;
    for round in 0..60 {
        let docs = random_corpus(&mut rng, 2_000);
        let min_count = if round % 3 == 0 { 2 } else { 1 };
        let vocab = build_vocabulary(docs.clone(), min_count).unwrap();
        if vocab.is_empty() {
            continue;
        }
        let sets = random_sets(&mut rng, &vocab);
        if sets.is_empty() {
            continue;
        }
        for window in [1usize, 2, 5, 10] {
            let config = CooccurConfig {
                window_k: window,
                respect_sentence_boundaries: round % 2 == 0,
            };
            let got = count_target_contexts(docs.clone(), &sets, &config, &vocab).unwrap();
            let want = oracle_counts(&docs, &sets, &config, &vocab);
            for set in &sets {
                let row = got.row(&set.label).unwrap();
                let (oracle_pairs, oracle_total) = &want[&set.label];
                assert_eq!(
                    &row.pair_counts, oracle_pairs,
                    "window {window} round {round}"
                );
                assert_eq!(row.total_pairs, *oracle_total);
            }
            compared += 1;
        }
    }
    assert!(
        compared >= 50,
        "only {compared} corpus/window combinations compared"
    );
}

#[test]
fn sequential_path_matches_oracle_too() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..10 {
        let docs = random_corpus(&mut rng, 1_500);
        let vocab = build_vocabulary(docs.clone(), 1).unwrap();
        let sets = random_sets(&mut rng, &vocab);
        if sets.is_empty() {
            continue;
        }
        let config = CooccurConfig {
            window_k: 5,
            respect_sentence_boundaries: true,
        };
        let got = count_target_contexts_seq(docs.clone(), &sets, &config, &vocab).unwrap();
        let want = oracle_counts(&docs, &sets, &config, &vocab);
        for set in &sets {
            let row = got.row(&set.label).unwrap();
            assert_eq!(row.pair_counts, want[&set.label].0);
        }
    }
}

#[test]
fn context_event_totals_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xABBA);
    for round in 0..12 {
        let docs = random_corpus(&mut rng, 1_500);
        let vocab = build_vocabulary(docs.clone(), if round % 2 == 0 { 1 } else { 2 }).unwrap();
        let config = CooccurConfig {
            window_k: [1, 2, 5, 10][round % 4],
            respect_sentence_boundaries: round % 3 != 0,
        };
        let got = count_context_events(docs.clone(), &config, &vocab).unwrap();
        let (oracle, oracle_total) = oracle_context_totals(&docs, &config, &vocab);
        assert_eq!(got.total_events(), oracle_total);
        for (id, word, _) in vocab.iter() {
            assert_eq!(
                got.count_of(id),
                oracle.get(word).copied().unwrap_or(0),
                "word {word}"
            );
        }
    }
}

#[test]
fn counting_is_independent_of_document_partitioning() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
    let docs = random_corpus(&mut rng, 3_000);
    let vocab = build_vocabulary(docs.clone(), 1).unwrap();
    let sets = random_sets(&mut rng, &vocab);
    let config = CooccurConfig::default();
    let whole = count_target_contexts(docs.clone(), &sets, &config, &vocab).unwrap();
    for split_at in [1, docs.len() / 3, docs.len() / 2, docs.len() - 1] {
        let (left, right) = docs.split_at(split_at);
        let mut merged = count_target_contexts(left.to_vec(), &sets, &config, &vocab).unwrap();
        merged
            .merge(&count_target_contexts(right.to_vec(), &sets, &config, &vocab).unwrap())
            .unwrap();
        assert_eq!(merged, whole, "split at {split_at}");
    }
}

#[cfg(feature = "parallel")]
#[test]
fn counting_is_independent_of_thread_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xFADE);
    let docs = random_corpus(&mut rng, 4_000);
    let vocab = build_vocabulary(docs.clone(), 1).unwrap();
    let sets = random_sets(&mut rng, &vocab);
    let config = CooccurConfig::default();

    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| count_target_contexts(docs.clone(), &sets, &config, &vocab).unwrap())
    };
    let one = run_with(1);
    let four = run_with(4);
    let seq = count_target_contexts_seq(docs.clone(), &sets, &config, &vocab).unwrap();
    assert_eq!(one, four);
    assert_eq!(one, seq);
}
