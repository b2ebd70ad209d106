//! The `count` subcommand: corpus -> vocabulary -> co-occurrence counts.

use std::fs;
use std::io::Write;

use pmibias::cooccur::{count_target_contexts, CooccurConfig, CountMode, CountsFile, TargetSet};
use pmibias::corpus::{build_vocabulary, IngestFormat};
use pmibias::wordlists::WordLists;

use crate::errors::CliError;
use crate::pipeline::{PassStats, TokenizedStream};
use crate::CountArgs;

pub fn run(args: CountArgs) -> Result<(), CliError> {
    let wordlists = WordLists::load(&args.wordlists)?;
    let format: IngestFormat = args.corpus_format.into();
    let config = CooccurConfig {
        window_k: args.window,
        respect_sentence_boundaries: !args.cross_sentences,
    };

    // Pass 1: vocabulary.
    let mut stats = PassStats::default();
    let mut io_error = None;
    let vocab = {
        let stream = TokenizedStream::open(
            &args.corpus,
            format,
            args.min_doc_tokens,
            &mut stats,
            &mut io_error,
        )?;
        build_vocabulary(stream, args.min_count)?
    };
    if let Some(err) = io_error.take() {
        return Err(err.into());
    }

    let (mode, sets) = target_sets(&wordlists, args.per_word);

    // Pass 2: counting.
    let counts = {
        let mut second = PassStats::default();
        let stream = TokenizedStream::open(
            &args.corpus,
            format,
            args.min_doc_tokens,
            &mut second,
            &mut io_error,
        )?;
        count_target_contexts(stream, &sets, &config, &vocab)?
    };
    if let Some(err) = io_error.take() {
        return Err(err.into());
    }

    let counts_file = CountsFile {
        config,
        mode,
        vocab_words: vocab.iter().map(|(_, w, _)| w.to_string()).collect(),
        counts,
    };
    counts_file.save(&args.output)?;

    if let Some(vocab_path) = &args.vocab_out {
        let mut out = fs::File::create(vocab_path)?;
        vocab.write_tsv(&mut out)?;
        out.flush()?;
    }

    for warning in &stats.warnings {
        eprintln!("warning: {warning}");
    }
    for word in wordlists
        .all_targets()
        .iter()
        .filter(|w| !vocab.contains(w))
    {
        eprintln!(
            "warning: target word {word:?} is not in the vocabulary; it contributes zero counts"
        );
    }
    if stats.docs_kept == 0 {
        eprintln!("warning: corpus produced no documents after preprocessing; counts are empty");
    }
    eprintln!(
        "documents: {} read, {} kept; tokens: {}; records skipped: {}",
        stats.docs_read, stats.docs_kept, stats.tokens_kept, stats.skipped_records
    );
    eprintln!(
        "vocabulary: {} words (min count {}); wrote {} count rows to {}",
        vocab.len(),
        args.min_count,
        counts_file.counts.rows().len(),
        args.output.display()
    );
    Ok(())
}

fn target_sets(wordlists: &WordLists, per_word: bool) -> (CountMode, Vec<TargetSet>) {
    if per_word {
        let sets = wordlists
            .all_targets()
            .into_iter()
            .map(|w| TargetSet::new(w.clone(), [w]))
            .collect();
        (CountMode::PerWord, sets)
    } else {
        let sets = vec![
            TargetSet::new("A", wordlists.a.iter().cloned()),
            TargetSet::new("B", wordlists.b.iter().cloned()),
        ];
        (CountMode::Pooled, sets)
    }
}
