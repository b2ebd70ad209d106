//! Windowed first-order co-occurrence counting.
//!
//! For every occurrence of a target word, every vocabulary token within
//! `window_k` positions on either side (inside the same sentence unless
//! configured otherwise) contributes one co-occurrence event. Out-of-
//! vocabulary tokens occupy positions but never produce events, so distances
//! reflect the actual text layout. Counting is exact integer arithmetic and
//! merges associatively, which makes it embarrassingly parallel over
//! documents with results independent of partitioning.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::corpus::{TokenizedDocument, Vocabulary};

/// Documents processed per parallel batch.
#[cfg(feature = "parallel")]
const BATCH_SIZE: usize = 1024;

/// Smallest per-thread work unit; merging an accumulator costs a vocab-sized
/// pass, so splits below this waste more than they parallelize.
#[cfg(feature = "parallel")]
const MIN_SPLIT: usize = 64;

#[derive(Debug, Error)]
pub enum CooccurError {
    #[error("window size must be at least 1")]
    InvalidWindow,
    #[error("duplicate target set label {label:?}")]
    DuplicateLabel { label: String },
    #[error("target set {label:?} is empty")]
    EmptyTargetSet { label: String },
    #[error("target word {word:?} in set {label:?} must be non-empty and free of whitespace")]
    InvalidTargetWord { label: String, word: String },
    #[error("target sets {first:?} and {second:?} both contain {word:?}")]
    OverlappingTargetSets {
        first: String,
        second: String,
        word: String,
    },
    #[error("no counts row for target set {label:?}")]
    UnknownRow { label: String },
    #[error("context set {context:?} is empty")]
    EmptyContext { context: String },
    #[error("context set {context:?} contains the target word {word:?}")]
    ContextOverlapsTargets { context: String, word: String },
    #[error("undefined context: no word of {context:?} is in the vocabulary")]
    UndefinedContext { context: String },
    #[error("cannot merge counts built from different target sets or configs")]
    MergeMismatch,
    #[error("row labels must match set labels and totals must equal pair-count sums")]
    InvalidCounts,
    #[error("invalid counts file at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("failed to {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        source: io::Error,
    },
}

/// Windowing configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CooccurConfig {
    /// Tokens considered on each side of a target occurrence.
    pub window_k: usize,
    /// When true (default), windows never cross sentence boundaries.
    pub respect_sentence_boundaries: bool,
}

impl Default for CooccurConfig {
    fn default() -> Self {
        CooccurConfig {
            window_k: 10,
            respect_sentence_boundaries: true,
        }
    }
}

impl CooccurConfig {
    fn validate(&self) -> Result<(), CooccurError> {
        if self.window_k == 0 {
            return Err(CooccurError::InvalidWindow);
        }
        Ok(())
    }
}

/// A labelled set of target words to count contexts for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    pub label: String,
    pub words: BTreeSet<String>,
}

impl TargetSet {
    pub fn new<L, W, I>(label: L, words: I) -> Self
    where
        L: Into<String>,
        W: Into<String>,
        I: IntoIterator<Item = W>,
    {
        TargetSet {
            label: label.into(),
            words: words.into_iter().map(Into::into).collect(),
        }
    }
}

/// Per-target-set co-occurrence counts: context word -> event count, plus
/// the row total. `total_pairs` always equals the sum of `pair_counts`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountRow {
    pub pair_counts: BTreeMap<String, u64>,
    pub total_pairs: u64,
}

/// Co-occurrence counts for one or more disjoint target sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetCounts {
    sets: BTreeMap<String, BTreeSet<String>>,
    rows: BTreeMap<String, CountRow>,
}

impl TargetCounts {
    /// Builds counts from raw parts. Row labels must match set labels and
    /// every row total must equal the sum of its pair counts.
    pub fn from_parts(
        sets: BTreeMap<String, BTreeSet<String>>,
        rows: BTreeMap<String, CountRow>,
    ) -> Result<Self, CooccurError> {
        if sets.keys().ne(rows.keys()) {
            return Err(CooccurError::InvalidCounts);
        }
        for row in rows.values() {
            if row.pair_counts.values().sum::<u64>() != row.total_pairs {
                return Err(CooccurError::InvalidCounts);
            }
        }
        Ok(TargetCounts { sets, rows })
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(String::as_str)
    }

    pub fn row(&self, label: &str) -> Option<&CountRow> {
        self.rows.get(label)
    }

    pub fn set_words(&self, label: &str) -> Option<&BTreeSet<String>> {
        self.sets.get(label)
    }

    pub fn sets(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.sets
    }

    pub fn rows(&self) -> &BTreeMap<String, CountRow> {
        &self.rows
    }

    /// Sums the rows selected by `labels` into one pooled row.
    pub fn pooled_row(&self, labels: &[String]) -> Result<CountRow, CooccurError> {
        let mut pooled = CountRow::default();
        for label in labels {
            let row = self
                .rows
                .get(label)
                .ok_or_else(|| CooccurError::UnknownRow {
                    label: label.clone(),
                })?;
            pooled.total_pairs += row.total_pairs;
            for (word, count) in &row.pair_counts {
                *pooled.pair_counts.entry(word.clone()).or_insert(0) += count;
            }
        }
        Ok(pooled)
    }

    /// Adds the counts of `other`, which must have been produced with the
    /// same target sets. Counting a document set equals merging the counts
    /// of any partition of it.
    pub fn merge(&mut self, other: &TargetCounts) -> Result<(), CooccurError> {
        if self.sets != other.sets {
            return Err(CooccurError::MergeMismatch);
        }
        for (label, row) in &other.rows {
            let target = self
                .rows
                .get_mut(label)
                .ok_or(CooccurError::MergeMismatch)?;
            target.total_pairs += row.total_pairs;
            for (word, count) in &row.pair_counts {
                *target.pair_counts.entry(word.clone()).or_insert(0) += count;
            }
        }
        Ok(())
    }
}

/// Per-context-word event totals over *all* vocabulary centers, i.e. the
/// column sums of the full (never materialized) co-occurrence matrix. Used
/// to estimate the corpus-wide context probability p(C) for standalone PMI.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextTotals {
    counts: Vec<u64>,
    total_events: u64,
}

impl ContextTotals {
    pub fn count_of(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn total_events(&self) -> u64 {
        self.total_events
    }
}

/// The 2x2 contingency table for target rows A and B against a context set.
///
/// `f_ac` counts context-set words in windows of A, `f_anc` all other
/// co-occurrence events of A; likewise for B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub f_ac: u64,
    pub f_anc: u64,
    pub f_bc: u64,
    pub f_bnc: u64,
    pub label_a: String,
    pub label_b: String,
    pub label_c: String,
}

impl ContingencyTable {
    pub fn cells(&self) -> [u64; 4] {
        [self.f_ac, self.f_anc, self.f_bc, self.f_bnc]
    }

    pub fn total_a(&self) -> u64 {
        self.f_ac + self.f_anc
    }

    pub fn total_b(&self) -> u64 {
        self.f_bc + self.f_bnc
    }

    /// The same table with the roles of A and B exchanged.
    pub fn swapped(&self) -> ContingencyTable {
        ContingencyTable {
            f_ac: self.f_bc,
            f_anc: self.f_bnc,
            f_bc: self.f_ac,
            f_bnc: self.f_anc,
            label_a: self.label_b.clone(),
            label_b: self.label_a.clone(),
            label_c: self.label_c.clone(),
        }
    }
}

/// A selection of count rows pooled under one display label.
#[derive(Debug, Clone)]
pub struct RowGroup {
    pub label: String,
    pub rows: Vec<String>,
}

impl RowGroup {
    /// A group consisting of the single row named `label`.
    pub fn single(label: impl Into<String>) -> Self {
        let label = label.into();
        RowGroup {
            rows: vec![label.clone()],
            label,
        }
    }

    pub fn new<L, R, I>(label: L, rows: I) -> Self
    where
        L: Into<String>,
        R: Into<String>,
        I: IntoIterator<Item = R>,
    {
        RowGroup {
            label: label.into(),
            rows: rows.into_iter().map(Into::into).collect(),
        }
    }
}

struct CountPlan {
    row_of: HashMap<u32, usize>,
    window: usize,
    respect_boundaries: bool,
}

struct RowAccum {
    pair: Vec<u64>,
    total: u64,
}

struct Accum {
    rows: Vec<RowAccum>,
}

impl Accum {
    fn new(n_rows: usize, vocab_len: usize) -> Self {
        Accum {
            rows: (0..n_rows)
                .map(|_| RowAccum {
                    pair: vec![0; vocab_len],
                    total: 0,
                })
                .collect(),
        }
    }

    fn merge(mut self, other: Accum) -> Accum {
        for (mine, theirs) in self.rows.iter_mut().zip(other.rows) {
            mine.total += theirs.total;
            for (a, b) in mine.pair.iter_mut().zip(theirs.pair) {
                *a += b;
            }
        }
        self
    }

    fn count_doc(&mut self, doc: &TokenizedDocument, plan: &CountPlan, vocab: &Vocabulary) {
        let mut flat: Vec<Option<u32>> = Vec::new();
        if plan.respect_boundaries {
            for sentence in &doc.sentences {
                flat.clear();
                flat.extend(sentence.iter().map(|t| vocab.id_of(t)));
                self.count_span(&flat, plan);
            }
        } else {
            flat.extend(
                doc.sentences
                    .iter()
                    .flat_map(|s| s.iter())
                    .map(|t| vocab.id_of(t)),
            );
            self.count_span(&flat, plan);
        }
    }

    fn count_span(&mut self, seq: &[Option<u32>], plan: &CountPlan) {
        for (i, slot) in seq.iter().enumerate() {
            let Some(id) = slot else { continue };
            let Some(&row) = plan.row_of.get(id) else {
                continue;
            };
            let lo = i.saturating_sub(plan.window);
            let hi = (i + plan.window).min(seq.len() - 1);
            let acc = &mut self.rows[row];
            for (j, ctx) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                if let Some(cid) = ctx {
                    acc.pair[*cid as usize] += 1;
                    acc.total += 1;
                }
            }
        }
    }
}

fn validate_sets(sets: &[TargetSet]) -> Result<(), CooccurError> {
    let mut seen_labels: BTreeSet<&str> = BTreeSet::new();
    for set in sets {
        if set.label.is_empty() || set.label.chars().any(char::is_whitespace) {
            return Err(CooccurError::InvalidTargetWord {
                label: set.label.clone(),
                word: set.label.clone(),
            });
        }
        if !seen_labels.insert(&set.label) {
            return Err(CooccurError::DuplicateLabel {
                label: set.label.clone(),
            });
        }
        if set.words.is_empty() {
            return Err(CooccurError::EmptyTargetSet {
                label: set.label.clone(),
            });
        }
        for word in &set.words {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(CooccurError::InvalidTargetWord {
                    label: set.label.clone(),
                    word: word.clone(),
                });
            }
        }
    }
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for set in sets {
        for word in &set.words {
            if let Some(first) = owner.insert(word, &set.label) {
                return Err(CooccurError::OverlappingTargetSets {
                    first: first.to_string(),
                    second: set.label.clone(),
                    word: word.clone(),
                });
            }
        }
    }
    Ok(())
}

fn make_plan(sets: &[TargetSet], config: &CooccurConfig, vocab: &Vocabulary) -> CountPlan {
    let mut row_of = HashMap::new();
    for (row, set) in sets.iter().enumerate() {
        for word in &set.words {
            if let Some(id) = vocab.id_of(word) {
                row_of.insert(id, row);
            }
        }
    }
    CountPlan {
        row_of,
        window: config.window_k,
        respect_boundaries: config.respect_sentence_boundaries,
    }
}

fn finalize(accum: Accum, sets: &[TargetSet], vocab: &Vocabulary) -> TargetCounts {
    let mut rows = BTreeMap::new();
    let mut set_map = BTreeMap::new();
    for (set, acc) in sets.iter().zip(accum.rows) {
        let mut pair_counts = BTreeMap::new();
        for (id, &count) in acc.pair.iter().enumerate() {
            if count > 0 {
                pair_counts.insert(vocab.word(id as u32).to_string(), count);
            }
        }
        rows.insert(
            set.label.clone(),
            CountRow {
                pair_counts,
                total_pairs: acc.total,
            },
        );
        set_map.insert(set.label.clone(), set.words.clone());
    }
    TargetCounts {
        sets: set_map,
        rows,
    }
}

/// Counts windowed co-occurrence events of every target set against the
/// vocabulary. The result is independent of how documents are partitioned
/// across threads.
#[cfg(feature = "parallel")]
pub fn count_target_contexts<I>(
    docs: I,
    sets: &[TargetSet],
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<TargetCounts, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    config.validate()?;
    validate_sets(sets)?;
    let plan = make_plan(sets, config, vocab);
    let mut total = Accum::new(sets.len(), vocab.len());
    let mut iter = docs.into_iter();
    loop {
        let batch: Vec<I::Item> = iter.by_ref().take(BATCH_SIZE).collect();
        if batch.is_empty() {
            break;
        }
        let partial = batch
            .par_iter()
            .with_min_len(MIN_SPLIT)
            .fold(
                || Accum::new(sets.len(), vocab.len()),
                |mut acc, doc| {
                    acc.count_doc(doc.borrow(), &plan, vocab);
                    acc
                },
            )
            .reduce(|| Accum::new(sets.len(), vocab.len()), Accum::merge);
        total = total.merge(partial);
    }
    Ok(finalize(total, sets, vocab))
}

/// Sequential fallback of [`count_target_contexts`]; always available and
/// bit-identical to the parallel path.
pub fn count_target_contexts_seq<I>(
    docs: I,
    sets: &[TargetSet],
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<TargetCounts, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument>,
{
    config.validate()?;
    validate_sets(sets)?;
    let plan = make_plan(sets, config, vocab);
    let mut total = Accum::new(sets.len(), vocab.len());
    for doc in docs {
        total.count_doc(doc.borrow(), &plan, vocab);
    }
    Ok(finalize(total, sets, vocab))
}

#[cfg(not(feature = "parallel"))]
pub fn count_target_contexts<I>(
    docs: I,
    sets: &[TargetSet],
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<TargetCounts, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    count_target_contexts_seq(docs, sets, config, vocab)
}

struct CtxAccum {
    counts: Vec<u64>,
    total: u64,
}

impl CtxAccum {
    fn new(vocab_len: usize) -> Self {
        CtxAccum {
            counts: vec![0; vocab_len],
            total: 0,
        }
    }

    fn merge(mut self, other: CtxAccum) -> CtxAccum {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.total += other.total;
        self
    }

    fn count_doc(&mut self, doc: &TokenizedDocument, config: &CooccurConfig, vocab: &Vocabulary) {
        let mut flat: Vec<Option<u32>> = Vec::new();
        if config.respect_sentence_boundaries {
            for sentence in &doc.sentences {
                flat.clear();
                flat.extend(sentence.iter().map(|t| vocab.id_of(t)));
                self.count_span(&flat, config.window_k);
            }
        } else {
            flat.extend(
                doc.sentences
                    .iter()
                    .flat_map(|s| s.iter())
                    .map(|t| vocab.id_of(t)),
            );
            self.count_span(&flat, config.window_k);
        }
    }

    fn count_span(&mut self, seq: &[Option<u32>], window: usize) {
        for (i, slot) in seq.iter().enumerate() {
            if slot.is_none() {
                continue;
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(seq.len() - 1);
            for (j, ctx) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                if j == i {
                    continue;
                }
                if let Some(cid) = ctx {
                    self.counts[*cid as usize] += 1;
                    self.total += 1;
                }
            }
        }
    }
}

/// Counts, for every vocabulary word, how often it appears as a context of
/// *any* vocabulary center. These are the marginals of the full event space,
/// the denominator material for standalone list PMI.
#[cfg(feature = "parallel")]
pub fn count_context_events<I>(
    docs: I,
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<ContextTotals, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    config.validate()?;
    let mut total = CtxAccum::new(vocab.len());
    let mut iter = docs.into_iter();
    loop {
        let batch: Vec<I::Item> = iter.by_ref().take(BATCH_SIZE).collect();
        if batch.is_empty() {
            break;
        }
        let partial = batch
            .par_iter()
            .with_min_len(MIN_SPLIT)
            .fold(
                || CtxAccum::new(vocab.len()),
                |mut acc, doc| {
                    acc.count_doc(doc.borrow(), config, vocab);
                    acc
                },
            )
            .reduce(|| CtxAccum::new(vocab.len()), CtxAccum::merge);
        total = total.merge(partial);
    }
    Ok(ContextTotals {
        counts: total.counts,
        total_events: total.total,
    })
}

/// Sequential fallback of [`count_context_events`].
pub fn count_context_events_seq<I>(
    docs: I,
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<ContextTotals, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument>,
{
    config.validate()?;
    let mut total = CtxAccum::new(vocab.len());
    for doc in docs {
        total.count_doc(doc.borrow(), config, vocab);
    }
    Ok(ContextTotals {
        counts: total.counts,
        total_events: total.total,
    })
}

#[cfg(not(feature = "parallel"))]
pub fn count_context_events<I>(
    docs: I,
    config: &CooccurConfig,
    vocab: &Vocabulary,
) -> Result<ContextTotals, CooccurError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    count_context_events_seq(docs, config, vocab)
}

/// Assembles the contingency table for context set `context_words` from the
/// rows selected by `a` and `b`. `in_vocab` decides vocabulary membership of
/// context words; a context entirely outside the vocabulary is an error,
/// while an in-vocabulary context that never co-occurred yields valid zero
/// cells.
pub fn build_contingency<F>(
    counts: &TargetCounts,
    a: &RowGroup,
    b: &RowGroup,
    context_label: &str,
    context_words: &BTreeSet<String>,
    in_vocab: F,
) -> Result<ContingencyTable, CooccurError>
where
    F: Fn(&str) -> bool,
{
    if context_words.is_empty() {
        return Err(CooccurError::EmptyContext {
            context: context_label.to_string(),
        });
    }
    for group in [a, b] {
        for row in &group.rows {
            let words = counts
                .set_words(row)
                .ok_or_else(|| CooccurError::UnknownRow { label: row.clone() })?;
            if let Some(word) = context_words.iter().find(|w| words.contains(*w)) {
                return Err(CooccurError::ContextOverlapsTargets {
                    context: context_label.to_string(),
                    word: word.clone(),
                });
            }
        }
    }
    if !context_words.iter().any(|w| in_vocab(w)) {
        return Err(CooccurError::UndefinedContext {
            context: context_label.to_string(),
        });
    }
    let row_a = counts.pooled_row(&a.rows)?;
    let row_b = counts.pooled_row(&b.rows)?;
    let f_ac: u64 = context_words
        .iter()
        .filter_map(|w| row_a.pair_counts.get(w))
        .sum();
    let f_bc: u64 = context_words
        .iter()
        .filter_map(|w| row_b.pair_counts.get(w))
        .sum();
    Ok(ContingencyTable {
        f_ac,
        f_anc: row_a.total_pairs - f_ac,
        f_bc,
        f_bnc: row_b.total_pairs - f_bc,
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        label_c: context_label.to_string(),
    })
}

/// How target rows were laid out when counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// One row per target list (labels are the list names).
    Pooled,
    /// One row per individual target word (needed by the permutation test).
    PerWord,
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountMode::Pooled => write!(f, "pooled"),
            CountMode::PerWord => write!(f, "per-word"),
        }
    }
}

/// The self-contained on-disk counts artifact.
///
/// Besides the counts it records the counting configuration and the
/// vocabulary membership, so bias reports can be reproduced from this file
/// and the word lists alone — in particular, an in-vocabulary context with
/// zero observed events stays distinguishable from an out-of-vocabulary one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountsFile {
    pub config: CooccurConfig,
    pub mode: CountMode,
    pub vocab_words: BTreeSet<String>,
    pub counts: TargetCounts,
}

const COUNTS_MAGIC: &str = "#pmibias-counts\tv1";

impl CountsFile {
    /// [`build_contingency`] against this file's recorded vocabulary.
    pub fn contingency(
        &self,
        a: &RowGroup,
        b: &RowGroup,
        context_label: &str,
        context_words: &BTreeSet<String>,
    ) -> Result<ContingencyTable, CooccurError> {
        build_contingency(&self.counts, a, b, context_label, context_words, |w| {
            self.vocab_words.contains(w)
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CooccurError> {
        let file = fs::File::create(path).map_err(|source| CooccurError::Io {
            action: "create",
            path: path.to_path_buf(),
            source,
        })?;
        let mut out = BufWriter::new(file);
        self.write(&mut out)
            .and_then(|()| out.flush())
            .map_err(|source| CooccurError::Io {
                action: "write",
                path: path.to_path_buf(),
                source,
            })
    }

    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{COUNTS_MAGIC}")?;
        writeln!(out, "#window\t{}", self.config.window_k)?;
        let boundaries = if self.config.respect_sentence_boundaries {
            "sentence"
        } else {
            "document"
        };
        writeln!(out, "#boundaries\t{boundaries}")?;
        writeln!(out, "#mode\t{}", self.mode)?;
        for (label, words) in self.counts.sets() {
            let joined = words.iter().cloned().collect::<Vec<_>>().join(" ");
            writeln!(out, "#set\t{label}\t{joined}")?;
        }
        for (label, row) in self.counts.rows() {
            writeln!(out, "#total\t{label}\t{}", row.total_pairs)?;
        }
        for word in &self.vocab_words {
            writeln!(out, "#vocab\t{word}")?;
        }
        for (label, row) in self.counts.rows() {
            for (word, count) in &row.pair_counts {
                writeln!(out, "{label}\t{word}\t{count}")?;
            }
        }
        writeln!(out, "#end")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CooccurError> {
        let file = fs::File::open(path).map_err(|source| CooccurError::Io {
            action: "open",
            path: path.to_path_buf(),
            source,
        })?;
        Self::read(BufReader::new(file))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self, CooccurError> {
        let fail = |line: usize, reason: &str| CooccurError::Format {
            line,
            reason: reason.to_string(),
        };
        let mut lines = reader.lines().enumerate();

        let (_, first) = lines
            .next()
            .ok_or_else(|| fail(1, "empty file, expected counts header"))?;
        let first = first.map_err(|e| fail(1, &e.to_string()))?;
        if first != COUNTS_MAGIC {
            return Err(fail(1, "not a pmibias counts file or unsupported version"));
        }

        let mut window: Option<usize> = None;
        let mut boundaries: Option<bool> = None;
        let mut mode: Option<CountMode> = None;
        let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut totals: BTreeMap<String, u64> = BTreeMap::new();
        let mut vocab_words: BTreeSet<String> = BTreeSet::new();
        let mut pairs: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        let mut terminated = false;

        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| fail(line_no, &e.to_string()))?;
            if terminated {
                return Err(fail(line_no, "content after #end marker"));
            }
            if line == "#end" {
                terminated = true;
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut fields = rest.split('\t');
                let directive = fields.next().unwrap_or("");
                match directive {
                    "window" => {
                        let value = fields
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| fail(line_no, "invalid #window value"))?;
                        window = Some(value);
                    }
                    "boundaries" => match fields.next() {
                        Some("sentence") => boundaries = Some(true),
                        Some("document") => boundaries = Some(false),
                        _ => return Err(fail(line_no, "invalid #boundaries value")),
                    },
                    "mode" => match fields.next() {
                        Some("pooled") => mode = Some(CountMode::Pooled),
                        Some("per-word") => mode = Some(CountMode::PerWord),
                        _ => return Err(fail(line_no, "invalid #mode value")),
                    },
                    "set" => {
                        let label = fields
                            .next()
                            .ok_or_else(|| fail(line_no, "missing set label"))?;
                        let words = fields
                            .next()
                            .ok_or_else(|| fail(line_no, "missing set words"))?;
                        let word_set: BTreeSet<String> = words
                            .split(' ')
                            .filter(|w| !w.is_empty())
                            .map(String::from)
                            .collect();
                        if word_set.is_empty() {
                            return Err(fail(line_no, "empty target set"));
                        }
                        if sets.insert(label.to_string(), word_set).is_some() {
                            return Err(fail(line_no, "duplicate #set label"));
                        }
                    }
                    "total" => {
                        let label = fields
                            .next()
                            .ok_or_else(|| fail(line_no, "missing total label"))?;
                        let value: u64 = fields
                            .next()
                            .and_then(|v| v.parse().ok())
                            .ok_or_else(|| fail(line_no, "invalid #total value"))?;
                        if totals.insert(label.to_string(), value).is_some() {
                            return Err(fail(line_no, "duplicate #total label"));
                        }
                    }
                    "vocab" => {
                        let word = fields
                            .next()
                            .ok_or_else(|| fail(line_no, "missing vocab word"))?;
                        if !vocab_words.insert(word.to_string()) {
                            return Err(fail(line_no, "duplicate vocab word"));
                        }
                    }
                    other => {
                        return Err(fail(line_no, &format!("unknown directive #{other}")));
                    }
                }
                continue;
            }
            let mut fields = line.split('\t');
            let label = fields
                .next()
                .filter(|f| !f.is_empty())
                .ok_or_else(|| fail(line_no, "missing target set label"))?;
            let word = fields
                .next()
                .ok_or_else(|| fail(line_no, "missing context word"))?;
            let count: u64 = fields
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| fail(line_no, "missing or invalid count"))?;
            if fields.next().is_some() {
                return Err(fail(line_no, "too many fields"));
            }
            if !totals.contains_key(label) {
                return Err(fail(
                    line_no,
                    &format!("pair row for undeclared set {label:?}"),
                ));
            }
            let row = pairs.entry(label.to_string()).or_default();
            if row.insert(word.to_string(), count).is_some() {
                return Err(fail(line_no, "duplicate pair entry"));
            }
        }

        if !terminated {
            return Err(fail(0, "truncated file: missing #end marker"));
        }
        let window = window.ok_or_else(|| fail(0, "missing #window header"))?;
        let boundaries = boundaries.ok_or_else(|| fail(0, "missing #boundaries header"))?;
        let mode = mode.ok_or_else(|| fail(0, "missing #mode header"))?;
        if window == 0 {
            return Err(fail(0, "window must be at least 1"));
        }
        if sets.keys().ne(totals.keys()) {
            return Err(fail(0, "#set and #total sections disagree on labels"));
        }

        let mut rows = BTreeMap::new();
        for (label, total_pairs) in &totals {
            let pair_counts = pairs.remove(label).unwrap_or_default();
            let sum: u64 = pair_counts.values().sum();
            if sum != *total_pairs {
                return Err(fail(
                    0,
                    &format!(
                        "row {label:?}: pair counts sum to {sum} but total record says {total_pairs}"
                    ),
                ));
            }
            for word in pair_counts.keys() {
                if !vocab_words.contains(word) {
                    return Err(fail(
                        0,
                        &format!("context word {word:?} not in vocab section"),
                    ));
                }
            }
            rows.insert(
                label.clone(),
                CountRow {
                    pair_counts,
                    total_pairs: *total_pairs,
                },
            );
        }

        Ok(CountsFile {
            config: CooccurConfig {
                window_k: window,
                respect_sentence_boundaries: boundaries,
            },
            mode,
            vocab_words,
            counts: TargetCounts { sets, rows },
        })
    }
}
