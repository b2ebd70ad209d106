//! Corpus ingestion, normalization and vocabulary construction.
//!
//! Preprocessing contract: text is sentence-split on `.`, `!` or `?` followed
//! by whitespace (or end of text), every non-alphanumeric character acts as a
//! token delimiter, tokens are lowercased, and documents with fewer than
//! `min_doc_tokens` tokens are dropped. The vocabulary keeps words with at
//! least `min_count` occurrences and assigns dense ids by descending count,
//! ties broken lexicographically.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of documents processed per parallel batch.
#[cfg(feature = "parallel")]
const BATCH_SIZE: usize = 1024;

/// Smallest per-thread work unit for the counting fold.
#[cfg(feature = "parallel")]
const MIN_SPLIT: usize = 64;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("invalid vocabulary file at line {line}: {reason}")]
    VocabFormat { line: usize, reason: String },
}

/// A raw document as produced by ingestion. The text may be empty; such
/// documents are dropped by [`preprocess`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

/// A normalized document: lowercase alphanumeric tokens grouped by sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub id: String,
    pub sentences: Vec<Vec<String>>,
}

impl TokenizedDocument {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Supported on-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestFormat {
    /// Each file is one document.
    PlainText,
    /// Each line of each file is one document.
    DocPerLine,
    /// Each line is a JSON object with `id` and `text` fields.
    JsonLines,
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    id: String,
    text: String,
}

/// Streaming reader over the documents of a file or directory.
///
/// Files are visited in lexicographic path order, lines in file order, so
/// iteration order is deterministic. Malformed JSON records are skipped and
/// counted; I/O failures are yielded as errors and stop the stream.
pub struct DocumentReader {
    format: IngestFormat,
    files: std::vec::IntoIter<PathBuf>,
    current: Option<LineCursor>,
    skipped: u64,
    warnings: Vec<String>,
    failed: bool,
}

struct LineCursor {
    path: PathBuf,
    lines: io::Lines<BufReader<fs::File>>,
    line_no: usize,
}

const MAX_WARNINGS: usize = 20;

impl DocumentReader {
    /// Number of malformed records skipped so far.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// Human-readable messages for the first skipped records.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    fn skip(&mut self, message: String) {
        self.skipped += 1;
        if self.warnings.len() < MAX_WARNINGS {
            self.warnings.push(message);
        }
    }

    fn open_next(&mut self) -> Option<Result<(), CorpusError>> {
        let path = self.files.next()?;
        match fs::File::open(&path) {
            Ok(file) => {
                self.current = Some(LineCursor {
                    path,
                    lines: BufReader::new(file).lines(),
                    line_no: 0,
                });
                Some(Ok(()))
            }
            Err(source) => Some(Err(CorpusError::Io { path, source })),
        }
    }
}

impl Iterator for DocumentReader {
    type Item = Result<RawDocument, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            if self.format == IngestFormat::PlainText {
                let path = self.files.next()?;
                return match fs::read_to_string(&path) {
                    Ok(text) => Some(Ok(RawDocument {
                        id: path.display().to_string(),
                        text,
                    })),
                    Err(source) => {
                        self.failed = true;
                        Some(Err(CorpusError::Io { path, source }))
                    }
                };
            }

            if self.current.is_none() {
                match self.open_next() {
                    None => return None,
                    Some(Ok(())) => {}
                    Some(Err(e)) => {
                        self.failed = true;
                        return Some(Err(e));
                    }
                }
            }

            let cursor = self.current.as_mut().expect("cursor was just opened");
            match cursor.lines.next() {
                None => {
                    self.current = None;
                    continue;
                }
                Some(Err(source)) => {
                    let path = cursor.path.clone();
                    self.failed = true;
                    return Some(Err(CorpusError::Io { path, source }));
                }
                Some(Ok(line)) => {
                    cursor.line_no += 1;
                    match self.format {
                        IngestFormat::DocPerLine => {
                            let id = format!("{}:{}", cursor.path.display(), cursor.line_no);
                            return Some(Ok(RawDocument { id, text: line }));
                        }
                        IngestFormat::JsonLines => {
                            match serde_json::from_str::<JsonRecord>(&line) {
                                Ok(rec) => {
                                    return Some(Ok(RawDocument {
                                        id: rec.id,
                                        text: rec.text,
                                    }))
                                }
                                Err(e) => {
                                    let msg = format!(
                                        "{}:{}: skipping malformed record: {e}",
                                        cursor.path.display(),
                                        cursor.line_no
                                    );
                                    self.skip(msg);
                                    continue;
                                }
                            }
                        }
                        IngestFormat::PlainText => unreachable!(),
                    }
                }
            }
        }
    }
}

/// Opens `source` (a file or a directory walked recursively) for streaming.
pub fn ingest(source: &Path, format: IngestFormat) -> Result<DocumentReader, CorpusError> {
    let meta = fs::metadata(source).map_err(|source_err| CorpusError::Io {
        path: source.to_path_buf(),
        source: source_err,
    })?;
    let mut files = Vec::new();
    if meta.is_dir() {
        collect_files(source, &mut files)?;
        files.sort();
    } else {
        files.push(source.to_path_buf());
    }
    Ok(DocumentReader {
        format,
        files: files.into_iter(),
        current: None,
        skipped: 0,
        warnings: Vec::new(),
        failed: false,
    })
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), CorpusError> {
    let entries = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Normalizes one document. Returns `None` when the document has no tokens
/// or fewer than `min_doc_tokens` of them.
pub fn preprocess(doc: &RawDocument, min_doc_tokens: usize) -> Option<TokenizedDocument> {
    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut sentence: Vec<String> = Vec::new();
    let mut token = String::new();

    let mut chars = doc.text.chars().peekable();
    while let Some(c) = chars.next() {
        let at_boundary =
            matches!(c, '.' | '!' | '?') && chars.peek().is_none_or(|next| next.is_whitespace());
        if at_boundary {
            flush_token(&mut token, &mut sentence);
            flush_sentence(&mut sentence, &mut sentences);
        } else if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                if lc.is_alphanumeric() {
                    token.push(lc);
                } else {
                    flush_token(&mut token, &mut sentence);
                }
            }
        } else {
            flush_token(&mut token, &mut sentence);
        }
    }
    flush_token(&mut token, &mut sentence);
    flush_sentence(&mut sentence, &mut sentences);

    let total: usize = sentences.iter().map(Vec::len).sum();
    if total == 0 || total < min_doc_tokens {
        return None;
    }
    Some(TokenizedDocument {
        id: doc.id.clone(),
        sentences,
    })
}

fn flush_token(token: &mut String, sentence: &mut Vec<String>) {
    if !token.is_empty() {
        sentence.push(std::mem::take(token));
    }
}

fn flush_sentence(sentence: &mut Vec<String>, sentences: &mut Vec<Vec<String>>) {
    if !sentence.is_empty() {
        sentences.push(std::mem::take(sentence));
    }
}

/// A frequency-filtered vocabulary with dense word ids.
///
/// Ids run `0..len()` ordered by descending corpus count, ties broken
/// lexicographically, so two runs over the same corpus assign identical ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn id_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Entries in id order as `(id, word, count)`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &str, u64)> {
        self.words
            .iter()
            .zip(&self.counts)
            .enumerate()
            .map(|(id, (w, &c))| (id as u32, w.as_str(), c))
    }

    /// Writes the vocabulary as `word<TAB>id<TAB>count` sorted by id.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (id, word, count) in self.iter() {
            writeln!(out, "{word}\t{id}\t{count}")?;
        }
        Ok(())
    }

    /// Reads a vocabulary written by [`Vocabulary::write_tsv`]. The stored
    /// ids must be dense and ascending. `min_count` is inferred as the
    /// smallest stored count.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self, CorpusError> {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut index = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CorpusError::VocabFormat {
                line: i + 1,
                reason: e.to_string(),
            })?;
            let mut fields = line.split('\t');
            let err = |reason: &str| CorpusError::VocabFormat {
                line: i + 1,
                reason: reason.to_string(),
            };
            let word = fields.next().ok_or_else(|| err("missing word"))?;
            let id: usize = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| err("missing or invalid id"))?;
            let count: u64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| err("missing or invalid count"))?;
            if fields.next().is_some() {
                return Err(err("too many fields"));
            }
            if id != words.len() {
                return Err(err("ids must be dense and ascending"));
            }
            if index.insert(word.to_string(), id as u32).is_some() {
                return Err(err("duplicate word"));
            }
            words.push(word.to_string());
            counts.push(count);
        }
        let min_count = counts.iter().copied().min().unwrap_or(1).max(1);
        Ok(Vocabulary {
            words,
            counts,
            index,
            min_count,
        })
    }

    #[cfg(test)]
    pub(crate) fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Builds the vocabulary of all words occurring at least `min_count` times.
pub fn build_vocabulary<I>(docs: I, min_count: u64) -> Result<Vocabulary, CorpusError>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    if min_count == 0 {
        return Err(CorpusError::InvalidMinCount);
    }
    let counts = count_words(docs);

    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .collect();
    entries.sort_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));

    let mut words = Vec::with_capacity(entries.len());
    let mut occ = Vec::with_capacity(entries.len());
    let mut index = HashMap::with_capacity(entries.len());
    for (id, (word, count)) in entries.into_iter().enumerate() {
        index.insert(word.clone(), id as u32);
        words.push(word);
        occ.push(count);
    }
    Ok(Vocabulary {
        words,
        counts: occ,
        index,
        min_count,
    })
}

fn add_doc_counts(acc: &mut HashMap<String, u64>, doc: &TokenizedDocument) {
    for sentence in &doc.sentences {
        for token in sentence {
            *acc.entry(token.clone()).or_insert(0) += 1;
        }
    }
}

#[cfg(feature = "parallel")]
fn count_words<I>(docs: I) -> HashMap<String, u64>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument> + Sync,
{
    let mut iter = docs.into_iter();
    let mut total: HashMap<String, u64> = HashMap::new();
    loop {
        let batch: Vec<I::Item> = iter.by_ref().take(BATCH_SIZE).collect();
        if batch.is_empty() {
            break;
        }
        let partial = batch
            .par_iter()
            .with_min_len(MIN_SPLIT)
            .fold(HashMap::new, |mut acc, doc| {
                add_doc_counts(&mut acc, doc.borrow());
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (w, c) in b {
                    *a.entry(w).or_insert(0) += c;
                }
                a
            });
        for (w, c) in partial {
            *total.entry(w).or_insert(0) += c;
        }
    }
    total
}

#[cfg(not(feature = "parallel"))]
fn count_words<I>(docs: I) -> HashMap<String, u64>
where
    I: IntoIterator,
    I::Item: Borrow<TokenizedDocument>,
{
    let mut total: HashMap<String, u64> = HashMap::new();
    for doc in docs {
        add_doc_counts(&mut total, doc.borrow());
    }
    total
}
