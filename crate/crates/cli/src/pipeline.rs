//! Streaming corpus pass shared by the `count` subcommand: ingest, then
//! preprocess, with counters for the run summary. I/O failures surface after
//! the consuming fold finishes, via the error slot.

use std::path::Path;

use pmibias::corpus::{
    ingest, preprocess, CorpusError, DocumentReader, IngestFormat, TokenizedDocument,
};

#[derive(Debug, Default)]
pub struct PassStats {
    pub docs_read: u64,
    pub docs_kept: u64,
    pub tokens_kept: u64,
    pub skipped_records: u64,
    pub warnings: Vec<String>,
}

pub struct TokenizedStream<'a> {
    reader: DocumentReader,
    min_doc_tokens: usize,
    stats: &'a mut PassStats,
    error: &'a mut Option<CorpusError>,
}

impl<'a> TokenizedStream<'a> {
    pub fn open(
        corpus: &Path,
        format: IngestFormat,
        min_doc_tokens: usize,
        stats: &'a mut PassStats,
        error: &'a mut Option<CorpusError>,
    ) -> Result<Self, CorpusError> {
        Ok(TokenizedStream {
            reader: ingest(corpus, format)?,
            min_doc_tokens,
            stats,
            error,
        })
    }
}

impl Iterator for TokenizedStream<'_> {
    type Item = TokenizedDocument;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.reader.next()? {
                Err(e) => {
                    *self.error = Some(e);
                    return None;
                }
                Ok(raw) => {
                    self.stats.docs_read += 1;
                    if let Some(doc) = preprocess(&raw, self.min_doc_tokens) {
                        self.stats.docs_kept += 1;
                        self.stats.tokens_kept += doc.token_count() as u64;
                        return Some(doc);
                    }
                }
            }
        }
    }
}

impl Drop for TokenizedStream<'_> {
    fn drop(&mut self) {
        self.stats.skipped_records = self.reader.skipped();
        self.stats
            .warnings
            .extend(self.reader.warnings().iter().cloned());
    }
}
