//! PMI-based word-association bias measurement for text corpora.
//!
//! Given two target word lists `A` and `B` (say, female and male terms) and a
//! context word set `C` (say, an occupation), the bias of `C` is the log ratio
//! of the probabilities of finding `C` in a window around `A` versus around
//! `B`. Estimated from the 2x2 contingency table of windowed co-occurrence
//! counts, the bias is approximately a log odds ratio, which carries a
//! standard error, a confidence interval and a z-test against the null of no
//! bias. The crate covers the full study workflow:
//!
//! * [`corpus`] — ingestion, normalization, sentence splitting, and
//!   frequency-filtered vocabulary construction;
//! * [`cooccur`] — windowed co-occurrence counting for target sets,
//!   contingency-table assembly, and a versioned counts-file format;
//! * [`bias`] — PMI, exact and log-odds-ratio bias, standard errors,
//!   confidence intervals, significance, and the conditional-probability
//!   interpretation;
//! * [`stats`] — normal CDF/quantile, Benjamini-Hochberg correction, plain
//!   and weighted Pearson correlation, and a permutation test over target
//!   word re-partitions;
//! * [`wordlists`] — the JSON word-list file format.
//!
//! Counting and permutation sampling are data-parallel over documents and
//! iterations when the `parallel` feature (on by default) is enabled. The
//! sequential variants are always compiled and produce identical results, so
//! outputs never depend on thread count.

pub mod bias;
pub mod cooccur;
pub mod corpus;
pub mod stats;
pub mod wordlists;

pub use bias::{
    bias_exact, bias_log_odds, check_approximation, confidence_interval, estimate, interpret,
    significance, standard_error, BiasError, BiasEstimate, BiasMethod, EstimateOptions,
    InterpretedBias, SeMode,
};
pub use cooccur::{
    build_contingency, count_context_events, count_target_contexts, ContingencyTable,
    CooccurConfig, CooccurError, CountMode, CountRow, CountsFile, RowGroup, TargetCounts,
    TargetSet,
};
pub use corpus::{
    build_vocabulary, ingest, preprocess, CorpusError, IngestFormat, RawDocument,
    TokenizedDocument, Vocabulary,
};
pub use stats::{
    bh_adjust, normal_cdf, normal_quantile, pearson, permutation_test, two_sided_p,
    weighted_pearson, PermutationResult, StatsError,
};
pub use wordlists::{WordListError, WordLists};
