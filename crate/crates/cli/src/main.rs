//! Command-line surface for PMI-based bias studies.
//!
//! `count` turns a corpus and word lists into a counts file, `bias` turns a
//! counts file into a per-context bias report, `correlate` compares a report
//! against ground-truth proportions, and `permtest` runs the permutation
//! test next to the odds-ratio test. Identical inputs, configuration and
//! seed produce byte-identical outputs regardless of thread count.

mod cmd_bias;
mod cmd_correlate;
mod cmd_count;
mod cmd_permtest;
mod errors;
mod pipeline;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pmibias::bias::SeMode;
use pmibias::corpus::IngestFormat;

#[derive(Parser)]
#[command(
    name = "pmibias",
    version,
    about = "Quantify word-association bias in text corpora via windowed co-occurrence statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count windowed target/context co-occurrences into a counts file.
    Count(CountArgs),
    /// Estimate per-context bias with CI, significance and BH correction.
    Bias(BiasArgs),
    /// Correlate a bias report against ground-truth proportions.
    Correlate(CorrelateArgs),
    /// Permutation test over target-word re-partitions, next to the z-test.
    Permtest(PermtestArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CorpusFormatArg {
    /// One document per file.
    PlainText,
    /// One document per line.
    DocPerLine,
    /// One JSON object {"id", "text"} per line.
    JsonLines,
}

impl From<CorpusFormatArg> for IngestFormat {
    fn from(value: CorpusFormatArg) -> Self {
        match value {
            CorpusFormatArg::PlainText => IngestFormat::PlainText,
            CorpusFormatArg::DocPerLine => IngestFormat::DocPerLine,
            CorpusFormatArg::JsonLines => IngestFormat::JsonLines,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeModeArg {
    /// sqrt(1/f_AC + 1/f_BC + 1/f_AnC + 1/f_BnC)
    Full,
    /// sqrt(1/f_AC + 1/f_BC)
    Approx,
}

impl From<SeModeArg> for SeMode {
    fn from(value: SeModeArg) -> Self {
        match value {
            SeModeArg::Full => SeMode::Full,
            SeModeArg::Approx => SeMode::Approx,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

#[derive(Args)]
struct CountArgs {
    /// Corpus file or directory.
    corpus: PathBuf,
    /// On-disk corpus layout.
    #[arg(long, value_enum, default_value = "plain-text")]
    corpus_format: CorpusFormatArg,
    /// Word-lists JSON file with keys A, B and C.
    #[arg(long)]
    wordlists: PathBuf,
    /// Destination counts file.
    #[arg(long, short)]
    output: PathBuf,
    /// Window size: tokens on each side of a target occurrence.
    #[arg(long, default_value_t = 10)]
    window: usize,
    /// Drop words with fewer corpus occurrences than this.
    #[arg(long, default_value_t = 100)]
    min_count: u64,
    /// Drop documents with fewer tokens than this.
    #[arg(long, default_value_t = 50)]
    min_doc_tokens: usize,
    /// Store one count row per target word instead of per list
    /// (required by `permtest`).
    #[arg(long)]
    per_word: bool,
    /// Let windows cross sentence boundaries.
    #[arg(long)]
    cross_sentences: bool,
    /// Also write the vocabulary as word<TAB>id<TAB>count.
    #[arg(long)]
    vocab_out: Option<PathBuf>,
}

#[derive(Args)]
struct BiasArgs {
    /// Counts file produced by `count`.
    counts: PathBuf,
    /// The same word-lists JSON the counts were produced with.
    #[arg(long)]
    wordlists: PathBuf,
    /// Report destination (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Additive smoothing applied to all four contingency cells.
    #[arg(long, default_value_t = 0.0)]
    smoothing: f64,
    /// Standard-error formula.
    #[arg(long, value_enum, default_value = "full")]
    se_mode: SeModeArg,
    /// Confidence level of the reported interval.
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    /// Report format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: OutputFormat,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Bias report TSV produced by `bias`.
    report: PathBuf,
    /// Ground-truth CSV: label,percent with percents in [0, 100].
    ground_truth: PathBuf,
    /// Write plot-ready scatter data (proportion, bias, ci_low, ci_high).
    #[arg(long)]
    scatter_out: Option<PathBuf>,
    /// Summary format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: OutputFormat,
}

#[derive(Args)]
struct PermtestArgs {
    /// Counts file produced by `count --per-word`.
    counts: PathBuf,
    /// The same word-lists JSON the counts were produced with.
    #[arg(long)]
    wordlists: PathBuf,
    /// Permutations to sample; when the number of distinct re-partitions is
    /// no larger, all of them are enumerated and the p-value is exact.
    #[arg(long)]
    n_perm: u64,
    /// Seed for the sampled mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Additive smoothing; zero selects the 0.5 fallback inside the test so
    /// the statistic stays finite over all re-partitions.
    #[arg(long, default_value_t = 0.0)]
    smoothing: f64,
    /// Standard-error formula for the odds-ratio test column.
    #[arg(long, value_enum, default_value = "full")]
    se_mode: SeModeArg,
    /// Output destination (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "tsv")]
    format: OutputFormat,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(args) => cmd_count::run(args),
        Command::Bias(args) => cmd_bias::run(args),
        Command::Correlate(args) => cmd_correlate::run(args),
        Command::Permtest(args) => cmd_permtest::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        let machine = serde_json::json!({
            "error": { "kind": err.kind(), "message": err.to_string() }
        });
        eprintln!("{machine}");
        std::process::exit(err.exit_code());
    }
}
