//! Error-to-exit-code mapping: 1 internal, 2 configuration, 3 I/O.

use pmibias::bias::BiasError;
use pmibias::cooccur::CooccurError;
use pmibias::corpus::CorpusError;
use pmibias::stats::StatsError;
use pmibias::wordlists::WordListError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(err: CorpusError) -> Self {
        match err {
            CorpusError::Io { .. } => CliError::Io(err.to_string()),
            CorpusError::InvalidMinCount | CorpusError::VocabFormat { .. } => {
                CliError::Config(err.to_string())
            }
        }
    }
}

impl From<CooccurError> for CliError {
    fn from(err: CooccurError) -> Self {
        match err {
            CooccurError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<WordListError> for CliError {
    fn from(err: WordListError) -> Self {
        match err {
            WordListError::Io { .. } => CliError::Io(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

impl From<BiasError> for CliError {
    fn from(err: BiasError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(err: StatsError) -> Self {
        CliError::Config(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}
