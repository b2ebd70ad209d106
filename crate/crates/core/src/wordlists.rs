//! The JSON word-list file format.
//!
//! ```json
//! {
//!   "A": ["female", "woman", "girl"],
//!   "B": ["male", "man", "boy"],
//!   "C": {"nurse": ["nurse"], "nursing": ["nurse", "nurses"]}
//! }
//! ```
//!
//! `A` and `B` are the two target lists; `C` maps context-set names to their
//! member words. Words must already be lowercase alphanumeric, matching the
//! corpus normalization, otherwise they could never match a token.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WordListError {
    #[error("failed to read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid word-list JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("word list {list:?} is empty")]
    EmptyList { list: String },
    #[error("context set {name:?} is empty")]
    EmptyContext { name: String },
    #[error("word {word:?} appears in both A and B")]
    Overlap { word: String },
    #[error("word {word:?} in {list:?} is not lowercase alphanumeric")]
    InvalidWord { list: String, word: String },
}

#[derive(Debug, Deserialize)]
struct WordListsRaw {
    #[serde(rename = "A")]
    a: Vec<String>,
    #[serde(rename = "B")]
    b: Vec<String>,
    #[serde(rename = "C")]
    contexts: BTreeMap<String, Vec<String>>,
}

/// Validated target lists A and B plus named context sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLists {
    pub a: BTreeSet<String>,
    pub b: BTreeSet<String>,
    pub contexts: BTreeMap<String, BTreeSet<String>>,
}

impl WordLists {
    pub fn load(path: &Path) -> Result<Self, WordListError> {
        let text = fs::read_to_string(path).map_err(|source| WordListError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, WordListError> {
        let raw: WordListsRaw = serde_json::from_str(text)?;
        let a = validated_set("A", raw.a)?;
        let b = validated_set("B", raw.b)?;
        if let Some(word) = a.intersection(&b).next() {
            return Err(WordListError::Overlap { word: word.clone() });
        }
        let mut contexts = BTreeMap::new();
        for (name, words) in raw.contexts {
            if words.is_empty() {
                return Err(WordListError::EmptyContext { name });
            }
            let set = validated_set(&format!("C/{name}"), words)?;
            contexts.insert(name, set);
        }
        Ok(WordLists { a, b, contexts })
    }

    /// All target words of both lists.
    pub fn all_targets(&self) -> BTreeSet<String> {
        self.a.union(&self.b).cloned().collect()
    }
}

fn validated_set(list: &str, words: Vec<String>) -> Result<BTreeSet<String>, WordListError> {
    if words.is_empty() {
        return Err(WordListError::EmptyList {
            list: list.to_string(),
        });
    }
    let mut set = BTreeSet::new();
    for word in words {
        let ok = !word.is_empty()
            && word.chars().all(char::is_alphanumeric)
            && word == word.to_lowercase();
        if !ok {
            return Err(WordListError::InvalidWord {
                list: list.to_string(),
                word,
            });
        }
        set.insert(word);
    }
    Ok(set)
}
