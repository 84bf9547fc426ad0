//! Line-delimited JSON question datasets.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pipeline::BLANK;
use crate::text::tokenize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    /// Question sentence holding exactly one blank marker.
    pub stem: String,
    pub answer: String,
    pub distractors: Vec<String>,
    #[serde(default)]
    pub source: String,
}

impl DatasetEntry {
    pub fn answer_words(&self) -> usize {
        self.answer.split_whitespace().count()
    }

    /// Structural problems with this entry, empty when it is well formed.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let blanks = tokenize(&self.stem).iter().filter(|t| *t == BLANK).count();
        if blanks != 1 {
            p.push(format!("stem must contain exactly one {BLANK}, found {blanks}"));
        }
        if self.answer.trim().is_empty() {
            p.push("answer is empty".into());
        }
        if self.distractors.len() != 3 {
            p.push(format!("expected 3 distractors, found {}", self.distractors.len()));
        }
        if self.distractors.iter().any(|d| d.trim().is_empty()) {
            p.push("empty distractor".into());
        }
        let mut seen = HashSet::new();
        if !self.distractors.iter().all(|d| seen.insert(super::normalize(d))) {
            p.push("duplicate distractors".into());
        }
        p
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    /// Single-word answer keys only.
    Unigram,
    /// Answer keys of two or more words only.
    Multigram,
    #[default]
    Any,
}

impl Expect {
    pub fn accepts(self, entry: &DatasetEntry) -> bool {
        match self {
            Expect::Unigram => entry.answer_words() == 1,
            Expect::Multigram => entry.answer_words() > 1,
            Expect::Any => true,
        }
    }
}

impl FromStr for Expect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unigram" => Ok(Expect::Unigram),
            "multigram" => Ok(Expect::Multigram),
            "any" => Ok(Expect::Any),
            _ => Err(format!("unknown dataset kind {s:?} (unigram, multigram, any)")),
        }
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expect::Unigram => "unigram",
            Expect::Multigram => "multigram",
            Expect::Any => "any",
        })
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {}", path.display(), problems.join("; "))]
    Validation { path: PathBuf, problems: Vec<String> },
}

impl DatasetError {
    /// 1-based line of the first offending record, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            DatasetError::Parse { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, expect: Expect) -> Result<Vec<DatasetEntry>, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_dataset(&text, path, expect)
}

/// Parse dataset text; `path` only labels errors. Blank lines are skipped.
pub fn parse_dataset(text: &str, path: &Path, expect: Expect) -> Result<Vec<DatasetEntry>, DatasetError> {
    let mut entries = Vec::new();
    let mut offenders = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| DatasetError::Parse {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        let entry: DatasetEntry = serde_json::from_str(line).map_err(|e| parse_err(e.to_string()))?;
        let problems = entry.problems();
        if !problems.is_empty() {
            return Err(parse_err(problems.join("; ")));
        }
        if !expect.accepts(&entry) {
            offenders.push(format!("line {}: answer {:?} is not {expect}", i + 1, entry.answer));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(DatasetError::Validation {
            path: path.to_owned(),
            problems: vec!["dataset has no entries".into()],
        });
    }
    if !offenders.is_empty() {
        return Err(DatasetError::Validation {
            path: path.to_owned(),
            problems: offenders,
        });
    }
    Ok(entries)
}

/// Entry counts by answer key length in words.
pub fn answer_lengths(entries: &[DatasetEntry]) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for e in entries {
        *out.entry(e.answer_words()).or_insert(0) += 1;
    }
    out
}
