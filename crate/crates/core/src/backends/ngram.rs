//! N-gram attestation sources: a local frequency table, a permissive stand-in,
//! and a remote phrase-search adapter.

use std::collections::HashSet;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::http::{agent, check_status, classify, RetryPolicy};
use super::{BackendDescriptor, BackendError, BackendKind, BackendResult, NgramSource};

fn canonical(phrase: &str) -> String {
    phrase.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Debug, thiserror::Error)]
pub enum NgramTableError {
    #[error("cannot read n-gram table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

/// Phrases read from `phrase<TAB>count` lines; a phrase is attested when its
/// count is positive. Matching is case-insensitive.
pub struct NgramTable {
    id: String,
    phrases: HashSet<String>,
}

impl NgramTable {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, NgramTableError> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| NgramTableError::Io {
            path: name.clone(),
            source,
        })?;
        Self::parse(&text, &name)
    }

    pub fn parse(text: &str, name: &str) -> Result<Self, NgramTableError> {
        let mut phrases = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| NgramTableError::Format {
                path: name.to_string(),
                line: i + 1,
                message: message.to_string(),
            };
            let (phrase, count) = line
                .rsplit_once('\t')
                .ok_or_else(|| err("expected phrase<TAB>count"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| err("count is not a non-negative integer"))?;
            let phrase = canonical(phrase);
            if phrase.is_empty() {
                return Err(err("empty phrase"));
            }
            if count > 0 {
                phrases.insert(phrase);
            }
        }
        Ok(Self {
            id: name.to_string(),
            phrases,
        })
    }

    pub fn from_phrases<I: IntoIterator<Item = S>, S: AsRef<str>>(id: &str, phrases: I) -> Self {
        Self {
            id: id.to_string(),
            phrases: phrases.into_iter().map(|p| canonical(p.as_ref())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

impl NgramSource for NgramTable {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::NgramSource, &self.id, "table-1")
    }

    fn ngram_exists(&self, phrase: &str) -> BackendResult<bool> {
        Ok(self.phrases.contains(&canonical(phrase)))
    }
}

/// Attests every phrase. For tests and for runs without any corpus.
pub struct Permissive;

impl NgramSource for Permissive {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::NgramSource, "permissive", "1")
    }

    fn ngram_exists(&self, _phrase: &str) -> BackendResult<bool> {
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteNgramConfig {
    /// Search endpoint; the phrase is sent as the `query` parameter and a
    /// reply whose `ngrams` list is non-empty counts as attested.
    pub url: String,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    /// Minimum spacing between requests.
    #[serde(default = "default_interval")]
    pub min_interval_ms: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_max_words() -> usize {
    5
}

fn default_timeout() -> u64 {
    10
}

fn default_interval() -> u64 {
    100
}

pub struct RemoteNgrams {
    config: RemoteNgramConfig,
    agent: ureq::Agent,
    last_call: std::sync::Mutex<Option<std::time::Instant>>,
}

#[derive(Deserialize)]
struct SearchReply {
    #[serde(default)]
    ngrams: Vec<serde_json::Value>,
}

impl RemoteNgrams {
    pub fn new(config: RemoteNgramConfig) -> Self {
        let agent = agent(Duration::from_secs(config.timeout_secs));
        Self {
            config,
            agent,
            last_call: std::sync::Mutex::new(None),
        }
    }

    fn pace(&self) {
        let mut last = self.last_call.lock().expect("rate limiter");
        let interval = Duration::from_millis(self.config.min_interval_ms);
        if let Some(t) = *last {
            let elapsed = t.elapsed();
            if elapsed < interval {
                std::thread::sleep(interval - elapsed);
            }
        }
        *last = Some(std::time::Instant::now());
    }

    fn query(&self, phrase: &str) -> BackendResult<bool> {
        self.pace();
        let mut resp = self
            .agent
            .get(&self.config.url)
            .query("query", phrase)
            .call()
            .map_err(classify)?;
        check_status(resp.status().as_u16(), &self.config.url)?;
        let reply: SearchReply = resp
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::protocol(format!("unexpected n-gram reply: {e}")))?;
        Ok(!reply.ngrams.is_empty())
    }
}

impl NgramSource for RemoteNgrams {
    fn descriptor(&self) -> BackendDescriptor {
        let mut d = BackendDescriptor::new(BackendKind::NgramSource, &self.config.url, "search-1");
        d.serialized = true;
        d
    }

    fn ngram_exists(&self, phrase: &str) -> BackendResult<bool> {
        let phrase = canonical(phrase);
        let words = phrase.split(' ').filter(|w| !w.is_empty()).count();
        if words == 0 || words > self.config.max_words {
            return Err(BackendError::invalid(format!(
                "phrase must have 1 to {} words, got {words}",
                self.config.max_words
            )));
        }
        self.config.retry.run(|| self.query(&phrase))
    }
}
