//! Contracts for the learned-model dependencies and their implementations.
//!
//! Every model the generator consumes sits behind one of the traits here:
//! masked-token prediction, contextual and static embeddings, sense
//! disambiguation, tagging, and n-gram attestation. The [`mock`] module holds
//! deterministic table-driven doubles; [`lexicon`] and [`first_sense`] are
//! offline defaults built on WordNet; [`http`] and [`ngram`] talk to remote
//! services; [`cache`] makes any of them reproducible across runs.

pub mod cache;
pub mod chunk;
pub mod first_sense;
pub mod http;
pub mod lexicon;
pub mod mock;
pub mod ngram;
pub mod word2vec;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::Span;
use crate::wordnet::SynsetRef;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendErrorKind {
    InvalidArgument,
    Unavailable,
    Timeout,
    Protocol,
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("{kind:?} backend error: {message}")]
pub struct BackendError {
    pub kind: BackendErrorKind,
    pub message: String,
    /// Whether repeating the same call may succeed.
    pub retryable: bool,
}

impl BackendError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            kind: BackendErrorKind::InvalidArgument,
            message: message.into(),
            retryable: false,
        }
    }

    pub fn unavailable(message: impl Into<String>) -> Self {
        Self {
            kind: BackendErrorKind::Unavailable,
            message: message.into(),
            retryable: true,
        }
    }

    pub fn timeout(message: impl Into<String>) -> Self {
        Self {
            kind: BackendErrorKind::Timeout,
            message: message.into(),
            retryable: true,
        }
    }

    pub fn protocol(message: impl Into<String>) -> Self {
        Self {
            kind: BackendErrorKind::Protocol,
            message: message.into(),
            retryable: false,
        }
    }
}

pub type BackendResult<T> = Result<T, BackendError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    MaskedPredictor,
    ContextualEmbedder,
    StaticEmbedder,
    Wsd,
    Tagger,
    NgramSource,
}

/// Identifies a backend instance; part of every cache key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub model_id: String,
    pub version: String,
    /// Calls must not overlap when set.
    #[serde(default)]
    pub serialized: bool,
}

impl BackendDescriptor {
    pub fn new(kind: BackendKind, model_id: &str, version: &str) -> Self {
        assert!(!model_id.is_empty(), "backend model_id must be non-empty");
        Self {
            kind,
            model_id: model_id.to_string(),
            version: version.to_string(),
            serialized: false,
        }
    }
}

/// A sentence with one span replaced by the mask marker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedSentence {
    pub prefix: Vec<String>,
    pub suffix: Vec<String>,
    pub sentence_id: usize,
    /// The masked token range in the original sentence.
    pub span: Span,
}

impl MaskedSentence {
    pub const MASK: &'static str = "[MASK]";

    /// Canonical form: tokens joined by single spaces around one mask marker.
    pub fn render(&self) -> String {
        self.render_with(Self::MASK)
    }

    pub fn render_with(&self, mask: &str) -> String {
        self.prefix
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(mask))
            .chain(self.suffix.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Natural-spacing text with the given mask marker.
    pub fn render_text(&self, mask: &str) -> String {
        let tokens: Vec<&str> = self
            .prefix
            .iter()
            .map(String::as_str)
            .chain(std::iter::once(mask))
            .chain(self.suffix.iter().map(String::as_str))
            .collect();
        crate::text::detokenize(&tokens)
    }
}

/// One masked-token prediction. `position` is the 1-based rank by probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub token: String,
    pub probability: f64,
    pub position: usize,
}

/// Sort raw `(token, probability)` pairs by descending probability (stable),
/// keep the first `k`, and number them 1..
pub fn rank_predictions(mut raw: Vec<(String, f64)>, k: usize) -> Vec<Prediction> {
    raw.sort_by(|a, b| b.1.total_cmp(&a.1));
    raw.into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (token, probability))| Prediction {
            token,
            probability,
            position: i + 1,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding(pub Vec<f64>);

impl Embedding {
    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Cosine similarity; `None` when either vector has zero norm or the dimensions differ.
    pub fn cosine(&self, other: &Embedding) -> Option<f64> {
        if self.dimension() != other.dimension() {
            return None;
        }
        let (na, nb) = (self.norm(), other.norm());
        if na == 0.0 || nb == 0.0 {
            return None;
        }
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        Some((dot / (na * nb)).clamp(-1.0, 1.0))
    }

    /// Element-wise arithmetic mean. `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Embedding>) -> Option<Embedding> {
        let mut iter = vectors.into_iter();
        let first = iter.next()?;
        let mut sum = first.0.clone();
        let mut count = 1.0;
        for v in iter {
            for (s, x) in sum.iter_mut().zip(&v.0) {
                *s += x;
            }
            count += 1.0;
        }
        Some(Embedding(sum.into_iter().map(|s| s / count).collect()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Coarse universal part-of-speech tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum UPos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
}

impl UPos {
    /// The WordNet part of speech a tag maps to, if any.
    pub fn wordnet_pos(self) -> Option<crate::wordnet::Pos> {
        use crate::wordnet::Pos;
        match self {
            UPos::Noun | UPos::Propn => Some(Pos::Noun),
            UPos::Verb | UPos::Aux => Some(Pos::Verb),
            UPos::Adj => Some(Pos::Adj),
            UPos::Adv => Some(Pos::Adv),
            _ => None,
        }
    }
}

impl fmt::Display for UPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("tag serializes");
        write!(f, "{}", s.as_str().unwrap_or("X"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTag {
    pub pos: UPos,
    /// Named-entity label in the tagger's native label set.
    pub ner: Option<String>,
}

impl TokenTag {
    pub fn new(pos: UPos) -> Self {
        Self { pos, ner: None }
    }
}

pub trait MaskedPredictor: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    /// Up to `k` whole-word fillers for the mask, by descending probability.
    fn predict_fillers(&self, masked: &MaskedSentence, k: usize) -> BackendResult<Vec<Prediction>>;
}

pub trait ContextualEmbedder: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    /// Embedding of a token span in context; multi-token spans are averaged.
    fn embed_span(&self, tokens: &[String], span: Span) -> BackendResult<Embedding>;

    /// Embedding of a free-standing text (sentences, glosses).
    fn embed_text(&self, text: &str) -> BackendResult<Embedding>;
}

pub trait StaticEmbedder: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    /// Vector for a single in-vocabulary word.
    fn embed_word(&self, word: &str) -> Option<Embedding>;
}

pub trait SenseDisambiguator: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    fn disambiguate(&self, tokens: &[String], span: Span) -> BackendResult<Option<SynsetRef>>;
}

pub trait Tagger: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    /// One tag per token.
    fn tag(&self, tokens: &[String]) -> BackendResult<Vec<TokenTag>>;

    fn noun_chunks(&self, tokens: &[String], tags: &[TokenTag]) -> Vec<Span> {
        chunk::noun_chunks(tokens, tags)
    }

    fn verb_chunks(&self, _tokens: &[String], tags: &[TokenTag]) -> Vec<Span> {
        chunk::verb_chunks(tags)
    }
}

pub trait NgramSource: Send + Sync {
    fn descriptor(&self) -> BackendDescriptor;

    fn ngram_exists(&self, phrase: &str) -> BackendResult<bool>;
}

pub(crate) fn check_span(tokens: &[String], span: Span) -> BackendResult<()> {
    if span.fits(tokens.len()) {
        Ok(())
    } else {
        Err(BackendError::invalid(format!(
            "span {}..{} outside sentence of {} tokens",
            span.start,
            span.end,
            tokens.len()
        )))
    }
}

/// The full set of backends one pipeline run uses.
#[derive(Clone)]
pub struct Backends {
    pub predictor: std::sync::Arc<dyn MaskedPredictor>,
    pub embedder: std::sync::Arc<dyn ContextualEmbedder>,
    pub static_embedder: std::sync::Arc<dyn StaticEmbedder>,
    pub wsd: std::sync::Arc<dyn SenseDisambiguator>,
    pub tagger: std::sync::Arc<dyn Tagger>,
    pub ngrams: std::sync::Arc<dyn NgramSource>,
}
