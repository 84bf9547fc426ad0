//! Table-driven backends for tests and offline runs.
//!
//! Everything is keyed by canonical strings: sentences are their tokens joined
//! by single spaces, masked sentences use [`MaskedSentence::render`], spans are
//! written `"start:end"`. Words without a configured vector get a
//! pseudo-random one derived from the SHA-256 of the lowercased word, so
//! outputs are identical across runs and platforms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::first_sense::FirstSense;
use super::lexicon::LexiconTagger;
use super::{
    check_span, rank_predictions, BackendDescriptor, BackendError, BackendKind, BackendResult,
    Backends, ContextualEmbedder, Embedding, MaskedPredictor, MaskedSentence, NgramSource,
    Prediction, SenseDisambiguator, StaticEmbedder, Tagger, TokenTag, UPos,
};
use crate::text::{tokenize, Span};
use crate::wordnet::{KnowledgeBase, SynsetRef};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockPrediction {
    Token(String),
    Scored(String, f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WsdFallback {
    /// Unlisted spans resolve to their most frequent WordNet sense.
    #[default]
    FirstSense,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockConfig {
    pub model_id: String,
    pub dimension: usize,
    /// Masked sentence → fillers, best first unless scored.
    pub predictions: BTreeMap<String, Vec<MockPrediction>>,
    pub token_vectors: BTreeMap<String, Vec<f64>>,
    /// Sentence → span → vector, overriding the token mean.
    pub span_vectors: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    pub text_vectors: BTreeMap<String, Vec<f64>>,
    /// Static vocabulary; hashed vectors are used for words listed without one.
    pub static_vectors: BTreeMap<String, Vec<f64>>,
    pub static_vocabulary: BTreeSet<String>,
    /// Sentence → span → synset.
    pub senses: BTreeMap<String, BTreeMap<String, SynsetRef>>,
    pub wsd_fallback: WsdFallback,
    /// Sentence → one tag per token.
    pub tags: BTreeMap<String, Vec<TokenTag>>,
    /// Per-word tag overrides applied to untabled sentences.
    pub word_tags: BTreeMap<String, TokenTag>,
    pub ngrams: BTreeSet<String>,
    pub ngram_permissive: bool,
}

impl Default for MockConfig {
    fn default() -> Self {
        Self {
            model_id: "mock".into(),
            dimension: 32,
            predictions: BTreeMap::new(),
            token_vectors: BTreeMap::new(),
            span_vectors: BTreeMap::new(),
            text_vectors: BTreeMap::new(),
            static_vectors: BTreeMap::new(),
            static_vocabulary: BTreeSet::new(),
            senses: BTreeMap::new(),
            wsd_fallback: WsdFallback::default(),
            tags: BTreeMap::new(),
            word_tags: BTreeMap::new(),
            ngrams: BTreeSet::new(),
            ngram_permissive: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MockConfigError {
    #[error("cannot read mock config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid mock config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid mock config: {0}")]
    Invalid(String),
}

impl MockConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MockConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MockConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: MockConfig =
            serde_json::from_str(&text).map_err(|source| MockConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), MockConfigError> {
        if self.model_id.is_empty() {
            return Err(MockConfigError::Invalid("model_id is empty".into()));
        }
        if self.dimension == 0 {
            return Err(MockConfigError::Invalid("dimension must be positive".into()));
        }
        let vectors = self
            .token_vectors
            .iter()
            .chain(&self.text_vectors)
            .chain(&self.static_vectors)
            .chain(self.span_vectors.values().flatten());
        for (key, v) in vectors {
            if v.len() != self.dimension || v.iter().any(|x| !x.is_finite()) {
                return Err(MockConfigError::Invalid(format!(
                    "vector for {key:?} must have {} finite entries",
                    self.dimension
                )));
            }
        }
        let span_keys = self
            .span_vectors
            .iter()
            .flat_map(|(s, m)| m.keys().map(move |k| (s, k)))
            .chain(self.senses.iter().flat_map(|(s, m)| m.keys().map(move |k| (s, k))));
        for (sentence, key) in span_keys {
            parse_span_key(key).ok_or_else(|| {
                MockConfigError::Invalid(format!("bad span key {key:?} for {sentence:?}"))
            })?;
        }
        for (sentence, tags) in &self.tags {
            if tags.len() != sentence.split(' ').count() {
                return Err(MockConfigError::Invalid(format!(
                    "{} tags for the {}-token sentence {sentence:?}",
                    tags.len(),
                    sentence.split(' ').count()
                )));
            }
        }
        for (masked, preds) in &self.predictions {
            for p in preds {
                if let MockPrediction::Scored(t, prob) = p {
                    if !(*prob > 0.0 && *prob <= 1.0) {
                        return Err(MockConfigError::Invalid(format!(
                            "probability of {t:?} for {masked:?} outside (0, 1]"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn span_key(span: Span) -> String {
    format!("{}:{}", span.start, span.end)
}

fn parse_span_key(key: &str) -> Option<Span> {
    let (a, b) = key.split_once(':')?;
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a < b).then(|| Span::new(a, b))
}

pub fn sentence_key(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Deterministic vector for a word: SHA-256 of the lowercased word seeds a
/// ChaCha8 stream of uniform values in [-1, 1).
pub fn hashed_vector(word: &str, dimension: usize) -> Embedding {
    let digest = Sha256::digest(word.to_lowercase().as_bytes());
    let mut rng = ChaCha8Rng::from_seed(digest.into());
    Embedding((0..dimension).map(|_| rng.random_range(-1.0..1.0)).collect())
}

/// One object implementing every backend trait from a [`MockConfig`].
pub struct Mock {
    config: MockConfig,
    fallback_tagger: Option<LexiconTagger>,
    fallback_wsd: Option<FirstSense>,
}

impl Mock {
    /// Without a knowledge base, WSD fallback is disabled and untabled
    /// sentences are tagged NOUN/PUNCT.
    pub fn new(config: MockConfig, kb: Option<Arc<KnowledgeBase>>) -> Self {
        let fallback_tagger = kb.clone().map(LexiconTagger::new);
        let fallback_wsd = kb.map(FirstSense::new);
        Self {
            config,
            fallback_tagger,
            fallback_wsd,
        }
    }

    pub fn config(&self) -> &MockConfig {
        &self.config
    }

    pub fn into_backends(self) -> Backends {
        let this = Arc::new(self);
        Backends {
            predictor: this.clone(),
            embedder: this.clone(),
            static_embedder: this.clone(),
            wsd: this.clone(),
            tagger: this.clone(),
            ngrams: this,
        }
    }

    fn descriptor_for(&self, kind: BackendKind) -> BackendDescriptor {
        BackendDescriptor::new(kind, &self.config.model_id, "mock-1")
    }

    fn token_vector(&self, token: &str) -> Embedding {
        match self
            .config
            .token_vectors
            .get(token)
            .or_else(|| self.config.token_vectors.get(&token.to_lowercase()))
        {
            Some(v) => Embedding(v.clone()),
            None => hashed_vector(token, self.config.dimension),
        }
    }
}

impl MaskedPredictor for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::MaskedPredictor)
    }

    fn predict_fillers(&self, masked: &MaskedSentence, k: usize) -> BackendResult<Vec<Prediction>> {
        if k == 0 {
            return Err(BackendError::invalid("k must be at least 1"));
        }
        let Some(entries) = self.config.predictions.get(&masked.render()) else {
            return Ok(Vec::new());
        };
        let raw = entries
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                MockPrediction::Token(t) => (t.clone(), 1.0 / (i as f64 + 1.0)),
                MockPrediction::Scored(t, prob) => (t.clone(), *prob),
            })
            .collect();
        Ok(rank_predictions(raw, k))
    }
}

impl ContextualEmbedder for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::ContextualEmbedder)
    }

    fn embed_span(&self, tokens: &[String], span: Span) -> BackendResult<Embedding> {
        check_span(tokens, span)?;
        if let Some(v) = self
            .config
            .span_vectors
            .get(&sentence_key(tokens))
            .and_then(|spans| spans.get(&span_key(span)))
        {
            return Ok(Embedding(v.clone()));
        }
        let vectors: Vec<Embedding> = tokens[span.start..span.end]
            .iter()
            .map(|t| self.token_vector(t))
            .collect();
        Ok(Embedding::mean(&vectors).expect("span is non-empty"))
    }

    fn embed_text(&self, text: &str) -> BackendResult<Embedding> {
        if let Some(v) = self.config.text_vectors.get(text) {
            return Ok(Embedding(v.clone()));
        }
        let vectors: Vec<Embedding> = tokenize(text).iter().map(|t| self.token_vector(t)).collect();
        Embedding::mean(&vectors).ok_or_else(|| BackendError::invalid("cannot embed empty text"))
    }
}

impl StaticEmbedder for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::StaticEmbedder)
    }

    fn embed_word(&self, word: &str) -> Option<Embedding> {
        if word.split_whitespace().count() != 1 {
            return None;
        }
        let lower = word.to_lowercase();
        if let Some(v) = self.config.static_vectors.get(&lower) {
            return Some(Embedding(v.clone()));
        }
        self.config
            .static_vocabulary
            .contains(&lower)
            .then(|| hashed_vector(&lower, self.config.dimension))
    }
}

impl SenseDisambiguator for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::Wsd)
    }

    fn disambiguate(&self, tokens: &[String], span: Span) -> BackendResult<Option<SynsetRef>> {
        check_span(tokens, span)?;
        if let Some(r) = self
            .config
            .senses
            .get(&sentence_key(tokens))
            .and_then(|spans| spans.get(&span_key(span)))
        {
            return Ok(Some(*r));
        }
        match (self.config.wsd_fallback, &self.fallback_wsd) {
            (WsdFallback::FirstSense, Some(wsd)) => wsd.resolve(tokens, span),
            _ => Ok(None),
        }
    }
}

impl Tagger for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::Tagger)
    }

    fn tag(&self, tokens: &[String]) -> BackendResult<Vec<TokenTag>> {
        if tokens.is_empty() {
            return Err(BackendError::invalid("cannot tag an empty token list"));
        }
        if let Some(tags) = self.config.tags.get(&sentence_key(tokens)) {
            return Ok(tags.clone());
        }
        let mut tags = match &self.fallback_tagger {
            Some(t) => t.tag(tokens)?,
            None => tokens
                .iter()
                .map(|t| {
                    TokenTag::new(if t.chars().any(char::is_alphanumeric) {
                        UPos::Noun
                    } else {
                        UPos::Punct
                    })
                })
                .collect(),
        };
        for (tag, token) in tags.iter_mut().zip(tokens) {
            if let Some(over) = self
                .config
                .word_tags
                .get(token)
                .or_else(|| self.config.word_tags.get(&token.to_lowercase()))
            {
                *tag = over.clone();
            }
        }
        Ok(tags)
    }
}

impl NgramSource for Mock {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor_for(BackendKind::NgramSource)
    }

    fn ngram_exists(&self, phrase: &str) -> BackendResult<bool> {
        if self.config.ngram_permissive {
            return Ok(true);
        }
        let key = phrase.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        Ok(self.config.ngrams.contains(&key))
    }
}
