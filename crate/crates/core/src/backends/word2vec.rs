//! Word vectors in the word2vec text format, and a context-free embedder
//! built from them.
//!
//! The file starts with a `<count> <dimension>` header line, followed by one
//! `word v1 v2 ...` line per word.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use super::{
    check_span, BackendDescriptor, BackendError, BackendKind, BackendResult, ContextualEmbedder,
    Embedding, StaticEmbedder,
};
use crate::text::{tokenize, Span};

#[derive(Debug, thiserror::Error)]
pub enum VectorFileError {
    #[error("cannot read vectors {path}: {source}")]
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

pub struct WordVectors {
    id: String,
    dimension: usize,
    vectors: HashMap<String, Embedding>,
}

impl WordVectors {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, VectorFileError> {
        let path = path.as_ref();
        let name = path.display().to_string();
        let file = std::fs::File::open(path).map_err(|source| VectorFileError::Io {
            path: name.clone(),
            source,
        })?;
        Self::read(std::io::BufReader::new(file), &name)
    }

    pub fn read(reader: impl BufRead, name: &str) -> Result<Self, VectorFileError> {
        let err = |line: usize, message: String| VectorFileError::Format {
            path: name.to_string(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l.map_err(|source| VectorFileError::Io {
                path: name.to_string(),
                source,
            })?,
            None => return Err(err(1, "empty file".into())),
        };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| err(1, "header must be `<count> <dimension>`".into()))?;
        let [count, dimension] = dims[..] else {
            return Err(err(1, "header must be `<count> <dimension>`".into()));
        };
        if dimension == 0 {
            return Err(err(1, "dimension must be positive".into()));
        }
        let mut vectors = HashMap::with_capacity(count);
        for (i, line) in lines {
            let line = line.map_err(|source| VectorFileError::Io {
                path: name.to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().expect("non-empty line");
            let values: Vec<f64> = parts
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|e| err(i + 1, format!("bad number: {e}")))?;
            if values.len() != dimension || values.iter().any(|x| !x.is_finite()) {
                return Err(err(
                    i + 1,
                    format!("expected {dimension} finite values, got {}", values.len()),
                ));
            }
            vectors.insert(word.to_string(), Embedding(values));
        }
        Ok(Self {
            id: name.to_string(),
            dimension,
            vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn lookup(&self, word: &str) -> Option<&Embedding> {
        self.vectors
            .get(word)
            .or_else(|| self.vectors.get(&word.to_lowercase()))
    }

    /// Mean of the in-vocabulary words; the zero vector if none are known.
    fn mean_of<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> Embedding {
        let known: Vec<&Embedding> = words.into_iter().filter_map(|w| self.lookup(w)).collect();
        Embedding::mean(known).unwrap_or_else(|| Embedding(vec![0.0; self.dimension]))
    }
}

impl StaticEmbedder for WordVectors {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::StaticEmbedder, &self.id, "word2vec-text")
    }

    fn embed_word(&self, word: &str) -> Option<Embedding> {
        if word.split_whitespace().count() != 1 {
            return None;
        }
        self.lookup(word.trim()).cloned()
    }
}

/// Uses averaged static vectors where a contextual embedder is expected.
/// Context is ignored, so this is a stand-in for offline runs.
impl ContextualEmbedder for WordVectors {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::ContextualEmbedder, &self.id, "word2vec-mean")
    }

    fn embed_span(&self, tokens: &[String], span: Span) -> BackendResult<Embedding> {
        check_span(tokens, span)?;
        Ok(self.mean_of(tokens[span.start..span.end].iter().map(String::as_str)))
    }

    fn embed_text(&self, text: &str) -> BackendResult<Embedding> {
        let tokens = tokenize(text);
        if tokens.is_empty() {
            return Err(BackendError::invalid("cannot embed empty text"));
        }
        Ok(self.mean_of(tokens.iter().map(String::as_str)))
    }
}
