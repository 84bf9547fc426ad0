//! Content-addressed result cache and call gating.
//!
//! Keys are the SHA-256 of the JSON triple (descriptor, operation, input).
//! The disk layout is one `<key>.json` file per entry, written through a
//! temporary file and an atomic rename so concurrent readers never observe a
//! partial value. Errors are never cached.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{
    BackendDescriptor, BackendResult, Backends, ContextualEmbedder, Embedding, MaskedPredictor,
    MaskedSentence, NgramSource, Prediction, SenseDisambiguator, StaticEmbedder, Tagger, TokenTag,
};
use crate::text::Span;
use crate::wordnet::SynsetRef;

pub struct CacheStore {
    dir: Option<PathBuf>,
    memory: RwLock<HashMap<String, Arc<[u8]>>>,
}

impl CacheStore {
    /// A cache that lives only as long as the process.
    pub fn memory() -> Self {
        Self {
            dir: None,
            memory: RwLock::new(HashMap::new()),
        }
    }

    pub fn disk(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir: Some(dir),
            memory: RwLock::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn key<I: Serialize + ?Sized>(
        descriptor: &BackendDescriptor,
        operation: &str,
        input: &I,
    ) -> String {
        let payload = serde_json::to_vec(&(descriptor, operation, input))
            .expect("cache inputs serialize");
        hex::encode(Sha256::digest(payload))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let cached = self.memory.read().expect("cache lock").get(key).cloned();
        let bytes = match cached {
            Some(b) => b,
            None => {
                let bytes: Arc<[u8]> = std::fs::read(self.path(key)?).ok()?.into();
                self.memory
                    .write()
                    .expect("cache lock")
                    .insert(key.to_string(), bytes.clone());
                bytes
            }
        };
        match serde_json::from_slice(&bytes) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) {
        let bytes: Arc<[u8]> = serde_json::to_vec(value).expect("cache values serialize").into();
        if let Some(path) = self.path(key) {
            if let Err(e) = write_atomic(&path, &bytes) {
                log::warn!("cannot persist cache entry {}: {e}", path.display());
            }
        }
        self.memory
            .write()
            .expect("cache lock")
            .insert(key.to_string(), bytes);
    }

    pub fn len(&self) -> usize {
        self.memory.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    use std::io::Write;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Wraps a backend with the cache and, when its descriptor says so, a lock
/// that serializes calls.
pub struct Cached<B: ?Sized> {
    inner: Arc<B>,
    store: Arc<CacheStore>,
    descriptor: BackendDescriptor,
    gate: Option<Mutex<()>>,
}

impl<B: ?Sized> Cached<B> {
    fn through<I, T, F>(&self, operation: &str, input: &I, call: F) -> BackendResult<T>
    where
        I: Serialize + ?Sized,
        T: Serialize + DeserializeOwned,
        F: FnOnce(&B) -> BackendResult<T>,
    {
        let key = CacheStore::key(&self.descriptor, operation, input);
        if let Some(v) = self.store.get(&key) {
            return Ok(v);
        }
        let value = match &self.gate {
            Some(lock) => {
                let _held = lock.lock().expect("backend gate");
                call(&self.inner)?
            }
            None => call(&self.inner)?,
        };
        self.store.put(&key, &value);
        Ok(value)
    }
}

macro_rules! cached_ctor {
    ($tr:ident) => {
        impl Cached<dyn $tr> {
            pub fn new(inner: Arc<dyn $tr>, store: Arc<CacheStore>) -> Self {
                let descriptor = inner.descriptor();
                let gate = descriptor.serialized.then(|| Mutex::new(()));
                Self {
                    inner,
                    store,
                    descriptor,
                    gate,
                }
            }
        }
    };
}

cached_ctor!(MaskedPredictor);
cached_ctor!(ContextualEmbedder);
cached_ctor!(StaticEmbedder);
cached_ctor!(SenseDisambiguator);
cached_ctor!(Tagger);
cached_ctor!(NgramSource);

impl MaskedPredictor for Cached<dyn MaskedPredictor> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn predict_fillers(&self, masked: &MaskedSentence, k: usize) -> BackendResult<Vec<Prediction>> {
        self.through("predict_fillers", &(masked.render(), k), |b| b.predict_fillers(masked, k))
    }
}

impl ContextualEmbedder for Cached<dyn ContextualEmbedder> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn embed_span(&self, tokens: &[String], span: Span) -> BackendResult<Embedding> {
        self.through("embed_span", &(tokens, span), |b| b.embed_span(tokens, span))
    }

    fn embed_text(&self, text: &str) -> BackendResult<Embedding> {
        self.through("embed_text", text, |b| b.embed_text(text))
    }
}

impl StaticEmbedder for Cached<dyn StaticEmbedder> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn embed_word(&self, word: &str) -> Option<Embedding> {
        self.through("embed_word", word, |b| Ok(b.embed_word(word)))
            .expect("infallible")
    }
}

impl SenseDisambiguator for Cached<dyn SenseDisambiguator> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn disambiguate(&self, tokens: &[String], span: Span) -> BackendResult<Option<SynsetRef>> {
        self.through("disambiguate", &(tokens, span), |b| b.disambiguate(tokens, span))
    }
}

impl Tagger for Cached<dyn Tagger> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn tag(&self, tokens: &[String]) -> BackendResult<Vec<TokenTag>> {
        self.through("tag", tokens, |b| b.tag(tokens))
    }

    fn noun_chunks(&self, tokens: &[String], tags: &[TokenTag]) -> Vec<Span> {
        self.inner.noun_chunks(tokens, tags)
    }

    fn verb_chunks(&self, tokens: &[String], tags: &[TokenTag]) -> Vec<Span> {
        self.inner.verb_chunks(tokens, tags)
    }
}

impl NgramSource for Cached<dyn NgramSource> {
    fn descriptor(&self) -> BackendDescriptor {
        self.descriptor.clone()
    }

    fn ngram_exists(&self, phrase: &str) -> BackendResult<bool> {
        self.through("ngram_exists", phrase, |b| b.ngram_exists(phrase))
    }
}

impl Backends {
    /// Route every backend through `store`.
    pub fn cached(self, store: Arc<CacheStore>) -> Backends {
        Backends {
            predictor: Arc::new(Cached::<dyn MaskedPredictor>::new(self.predictor, store.clone())),
            embedder: Arc::new(Cached::<dyn ContextualEmbedder>::new(self.embedder, store.clone())),
            static_embedder: Arc::new(Cached::<dyn StaticEmbedder>::new(
                self.static_embedder,
                store.clone(),
            )),
            wsd: Arc::new(Cached::<dyn SenseDisambiguator>::new(self.wsd, store.clone())),
            tagger: Arc::new(Cached::<dyn Tagger>::new(self.tagger, store.clone())),
            ngrams: Arc::new(Cached::<dyn NgramSource>::new(self.ngrams, store)),
        }
    }
}
