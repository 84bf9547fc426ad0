//! The TOML file the commands read.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use clozegen::backends::cache::CacheStore;
use clozegen::backends::first_sense::FirstSense;
use clozegen::backends::http::{FillMaskConfig, HttpFillMask};
use clozegen::backends::lexicon::LexiconTagger;
use clozegen::backends::mock::{Mock, MockConfig};
use clozegen::backends::ngram::{NgramTable, Permissive, RemoteNgramConfig, RemoteNgrams};
use clozegen::backends::word2vec::WordVectors;
use clozegen::backends::{
    Backends, ContextualEmbedder, MaskedPredictor, NgramSource, SenseDisambiguator, StaticEmbedder,
    Tagger,
};
use clozegen::pipeline::{Generator, GeneratorConfig};
use clozegen::wordnet::KnowledgeBase;

pub const CACHE_DIR_ENV: &str = "CLOZEGEN_CACHE_DIR";
pub const WORDNET_DIR_ENV: &str = "WORDNET_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NgramMode {
    /// Phrase table from `ngram_table`.
    Local,
    /// Search service from `remote_ngrams`.
    Remote,
    /// Every phrase passes.
    Permissive,
    /// The mock backend's phrase list.
    Mock,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSettings {
    /// Mock backend configuration (JSON). Supplies every backend that is not
    /// configured otherwise.
    pub mock: Option<PathBuf>,
    pub fill_mask: Option<FillMaskConfig>,
    /// word2vec text-format vectors: the static embedder, and the contextual
    /// one when no mock is configured.
    pub word_vectors: Option<PathBuf>,
    pub ngram_mode: Option<NgramMode>,
    pub ngram_table: Option<PathBuf>,
    pub remote_ngrams: Option<RemoteNgramConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub wordnet_dir: Option<PathBuf>,
    /// Persistent backend cache; memory only when unset.
    pub cache_dir: Option<PathBuf>,
    pub generator: GeneratorConfig,
    pub backends: BackendSettings,
}

fn resolve(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl PipelineConfig {
    /// Read a config file; relative paths in it are taken relative to the
    /// file. Environment overrides are applied afterwards.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                let mut c: PipelineConfig =
                    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new("."));
                resolve(base, &mut c.wordnet_dir);
                resolve(base, &mut c.cache_dir);
                resolve(base, &mut c.backends.mock);
                resolve(base, &mut c.backends.word_vectors);
                resolve(base, &mut c.backends.ngram_table);
                c
            }
            None => PipelineConfig::default(),
        };
        if let Some(dir) = std::env::var_os(CACHE_DIR_ENV).filter(|d| !d.is_empty()) {
            config.cache_dir = Some(dir.into());
        }
        if let Some(dir) = std::env::var_os(WORDNET_DIR_ENV).filter(|d| !d.is_empty()) {
            config.wordnet_dir = Some(dir.into());
        }
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<()> {
        let problems: Vec<String> = self
            .generator
            .problems()
            .into_iter()
            .map(|p| format!("generator: {p}"))
            .collect();
        if !problems.is_empty() {
            bail!("invalid config: {}", problems.join("; "));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn wordnet_dir(&self) -> PathBuf {
        self.wordnet_dir.clone().unwrap_or_else(|| PathBuf::from("data/wordnet"))
    }

    pub fn load_wordnet(&self) -> Result<Arc<KnowledgeBase>> {
        let dir = self.wordnet_dir();
        let kb = KnowledgeBase::load(&dir)
            .with_context(|| format!("cannot load WordNet from {}", dir.display()))?;
        Ok(Arc::new(kb))
    }

    pub fn cache(&self) -> Result<Option<Arc<CacheStore>>> {
        match &self.cache_dir {
            Some(dir) => {
                let store = CacheStore::disk(dir)
                    .with_context(|| format!("cannot open cache directory {}", dir.display()))?;
                Ok(Some(Arc::new(store)))
            }
            None => Ok(None),
        }
    }

    pub fn backends(&self, kb: &Arc<KnowledgeBase>) -> Result<Backends> {
        let b = &self.backends;
        let mock: Option<Backends> = match &b.mock {
            Some(path) => {
                let config = MockConfig::load(path)?;
                Some(Mock::new(config, Some(kb.clone())).into_backends())
            }
            None => None,
        };
        let vectors: Option<Arc<WordVectors>> = match &b.word_vectors {
            Some(path) => Some(Arc::new(
                WordVectors::load(path).with_context(|| format!("cannot load {}", path.display()))?,
            )),
            None => None,
        };

        let predictor: Arc<dyn MaskedPredictor> = match (&b.fill_mask, &mock) {
            (Some(c), _) => Arc::new(HttpFillMask::new(c.clone())),
            (None, Some(m)) => m.predictor.clone(),
            (None, None) => bail!("no masked-token predictor: set backends.fill_mask or backends.mock"),
        };
        let embedder: Arc<dyn ContextualEmbedder> = match (&mock, &vectors) {
            (Some(m), _) => m.embedder.clone(),
            (None, Some(v)) => v.clone(),
            (None, None) => bail!("no contextual embedder: set backends.mock or backends.word_vectors"),
        };
        let static_embedder: Arc<dyn StaticEmbedder> = match (&vectors, &mock) {
            (Some(v), _) => v.clone(),
            (None, Some(m)) => m.static_embedder.clone(),
            (None, None) => bail!("no static embedder: set backends.word_vectors or backends.mock"),
        };
        let wsd: Arc<dyn SenseDisambiguator> = match &mock {
            Some(m) => m.wsd.clone(),
            None => Arc::new(FirstSense::new(kb.clone())),
        };
        let tagger: Arc<dyn Tagger> = match &mock {
            Some(m) => m.tagger.clone(),
            None => Arc::new(LexiconTagger::new(kb.clone())),
        };
        let mode = match (b.ngram_mode, &mock) {
            (Some(mode), _) => mode,
            (None, Some(_)) => NgramMode::Mock,
            (None, None) => bail!("backends.ngram_mode must be one of local, remote, permissive"),
        };
        let ngrams: Arc<dyn NgramSource> = match mode {
            NgramMode::Local => {
                let Some(path) = &b.ngram_table else {
                    bail!("ngram_mode = \"local\" needs backends.ngram_table");
                };
                Arc::new(NgramTable::load(path)?)
            }
            NgramMode::Remote => {
                let Some(c) = &b.remote_ngrams else {
                    bail!("ngram_mode = \"remote\" needs backends.remote_ngrams");
                };
                Arc::new(RemoteNgrams::new(c.clone()))
            }
            NgramMode::Permissive => Arc::new(Permissive),
            NgramMode::Mock => match &mock {
                Some(m) => m.ngrams.clone(),
                None => bail!("ngram_mode = \"mock\" needs backends.mock"),
            },
        };
        Ok(Backends {
            predictor,
            embedder,
            static_embedder,
            wsd,
            tagger,
            ngrams,
        })
    }

    /// Knowledge base, backends and cache assembled into a generator.
    pub fn generator(&self) -> Result<Generator> {
        let kb = self.load_wordnet()?;
        let backends = self.backends(&kb)?;
        Ok(Generator::new(kb, backends, self.generator.clone(), self.cache()?)?)
    }
}
