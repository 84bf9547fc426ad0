//! Most-frequent-sense disambiguation: the first synset listed in the index
//! files for the part of speech the span is tagged with, falling back to
//! any part of speech.

use std::sync::Arc;

use super::lexicon::LexiconTagger;
use super::{check_span, BackendDescriptor, BackendKind, BackendResult, SenseDisambiguator, Tagger};
use crate::text::Span;
use crate::wordnet::{KnowledgeBase, Pos, SynsetRef};

pub struct FirstSense {
    kb: Arc<KnowledgeBase>,
    tagger: LexiconTagger,
}

impl FirstSense {
    pub fn new(kb: Arc<KnowledgeBase>) -> Self {
        let tagger = LexiconTagger::new(kb.clone());
        Self { kb, tagger }
    }

    pub fn first_sense(kb: &KnowledgeBase, phrase: &str, pos: Option<Pos>) -> Option<SynsetRef> {
        pos.and_then(|p| kb.synsets_of(phrase, Some(p)).into_iter().next())
            .or_else(|| kb.synsets_of(phrase, None).into_iter().next())
    }

    pub fn resolve(&self, tokens: &[String], span: Span) -> BackendResult<Option<SynsetRef>> {
        check_span(tokens, span)?;
        let phrase = tokens[span.start..span.end].join(" ").to_lowercase();
        let tags = self.tagger.tag(tokens)?;
        let pos = tags[span.end - 1].pos.wordnet_pos();
        Ok(Self::first_sense(&self.kb, &phrase, pos))
    }
}

impl SenseDisambiguator for FirstSense {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::Wsd, "wordnet-first-sense", "2")
    }

    fn disambiguate(&self, tokens: &[String], span: Span) -> BackendResult<Option<SynsetRef>> {
        self.resolve(tokens, span)
    }
}
