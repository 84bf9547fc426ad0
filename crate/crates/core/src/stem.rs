//! Stem and answer-key selection: sentence segmentation and ranking, the
//! declarative-stem filter, answer-key identification, and right-to-left
//! segmentation of answer keys into WordNet instances.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::backends::{chunk::is_possessive, ContextualEmbedder, Tagger, TokenTag, UPos};
use crate::error::{PipelineError, PipelineResult};
use crate::text::{sentence_bounds, tokenize, Span};
use crate::wordnet::KnowledgeBase;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub id: usize,
    pub text: String,
    pub tokens: Vec<String>,
    pub rank_score: f64,
}

impl Sentence {
    pub fn new(id: usize, text: &str) -> Self {
        Self {
            id,
            text: text.to_string(),
            tokens: tokenize(text),
            rank_score: 0.0,
        }
    }
}

pub fn segment_sentences(article: &str) -> PipelineResult<Vec<Sentence>> {
    if article.trim().is_empty() {
        return Err(PipelineError::invalid("article is empty"));
    }
    Ok(sentence_bounds(article)
        .into_iter()
        .enumerate()
        .map(|(id, (s, e))| Sentence::new(id, &article[s..e]))
        .collect())
}

pub trait Ranker: Send + Sync {
    fn name(&self) -> &str;

    /// Fill in `rank_score` for every sentence.
    fn rank(&self, sentences: &mut [Sentence]) -> PipelineResult<()>;
}

/// Each sentence scores the mean cosine similarity of its embedding to every
/// other sentence's. A lone sentence scores 1.
pub struct CentralityRanker {
    embedder: Arc<dyn ContextualEmbedder>,
}

impl CentralityRanker {
    pub fn new(embedder: Arc<dyn ContextualEmbedder>) -> Self {
        Self { embedder }
    }
}

impl Ranker for CentralityRanker {
    fn name(&self) -> &str {
        "centrality"
    }

    fn rank(&self, sentences: &mut [Sentence]) -> PipelineResult<()> {
        if sentences.len() == 1 {
            sentences[0].rank_score = 1.0;
            return Ok(());
        }
        let embeddings = sentences
            .iter()
            .map(|s| self.embedder.embed_text(&s.text))
            .collect::<Result<Vec<_>, _>>()?;
        let n = sentences.len();
        for (i, sentence) in sentences.iter_mut().enumerate() {
            let total: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| embeddings[i].cosine(&embeddings[j]).unwrap_or(0.0))
                .sum();
            sentence.rank_score = total / (n - 1) as f64;
        }
        Ok(())
    }
}

/// Earlier sentences rank higher: score 1 / (1 + id).
pub struct LeadRanker;

impl Ranker for LeadRanker {
    fn name(&self) -> &str {
        "lead"
    }

    fn rank(&self, sentences: &mut [Sentence]) -> PipelineResult<()> {
        for s in sentences {
            s.rank_score = 1.0 / (1.0 + s.id as f64);
        }
        Ok(())
    }
}

/// Ends with a period, has a verb or auxiliary, and does not open with a
/// bare verb (an imperative).
pub fn is_declarative(tokens: &[String], tags: &[TokenTag]) -> bool {
    let last = tokens
        .iter()
        .rev()
        .find(|t| !matches!(t.as_str(), "\"" | "'" | ")" | "”" | "’"));
    if last.map(String::as_str) != Some(".") {
        return false;
    }
    if !tags.iter().any(|t| matches!(t.pos, UPos::Verb | UPos::Aux)) {
        return false;
    }
    let imperative = tags.first().is_some_and(|t| t.pos == UPos::Verb)
        && tokens.first().is_some_and(|w| {
            let w = w.to_lowercase();
            !(w.ends_with("ing") || w.ends_with("ed") || w.ends_with('s'))
        });
    !imperative
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StemBounds {
    pub min_tokens: usize,
    pub max_tokens: usize,
}

impl Default for StemBounds {
    fn default() -> Self {
        Self {
            min_tokens: 8,
            max_tokens: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StemSelection {
    pub stems: Vec<Sentence>,
    /// Fewer eligible sentences than requested.
    pub shortfall: bool,
}

/// Highest-ranked declarative sentences whose token count lies within
/// `bounds`, ordered by (rank_score desc, id asc).
pub fn select_stems(
    sentences: &[Sentence],
    n_stems: usize,
    bounds: StemBounds,
    tagger: &dyn Tagger,
) -> PipelineResult<StemSelection> {
    if n_stems == 0 {
        return Err(PipelineError::invalid("n_stems must be at least 1"));
    }
    let mut order: Vec<&Sentence> = sentences.iter().collect();
    order.sort_by(|a, b| b.rank_score.total_cmp(&a.rank_score).then(a.id.cmp(&b.id)));
    let mut stems = Vec::new();
    for s in order {
        if stems.len() == n_stems {
            break;
        }
        let len = s.tokens.len();
        if len < bounds.min_tokens || len > bounds.max_tokens {
            continue;
        }
        let tags = tagger.tag(&s.tokens)?;
        if is_declarative(&s.tokens, &tags) {
            stems.push(s.clone());
        }
    }
    let shortfall = stems.len() < n_stems;
    Ok(StemSelection { stems, shortfall })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKeyKind {
    NounChunk,
    VerbChunk,
    SingleNoun,
    SingleVerb,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub surface: String,
    /// Token range within the stem sentence.
    pub span: Span,
    pub in_wordnet: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub stem_sentence_id: usize,
    pub span: Span,
    pub surface: String,
    pub kind: AnswerKeyKind,
    pub instances: Vec<Instance>,
}

impl AnswerKey {
    pub fn new(sentence: &Sentence, span: Span, kind: AnswerKeyKind) -> Self {
        Self {
            stem_sentence_id: sentence.id,
            span,
            surface: sentence.tokens[span.start..span.end].join(" "),
            kind,
            instances: Vec::new(),
        }
    }
}

/// Noun and verb chunks (leading determiners and possessives stripped) plus
/// single nouns and verbs outside any multiword key, in sentence order.
/// Keys containing a pronoun are dropped.
pub fn identify_answer_keys(stem: &Sentence, tags: &[TokenTag], tagger: &dyn Tagger) -> Vec<AnswerKey> {
    let tokens = &stem.tokens;
    let mut keys: Vec<AnswerKey> = Vec::new();
    let has_pronoun = |span: Span| (span.start..span.end).any(|i| tags[i].pos == UPos::Pron);

    for chunk in tagger.noun_chunks(tokens, tags) {
        let mut start = chunk.start;
        while start < chunk.end
            && (tags[start].pos == UPos::Det
                || (tags[start].pos == UPos::Pron && is_possessive(&tokens[start])))
        {
            start += 1;
        }
        let span = Span::new(start, chunk.end);
        if span.is_empty() || has_pronoun(span) {
            continue;
        }
        let kind = if span.len() == 1 {
            AnswerKeyKind::SingleNoun
        } else {
            AnswerKeyKind::NounChunk
        };
        keys.push(AnswerKey::new(stem, span, kind));
    }
    for span in tagger.verb_chunks(tokens, tags) {
        if has_pronoun(span) {
            continue;
        }
        let kind = if span.len() == 1 {
            AnswerKeyKind::SingleVerb
        } else {
            AnswerKeyKind::VerbChunk
        };
        keys.push(AnswerKey::new(stem, span, kind));
    }
    let covered: Vec<Span> = keys.iter().map(|k| k.span).collect();
    for (i, tag) in tags.iter().enumerate() {
        let span = Span::single(i);
        if covered.iter().any(|c| c.contains(span)) {
            continue;
        }
        let kind = match tag.pos {
            UPos::Noun | UPos::Propn => AnswerKeyKind::SingleNoun,
            UPos::Verb => AnswerKeyKind::SingleVerb,
            _ => continue,
        };
        keys.push(AnswerKey::new(stem, span, kind));
    }
    keys.sort_by_key(|k| k.span);
    keys.dedup_by_key(|k| k.span);
    keys
}

/// Right-to-left instance boundaries over `words`: grow a suffix one word at
/// a time while it stays a WordNet entry, emit it, and repeat on what is
/// left. A word that is not an entry even alone becomes a one-word segment
/// marked as not in WordNet. Returns `(start, end, in_wordnet)` triples left
/// to right.
pub fn segment_words(words: &[String], is_entry: impl Fn(&str) -> bool) -> Vec<(usize, usize, bool)> {
    let mut out = Vec::new();
    let mut end = words.len();
    while end > 0 {
        let mut len = 0;
        while len < end && is_entry(&words[end - len - 1..end].join(" ").to_lowercase()) {
            len += 1;
        }
        if len == 0 {
            out.push((end - 1, end, false));
            end -= 1;
        } else {
            out.push((end - len, end, true));
            end -= len;
        }
    }
    out.reverse();
    out
}

pub fn segment_answer_key(key: &AnswerKey, tokens: &[String], kb: &KnowledgeBase) -> AnswerKey {
    let words = &tokens[key.span.start..key.span.end];
    let instances = segment_words(words, |phrase| kb.is_entry(phrase, None))
        .into_iter()
        .map(|(s, e, in_wordnet)| Instance {
            surface: words[s..e].join(" "),
            span: Span::new(key.span.start + s, key.span.start + e),
            in_wordnet,
        })
        .collect();
    AnswerKey {
        instances,
        ..key.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn segmentation_grows_suffixes_right_to_left() {
        let entries = ["cells", "blood cells", "white blood cells", "artificial", "abnormal"];
        let is_entry = |p: &str| entries.contains(&p);
        assert_eq!(
            segment_words(&words("abnormal white blood cells"), is_entry),
            vec![(0, 1, true), (1, 4, true)]
        );
        assert_eq!(
            segment_words(&words("artificial blood cells"), is_entry),
            vec![(0, 1, true), (1, 3, true)]
        );
        assert_eq!(
            segment_words(&words("zzz cells"), is_entry),
            vec![(0, 1, false), (1, 2, true)]
        );
    }

    #[test]
    fn growth_stops_at_the_first_gap() {
        // "b c" is not an entry, so "a b c" is never tried.
        let is_entry = |p: &str| ["c", "a b c", "b"].contains(&p);
        assert_eq!(
            segment_words(&words("a b c"), is_entry),
            vec![(0, 1, false), (1, 2, true), (2, 3, true)]
        );
    }

    #[test]
    fn declarative_needs_period_and_verb() {
        let t = |ps: &[UPos]| ps.iter().map(|&p| TokenTag::new(p)).collect::<Vec<_>>();
        use UPos::*;
        assert!(is_declarative(&words("Dogs bark ."), &t(&[Noun, Verb, Punct])));
        assert!(!is_declarative(&words("Dogs bark ?"), &t(&[Noun, Verb, Punct])));
        assert!(!is_declarative(&words("Red dogs ."), &t(&[Adj, Noun, Punct])));
        assert!(!is_declarative(&words("Describe dogs ."), &t(&[Verb, Noun, Punct])));
    }

    #[test]
    fn lead_ranker_prefers_early_sentences() {
        let mut s = segment_sentences("A b. C d. E f.").unwrap();
        LeadRanker.rank(&mut s).unwrap();
        assert!(s[0].rank_score > s[1].rank_score && s[1].rank_score > s[2].rank_score);
    }

    #[test]
    fn empty_article_is_rejected() {
        assert!(segment_sentences("  \n").is_err());
    }
}
