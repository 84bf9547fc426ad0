//! End-to-end question generation.
//!
//! Work for one answer key is split in two: [`Generator::prepare`] does
//! everything that does not depend on the scoring parameters (segmentation,
//! candidate gathering and annotation, filtering, and the E / SD / position
//! factors), and [`Generator::finalize`] ranks, combines, verifies, and
//! selects under a given parameter set. Tuning reuses one preparation across
//! the whole grid.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::cache::CacheStore;
use crate::backends::{Backends, TokenTag, UPos};
use crate::distractor::{
    build_phrases, combine_candidates, feature_filter, ngram_verdicts, prepare_factors,
    rank_prepared, select_distractors, DistractorCandidate, Factors, FilterTrace, LexicalMode,
    NgramErrorPolicy, RankedIdc, ScoreParams,
};
use crate::error::{PipelineError, PipelineResult};
use crate::idc::{annotate_idc, annotate_instance, gather_idcs, HierarchyDepth, Idc, InstanceInfo};
use crate::stem::{
    identify_answer_keys, segment_answer_key, segment_sentences, select_stems, AnswerKey,
    AnswerKeyKind, CentralityRanker, LeadRanker, Ranker, Sentence, StemBounds,
};
use crate::text::{detokenize, tokenize, Span};
use crate::wordnet::KnowledgeBase;

pub const BLANK: &str = "**blank**";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankerKind {
    #[default]
    Centrality,
    Lead,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lexical_mode: LexicalMode,
    /// L-IDCs per instance used for combinations.
    pub m: usize,
    /// Distractors per question.
    pub n: usize,
    /// Predictions requested per instance.
    pub k: usize,
    /// Candidate phrases per answer key.
    pub cap: usize,
    pub min_stem_tokens: usize,
    pub max_stem_tokens: usize,
    pub ranker: RankerKind,
    pub hierarchy: HierarchyDepth,
    pub ngram_errors: NgramErrorPolicy,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let score = ScoreParams::default();
        let bounds = StemBounds::default();
        Self {
            alpha: score.alpha,
            beta: score.beta,
            gamma: score.gamma,
            lexical_mode: score.mode,
            m: 10,
            n: 3,
            k: 50,
            cap: 500,
            min_stem_tokens: bounds.min_tokens,
            max_stem_tokens: bounds.max_tokens,
            ranker: RankerKind::default(),
            hierarchy: HierarchyDepth::default(),
            ngram_errors: NgramErrorPolicy::default(),
        }
    }
}

impl GeneratorConfig {
    /// Field-level problems, empty when the configuration is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            p.push(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            p.push(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            p.push(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        for (name, v) in [("m", self.m), ("n", self.n), ("k", self.k), ("cap", self.cap)] {
            if v == 0 {
                p.push(format!("{name} must be at least 1"));
            }
        }
        if self.min_stem_tokens > self.max_stem_tokens {
            p.push(format!(
                "min_stem_tokens ({}) exceeds max_stem_tokens ({})",
                self.min_stem_tokens, self.max_stem_tokens
            ));
        }
        p
    }

    pub fn score_params(&self) -> ScoreParams {
        ScoreParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            mode: self.lexical_mode,
        }
    }

    pub fn stem_bounds(&self) -> StemBounds {
        StemBounds {
            min_tokens: self.min_stem_tokens,
            max_tokens: self.max_stem_tokens,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDiagnostics {
    pub info: InstanceInfo,
    pub gathered: Vec<Idc>,
    /// Candidates removed for appearing elsewhere in the stem.
    pub in_stem: Vec<String>,
    pub traces: Vec<FilterTrace>,
    /// L-IDCs dropped because their similarity could not be computed.
    pub unscorable: Vec<String>,
    pub ranked: Vec<RankedIdc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub instances: Vec<InstanceDiagnostics>,
    /// Candidate phrases with their n-gram verdicts, in enumeration order.
    pub candidates: Vec<DistractorCandidate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClozeQuestion {
    /// The stem with the answer key replaced by the blank marker.
    pub stem: String,
    pub sentence_id: usize,
    pub answer: String,
    pub answer_key: AnswerKey,
    pub distractors: Vec<String>,
    /// Fewer than `n` distractors were found.
    pub shortfall: bool,
    /// All surviving candidates by similarity, best first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ranking: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<Diagnostics>,
}

/// Render tokens with `span` replaced by the blank marker.
pub fn render_blank(tokens: &[String], span: Span) -> String {
    let mut out: Vec<&str> = tokens[..span.start].iter().map(String::as_str).collect();
    out.push(BLANK);
    out.extend(tokens[span.end..].iter().map(String::as_str));
    detokenize(&out)
}

/// Whether `surface` occurs as a token sequence in `tokens` outside `span`.
pub fn appears_elsewhere(tokens: &[String], span: Span, surface: &str) -> bool {
    let needle: Vec<String> = tokenize(surface).iter().map(|t| t.to_lowercase()).collect();
    if needle.is_empty() || needle.len() > tokens.len() {
        return false;
    }
    (0..=tokens.len() - needle.len()).any(|i| {
        let here = Span::new(i, i + needle.len());
        !here.overlaps(span)
            && tokens[i..i + needle.len()]
                .iter()
                .zip(&needle)
                .all(|(a, b)| a.to_lowercase() == *b)
    })
}

#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub info: InstanceInfo,
    pub gathered: Vec<Idc>,
    pub in_stem: Vec<String>,
    pub traces: Vec<FilterTrace>,
    pub unscorable: Vec<String>,
    pub factors: Vec<(Idc, Factors)>,
}

#[derive(Clone, Debug)]
pub struct PreparedKey {
    pub sentence: Sentence,
    pub key: AnswerKey,
    pub instances: Vec<PreparedInstance>,
}

pub struct Generation {
    pub questions: Vec<ClozeQuestion>,
    /// Fewer eligible stems than requested questions.
    pub stem_shortfall: bool,
}

pub struct Generator {
    kb: Arc<KnowledgeBase>,
    backends: Backends,
    config: GeneratorConfig,
}

impl Generator {
    /// Backends are routed through `cache` (an in-memory store when `None`),
    /// which also serializes calls to backends that require it.
    pub fn new(
        kb: Arc<KnowledgeBase>,
        backends: Backends,
        config: GeneratorConfig,
        cache: Option<Arc<CacheStore>>,
    ) -> PipelineResult<Self> {
        let problems = config.problems();
        if !problems.is_empty() {
            return Err(PipelineError::invalid(problems.join("; ")));
        }
        let store = cache.unwrap_or_else(|| Arc::new(CacheStore::memory()));
        Ok(Self {
            kb,
            backends: backends.cached(store),
            config,
        })
    }

    /// The same knowledge base and (already cached) backends under another
    /// configuration.
    pub fn with_config(&self, config: GeneratorConfig) -> PipelineResult<Self> {
        let problems = config.problems();
        if !problems.is_empty() {
            return Err(PipelineError::invalid(problems.join("; ")));
        }
        Ok(Self {
            kb: self.kb.clone(),
            backends: self.backends.clone(),
            config,
        })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn backends(&self) -> &Backends {
        &self.backends
    }

    fn ranker(&self) -> Box<dyn Ranker> {
        match self.config.ranker {
            RankerKind::Centrality => Box::new(CentralityRanker::new(self.backends.embedder.clone())),
            RankerKind::Lead => Box::new(LeadRanker),
        }
    }

    /// Questions from an article: stems in rank order, answer keys taken
    /// round-robin across stems until `num_questions` are produced. Keys
    /// with no distractor are skipped.
    pub fn generate(&self, article: &str, num_questions: usize) -> PipelineResult<Generation> {
        if num_questions == 0 {
            return Err(PipelineError::invalid("num_questions must be at least 1"));
        }
        let mut sentences = segment_sentences(article)?;
        self.ranker().rank(&mut sentences)?;
        let selection = select_stems(
            &sentences,
            num_questions,
            self.config.stem_bounds(),
            self.backends.tagger.as_ref(),
        )?;
        let params = self.config.score_params();
        let per_stem: Vec<Vec<ClozeQuestion>> = selection
            .stems
            .iter()
            .map(|stem| {
                let tags = self.backends.tagger.tag(&stem.tokens)?;
                let keys = identify_answer_keys(stem, &tags, self.backends.tagger.as_ref());
                let mut questions = Vec::new();
                for key in keys {
                    let prepared = self.prepare(stem, &tags, &key)?;
                    let q = self.finalize(&prepared, &params)?;
                    if !q.distractors.is_empty() {
                        questions.push(q);
                    }
                }
                Ok(questions)
            })
            .collect::<PipelineResult<_>>()?;
        let mut questions = Vec::new();
        let rounds = per_stem.iter().map(Vec::len).max().unwrap_or(0);
        'outer: for r in 0..rounds {
            for qs in &per_stem {
                if let Some(q) = qs.get(r) {
                    if questions.len() == num_questions {
                        break 'outer;
                    }
                    questions.push(q.clone());
                }
            }
        }
        Ok(Generation {
            questions,
            stem_shortfall: selection.shortfall,
        })
    }

    /// Rebuild the sentence behind a stem with a blank and prepare the
    /// given answer.
    pub fn prepare_entry(&self, stem: &str, answer: &str) -> PipelineResult<PreparedKey> {
        let (sentence, span) = fill_blank(stem, answer)?;
        let tags = self.backends.tagger.tag(&sentence.tokens)?;
        let kind = match (span.len(), tags[span.end - 1].pos) {
            (1, UPos::Verb | UPos::Aux) => AnswerKeyKind::SingleVerb,
            (1, _) => AnswerKeyKind::SingleNoun,
            (_, UPos::Verb | UPos::Aux) => AnswerKeyKind::VerbChunk,
            _ => AnswerKeyKind::NounChunk,
        };
        let key = AnswerKey::new(&sentence, span, kind);
        self.prepare(&sentence, &tags, &key)
    }

    pub fn prepare(&self, sentence: &Sentence, tags: &[TokenTag], key: &AnswerKey) -> PipelineResult<PreparedKey> {
        let key = segment_answer_key(key, &sentence.tokens, &self.kb);
        let instances = key
            .instances
            .iter()
            .map(|inst| self.prepare_instance(sentence, tags, inst))
            .collect::<PipelineResult<_>>()?;
        Ok(PreparedKey {
            sentence: sentence.clone(),
            key,
            instances,
        })
    }

    fn prepare_instance(
        &self,
        sentence: &Sentence,
        tags: &[TokenTag],
        instance: &crate::stem::Instance,
    ) -> PipelineResult<PreparedInstance> {
        let b = &self.backends;
        let info = annotate_instance(sentence, tags, instance, &self.kb, b.wsd.as_ref(), self.config.hierarchy)?;
        let gathered = gather_idcs(&info, sentence, &self.kb, b.predictor.as_ref(), self.config.k)?;
        let (in_stem, fresh): (Vec<Idc>, Vec<Idc>) = gathered
            .iter()
            .cloned()
            .partition(|i| appears_elsewhere(&sentence.tokens, instance.span, &i.surface));
        let annotated = fresh
            .par_iter()
            .map(|i| annotate_idc(sentence, instance, i, &self.kb, b.wsd.as_ref(), b.tagger.as_ref()))
            .collect::<PipelineResult<Vec<_>>>()?;
        let (l_idcs, traces) = feature_filter(&annotated, &info, self.config.lexical_mode);
        let scored: Vec<(Idc, PipelineResult<Factors>)> = l_idcs
            .into_par_iter()
            .map(|i| {
                let f = prepare_factors(sentence, &info, &i, &self.kb, b.embedder.as_ref());
                (i, f)
            })
            .collect();
        let mut factors = Vec::new();
        let mut unscorable = Vec::new();
        for (idc, f) in scored {
            match f {
                Ok(f) => factors.push((idc, f)),
                Err(PipelineError::Numeric(msg)) => {
                    log::warn!("dropping {:?}: {msg}", idc.surface);
                    unscorable.push(idc.surface);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(PreparedInstance {
            info,
            gathered,
            in_stem: in_stem.into_iter().map(|i| i.surface).collect(),
            traces,
            unscorable,
            factors,
        })
    }

    pub fn finalize(&self, prepared: &PreparedKey, params: &ScoreParams) -> PipelineResult<ClozeQuestion> {
        let ranked: Vec<Vec<RankedIdc>> = prepared
            .instances
            .iter()
            .map(|p| rank_prepared(&p.factors, params))
            .collect();
        let scores: Vec<Vec<f64>> = ranked
            .iter()
            .map(|r| r.iter().take(self.config.m).map(|x| x.r_score).collect())
            .collect();
        let combos = combine_candidates(&scores, self.config.cap);
        let phrases = build_phrases(&prepared.key, &ranked, &combos);
        let verdicts = ngram_verdicts(
            phrases,
            self.backends.ngrams.as_ref(),
            &self.kb,
            self.config.ngram_errors,
        )?;
        let survivors: Vec<DistractorCandidate> =
            verdicts.iter().filter(|c| c.ngram_verified).cloned().collect();
        let selection = select_distractors(
            &prepared.sentence,
            &prepared.key,
            survivors,
            self.backends.embedder.as_ref(),
            self.config.n,
        )?;
        let diagnostics = Diagnostics {
            instances: prepared
                .instances
                .iter()
                .zip(ranked)
                .map(|(p, r)| InstanceDiagnostics {
                    info: p.info.clone(),
                    gathered: p.gathered.clone(),
                    in_stem: p.in_stem.clone(),
                    traces: p.traces.clone(),
                    unscorable: p.unscorable.clone(),
                    ranked: r,
                })
                .collect(),
            candidates: verdicts,
        };
        Ok(ClozeQuestion {
            stem: render_blank(&prepared.sentence.tokens, prepared.key.span),
            sentence_id: prepared.sentence.id,
            answer: prepared.key.surface.clone(),
            answer_key: prepared.key.clone(),
            distractors: selection.distractors.iter().map(|c| c.phrase.clone()).collect(),
            shortfall: selection.shortfall,
            ranking: selection.ranked.iter().map(|c| c.phrase.clone()).collect(),
            diagnostics: Some(diagnostics),
        })
    }
}

/// The sentence obtained by writing `answer` into the blank of `stem`, and
/// the answer's token span in it.
pub fn fill_blank(stem: &str, answer: &str) -> PipelineResult<(Sentence, Span)> {
    let tokens = tokenize(stem);
    let blanks: Vec<usize> = (0..tokens.len()).filter(|&i| tokens[i] == BLANK).collect();
    let [at] = blanks[..] else {
        return Err(PipelineError::invalid(format!(
            "stem must contain exactly one {BLANK}, found {}",
            blanks.len()
        )));
    };
    let answer_tokens = tokenize(answer);
    if answer_tokens.is_empty() {
        return Err(PipelineError::invalid("answer is empty"));
    }
    let (filled, span) = crate::idc::substitute(&tokens, Span::single(at), answer);
    let text = detokenize(&filled);
    Ok((
        Sentence {
            id: 0,
            text,
            tokens: filled,
            rank_score: 1.0,
        },
        span,
    ))
}
