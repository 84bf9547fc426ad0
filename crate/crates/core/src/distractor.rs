//! Answer-key distractor generation: the five-checker feature filter, IDC
//! ranking by `R = E · W · P (· L)`, combinatorial phrase synthesis, n-gram
//! verification, and final selection by contextual similarity.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::backends::{ContextualEmbedder, NgramSource};
use crate::error::{PipelineError, PipelineResult};
use crate::idc::{substitute, Idc, InstanceInfo, Origin};
use crate::stem::{AnswerKey, Sentence};
use crate::text::Span;
use crate::wordnet::KnowledgeBase;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexicalMode {
    #[default]
    Strict,
    Relaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Checker {
    #[serde(rename = "POS")]
    Pos,
    #[serde(rename = "NER")]
    Ner,
    Lexical,
    Synonym,
    #[serde(rename = "IHHS")]
    Ihhs,
}

impl Checker {
    pub const ORDER: [Checker; 5] = [
        Checker::Pos,
        Checker::Ner,
        Checker::Lexical,
        Checker::Synonym,
        Checker::Ihhs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Checker::Pos => "POS",
            Checker::Ner => "NER",
            Checker::Lexical => "Lexical",
            Checker::Synonym => "Synonym",
            Checker::Ihhs => "IHHS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterTrace {
    pub idc: Idc,
    /// `None` for survivors (L-IDCs).
    pub removed_by: Option<Checker>,
    pub detail: String,
}

/// `Err(detail)` removes the candidate; `Ok(Some(note))` passes with a note.
type Verdict = Result<Option<String>, String>;

fn check(checker: Checker, idc: &Idc, info: &InstanceInfo, mode: LexicalMode) -> Verdict {
    let label = |l: &Option<String>| l.clone().unwrap_or_else(|| "-".into());
    match checker {
        Checker::Pos => match idc.pos {
            Some(p) if p == info.pos => Ok(None),
            p => Err(format!(
                "POS {} vs {}",
                p.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                info.pos
            )),
        },
        Checker::Ner => {
            if idc.ner == info.ner {
                Ok(None)
            } else {
                Err(format!("NER {} vs {}", label(&idc.ner), label(&info.ner)))
            }
        }
        Checker::Lexical => {
            let Some(lu) = &info.lexical_label else {
                return Ok(Some("instance has no synset; lexical check skipped".into()));
            };
            match mode {
                LexicalMode::Strict if idc.lexical_label.as_ref() == Some(lu) => Ok(None),
                LexicalMode::Strict => Err(format!("LL {} vs {lu}", label(&idc.lexical_label))),
                LexicalMode::Relaxed if idc.label_set.contains(lu) => Ok(None),
                LexicalMode::Relaxed => Err(format!("{lu} not among candidate labels")),
            }
        }
        Checker::Synonym => {
            let Some(su) = info.synset else {
                return Ok(Some("instance has no synset; synonym check skipped".into()));
            };
            let same = match idc.synset {
                Some(sy) => sy == su,
                // Without a contextual sense, any shared sense counts.
                None => idc.synsets.contains(&su),
            };
            if same {
                Err(format!("shares synset {su}"))
            } else {
                Ok(None)
            }
        }
        Checker::Ihhs => {
            if info.synset.is_none() {
                return Ok(Some("instance has no synset; IHHS check skipped".into()));
            }
            if idc.synsets.iter().any(|s| info.hierarchy.contains(s)) {
                Ok(None)
            } else {
                Err("no synset among inherited hypernyms and hyponyms".into())
            }
        }
    }
}

/// Apply the checkers in order; each candidate is traced once, with the
/// first checker that removed it.
pub fn feature_filter(idcs: &[Idc], info: &InstanceInfo, mode: LexicalMode) -> (Vec<Idc>, Vec<FilterTrace>) {
    let mut kept = Vec::new();
    let mut traces = Vec::with_capacity(idcs.len());
    for idc in idcs {
        let mut notes = Vec::new();
        let mut removed = None;
        for checker in Checker::ORDER {
            match check(checker, idc, info, mode) {
                Ok(Some(note)) => notes.push(note),
                Ok(None) => {}
                Err(detail) => {
                    removed = Some((checker, detail));
                    break;
                }
            }
        }
        match removed {
            Some((checker, detail)) => traces.push(FilterTrace {
                idc: idc.clone(),
                removed_by: Some(checker),
                detail,
            }),
            None => {
                traces.push(FilterTrace {
                    idc: idc.clone(),
                    removed_by: None,
                    detail: notes.join("; "),
                });
                kept.push(idc.clone());
            }
        }
    }
    (kept, traces)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mode: LexicalMode,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha: 20.5,
            beta: 1.1,
            gamma: 0.5,
            mode: LexicalMode::Strict,
        }
    }
}

/// Cosine of the contextual embeddings of the instance and of the candidate
/// substituted for it.
pub fn embedding_similarity(
    sentence: &Sentence,
    span: Span,
    candidate: &str,
    embedder: &dyn ContextualEmbedder,
) -> PipelineResult<f64> {
    let original = embedder.embed_span(&sentence.tokens, span)?;
    let (tokens, new_span) = substitute(&sentence.tokens, span, candidate);
    let replaced = embedder.embed_span(&tokens, new_span)?;
    original.cosine(&replaced).ok_or_else(|| {
        PipelineError::Numeric(format!(
            "zero-norm embedding comparing {:?} with {candidate:?}",
            sentence.tokens[span.start..span.end].join(" ")
        ))
    })
}

/// Gloss relatedness, clamped to [0, 1].
pub fn synset_distance(
    kb: &KnowledgeBase,
    a: crate::wordnet::SynsetRef,
    b: crate::wordnet::SynsetRef,
    embedder: &dyn ContextualEmbedder,
) -> PipelineResult<f64> {
    if a == b {
        return Ok(1.0);
    }
    let ea = embedder.embed_text(kb.gloss_of(a)?)?;
    let eb = embedder.embed_text(kb.gloss_of(b)?)?;
    Ok(ea.cosine(&eb).unwrap_or(0.0).clamp(0.0, 1.0))
}

/// Largest SD between the instance synset and the candidate synsets carrying
/// the instance's lexical label; `None` when that set is empty.
pub fn max_synset_distance(
    info: &InstanceInfo,
    idc: &Idc,
    kb: &KnowledgeBase,
    embedder: &dyn ContextualEmbedder,
) -> PipelineResult<Option<f64>> {
    let (Some(su), Some(lu)) = (info.synset, &info.lexical_label) else {
        return Ok(None);
    };
    let mut best: Option<f64> = None;
    for &theta in &idc.synsets {
        if kb.lexical_label(theta)? != lu {
            continue;
        }
        let sd = synset_distance(kb, su, theta, embedder)?;
        best = Some(best.map_or(sd, |b: f64| b.max(sd)));
    }
    Ok(best)
}

/// `W = 1 + maxSD^α`, or 1 without comparable synsets.
pub fn synset_reward(max_sd: Option<f64>, alpha: f64) -> f64 {
    match max_sd {
        Some(sd) => 1.0 + sd.clamp(0.0, 1.0).powf(alpha),
        None => 1.0,
    }
}

/// `P = 1 + β / p` for predicted candidates, 1 for siblings.
pub fn prediction_reward(origin: Origin, beta: f64) -> f64 {
    match origin.position() {
        Some(p) => 1.0 + beta / p as f64,
        None => 1.0,
    }
}

/// `L = γ` when the contextual lexical labels differ (relaxed mode only).
pub fn lexical_penalty(labels_match: bool, gamma: f64, mode: LexicalMode) -> f64 {
    match mode {
        LexicalMode::Strict => 1.0,
        LexicalMode::Relaxed if labels_match => 1.0,
        LexicalMode::Relaxed => gamma,
    }
}

/// The parameter-independent inputs of a candidate's score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factors {
    pub e_score: f64,
    pub max_sd: Option<f64>,
    pub origin: Origin,
    pub labels_match: bool,
}

pub fn prepare_factors(
    sentence: &Sentence,
    info: &InstanceInfo,
    idc: &Idc,
    kb: &KnowledgeBase,
    embedder: &dyn ContextualEmbedder,
) -> PipelineResult<Factors> {
    Ok(Factors {
        e_score: embedding_similarity(sentence, info.instance.span, &idc.surface, embedder)?,
        max_sd: max_synset_distance(info, idc, kb, embedder)?,
        origin: idc.origin,
        labels_match: info.lexical_label.is_some() && idc.lexical_label == info.lexical_label,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedIdc {
    pub idc: Idc,
    pub e_score: f64,
    pub w_score: f64,
    pub p_score: f64,
    pub l_score: f64,
    pub r_score: f64,
}

pub fn score(idc: &Idc, f: &Factors, params: &ScoreParams) -> RankedIdc {
    let w = synset_reward(f.max_sd, params.alpha);
    let p = prediction_reward(f.origin, params.beta);
    let l = lexical_penalty(f.labels_match, params.gamma, params.mode);
    RankedIdc {
        idc: idc.clone(),
        e_score: f.e_score,
        w_score: w,
        p_score: p,
        l_score: l,
        r_score: f.e_score * w * p * l,
    }
}

/// Descending `r_score`; ties by higher `e_score`, then surface.
pub fn rank_prepared(prepared: &[(Idc, Factors)], params: &ScoreParams) -> Vec<RankedIdc> {
    let mut ranked: Vec<RankedIdc> = prepared.iter().map(|(i, f)| score(i, f, params)).collect();
    ranked.sort_by(|a, b| {
        b.r_score
            .total_cmp(&a.r_score)
            .then(b.e_score.total_cmp(&a.e_score))
            .then_with(|| a.idc.surface.cmp(&b.idc.surface))
    });
    ranked
}

pub fn rank_idcs(
    sentence: &Sentence,
    l_idcs: &[Idc],
    info: &InstanceInfo,
    kb: &KnowledgeBase,
    embedder: &dyn ContextualEmbedder,
    params: &ScoreParams,
) -> PipelineResult<Vec<RankedIdc>> {
    let prepared = l_idcs
        .iter()
        .map(|i| Ok((i.clone(), prepare_factors(sentence, info, i, kb, embedder)?)))
        .collect::<PipelineResult<Vec<_>>>()?;
    Ok(rank_prepared(&prepared, params))
}

/// One way of keeping or replacing each instance: `None` keeps it, `Some(j)`
/// takes its j-th ranked L-IDC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    pub choices: Vec<Option<usize>>,
    pub score: f64,
}

/// Number of non-identity combinations, `∏(m_i + 1) − 1`, saturating.
pub fn combination_count(sizes: &[usize]) -> usize {
    sizes
        .iter()
        .fold(1usize, |acc, &m| acc.saturating_mul(m + 1))
        .saturating_sub(1)
}

/// Enumerations larger than this shrink the longest lists first.
pub const MAX_ENUMERATION: usize = 1 << 20;

/// Every keep-or-replace combination except all-keep, ordered by the product
/// of the chosen `r_scores` (kept instances contribute 1), then by choice
/// vector, truncated to `cap`.
pub fn combine_candidates(scores: &[Vec<f64>], cap: usize) -> Vec<Combination> {
    let mut sizes: Vec<usize> = scores.iter().map(Vec::len).collect();
    while combination_count(&sizes) >= MAX_ENUMERATION {
        let widest = (0..sizes.len()).max_by_key(|&i| (sizes[i], usize::MAX - i)).expect("non-empty");
        sizes[widest] -= 1;
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; sizes.len()];
    loop {
        if choice.iter().any(|&c| c > 0) {
            let choices: Vec<Option<usize>> = choice.iter().map(|&c| c.checked_sub(1)).collect();
            let score = choices
                .iter()
                .zip(scores)
                .map(|(c, s)| c.map_or(1.0, |j| s[j]))
                .product();
            out.push(Combination { choices, score });
        }
        // Odometer increment, rightmost slot fastest.
        let mut i = sizes.len();
        loop {
            if i == 0 {
                out.sort_by(|a, b| {
                    b.score
                        .total_cmp(&a.score)
                        .then_with(|| a.choices.cmp(&b.choices))
                });
                out.truncate(cap);
                return out;
            }
            i -= 1;
            if choice[i] < sizes[i] {
                choice[i] += 1;
                break;
            }
            choice[i] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistractorCandidate {
    pub phrase: String,
    /// Instance index → replacement surface, for replaced instances only.
    pub substitutions: BTreeMap<usize, String>,
    pub ngram_verified: bool,
    pub css_score: f64,
}

/// Build the phrases for `combinations` over the answer key's instances,
/// dropping any equal to the key itself or to an earlier phrase.
pub fn build_phrases(
    key: &AnswerKey,
    ranked: &[Vec<RankedIdc>],
    combinations: &[Combination],
) -> Vec<DistractorCandidate> {
    let key_norm = key.surface.to_lowercase();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in combinations {
        let mut parts = Vec::with_capacity(c.choices.len());
        let mut substitutions = BTreeMap::new();
        for (i, choice) in c.choices.iter().enumerate() {
            match choice {
                Some(j) => {
                    let s = ranked[i][*j].idc.surface.clone();
                    substitutions.insert(i, s.clone());
                    parts.push(s);
                }
                None => parts.push(key.instances[i].surface.clone()),
            }
        }
        let phrase = parts.join(" ");
        let norm = phrase.to_lowercase();
        if norm == key_norm || !seen.insert(norm) {
            continue;
        }
        out.push(DistractorCandidate {
            phrase,
            substitutions,
            ngram_verified: false,
            css_score: 0.0,
        });
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NgramErrorPolicy {
    /// Abort on a backend error.
    #[default]
    Fail,
    /// Keep the phrase and log a warning.
    Keep,
}

/// Mark each phrase with whether the n-gram source attests it. Single words
/// that are WordNet entries count as attested without a lookup.
pub fn ngram_verdicts(
    candidates: Vec<DistractorCandidate>,
    source: &dyn NgramSource,
    kb: &KnowledgeBase,
    policy: NgramErrorPolicy,
) -> PipelineResult<Vec<DistractorCandidate>> {
    let mut out = Vec::with_capacity(candidates.len());
    for mut c in candidates {
        c.ngram_verified = if !c.phrase.contains(' ') && kb.is_entry(&c.phrase, None) {
            true
        } else {
            match source.ngram_exists(&c.phrase) {
                Ok(v) => v,
                Err(e) if policy == NgramErrorPolicy::Keep => {
                    log::warn!("n-gram lookup for {:?} failed, keeping it: {e}", c.phrase);
                    true
                }
                Err(e) => return Err(e.into()),
            }
        };
        out.push(c);
    }
    Ok(out)
}

/// The attested phrases only.
pub fn ngram_filter(
    candidates: Vec<DistractorCandidate>,
    source: &dyn NgramSource,
    kb: &KnowledgeBase,
    policy: NgramErrorPolicy,
) -> PipelineResult<Vec<DistractorCandidate>> {
    Ok(ngram_verdicts(candidates, source, kb, policy)?
        .into_iter()
        .filter(|c| c.ngram_verified)
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub distractors: Vec<DistractorCandidate>,
    /// Every scored candidate, best first.
    pub ranked: Vec<DistractorCandidate>,
    pub shortfall: bool,
}

/// Score each candidate by the cosine between the answer key and the
/// candidate substituted for it, and keep the best `n` (ties by phrase).
pub fn select_distractors(
    sentence: &Sentence,
    key: &AnswerKey,
    candidates: Vec<DistractorCandidate>,
    embedder: &dyn ContextualEmbedder,
    n: usize,
) -> PipelineResult<Selection> {
    if n == 0 {
        return Err(PipelineError::invalid("n must be at least 1"));
    }
    let key_norm = key.surface.to_lowercase();
    let mut seen = HashSet::new();
    let mut scored = Vec::new();
    for mut c in candidates {
        let norm = c.phrase.to_lowercase();
        if norm == key_norm || !seen.insert(norm) {
            continue;
        }
        c.css_score = embedding_similarity(sentence, key.span, &c.phrase, embedder)?;
        scored.push(c);
    }
    scored.sort_by(|a, b| {
        b.css_score
            .total_cmp(&a.css_score)
            .then_with(|| a.phrase.cmp(&b.phrase))
    });
    let distractors: Vec<DistractorCandidate> = scored.iter().take(n).cloned().collect();
    let shortfall = distractors.len() < n;
    Ok(Selection {
        distractors,
        ranked: scored,
        shortfall,
    })
}
