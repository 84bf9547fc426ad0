//! Per-entry metrics comparing generated distractors with ground truth.
//!
//! String matching is case-insensitive after whitespace normalization.
//! Similarity metrics clamp each pair's cosine to [0, 1].

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::backends::{ContextualEmbedder, Embedding, StaticEmbedder};
use crate::error::PipelineResult;
use crate::pipeline::fill_blank;
use crate::text::tokenize;

use super::normalize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SetMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub p_at_1: f64,
}

fn truth_set(truth: &[String]) -> HashSet<String> {
    truth.iter().map(|t| normalize(t)).collect()
}

/// P, R, F1 and P@1 of the top `k_gen` generated items. Precision divides by
/// `k_gen` even when fewer items were generated.
pub fn set_metrics(generated: &[String], truth: &[String], k_gen: usize) -> SetMetrics {
    let truth = truth_set(truth);
    let top: HashSet<String> = generated.iter().take(k_gen).map(|g| normalize(g)).collect();
    let hits = top.intersection(&truth).count() as f64;
    let precision = if k_gen == 0 { 0.0 } else { hits / k_gen as f64 };
    let recall = if truth.is_empty() { 0.0 } else { hits / truth.len() as f64 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let p_at_1 = match generated.first() {
        Some(g) if truth.contains(&normalize(g)) => 1.0,
        _ => 0.0,
    };
    SetMetrics {
        precision,
        recall,
        f1,
        p_at_1,
    }
}

/// Reciprocal rank of the first hit, looking at no more than `cutoff` items.
pub fn mrr(generated: &[String], truth: &[String], cutoff: Option<usize>) -> f64 {
    let truth = truth_set(truth);
    generated
        .iter()
        .take(cutoff.unwrap_or(usize::MAX))
        .position(|g| truth.contains(&normalize(g)))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64)
}

/// Binary-relevance NDCG over the top `k`, normalized by the ideal ranking
/// of all ground-truth items.
pub fn ndcg_at_k(generated: &[String], truth: &[String], k: usize) -> f64 {
    let truth = truth_set(truth);
    let idcg: f64 = (1..=truth.len().min(k)).map(|i| 1.0 / (i as f64 + 1.0).log2()).sum();
    if idcg == 0.0 {
        return 0.0;
    }
    let mut seen = HashSet::new();
    let dcg: f64 = generated
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, g)| {
            let g = normalize(g);
            truth.contains(&g) && seen.insert(g)
        })
        .map(|(i, _)| 1.0 / (i as f64 + 2.0).log2())
        .sum();
    dcg / idcg
}

/// Mean of pairwise similarities, with the pairs that could not be compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairMean {
    /// `None` when no pair could be compared.
    pub value: Option<f64>,
    pub pairs: usize,
    pub skipped: usize,
}

fn pair_mean(generated: &[Option<Embedding>], truth: &[Option<Embedding>]) -> PairMean {
    let mut sum = 0.0;
    let mut out = PairMean::default();
    for g in generated {
        for t in truth {
            match (g, t) {
                (Some(g), Some(t)) => match g.cosine(t) {
                    Some(c) => {
                        sum += c.clamp(0.0, 1.0);
                        out.pairs += 1;
                    }
                    None => out.skipped += 1,
                },
                _ => out.skipped += 1,
            }
        }
    }
    if out.pairs > 0 {
        out.value = Some(sum / out.pairs as f64);
    }
    out
}

/// Static vector of a phrase: mean of its in-vocabulary word vectors.
pub fn phrase_vector(phrase: &str, embedder: &dyn StaticEmbedder) -> Option<Embedding> {
    let vectors: Vec<Embedding> = tokenize(phrase)
        .iter()
        .filter_map(|w| embedder.embed_word(w).or_else(|| embedder.embed_word(&w.to_lowercase())))
        .collect();
    Embedding::mean(&vectors)
}

/// Word-vector similarity over all generated x truth pairs.
pub fn wss(generated: &[String], truth: &[String], embedder: &dyn StaticEmbedder) -> PairMean {
    let g: Vec<_> = generated.iter().map(|p| phrase_vector(p, embedder)).collect();
    let t: Vec<_> = truth.iter().map(|p| phrase_vector(p, embedder)).collect();
    pair_mean(&g, &t)
}

/// Contextual similarity: each phrase is written into the stem's blank and
/// embedded there.
pub fn css(
    stem: &str,
    generated: &[String],
    truth: &[String],
    embedder: &dyn ContextualEmbedder,
) -> PipelineResult<PairMean> {
    let embed = |phrase: &String| -> PipelineResult<Option<Embedding>> {
        let (sentence, span) = fill_blank(stem, phrase)?;
        let e = embedder.embed_span(&sentence.tokens, span)?;
        Ok((e.norm() > 0.0 && e.is_finite()).then_some(e))
    };
    let g = generated.iter().map(embed).collect::<PipelineResult<Vec<_>>>()?;
    let t = truth.iter().map(embed).collect::<PipelineResult<Vec<_>>>()?;
    Ok(pair_mean(&g, &t))
}

/// How generated items are matched against the ground-truth set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Each generated item is scored once with all truths as references;
    /// ROUGE takes the best reference.
    #[default]
    MultiReference,
    /// Each generated item is scored against each truth separately and the
    /// pair scores are averaged.
    Pairwise,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "multi-reference" => Ok(Scheme::MultiReference),
            "pairwise" => Ok(Scheme::Pairwise),
            _ => Err(format!("unknown scheme {s:?} (multi-reference, pairwise)")),
        }
    }
}

/// Added to zero n-gram match counts in smoothed BLEU.
pub const BLEU_EPSILON: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Bleu {
    pub plain: f64,
    pub smoothed: f64,
}

fn words(phrase: &str) -> Vec<String> {
    tokenize(phrase).iter().map(|t| t.to_lowercase()).collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut out = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *out.entry(w).or_insert(0) += 1;
        }
    }
    out
}

/// Clipped n-gram matches and the hypothesis n-gram total.
fn modified_precision(hyp: &[String], refs: &[Vec<String>], n: usize) -> (usize, usize) {
    let counts = ngram_counts(hyp, n);
    let mut max_ref: HashMap<&[String], usize> = HashMap::new();
    for r in refs {
        for (g, c) in ngram_counts(r, n) {
            let m = max_ref.entry(g).or_insert(0);
            *m = (*m).max(c);
        }
    }
    let matched = counts
        .iter()
        .map(|(g, c)| (*c).min(max_ref.get(g).copied().unwrap_or(0)))
        .sum();
    (matched, counts.values().sum())
}

/// Cumulative BLEU-n of one hypothesis with uniform weights and the
/// closest-length brevity penalty.
pub fn sentence_bleu(hyp: &[String], refs: &[Vec<String>], n: usize) -> Bleu {
    if hyp.is_empty() || refs.is_empty() || n == 0 {
        return Bleu::default();
    }
    let c = hyp.len();
    let r = refs
        .iter()
        .map(Vec::len)
        .min_by_key(|&l| (l.abs_diff(c), l))
        .unwrap_or(0);
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    let mut plain_log = 0.0;
    let mut smooth_log = 0.0;
    let mut any_zero = false;
    for i in 1..=n {
        let (num, den) = modified_precision(hyp, refs, i);
        if num == 0 {
            any_zero = true;
            smooth_log += (BLEU_EPSILON / den.max(1) as f64).ln();
        } else {
            let p = (num as f64 / den as f64).ln();
            plain_log += p;
            smooth_log += p;
        }
    }
    Bleu {
        plain: if any_zero { 0.0 } else { bp * (plain_log / n as f64).exp() },
        smoothed: bp * (smooth_log / n as f64).exp(),
    }
}

/// BLEU-n of the generated items, averaged over them (or over pairs).
pub fn bleu_n(generated: &[String], truth: &[String], n: usize, scheme: Scheme) -> Bleu {
    let refs: Vec<Vec<String>> = truth.iter().map(|t| words(t)).collect();
    let scores: Vec<Bleu> = match scheme {
        Scheme::MultiReference => generated.iter().map(|g| sentence_bleu(&words(g), &refs, n)).collect(),
        Scheme::Pairwise => generated
            .iter()
            .flat_map(|g| {
                let hyp = words(g);
                refs.iter()
                    .map(|r| sentence_bleu(&hyp, std::slice::from_ref(r), n))
                    .collect::<Vec<_>>()
            })
            .collect(),
    };
    if scores.is_empty() {
        return Bleu::default();
    }
    let len = scores.len() as f64;
    Bleu {
        plain: scores.iter().map(|b| b.plain).sum::<f64>() / len,
        smoothed: scores.iter().map(|b| b.smoothed).sum::<f64>() / len,
    }
}

fn rouge_n_single(hyp: &[String], reference: &[String], n: usize) -> f64 {
    let r = ngram_counts(reference, n);
    let total: usize = r.values().sum();
    if total == 0 {
        return 0.0;
    }
    let h = ngram_counts(hyp, n);
    let overlap: usize = r.iter().map(|(g, c)| (*c).min(h.get(g).copied().unwrap_or(0))).sum();
    overlap as f64 / total as f64
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

fn rouge_l_single(hyp: &[String], reference: &[String]) -> f64 {
    if reference.is_empty() {
        0.0
    } else {
        lcs(hyp, reference) as f64 / reference.len() as f64
    }
}

fn rouge_with(generated: &[String], truth: &[String], scheme: Scheme, f: impl Fn(&[String], &[String]) -> f64) -> f64 {
    let refs: Vec<Vec<String>> = truth.iter().map(|t| words(t)).collect();
    let scores: Vec<f64> = match scheme {
        Scheme::MultiReference => generated
            .iter()
            .map(|g| {
                let hyp = words(g);
                refs.iter().map(|r| f(&hyp, r)).fold(0.0, f64::max)
            })
            .collect(),
        Scheme::Pairwise => generated
            .iter()
            .flat_map(|g| {
                let hyp = words(g);
                refs.iter().map(|r| f(&hyp, r)).collect::<Vec<_>>()
            })
            .collect(),
    };
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    }
}

/// ROUGE-n recall.
pub fn rouge_n(generated: &[String], truth: &[String], n: usize, scheme: Scheme) -> f64 {
    rouge_with(generated, truth, scheme, |h, r| rouge_n_single(h, r, n))
}

/// Longest-common-subsequence recall.
pub fn rouge_l(generated: &[String], truth: &[String], scheme: Scheme) -> f64 {
    rouge_with(generated, truth, scheme, rouge_l_single)
}
