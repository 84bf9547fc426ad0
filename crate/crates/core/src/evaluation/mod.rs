//! Scoring generated questions against reference datasets, parameter
//! tuning, and prediction-position statistics.

mod dataset;
pub mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dataset::{answer_lengths, load_dataset, parse_dataset, DatasetEntry, DatasetError, Expect};
pub use metrics::{
    bleu_n, css, mrr, ndcg_at_k, rouge_l, rouge_n, set_metrics, wss, Bleu, PairMean, Scheme, SetMetrics,
};

use crate::backends::{Backends, MaskedPredictor};
use crate::distractor::ScoreParams;
use crate::error::{PipelineError, PipelineResult};
use crate::idc::mask_instance;
use crate::pipeline::{fill_blank, ClozeQuestion, Generator, GeneratorConfig, PreparedKey};

/// Lowercased with runs of whitespace collapsed to one space.
pub fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    #[serde(rename = "p_at_1")]
    PAt1,
    Precision,
    Recall,
    Mrr,
    #[serde(rename = "ndcg_at_10")]
    Ndcg,
    Wss,
    Css,
    #[serde(rename = "bleu_1")]
    Bleu1,
    #[serde(rename = "bleu_2")]
    Bleu2,
    #[serde(rename = "bleu_3")]
    Bleu3,
    #[serde(rename = "bleu_4")]
    Bleu4,
    #[serde(rename = "bleu_1_smoothed")]
    Bleu1Smoothed,
    #[serde(rename = "bleu_2_smoothed")]
    Bleu2Smoothed,
    #[serde(rename = "bleu_3_smoothed")]
    Bleu3Smoothed,
    #[serde(rename = "bleu_4_smoothed")]
    Bleu4Smoothed,
    #[serde(rename = "rouge_1")]
    Rouge1,
    #[serde(rename = "rouge_2")]
    Rouge2,
    #[serde(rename = "rouge_l")]
    RougeL,
}

impl Metric {
    pub const ALL: [Metric; 19] = [
        Metric::F1,
        Metric::PAt1,
        Metric::Precision,
        Metric::Recall,
        Metric::Mrr,
        Metric::Ndcg,
        Metric::Wss,
        Metric::Css,
        Metric::Bleu1,
        Metric::Bleu2,
        Metric::Bleu3,
        Metric::Bleu4,
        Metric::Bleu1Smoothed,
        Metric::Bleu2Smoothed,
        Metric::Bleu3Smoothed,
        Metric::Bleu4Smoothed,
        Metric::Rouge1,
        Metric::Rouge2,
        Metric::RougeL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::PAt1 => "p_at_1",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Mrr => "mrr",
            Metric::Ndcg => "ndcg_at_10",
            Metric::Wss => "wss",
            Metric::Css => "css",
            Metric::Bleu1 => "bleu_1",
            Metric::Bleu2 => "bleu_2",
            Metric::Bleu3 => "bleu_3",
            Metric::Bleu4 => "bleu_4",
            Metric::Bleu1Smoothed => "bleu_1_smoothed",
            Metric::Bleu2Smoothed => "bleu_2_smoothed",
            Metric::Bleu3Smoothed => "bleu_3_smoothed",
            Metric::Bleu4Smoothed => "bleu_4_smoothed",
            Metric::Rouge1 => "rouge_1",
            Metric::Rouge2 => "rouge_2",
            Metric::RougeL => "rouge_l",
        }
    }

    /// Parse a comma-separated metric list. `bleu` and `rouge` expand to
    /// their whole families.
    pub fn parse_list(s: &str) -> Result<BTreeSet<Metric>, String> {
        let mut out = BTreeSet::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => out.extend(Metric::ALL),
                "bleu" => out.extend(&Metric::ALL[8..16]),
                "rouge" => out.extend(&Metric::ALL[16..]),
                _ => {
                    out.insert(part.parse()?);
                }
            }
        }
        if out.is_empty() {
            return Err("no metrics selected".into());
        }
        Ok(out)
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.to_lowercase();
        let alias = match s.as_str() {
            "p" => "precision",
            "r" => "recall",
            "p@1" => "p_at_1",
            "ndcg" | "ndcg@10" => "ndcg_at_10",
            other => other,
        };
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub metrics: BTreeSet<Metric>,
    pub scheme: Scheme,
    /// Generated items compared with the ground truth.
    pub k_gen: usize,
    pub ndcg_k: usize,
    /// Items MRR looks at; the whole ranking when `None`.
    pub mrr_cutoff: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.into_iter().collect(),
            scheme: Scheme::default(),
            k_gen: 3,
            ndcg_k: 10,
            mrr_cutoff: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryResult {
    /// 0-based position in the dataset.
    pub index: usize,
    /// Generated candidates, best first.
    pub generated: Vec<String>,
    /// Metrics that could be computed for this entry.
    pub scores: BTreeMap<Metric, f64>,
    pub notes: Vec<String>,
}

/// Metrics for one entry given its generated ranking.
pub fn score_entry(
    entry: &DatasetEntry,
    generated: &[String],
    backends: &Backends,
    opts: &EvalOptions,
) -> PipelineResult<(BTreeMap<Metric, f64>, Vec<String>)> {
    let truth = &entry.distractors;
    let top = &generated[..generated.len().min(opts.k_gen)];
    let want = |m: Metric| opts.metrics.contains(&m);
    let mut scores = BTreeMap::new();
    let mut notes = Vec::new();
    let set = set_metrics(generated, truth, opts.k_gen);
    for (m, v) in [
        (Metric::F1, set.f1),
        (Metric::PAt1, set.p_at_1),
        (Metric::Precision, set.precision),
        (Metric::Recall, set.recall),
        (Metric::Mrr, mrr(generated, truth, opts.mrr_cutoff)),
        (Metric::Ndcg, ndcg_at_k(generated, truth, opts.ndcg_k)),
    ] {
        if want(m) {
            scores.insert(m, v);
        }
    }
    let mut similarity = |m: Metric, pm: PairMean| {
        if pm.skipped > 0 {
            notes.push(format!("{m}: {} of {} pairs skipped", pm.skipped, pm.skipped + pm.pairs));
        }
        match pm.value {
            Some(v) => {
                scores.insert(m, v);
            }
            None => notes.push(format!("{m}: no comparable pair")),
        }
    };
    if want(Metric::Wss) {
        similarity(Metric::Wss, wss(top, truth, backends.static_embedder.as_ref()));
    }
    if want(Metric::Css) {
        similarity(Metric::Css, css(&entry.stem, top, truth, backends.embedder.as_ref())?);
    }
    let bleu = [
        (Metric::Bleu1, Metric::Bleu1Smoothed),
        (Metric::Bleu2, Metric::Bleu2Smoothed),
        (Metric::Bleu3, Metric::Bleu3Smoothed),
        (Metric::Bleu4, Metric::Bleu4Smoothed),
    ];
    for (i, (plain, smoothed)) in bleu.into_iter().enumerate() {
        if want(plain) || want(smoothed) {
            let b = bleu_n(top, truth, i + 1, opts.scheme);
            if want(plain) {
                scores.insert(plain, b.plain);
            }
            if want(smoothed) {
                scores.insert(smoothed, b.smoothed);
            }
        }
    }
    if want(Metric::Rouge1) {
        scores.insert(Metric::Rouge1, rouge_n(top, truth, 1, opts.scheme));
    }
    if want(Metric::Rouge2) {
        scores.insert(Metric::Rouge2, rouge_n(top, truth, 2, opts.scheme));
    }
    if want(Metric::RougeL) {
        scores.insert(Metric::RougeL, rouge_l(top, truth, opts.scheme));
    }
    Ok((scores, notes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub entries: usize,
    pub scheme: Scheme,
    /// Mean of each metric over the entries where it was computable.
    pub metrics: BTreeMap<Metric, f64>,
    /// Entries contributing to each mean.
    pub counts: BTreeMap<Metric, usize>,
    pub config: GeneratorConfig,
}

impl EvalReport {
    pub fn from_results(results: &[EntryResult], opts: &EvalOptions, config: &GeneratorConfig) -> Self {
        let mut sums: BTreeMap<Metric, (f64, usize)> = BTreeMap::new();
        for r in results {
            for (m, v) in &r.scores {
                let e = sums.entry(*m).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        Self {
            entries: results.len(),
            scheme: opts.scheme,
            metrics: sums.iter().map(|(m, (s, c))| (*m, s / *c as f64)).collect(),
            counts: sums.iter().map(|(m, (_, c))| (*m, *c)).collect(),
            config: config.clone(),
        }
    }

    /// Human-readable table with values as percentages.
    pub fn table(&self) -> String {
        let mut out = format!("entries: {}\nscheme: {}\n", self.entries, match self.scheme {
            Scheme::MultiReference => "multi-reference",
            Scheme::Pairwise => "pairwise",
        });
        for (m, v) in &self.metrics {
            let n = self.counts.get(m).copied().unwrap_or(0);
            let _ = writeln!(out, "{:<16} {:>7.2}  (n={n})", m.name(), v * 100.0);
        }
        out
    }
}

/// The ranking a question is judged by: every surviving candidate, or the
/// selected distractors when no ranking was kept.
pub fn generated_ranking(q: &ClozeQuestion) -> Vec<String> {
    if q.ranking.is_empty() {
        q.distractors.clone()
    } else {
        q.ranking.clone()
    }
}

fn with_entry<T>(index: usize, r: PipelineResult<T>) -> PipelineResult<T> {
    r.map_err(|e| match e {
        PipelineError::InvalidArgument(m) => PipelineError::invalid(format!("entry {}: {m}", index + 1)),
        other => other,
    })
}

/// Generate for every entry with the generator's own parameters and score.
pub fn evaluate(
    generator: &Generator,
    entries: &[DatasetEntry],
    opts: &EvalOptions,
) -> PipelineResult<(EvalReport, Vec<EntryResult>)> {
    if entries.is_empty() {
        return Err(PipelineError::invalid("dataset is empty"));
    }
    let params = generator.config().score_params();
    let results = entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let prepared = with_entry(index, generator.prepare_entry(&entry.stem, &entry.answer))?;
            let q = generator.finalize(&prepared, &params)?;
            let generated = generated_ranking(&q);
            let (scores, notes) = score_entry(entry, &generated, generator.backends(), opts)?;
            Ok(EntryResult {
                index,
                generated,
                scores,
                notes,
            })
        })
        .collect::<PipelineResult<Vec<_>>>()?;
    Ok((EvalReport::from_results(&results, opts, generator.config()), results))
}

/// Split into train and test parts in the ratio `train:test`, shuffled by
/// `seed` when given and in file order otherwise.
pub fn split_dataset(
    entries: &[DatasetEntry],
    train: usize,
    test: usize,
    seed: Option<u64>,
) -> PipelineResult<(Vec<DatasetEntry>, Vec<DatasetEntry>)> {
    if train + test == 0 {
        return Err(PipelineError::invalid("split ratio must not be 0:0"));
    }
    let mut order: Vec<usize> = (0..entries.len()).collect();
    if let Some(seed) = seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let cut = (entries.len() * train + (train + test) / 2) / (train + test);
    let pick = |idx: &[usize]| idx.iter().map(|&i| entries[i].clone()).collect();
    Ok((pick(&order[..cut]), pick(&order[cut..])))
}

/// Candidate values for each tuned parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Values from `start` to `end` inclusive in increments of `step`, rounded
/// to 10 decimals so that 0.1 steps land on exact decimal values.
pub fn grid_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>, String> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !end.is_finite() || end < start {
        return Err(format!("bad range {start}:{end}:{step}"));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(format!("range {start}:{end}:{step} is too large"));
    }
    Ok((0..=count)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

impl Grid {
    /// A single point at the configured parameters.
    pub fn at(config: &GeneratorConfig) -> Self {
        Self {
            alpha: vec![config.alpha],
            beta: vec![config.beta],
            gamma: vec![config.gamma],
        }
    }

    /// Parse `alpha=1:3:0.1;beta=0.5,1.1;gamma=0.5`. Each parameter takes a
    /// `start:end:step` range or a comma-separated list; parameters left out
    /// keep their value from `base`.
    pub fn parse(text: &str, base: &GeneratorConfig) -> Result<Self, String> {
        let mut grid = Self::at(base);
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| format!("expected name=values, got {part:?}"))?;
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
            let parsed = if values.contains(':') {
                let v: Vec<&str> = values.split(':').collect();
                let [a, b, c] = v[..] else {
                    return Err(format!("range must be start:end:step, got {values:?}"));
                };
                grid_range(num(a)?, num(b)?, num(c)?)?
            } else {
                values.split(',').map(num).collect::<Result<Vec<_>, _>>()?
            };
            if parsed.is_empty() {
                return Err(format!("no values for {name}"));
            }
            match name.trim() {
                "alpha" => grid.alpha = parsed,
                "beta" => grid.beta = parsed,
                "gamma" => grid.gamma = parsed,
                other => return Err(format!("unknown parameter {other:?} (alpha, beta, gamma)")),
            }
        }
        Ok(grid)
    }

    /// All points in lexicographic (alpha, beta, gamma) order.
    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let sorted = |v: &[f64]| {
            let mut v = v.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        let (a, b, g) = (sorted(&self.alpha), sorted(&self.beta), sorted(&self.gamma));
        let mut out = Vec::with_capacity(a.len() * b.len() * g.len());
        for &x in &a {
            for &y in &b {
                for &z in &g {
                    out.push((x, y, z));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Mean over folds of the fold's mean F1.
    pub f1: f64,
    pub fold_f1: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: GridPoint,
    pub table: Vec<GridPoint>,
}

/// Two scores closer than this are a tie.
const TIE: f64 = 1e-12;

/// Exhaustive scan maximizing cross-validated F1. Entries are dealt into
/// `folds` folds round-robin; a point's score is the mean of its per-fold
/// mean F1. Ties go to the smallest (alpha, beta, gamma).
pub fn grid_search(
    generator: &Generator,
    train: &[DatasetEntry],
    grid: &Grid,
    folds: usize,
) -> PipelineResult<GridResult> {
    if train.is_empty() {
        return Err(PipelineError::invalid("training split is empty"));
    }
    let folds = folds.clamp(1, train.len());
    let points = grid.points();
    if points.is_empty() {
        return Err(PipelineError::invalid("parameter grid is empty"));
    }
    let prepared: Vec<PreparedKey> = train
        .par_iter()
        .enumerate()
        .map(|(i, e)| with_entry(i, generator.prepare_entry(&e.stem, &e.answer)))
        .collect::<PipelineResult<_>>()?;
    let k_gen = EvalOptions::default().k_gen;
    let table = points
        .par_iter()
        .map(|&(alpha, beta, gamma)| {
            let params = ScoreParams {
                alpha,
                beta,
                gamma,
                mode: generator.config().lexical_mode,
            };
            let mut sums = vec![(0.0, 0usize); folds];
            for (i, (p, entry)) in prepared.iter().zip(train).enumerate() {
                let q = generator.finalize(p, &params)?;
                let f1 = set_metrics(&generated_ranking(&q), &entry.distractors, k_gen).f1;
                sums[i % folds].0 += f1;
                sums[i % folds].1 += 1;
            }
            let fold_f1: Vec<f64> = sums.iter().map(|(s, c)| s / *c as f64).collect();
            Ok(GridPoint {
                alpha,
                beta,
                gamma,
                f1: fold_f1.iter().sum::<f64>() / folds as f64,
                fold_f1,
            })
        })
        .collect::<PipelineResult<Vec<GridPoint>>>()?;
    let mut best = &table[0];
    for p in &table[1..] {
        if p.f1 > best.f1 + TIE {
            best = p;
        }
    }
    Ok(GridResult {
        best: best.clone(),
        table,
    })
}

/// Where ground-truth distractors fall in the predictor's list for the
/// masked answer key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionHistogram {
    /// `counts[i]` is the number of truths predicted at position `i + 1`.
    pub counts: Vec<usize>,
    pub not_found: usize,
}

impl PositionHistogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.not_found
    }

    /// Two-column tab-separated table: position, count.
    pub fn table(&self) -> String {
        let mut out = String::from("position\tcount\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{}\t{c}", i + 1);
        }
        let _ = writeln!(out, "not_found\t{}", self.not_found);
        out
    }
}

pub fn prediction_position_histogram(
    entries: &[DatasetEntry],
    predictor: &dyn MaskedPredictor,
    k: usize,
) -> PipelineResult<PositionHistogram> {
    let per_entry = entries
        .par_iter()
        .enumerate()
        .map(|(index, entry)| {
            let (sentence, span) = with_entry(index, fill_blank(&entry.stem, &entry.answer))?;
            let masked = mask_instance(&sentence, span)?;
            let predictions: Vec<String> = predictor
                .predict_fillers(&masked, k)?
                .into_iter()
                .take(k)
                .map(|p| normalize(&p.token))
                .collect();
            Ok(entry
                .distractors
                .iter()
                .map(|d| predictions.iter().position(|p| *p == normalize(d)))
                .collect::<Vec<_>>())
        })
        .collect::<PipelineResult<Vec<_>>>()?;
    let mut hist = PositionHistogram {
        counts: vec![0; k],
        not_found: 0,
    };
    for pos in per_entry.into_iter().flatten() {
        match pos {
            Some(p) => hist.counts[p] += 1,
            None => hist.not_found += 1,
        }
    }
    Ok(hist)
}
