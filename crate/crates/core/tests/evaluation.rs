mod common;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use clozegen::backends::mock::{Mock, MockConfig, MockPrediction};
use clozegen::evaluation::{parse_dataset, DatasetEntry, DatasetError, Expect};
use clozegen::evaluation::metrics::{
    bleu_n, css, mrr, ndcg_at_k, rouge_l, rouge_n, set_metrics, wss, Scheme, BLEU_EPSILON,
};
use clozegen::evaluation::{
    evaluate, grid_search, prediction_position_histogram, split_dataset, EvalOptions, Grid, Metric,
};
use clozegen::idc::mask_instance;
use clozegen::pipeline::{fill_blank, Generator, GeneratorConfig};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const POOL: [&str; 12] = [
    "cells", "Cells", "red cells", "genes", "serum", "plasma", "dead organisms", "organic matter", "food",
    "sugar", "light", "water",
];

fn random_list(rng: &mut ChaCha8Rng, max: usize) -> Vec<String> {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| POOL.choose(rng).unwrap().to_string()).collect()
}

fn norm(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

// ------------------------------------------------------------ set metrics

#[test]
fn set_metrics_hand_cases() {
    let truth = strings(&["a", "b", "c"]);
    let m = set_metrics(&strings(&["c", "A", "b"]), &truth, 3);
    assert_eq!((m.precision, m.recall, m.f1, m.p_at_1), (1.0, 1.0, 1.0, 1.0));
    let m = set_metrics(&strings(&["x", "y", "z"]), &truth, 3);
    assert_eq!((m.precision, m.recall, m.f1, m.p_at_1), (0.0, 0.0, 0.0, 0.0));
    let m = set_metrics(&strings(&["x", "b", "z"]), &truth, 3);
    for v in [m.precision, m.recall, m.f1] {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    assert_eq!(m.p_at_1, 0.0);
    assert_eq!(mrr(&strings(&["a", "x"]), &truth, None), 1.0);
    assert_eq!(mrr(&strings(&["x", "a"]), &truth, None), 0.5);
    assert_eq!(mrr(&strings(&["x", "y"]), &truth, None), 0.0);
    assert_eq!(mrr(&strings(&["x", "y", "a"]), &truth, Some(2)), 0.0);
}

#[test]
fn set_metrics_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let generated = random_list(&mut rng, 6);
        let truth = random_list(&mut rng, 4);
        let k = rng.random_range(1..5);
        let m = set_metrics(&generated, &truth, k);

        let t: Vec<String> = truth.iter().map(|s| norm(s)).collect();
        let mut distinct_t = t.clone();
        distinct_t.sort();
        distinct_t.dedup();
        let mut top: Vec<String> = generated.iter().take(k).map(|s| norm(s)).collect();
        top.sort();
        top.dedup();
        let hits = top.iter().filter(|g| distinct_t.contains(g)).count() as f64;
        let p = hits / k as f64;
        let r = if distinct_t.is_empty() { 0.0 } else { hits / distinct_t.len() as f64 };
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        assert!((m.precision - p).abs() < 1e-12);
        assert!((m.recall - r).abs() < 1e-12);
        assert!((m.f1 - f).abs() < 1e-12);
        let first = generated.first().map(|g| distinct_t.contains(&norm(g))).unwrap_or(false);
        assert_eq!(m.p_at_1, if first { 1.0 } else { 0.0 });

        let rr = generated
            .iter()
            .position(|g| distinct_t.contains(&norm(g)))
            .map_or(0.0, |i| 1.0 / (i + 1) as f64);
        assert_eq!(mrr(&generated, &truth, None), rr);

        for v in [m.precision, m.recall, m.f1, m.p_at_1, rr] {
            assert!((0.0..=1.0).contains(&v));
        }
        if p + r > 0.0 {
            assert!(m.f1 <= 2.0 * p.min(r) * p.max(r) / (p + r) + 1e-12);
            assert!(m.f1 <= p.max(r) + 1e-12);
        }
    }
}

// ------------------------------------------------------------------- NDCG

fn dcg_oracle(relevance: &[bool], k: usize) -> f64 {
    relevance
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &rel)| if rel { 1.0 / ((i + 2) as f64).ln() * 2f64.ln() } else { 0.0 })
        .sum()
}

#[test]
fn ndcg_hand_cases() {
    let truth = strings(&["a", "b", "c"]);
    assert!((ndcg_at_k(&strings(&["a", "b", "c"]), &truth, 10) - 1.0).abs() < 1e-15);
    assert_eq!(ndcg_at_k(&strings(&["x", "y"]), &truth, 10), 0.0);
    let got = ndcg_at_k(&strings(&["w", "x", "y", "a"]), &truth, 10);
    let want = (1.0 / 5f64.log2()) / (1.0 + 1.0 / 3f64.log2() + 1.0 / 4f64.log2());
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn ndcg_matches_brute_force_on_random_lists() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let names: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    for _ in 0..1000 {
        let mut pool = names.clone();
        pool.shuffle(&mut rng);
        let len = rng.random_range(0..15);
        let generated: Vec<String> = pool[..len].to_vec();
        let truth: Vec<String> = names.choose_multiple(&mut rng, 3).cloned().collect();
        let k = rng.random_range(1..=12);
        let relevance: Vec<bool> = generated.iter().map(|g| truth.contains(g)).collect();
        let ideal: Vec<bool> = (0..k).map(|i| i < truth.len()).collect();
        let want = dcg_oracle(&relevance, k) / dcg_oracle(&ideal, k);
        let got = ndcg_at_k(&generated, &truth, k);
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        assert!((0.0..=1.0 + 1e-12).contains(&got));
    }
}

#[test]
fn only_rank_metrics_see_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let truth = strings(&["a", "b", "c"]);
    let mut rank_changed = 0;
    for _ in 0..300 {
        let mut generated = strings(&["a", "x", "b", "y", "z"]);
        generated.shuffle(&mut rng);
        let base = set_metrics(&generated, &truth, 3);
        let (base_mrr, base_ndcg) = (mrr(&generated, &truth, None), ndcg_at_k(&generated, &truth, 10));
        let mut top = generated[..3].to_vec();
        top.shuffle(&mut rng);
        let permuted: Vec<String> = top.into_iter().chain(generated[3..].iter().cloned()).collect();
        let m = set_metrics(&permuted, &truth, 3);
        assert_eq!((m.precision, m.recall, m.f1), (base.precision, base.recall, base.f1));
        if mrr(&permuted, &truth, None) != base_mrr || ndcg_at_k(&permuted, &truth, 10) != base_ndcg {
            rank_changed += 1;
        }
    }
    assert!(rank_changed > 0);
    // A hit moved from rank 1 to rank 2.
    let a = strings(&["a", "x", "y"]);
    let b = strings(&["x", "a", "y"]);
    assert_eq!(set_metrics(&a, &truth, 3), clozegen::evaluation::metrics::SetMetrics {
        p_at_1: 1.0,
        ..set_metrics(&b, &truth, 3)
    });
    assert_ne!(mrr(&a, &truth, None), mrr(&b, &truth, None));
    assert_ne!(ndcg_at_k(&a, &truth, 10), ndcg_at_k(&b, &truth, 10));
}

// ------------------------------------------------------------ BLEU/ROUGE

fn grams(words: &[&str], n: usize) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if words.len() >= n {
        for w in words.windows(n) {
            *out.entry(w.join(" ")).or_insert(0) += 1;
        }
    }
    out
}

/// (plain, smoothed) cumulative BLEU of one hypothesis.
fn bleu_oracle(hyp: &[&str], refs: &[Vec<&str>], n: usize) -> (f64, f64) {
    let c = hyp.len() as f64;
    let mut best_r = f64::INFINITY;
    for r in refs {
        let l = r.len() as f64;
        if (l - c).abs() < (best_r - c).abs() || ((l - c).abs() == (best_r - c).abs() && l < best_r) {
            best_r = l;
        }
    }
    let bp = if c > best_r { 1.0 } else { (1.0 - best_r / c).exp() };
    let mut plain = 1.0f64;
    let mut smooth = 1.0f64;
    for i in 1..=n {
        let h = grams(hyp, i);
        let den: usize = h.values().sum();
        let mut num = 0;
        for (g, cnt) in &h {
            let max_ref = refs.iter().map(|r| grams(r, i).get(g).copied().unwrap_or(0)).max().unwrap_or(0);
            num += (*cnt).min(max_ref);
        }
        if num == 0 {
            plain = 0.0;
            smooth *= BLEU_EPSILON / den.max(1) as f64;
        } else {
            plain *= num as f64 / den as f64;
            smooth *= num as f64 / den as f64;
        }
    }
    (bp * plain.powf(1.0 / n as f64), bp * smooth.powf(1.0 / n as f64))
}

fn lcs_oracle(a: &[&str], b: &[&str]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t[a.len()][b.len()]
}

fn rouge_n_oracle(hyp: &[&str], reference: &[&str], n: usize) -> f64 {
    let r = grams(reference, n);
    let h = grams(hyp, n);
    let total: usize = r.values().sum();
    if total == 0 {
        return 0.0;
    }
    r.iter().map(|(g, c)| (*c).min(h.get(g).copied().unwrap_or(0))).sum::<usize>() as f64 / total as f64
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

const VOCAB: [&str; 6] = ["dead", "organisms", "cells", "red", "blood", "matter"];

fn random_phrase(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=4);
    (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

#[test]
fn bleu_and_rouge_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..1000 {
        let generated: Vec<String> = (0..rng.random_range(1..=3)).map(|_| random_phrase(&mut rng)).collect();
        let truth: Vec<String> = (0..3).map(|_| random_phrase(&mut rng)).collect();
        let split = |s: &String| s.split(' ').map(|w| VOCAB.iter().find(|v| **v == w).copied().unwrap()).collect::<Vec<&str>>();
        let hyps: Vec<Vec<&str>> = generated.iter().map(split).collect();
        let refs: Vec<Vec<&str>> = truth.iter().map(split).collect();
        for n in 1..=4 {
            let multi: Vec<(f64, f64)> = hyps.iter().map(|h| bleu_oracle(h, &refs, n)).collect();
            let pair: Vec<(f64, f64)> = hyps
                .iter()
                .flat_map(|h| refs.iter().map(|r| bleu_oracle(h, std::slice::from_ref(r), n)))
                .collect();
            for (scheme, scores) in [(Scheme::MultiReference, &multi), (Scheme::Pairwise, &pair)] {
                let b = bleu_n(&generated, &truth, n, scheme);
                let plain = mean(&scores.iter().map(|s| s.0).collect::<Vec<_>>());
                let smooth = mean(&scores.iter().map(|s| s.1).collect::<Vec<_>>());
                assert!((b.plain - plain).abs() < 1e-12, "BLEU-{n} {scheme:?}: {} vs {plain}", b.plain);
                assert!((b.smoothed - smooth).abs() < 1e-12);
                assert!((0.0..=1.0 + 1e-12).contains(&b.plain));
                assert!(b.smoothed >= b.plain - 1e-15);
            }
        }
        for n in 1..=2 {
            let multi: Vec<f64> = hyps
                .iter()
                .map(|h| refs.iter().map(|r| rouge_n_oracle(h, r, n)).fold(0.0, f64::max))
                .collect();
            let pair: Vec<f64> = hyps.iter().flat_map(|h| refs.iter().map(|r| rouge_n_oracle(h, r, n))).collect();
            assert!((rouge_n(&generated, &truth, n, Scheme::MultiReference) - mean(&multi)).abs() < 1e-12);
            assert!((rouge_n(&generated, &truth, n, Scheme::Pairwise) - mean(&pair)).abs() < 1e-12);
        }
        let lcs_r = |h: &Vec<&str>, r: &Vec<&str>| lcs_oracle(h, r) as f64 / r.len() as f64;
        let multi: Vec<f64> = hyps.iter().map(|h| refs.iter().map(|r| lcs_r(h, r)).fold(0.0, f64::max)).collect();
        let pair: Vec<f64> = hyps.iter().flat_map(|h| refs.iter().map(|r| lcs_r(h, r))).collect();
        assert!((rouge_l(&generated, &truth, Scheme::MultiReference) - mean(&multi)).abs() < 1e-12);
        assert!((rouge_l(&generated, &truth, Scheme::Pairwise) - mean(&pair)).abs() < 1e-12);
    }
}

#[test]
fn identical_and_disjoint_phrases() {
    let truth = strings(&["killing organisms", "red blood cells", "organic matter"]);
    let scheme = Scheme::MultiReference;
    assert!((bleu_n(&truth, &truth, 1, scheme).plain - 1.0).abs() < 1e-12);
    assert!((rouge_n(&truth, &truth, 1, scheme) - 1.0).abs() < 1e-12);
    assert!((rouge_l(&truth, &truth, scheme) - 1.0).abs() < 1e-12);
    let other = strings(&["sunlight", "green leaves", "sugar"]);
    for scheme in [Scheme::MultiReference, Scheme::Pairwise] {
        for n in 1..=4 {
            assert_eq!(bleu_n(&other, &truth, n, scheme).plain, 0.0);
        }
        assert_eq!(rouge_n(&other, &truth, 1, scheme), 0.0);
        assert_eq!(rouge_n(&other, &truth, 2, scheme), 0.0);
        assert_eq!(rouge_l(&other, &truth, scheme), 0.0);
    }
    assert_eq!(bleu_n(&[], &truth, 1, Scheme::MultiReference).plain, 0.0);
}

#[test]
fn mushroom_example() {
    let truth = strings(&["killing organisms", "accumulating dead organisms", "producing dead organisms"]);
    let generated = strings(&["removing dead cells", "decomposing organic matter", "eating poisonous food"]);
    let multi = bleu_n(&generated, &truth, 1, Scheme::MultiReference).plain;
    let pairwise = bleu_n(&generated, &truth, 1, Scheme::Pairwise).plain;
    assert!((multi - 1.0 / 9.0).abs() < 1e-12);
    assert!((pairwise - 2.0 / 27.0).abs() < 1e-12);
    for scheme in [Scheme::MultiReference, Scheme::Pairwise] {
        assert_eq!(bleu_n(&generated, &truth, 2, scheme).plain, 0.0);
        assert!(bleu_n(&generated, &truth, 1, scheme).plain > 0.0);
    }
}

// ------------------------------------------------------ similarity metrics

fn vector_mock() -> Mock {
    let mut config = MockConfig {
        dimension: 2,
        ..Default::default()
    };
    for (w, v) in [
        ("east", [1.0, 0.0]),
        ("north", [0.0, 1.0]),
        ("slope", [0.6, 0.8]),
        ("west", [-1.0, 0.0]),
        ("up", [0.0, 3.0]),
    ] {
        config.static_vectors.insert(w.into(), v.to_vec());
        config.token_vectors.insert(w.into(), v.to_vec());
    }
    Mock::new(config, None)
}

#[test]
fn wss_hand_average() {
    let mock = vector_mock();
    let truth = strings(&["east", "north", "slope"]);
    // Cosines: east {1, 0, .6}, north {0, 1, .8}, west {0, 0, 0} after clamping.
    let got = wss(&strings(&["east", "north", "west"]), &truth, &mock);
    assert_eq!((got.pairs, got.skipped), (9, 0));
    assert!((got.value.unwrap() - 3.4 / 9.0).abs() < 1e-12);
    // "east up" averages to (0.5, 1.5); "mystery" has no vector.
    let got = wss(&strings(&["east up", "mystery"]), &strings(&["east"]), &mock);
    assert_eq!((got.pairs, got.skipped), (1, 1));
    assert!((got.value.unwrap() - 0.5 / 2.5f64.sqrt()).abs() < 1e-12);
    let same = wss(&strings(&["north"]), &strings(&["up"]), &mock);
    assert!((same.value.unwrap() - 1.0).abs() < 1e-12);
    let orth = wss(&strings(&["north"]), &strings(&["east"]), &mock);
    assert_eq!(orth.value, Some(0.0));
}

#[test]
fn css_hand_average() {
    let mock = vector_mock();
    let stem = "They walked **blank** all day.";
    let truth = strings(&["east", "north", "slope"]);
    let got = css(stem, &strings(&["east", "north", "west"]), &truth, &mock).unwrap();
    assert_eq!(got.pairs, 9);
    assert!((got.value.unwrap() - 3.4 / 9.0).abs() < 1e-12);
    let again = css(stem, &strings(&["east", "north", "west"]), &truth, &mock).unwrap();
    assert_eq!(got, again);
    let same = css(stem, &strings(&["slope"]), &strings(&["slope"]), &mock).unwrap();
    assert!((same.value.unwrap() - 1.0).abs() < 1e-12);
    assert!(css("no blank", &truth, &truth, &mock).is_err());
}

// ------------------------------------------------------------- datasets

#[test]
fn malformed_dataset_lines_are_located() {
    let good = r#"{"stem":"Plants need **blank**.","answer":"light","distractors":["water","soil","air"]}"#;
    let text = format!("{good}\n\n{good}\n{{\"stem\": 3}}\n");
    let err = parse_dataset(&text, Path::new("d.jsonl"), Expect::Any).unwrap_err();
    assert_eq!(err.line(), Some(4));
    let text = format!("{good}\n{}\n", good.replace("\"air\"", "\"soil\""));
    let err = parse_dataset(&text, Path::new("d.jsonl"), Expect::Any).unwrap_err();
    assert_eq!(err.line(), Some(2));
    assert!(err.to_string().contains("duplicate"));
    match parse_dataset(good, Path::new("d.jsonl"), Expect::Multigram).unwrap_err() {
        DatasetError::Validation { problems, .. } => assert_eq!(problems.len(), 1),
        other => panic!("unexpected {other}"),
    }
    assert_eq!(parse_dataset(good, Path::new("d.jsonl"), Expect::Unigram).unwrap().len(), 1);
}

fn entry(stem: &str, answer: &str, distractors: [&str; 3]) -> DatasetEntry {
    DatasetEntry {
        stem: stem.into(),
        answer: answer.into(),
        distractors: distractors.iter().map(|d| d.to_string()).collect(),
        source: String::new(),
    }
}

fn corpus() -> Vec<DatasetEntry> {
    vec![
        entry("Plants use **blank** to make sugar.", "sunlight", ["moonlight", "starlight", "lamplight"]),
        entry("The **blank** pumps blood through the body.", "heart", ["liver", "lung", "kidney"]),
        entry("Leukemia affects white **blank**.", "blood cells", ["red blood cells", "platelets", "plasma"]),
        entry("A **blank** has six legs.", "insect", ["spider", "bird", "worm"]),
        entry("Fish breathe through their **blank**.", "gills", ["lungs", "fins", "scales"]),
        entry("The dog chased the **blank** up a tree.", "cat", ["wolf", "fox", "rabbit"]),
    ]
}

#[test]
fn split_ratios() {
    for n in 0..60 {
        let entries: Vec<DatasetEntry> = (0..n).map(|i| entry("A **blank**.", &format!("w{i}"), ["a", "b", "c"])).collect();
        let (train, test) = split_dataset(&entries, 3, 1, Some(4)).unwrap();
        assert_eq!(train.len() + test.len(), n);
        assert!((train.len() as f64 - 3.0 * n as f64 / 4.0).abs() <= 1.0);
        let all: HashSet<String> = train.iter().chain(&test).map(|e| e.answer.clone()).collect();
        assert_eq!(all.len(), n);
    }
    let e = corpus();
    assert_eq!(split_dataset(&e, 3, 1, Some(1)).unwrap(), split_dataset(&e, 3, 1, Some(1)).unwrap());
    assert!(split_dataset(&e, 0, 0, None).is_err());
}

// -------------------------------------------------- dataset-level runs

fn generator(config: MockConfig) -> Generator {
    let kb = common::kb();
    let backends = Mock::new(config, Some(kb.clone())).into_backends();
    let gen_config = GeneratorConfig {
        k: 10,
        ..Default::default()
    };
    Generator::new(kb, backends, gen_config, None).unwrap()
}

fn permissive() -> MockConfig {
    MockConfig {
        ngram_permissive: true,
        static_vocabulary: ["wolf", "fox", "cat", "liver", "lung", "heart", "spider", "insect", "gills", "lungs"]
            .into_iter()
            .map(String::from)
            .collect(),
        ..Default::default()
    }
}

#[test]
fn report_means_equal_entry_means() {
    let gen = generator(permissive());
    let entries = corpus();
    let opts = EvalOptions::default();
    let (report, results) = evaluate(&gen, &entries, &opts).unwrap();
    assert_eq!(report.entries, entries.len());
    assert_eq!(results.len(), entries.len());
    for (i, r) in results.iter().enumerate() {
        assert_eq!(r.index, i);
    }
    for m in Metric::ALL {
        let values: Vec<f64> = results.iter().filter_map(|r| r.scores.get(&m).copied()).collect();
        match report.metrics.get(&m) {
            Some(v) => {
                assert!((v - mean(&values)).abs() < 1e-12, "{m}");
                assert_eq!(report.counts[&m], values.len());
                assert!((0.0..=1.0 + 1e-12).contains(v));
            }
            None => assert!(values.is_empty()),
        }
    }
    let (again, _) = evaluate(&gen, &entries, &opts).unwrap();
    assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&report).unwrap());

    let only = EvalOptions {
        metrics: [Metric::F1, Metric::Mrr].into_iter().collect(),
        ..Default::default()
    };
    let (small, _) = evaluate(&gen, &entries, &only).unwrap();
    assert_eq!(small.metrics.keys().copied().collect::<Vec<_>>(), [Metric::F1, Metric::Mrr]);
    assert_eq!(small.metrics[&Metric::F1], report.metrics[&Metric::F1]);
}

#[test]
fn single_point_grid_returns_that_point() {
    let gen = generator(permissive());
    let grid = Grid {
        alpha: vec![3.5],
        beta: vec![0.7],
        gamma: vec![0.25],
    };
    let result = grid_search(&gen, &corpus(), &grid, 3).unwrap();
    assert_eq!(result.table.len(), 1);
    assert_eq!((result.best.alpha, result.best.beta, result.best.gamma), (3.5, 0.7, 0.25));
    assert_eq!(result.best.fold_f1.len(), 3);
    assert!(grid_search(&gen, &[], &grid, 3).is_err());
    let parsed = Grid::parse("alpha=1:1.3:0.1;beta=2,1", gen.config()).unwrap();
    assert_eq!(parsed.alpha, [1.0, 1.1, 1.2, 1.3]);
    assert_eq!(parsed.points().len(), 8);
    assert_eq!(parsed.points()[0], (1.0, 1.0, gen.config().gamma));
    assert!(Grid::parse("delta=1", gen.config()).is_err());
}

#[test]
fn histogram_counts() {
    let entries = corpus();
    let mut config = MockConfig::default();
    for e in &entries {
        let (s, span) = fill_blank(&e.stem, &e.answer).unwrap();
        let key = mask_instance(&s, span).unwrap().render();
        let mut preds: Vec<MockPrediction> = vec![MockPrediction::Token(e.distractors[0].clone())];
        preds.push(MockPrediction::Token("filler".into()));
        preds.push(MockPrediction::Token(e.distractors[1].clone()));
        config.predictions.insert(key, preds);
    }
    let mock = Mock::new(config.clone(), None);
    let h = prediction_position_histogram(&entries, &mock, 5).unwrap();
    assert_eq!(h.counts, [entries.len(), 0, entries.len(), 0, 0]);
    assert_eq!(h.not_found, entries.len());
    assert_eq!(h.total(), 3 * entries.len());
    assert!(h.table().starts_with("position\tcount\n1\t6\n"));

    let empty = prediction_position_histogram(&[], &mock, 4).unwrap();
    assert_eq!((empty.counts, empty.not_found), (vec![0; 4], 0));

    // Every truth first.
    let mut first = MockConfig::default();
    for e in &entries {
        let (s, span) = fill_blank(&e.stem, &e.answer).unwrap();
        let key = mask_instance(&s, span).unwrap().render();
        first.predictions.insert(key, vec![MockPrediction::Token(e.distractors[0].clone())]);
    }
    let one: Vec<DatasetEntry> = entries
        .iter()
        .map(|e| DatasetEntry {
            distractors: vec![e.distractors[0].clone(); 3],
            ..e.clone()
        })
        .collect();
    let h = prediction_position_histogram(&one, &Mock::new(first, None), 3).unwrap();
    assert_eq!(h.counts, [3 * entries.len(), 0, 0]);
    assert_eq!(h.not_found, 0);
}
