mod common;

use std::sync::Arc;

use clozegen::backends::lexicon::LexiconTagger;
use clozegen::backends::mock::{Mock, MockConfig};
use clozegen::backends::{ContextualEmbedder, Tagger};
use clozegen::stem::{
    identify_answer_keys, segment_answer_key, segment_sentences, select_stems, AnswerKey,
    AnswerKeyKind, CentralityRanker, Ranker, Sentence, StemBounds,
};
use clozegen::text::{detokenize, Span};

fn surfaces(keys: &[AnswerKey]) -> Vec<String> {
    keys.iter().map(|k| k.surface.clone()).collect()
}

#[test]
fn terminators_split_sentences() {
    let s = segment_sentences("A. B? C!").unwrap();
    assert_eq!(s.len(), 3);
    let one = segment_sentences("Plants make sugar from light. ").unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].text, "Plants make sugar from light.");
    assert_eq!(segment_sentences("Dr. Smith ran.").unwrap().len(), 1);
}

#[test]
fn hand_labeled_article_segments_exactly() {
    let gold = [
        "Dr. Smith studied the liver for ten years.",
        "Mr. Jones disagreed with him.",
        "The sample weighed 3.5 grams.",
        "Is water a compound?",
        "Yes!",
        "Cells divide by mitosis.",
        "The U.S. Navy tested the device.",
        "Mrs. Brown taught biology, e.g. genetics and botany.",
        "Prof. Lee arrived at 5 p.m. on Monday.",
        "It cost $4.99 at the store.",
        "\"Stop the experiment,\" she said.",
        "The ratio was 1.5 to 1.",
        "Plants need light.",
        "Why do leaves change color?",
        "Chlorophyll breaks down in autumn.",
        "St. Louis lies on the Mississippi River.",
        "The temperature fell to -4.2 degrees.",
        "Gen. Grant led the army.",
        "Oxygen is released during photosynthesis.",
        "Energy flows through ecosystems.",
        "Fungi decompose dead organisms.",
        "Look at the diagram (Fig. 2) carefully.",
        "Sound travels faster in water than in air.",
        "Mt. Everest is the highest peak.",
        "Electrons carry a negative charge.",
        "The vaccine was approved in Jan. 2021.",
        "Viruses are not cells.",
        "Heat moves from warm objects to cold ones.",
        "Earth orbits the Sun once a year.",
        "That is all.",
    ];
    let article = gold.join(" ");
    let got: Vec<String> = segment_sentences(&article).unwrap().into_iter().map(|s| s.text).collect();
    assert_eq!(got, gold);
    for s in segment_sentences(&article).unwrap() {
        assert_eq!(detokenize(&s.tokens), s.text);
    }
}

fn mock_embedder() -> Arc<dyn ContextualEmbedder> {
    Mock::new(MockConfig::default(), None).into_backends().embedder
}

#[test]
fn centrality_matches_pairwise_oracle() {
    let embedder = mock_embedder();
    let texts = ["Plants need light.", "Animals need food.", "Plants need light.", "Rocks erode slowly."];
    let mut sentences: Vec<Sentence> = texts.iter().enumerate().map(|(i, t)| Sentence::new(i, t)).collect();
    CentralityRanker::new(embedder.clone()).rank(&mut sentences).unwrap();
    let vecs: Vec<_> = texts.iter().map(|t| embedder.embed_text(t).unwrap().0).collect();
    let cos = |a: &[f64], b: &[f64]| {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    };
    for i in 0..4 {
        let expect: f64 = (0..4).filter(|&j| j != i).map(|j| cos(&vecs[i], &vecs[j])).sum::<f64>() / 3.0;
        assert!((sentences[i].rank_score - expect).abs() < 1e-12);
    }
    assert_eq!(sentences[0].rank_score, sentences[2].rank_score);
    let mut single = vec![Sentence::new(0, "Only one.")];
    CentralityRanker::new(embedder).rank(&mut single).unwrap();
    assert_eq!(single[0].rank_score, 1.0);
}

#[test]
fn stem_selection_order_and_filters() {
    let kb = common::kb();
    let tagger = LexiconTagger::new(kb);
    let texts = [
        "Plants use sunlight to produce sugar in their leaves.",
        "Did the farmer plant corn in the wet field?",
        "Fungi break down dead organisms in the forest soil.",
        "Water freezes into ice at zero degrees Celsius.",
        "Short one.",
        "Earth orbits the Sun once every year at least.",
        "Volcanoes release gases and ash into the atmosphere.",
    ];
    let scores = [0.5, 0.9, 0.7, 0.7, 0.95, 0.2, 0.1];
    let sentences: Vec<Sentence> = texts
        .iter()
        .zip(scores)
        .enumerate()
        .map(|(i, (t, r))| Sentence {
            rank_score: r,
            ..Sentence::new(i, t)
        })
        .collect();
    let sel = select_stems(&sentences, 2, StemBounds::default(), &tagger).unwrap();
    let ids: Vec<usize> = sel.stems.iter().map(|s| s.id).collect();
    assert_eq!(ids, [2, 3]);
    assert!(!sel.shortfall);
    let all = select_stems(&sentences, 10, StemBounds::default(), &tagger).unwrap();
    assert_eq!(all.stems.len(), 5);
    assert!(all.shortfall);
    for w in all.stems.windows(2) {
        assert!(w[0].rank_score > w[1].rank_score || (w[0].rank_score == w[1].rank_score && w[0].id < w[1].id));
    }
    let questions: Vec<Sentence> = ["Why do leaves fall off the trees in autumn?", "What do plants need to grow well?"]
        .iter()
        .enumerate()
        .map(|(i, t)| Sentence::new(i, t))
        .collect();
    assert!(select_stems(&questions, 1, StemBounds::default(), &tagger).unwrap().stems.is_empty());
}

fn keys_of(text: &str) -> Vec<AnswerKey> {
    let tagger = LexiconTagger::new(common::kb());
    let s = Sentence::new(0, text);
    let tags = tagger.tag(&s.tokens).unwrap();
    identify_answer_keys(&s, &tags, &tagger)
}

#[test]
fn answer_keys_strip_determiners_and_skip_pronouns() {
    let apple = surfaces(&keys_of("The big red apple fell on the scared cat."));
    assert!(apple.contains(&"big red apple".to_string()), "{apple:?}");
    assert!(apple.contains(&"scared cat".to_string()), "{apple:?}");
    let he = keys_of("He ran.");
    assert!(he.iter().all(|k| k.kind != AnswerKeyKind::NounChunk && k.surface != "He"), "{he:?}");
    let virchow = surfaces(&keys_of(
        "Virchow was the first scientist to discover that leukemia is caused by rapid production of abnormal white blood cells.",
    ));
    for want in ["first scientist", "abnormal white blood cells"] {
        assert!(virchow.contains(&want.to_string()), "{virchow:?}");
    }
}

fn segment(text: &str) -> Vec<(String, bool)> {
    let kb = common::kb();
    let s = Sentence::new(0, text);
    let key = AnswerKey::new(&s, Span::new(0, s.tokens.len()), AnswerKeyKind::NounChunk);
    segment_answer_key(&key, &s.tokens, &kb)
        .instances
        .into_iter()
        .map(|i| (i.surface, i.in_wordnet))
        .collect()
}

#[test]
fn answer_key_segmentation_examples() {
    let own = |v: &[(&str, bool)]| v.iter().map(|(s, b)| (s.to_string(), *b)).collect::<Vec<_>>();
    assert_eq!(
        segment("abnormal white blood cells"),
        own(&[("abnormal", true), ("white blood cells", true)])
    );
    assert_eq!(
        segment("artificial blood cells"),
        own(&[("artificial", true), ("blood cells", true)])
    );
    assert_eq!(segment("dog"), own(&[("dog", true)]));
    assert_eq!(segment("qzxv dog"), own(&[("qzxv", false), ("dog", true)]));
}

#[test]
fn segmentation_ignores_the_rest_of_the_article() {
    let kb = common::kb();
    let target = "Doctors counted the abnormal white blood cells in the sample.";
    let other = ["Blood carries oxygen.", "The heart pumps blood through vessels."];
    let a = format!("{} {} {}", other[0], target, other[1]);
    let b = format!("{} {} {}", other[1], other[0], target);
    let inst = |article: &str| {
        let s = segment_sentences(article).unwrap().into_iter().find(|s| s.text == target).unwrap();
        let key = AnswerKey::new(&s, Span::new(3, 7), AnswerKeyKind::NounChunk);
        let k = segment_answer_key(&key, &s.tokens, &kb);
        k.instances.iter().map(|i| i.surface.clone()).collect::<Vec<_>>()
    };
    assert_eq!(inst(&a), inst(&b));
}
