mod common;

use std::collections::BTreeMap;

use clozegen::backends::first_sense::FirstSense;
use clozegen::backends::lexicon::LexiconTagger;
use clozegen::backends::mock::{sentence_key, span_key, Mock, MockConfig};
use clozegen::backends::ngram::{NgramTable, Permissive};
use clozegen::backends::{
    rank_predictions, ContextualEmbedder, Embedding, MaskedPredictor, MaskedSentence, NgramSource,
    SenseDisambiguator, StaticEmbedder, Tagger,
};
use clozegen::text::{tokenize, Span};
use clozegen::wordnet::Pos;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toks(s: &str) -> Vec<String> {
    tokenize(s)
}

#[test]
fn two_token_span_is_the_mean_of_its_token_vectors() {
    let mut config = MockConfig {
        dimension: 2,
        ..Default::default()
    };
    config.token_vectors.insert("red".into(), vec![1.0, 0.0]);
    config.token_vectors.insert("apple".into(), vec![0.0, 3.0]);
    let mock = Mock::new(config, None);
    let t = toks("the red apple fell");
    let v = mock.embed_span(&t, Span::new(1, 3)).unwrap();
    assert_eq!(v, Embedding(vec![0.5, 1.5]));
    assert_eq!(v, mock.embed_span(&t, Span::new(1, 3)).unwrap());
    assert!(mock.embed_span(&t, Span::new(3, 5)).is_err());
}

#[test]
fn span_table_overrides_token_mean() {
    let t = toks("the red apple fell");
    let mut config = MockConfig {
        dimension: 2,
        ..Default::default()
    };
    config.span_vectors.insert(
        sentence_key(&t),
        BTreeMap::from([(span_key(Span::new(1, 3)), vec![0.6, 0.8])]),
    );
    let mock = Mock::new(config, None);
    assert_eq!(mock.embed_span(&t, Span::new(1, 3)).unwrap(), Embedding(vec![0.6, 0.8]));
}

#[test]
fn static_vectors_cover_only_the_vocabulary() {
    let mut config = MockConfig::default();
    config.static_vocabulary.insert("wolf".into());
    let mock = Mock::new(config, None);
    assert_eq!(mock.embed_word("wolf").unwrap().dimension(), 32);
    assert!(mock.embed_word("qzxv").is_none());
    assert!(mock.embed_word("grey wolf").is_none());
}

#[test]
fn wsd_table_and_non_entries() {
    let kb = common::kb();
    let t = toks("my dog sleeps on the sofa .");
    let animal = kb.synsets_of("dog", Some(Pos::Noun))[0];
    let mut config = MockConfig::default();
    config.senses.insert(
        sentence_key(&t),
        BTreeMap::from([(span_key(Span::single(1)), animal)]),
    );
    let mock = Mock::new(config, Some(kb.clone()));
    assert_eq!(mock.disambiguate(&t, Span::single(1)).unwrap(), Some(animal));
    let odd = toks("my qzxv sleeps .");
    assert_eq!(mock.disambiguate(&odd, Span::single(1)).unwrap(), None);
    assert_eq!(FirstSense::new(kb).disambiguate(&odd, Span::single(1)).unwrap(), None);
}

#[test]
fn wsd_results_are_synsets_of_the_span() {
    let kb = common::kb();
    let wsd = FirstSense::new(kb.clone());
    let lemmas: Vec<String> = kb
        .index_lemmas(Pos::Noun)
        .into_iter()
        .filter(|l| !l.contains(' ') && l.chars().all(|c| c.is_ascii_lowercase()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut config = MockConfig::default();
    let mut cases = Vec::new();
    for i in 0..100 {
        let word = lemmas.choose(&mut rng).unwrap();
        let t = toks(&format!("we saw the {word} near the river ."));
        if i % 2 == 0 {
            let senses = kb.synsets_of(word, None);
            let pick = senses[rng.random_range(0..senses.len())];
            config.senses.insert(
                sentence_key(&t),
                BTreeMap::from([(span_key(Span::single(3)), pick)]),
            );
        }
        cases.push((word.clone(), t));
    }
    let mock = Mock::new(config, Some(kb.clone()));
    for (word, t) in &cases {
        let all = kb.synsets_of(word, None);
        for got in [
            wsd.disambiguate(t, Span::single(3)).unwrap(),
            mock.disambiguate(t, Span::single(3)).unwrap(),
        ] {
            let got = got.unwrap_or_else(|| panic!("no sense for {word}"));
            assert!(all.contains(&got), "{got} not a sense of {word}");
        }
    }
}

#[test]
fn apple_sentence_has_two_noun_chunks() {
    let kb = common::kb();
    let tagger = LexiconTagger::new(kb);
    let t = toks("The big red apple fell on the scared cat");
    let tags = tagger.tag(&t).unwrap();
    let chunks: Vec<String> = tagger
        .noun_chunks(&t, &tags)
        .into_iter()
        .map(|s| t[s.start..s.end].join(" "))
        .collect();
    assert_eq!(chunks, ["The big red apple", "the scared cat"]);
    assert_eq!(tagger.tag(&toks("run")).unwrap().len(), 1);
    assert!(tagger.tag(&[]).is_err());
}

fn assert_disjoint(spans: &[Span], len: usize, sentence: &str) {
    for (i, a) in spans.iter().enumerate() {
        assert!(!a.is_empty() && a.fits(len), "{a:?} in {sentence:?}");
        for b in &spans[i + 1..] {
            assert!(!a.overlaps(*b), "{a:?} overlaps {b:?} in {sentence:?}");
        }
    }
}

#[test]
fn chunks_never_overlap() {
    let kb = common::kb();
    let tagger = LexiconTagger::new(kb.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pool = |pos| -> Vec<String> {
        kb.index_lemmas(pos)
            .into_iter()
            .filter(|l| !l.contains(' ') && l.len() > 2)
            .take(4000)
            .collect()
    };
    let (nouns, verbs, adjs) = (pool(Pos::Noun), pool(Pos::Verb), pool(Pos::Adj));
    let function = ["the", "a", "of", "in", "and", "was", "is", "to", "it", "they", ",", "their", "very"];
    for _ in 0..200 {
        let len = rng.random_range(4..20);
        let words: Vec<String> = (0..len)
            .map(|_| match rng.random_range(0..5) {
                0 => nouns.choose(&mut rng).unwrap().clone(),
                1 => verbs.choose(&mut rng).unwrap().clone(),
                2 => adjs.choose(&mut rng).unwrap().clone(),
                _ => function.choose(&mut rng).unwrap().to_string(),
            })
            .collect();
        let sentence = format!("{} .", words.join(" "));
        let t = toks(&sentence);
        let tags = tagger.tag(&t).unwrap();
        assert_eq!(tags.len(), t.len());
        assert_disjoint(&tagger.noun_chunks(&t, &tags), t.len(), &sentence);
        assert_disjoint(&tagger.verb_chunks(&t, &tags), t.len(), &sentence);
    }
}

#[test]
fn ngram_sources() {
    let table = NgramTable::parse("red blood cells\t120\nwhite wine\t9\n", "t").unwrap();
    assert!(table.ngram_exists("Red  blood cells").unwrap());
    assert!(!table.ngram_exists("blue blood cells").unwrap());
    assert!(Permissive.ngram_exists("anything at all").unwrap());
}

#[test]
fn mock_outputs_are_reproducible() {
    let text = r#"{"predictions": {"the [MASK] ran .": ["cat", ["dog", 0.9], "wolf"]}, "dimension": 4}"#;
    let run = || {
        let config: MockConfig = serde_json::from_str(text).unwrap();
        let mock = Mock::new(config, None);
        let ms = MaskedSentence {
            prefix: toks("the"),
            suffix: toks("ran ."),
            sentence_id: 0,
            span: Span::single(1),
        };
        let p = mock.predict_fillers(&ms, 10).unwrap();
        let e = mock.embed_text("a running wolf").unwrap();
        serde_json::to_string(&(p, e)).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    assert!(first.starts_with(r#"[[{"token":"cat","probability":1.0,"position":1},{"token":"dog""#));
}

proptest! {
    #[test]
    fn prediction_lists_are_strictly_ordered(
        raw in prop::collection::vec(("[a-z]{1,6}", 0.0001f64..1.0), 0..40),
        k in 1usize..50,
    ) {
        let p = rank_predictions(raw.clone(), k);
        prop_assert_eq!(p.len(), raw.len().min(k));
        for (i, pred) in p.iter().enumerate() {
            prop_assert_eq!(pred.position, i + 1);
        }
        for w in p.windows(2) {
            prop_assert!(w[0].probability >= w[1].probability);
        }
        let top1 = rank_predictions(raw, 1);
        prop_assert_eq!(top1.first(), p.first());
    }
}
