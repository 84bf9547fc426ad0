mod common;

use std::collections::HashSet;

use clozegen::backends::mock::{Mock, MockConfig};
use clozegen::pipeline::{fill_blank, Generator, GeneratorConfig, BLANK};

const ARTICLE: &str = "Virchow was the first scientist to discover that leukemia is caused by rapid production of abnormal white blood cells. \
Plants use sunlight to produce sugar in their green leaves every day. \
The heart pumps blood through the arteries of the body. \
Why do farmers rotate their crops? \
Volcanoes release gases and ash into the atmosphere. \
Bees carry pollen between the flowers of fruit trees.";

fn generator(config: GeneratorConfig) -> Generator {
    let kb = common::kb();
    let mock = MockConfig {
        ngram_permissive: true,
        ..Default::default()
    };
    Generator::new(kb.clone(), Mock::new(mock, Some(kb)).into_backends(), config, None).unwrap()
}

#[test]
fn generation_is_deterministic() {
    let run = || {
        let g = generator(GeneratorConfig::default());
        serde_json::to_string(&g.generate(ARTICLE, 8).unwrap().questions).unwrap()
    };
    let first = run();
    assert!(first.len() > 2);
    for _ in 0..2 {
        assert_eq!(run(), first);
    }
}

#[test]
fn questions_satisfy_their_invariants() {
    let g = generator(GeneratorConfig::default());
    let generation = g.generate(ARTICLE, 20).unwrap();
    assert!(!generation.questions.is_empty());
    assert!(generation.questions.len() <= 20);
    for q in &generation.questions {
        assert_eq!(q.stem.matches(BLANK).count(), 1, "{}", q.stem);
        assert!(!q.stem.to_lowercase().starts_with("why"));
        let (filled, span) = fill_blank(&q.stem, &q.answer).unwrap();
        assert_eq!(filled.tokens[span.start..span.end].join(" "), q.answer);
        assert!(!q.distractors.is_empty() && q.distractors.len() <= 3);
        let lower: HashSet<String> = q.distractors.iter().map(|d| d.to_lowercase()).collect();
        assert_eq!(lower.len(), q.distractors.len());
        assert!(!lower.contains(&q.answer.to_lowercase()));
        assert_eq!(q.shortfall, q.distractors.len() < 3);
        assert_eq!(q.ranking[..q.distractors.len()], q.distractors[..]);
    }
}

#[test]
fn question_count_is_capped() {
    let g = generator(GeneratorConfig::default());
    for n in [1, 2, 5] {
        assert!(g.generate(ARTICLE, n).unwrap().questions.len() <= n);
    }
    assert!(g.generate(ARTICLE, 0).is_err());
    let none = g.generate("Why is the sky blue? Where do birds go in winter?", 5).unwrap();
    assert!(none.questions.is_empty());
}

#[test]
fn reconfigured_generator_matches_a_fresh_one() {
    let config = GeneratorConfig {
        alpha: 2.0,
        beta: 0.3,
        n: 2,
        ..Default::default()
    };
    let fresh = generator(config.clone());
    let derived = generator(GeneratorConfig::default()).with_config(config).unwrap();
    let a = serde_json::to_string(&fresh.generate(ARTICLE, 6).unwrap().questions).unwrap();
    let b = serde_json::to_string(&derived.generate(ARTICLE, 6).unwrap().questions).unwrap();
    assert_eq!(a, b);
    let bad = GeneratorConfig {
        alpha: 0.0,
        ..Default::default()
    };
    assert!(fresh.with_config(bad).is_err());
}
