//! WordNet's morphological processing: exception lists first, then the
//! standard suffix detachment rules for the part of speech.

use std::collections::HashMap;

use super::Pos;

const NOUN_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ses", "s"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("men", "man"),
    ("ies", "y"),
];

const VERB_RULES: &[(&str, &str)] = &[
    ("s", ""),
    ("ies", "y"),
    ("es", "e"),
    ("es", ""),
    ("ed", "e"),
    ("ed", ""),
    ("ing", "e"),
    ("ing", ""),
];

const ADJ_RULES: &[(&str, &str)] = &[("er", ""), ("est", ""), ("er", "e"), ("est", "e")];

fn rules(pos: Pos) -> &'static [(&'static str, &'static str)] {
    match pos {
        Pos::Noun => NOUN_RULES,
        Pos::Verb => VERB_RULES,
        Pos::Adj => ADJ_RULES,
        Pos::Adv => &[],
    }
}

/// Candidate base forms of an underscore-joined index key, in rule order,
/// deduplicated, never the key itself. Callers filter by index membership.
pub(super) fn base_forms(
    key: &str,
    pos: Pos,
    exceptions: &HashMap<String, Vec<String>>,
) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut push = |s: String| {
        if s != key && !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(bases) = exceptions.get(key) {
        for b in bases {
            push(b.clone());
        }
    }
    // Collocations inflect on their last word ("white_blood_cells").
    let (head, last) = match key.rfind('_') {
        Some(i) => (&key[..=i], &key[i + 1..]),
        None => ("", key),
    };
    if !head.is_empty() {
        if let Some(bases) = exceptions.get(last) {
            for b in bases {
                push(format!("{head}{b}"));
            }
        }
    }
    for (suffix, ending) in rules(pos) {
        if let Some(stem) = last.strip_suffix(suffix) {
            if !stem.is_empty() {
                push(format!("{head}{stem}{ending}"));
            }
        }
    }
    out
}

fn pluralize_word(word: &str, exceptions: &HashMap<String, Vec<String>>) -> String {
    let lower = word.to_lowercase();
    let mut irregular: Vec<&String> = exceptions
        .iter()
        .filter(|(_, bases)| bases.contains(&lower))
        .map(|(inflected, _)| inflected)
        .collect();
    irregular.sort();
    if let Some(form) = irregular.first() {
        return (*form).clone();
    }
    pluralize_noun(word)
}

/// Regular English plural of a single noun.
pub fn pluralize_noun(word: &str) -> String {
    let lower = word.to_lowercase();
    let consonant_y = lower.len() > 1
        && lower.ends_with('y')
        && !matches!(lower.as_bytes()[lower.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u');
    if consonant_y {
        format!("{}ies", &word[..word.len() - 1])
    } else if ["s", "x", "z", "ch", "sh"].iter().any(|s| lower.ends_with(s)) {
        format!("{word}es")
    } else if lower.ends_with("man") && lower.len() > 3 {
        format!("{}men", &word[..word.len() - 3])
    } else {
        format!("{word}s")
    }
}

/// Pluralize the last word of a space-separated phrase.
pub(super) fn pluralize_phrase(phrase: &str, exceptions: &HashMap<String, Vec<String>>) -> String {
    match phrase.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", pluralize_word(last, exceptions)),
        None => pluralize_word(phrase, exceptions),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noun_rules_detach_plural_suffixes() {
        let none = HashMap::new();
        let forms = base_forms("white_blood_cells", Pos::Noun, &none);
        assert_eq!(forms[0], "white_blood_cell");
        assert!(base_forms("boxes", Pos::Noun, &none).contains(&"box".to_string()));
        assert!(base_forms("flies", Pos::Noun, &none).contains(&"fly".to_string()));
        assert!(base_forms("dog", Pos::Noun, &none).is_empty());
    }

    #[test]
    fn exceptions_come_first() {
        let exc = HashMap::from([("mice".to_string(), vec!["mouse".to_string()])]);
        assert_eq!(base_forms("mice", Pos::Noun, &exc)[0], "mouse");
        assert_eq!(base_forms("field_mice", Pos::Noun, &exc)[0], "field_mouse");
    }

    #[test]
    fn verb_rules_cover_inflections() {
        let none = HashMap::new();
        let forms = base_forms("caused", Pos::Verb, &none);
        assert!(forms.contains(&"cause".to_string()));
        assert!(base_forms("running", Pos::Verb, &none).contains(&"runn".to_string()));
    }

    #[test]
    fn plurals() {
        let exc = HashMap::from([("children".to_string(), vec!["child".to_string()])]);
        assert_eq!(pluralize_phrase("red blood cell", &exc), "red blood cells");
        assert_eq!(pluralize_phrase("child", &exc), "children");
        assert_eq!(pluralize_noun("box"), "boxes");
        assert_eq!(pluralize_noun("berry"), "berries");
        assert_eq!(pluralize_noun("day"), "days");
        assert_eq!(pluralize_noun("fireman"), "firemen");
    }
}
