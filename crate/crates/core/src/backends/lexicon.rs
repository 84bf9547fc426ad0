//! An offline part-of-speech and entity tagger.
//!
//! Closed-class words come from fixed lists; open-class words take their
//! candidate parts of speech from WordNet and are resolved left to right by
//! the preceding tag (determiner/adjective slots prefer nouns and
//! premodifying adjectives, subject slots prefer verbs). Entity labels are
//! ORDINAL, CARDINAL, and, for proper names, PERSON / LOC / ORG / MISC from
//! the WordNet lexicographer file of the name's first noun sense.

use std::sync::Arc;

use super::{BackendDescriptor, BackendError, BackendKind, BackendResult, Tagger, TokenTag, UPos};
use crate::wordnet::{KnowledgeBase, Pos};

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "these", "those", "each", "every", "some", "any", "no", "all",
    "both", "another", "either", "neither", "such",
];
const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "myself",
    "yourself", "himself", "herself", "itself", "ourselves", "themselves", "who", "whom", "whose",
    "which", "what", "mine", "yours", "hers", "ours", "theirs", "my", "your", "his", "its", "our",
    "their", "something", "anything", "nothing", "everything", "someone", "anyone", "everyone",
    "one",
];
const ADPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "from", "into", "onto", "over", "under",
    "between", "among", "through", "during", "about", "against", "within", "without", "before",
    "after", "above", "below", "across", "around", "along", "near", "upon", "toward", "towards",
    "via", "inside", "outside", "beneath", "beside", "beyond", "throughout", "per", "like", "than",
    "off", "out", "up", "down", "except", "despite",
];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor", "yet", "so"];
const SUBORDINATORS: &[&str] = &[
    "because", "although", "though", "while", "if", "unless", "whether", "since", "as", "when",
    "where", "whereas", "once", "until",
];
const BE_FORMS: &[&str] = &["is", "are", "was", "were", "be", "been", "being", "am", "'re", "'m"];
const HAVE_DO: &[&str] = &["has", "have", "had", "having", "do", "does", "did"];
const MODALS: &[&str] = &[
    "can", "could", "will", "would", "shall", "should", "may", "might", "must",
];
const ADVERBS: &[&str] = &[
    "not", "very", "also", "often", "only", "too", "more", "most", "usually", "sometimes",
    "always", "never", "just", "even", "still", "then", "there", "here", "however", "thus",
    "therefore", "already", "almost", "quite", "rather", "less", "least", "much", "how", "why",
    "n't",
];
const ORDINALS: &[&str] = &[
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth", "hundredth", "thousandth", "last",
];
const NUMBER_WORDS: &[&str] = &[
    "zero", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety", "hundred",
    "thousand", "million", "billion", "dozen",
];

pub struct LexiconTagger {
    kb: Arc<KnowledgeBase>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Senses {
    noun: usize,
    verb: usize,
    adj: usize,
    adv: usize,
}

impl Senses {
    fn any(&self) -> bool {
        self.noun + self.verb + self.adj + self.adv > 0
    }
}

fn is_ordinal(lower: &str) -> bool {
    if ORDINALS.contains(&lower) {
        return true;
    }
    let digits = lower.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    !digits.is_empty()
        && digits.chars().all(|c| c.is_ascii_digit())
        && ["st", "nd", "rd", "th"].contains(&&lower[digits.len()..])
}

fn is_number(token: &str) -> bool {
    let lower = token.to_lowercase();
    NUMBER_WORDS.contains(&lower.as_str())
        || (token.trim_start_matches('-').chars().next().is_some_and(|c| c.is_ascii_digit())
            && token
                .trim_start_matches('-')
                .chars()
                .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | '%')))
}

/// Whether the lowercased word is a closed-class (function) word.
pub fn is_closed(lower: &str) -> bool {
    [
        DETERMINERS,
        PRONOUNS,
        ADPOSITIONS,
        CONJUNCTIONS,
        SUBORDINATORS,
        BE_FORMS,
        HAVE_DO,
        MODALS,
        ADVERBS,
    ]
    .iter()
    .any(|list| list.contains(&lower))
        || matches!(lower, "that" | "to" | "'s")
}

impl LexiconTagger {
    pub fn new(kb: Arc<KnowledgeBase>) -> Self {
        Self { kb }
    }

    fn senses(&self, lower: &str) -> Senses {
        let [noun, verb, adj, adv] = self.kb.sense_counts(lower);
        Senses {
            noun,
            verb,
            adj,
            adv,
        }
    }

    fn nounish(&self, token: Option<&String>) -> bool {
        token.is_some_and(|t| {
            let lower = t.to_lowercase();
            if is_closed(&lower) || !t.chars().any(char::is_alphanumeric) {
                return false;
            }
            let s = self.senses(&lower);
            s.noun > 0 || s.adj > 0 || is_number(t) || !s.any()
        })
    }

    fn verbish(&self, token: Option<&String>) -> bool {
        token.is_some_and(|t| {
            let lower = t.to_lowercase();
            !is_closed(&lower) && self.senses(&lower).verb > 0
        })
    }

    fn entity_label(&self, word: &str) -> Option<String> {
        let first = self.kb.synsets_of(word, Some(Pos::Noun)).into_iter().next()?;
        let label = match self.kb.lexical_label(first).ok()? {
            "noun.person" => "PERSON",
            "noun.location" => "LOC",
            "noun.group" => "ORG",
            _ => "MISC",
        };
        Some(label.to_string())
    }

    fn tag_sentence(&self, tokens: &[String]) -> Vec<TokenTag> {
        let mut tags: Vec<TokenTag> = Vec::with_capacity(tokens.len());
        let mut seen_main_verb = false;
        for (i, token) in tokens.iter().enumerate() {
            let lower = token.to_lowercase();
            let prev = tags.last().map(|t| t.pos);
            let next = tokens.get(i + 1);
            let tag = if !token.chars().any(char::is_alphanumeric) {
                if token == "," || token == ";" {
                    seen_main_verb = false;
                }
                TokenTag::new(if token == "$" || token == "%" { UPos::Sym } else { UPos::Punct })
            } else if is_ordinal(&lower) {
                TokenTag {
                    pos: UPos::Adj,
                    ner: Some("ORDINAL".into()),
                }
            } else if is_number(token) {
                TokenTag {
                    pos: UPos::Num,
                    ner: Some("CARDINAL".into()),
                }
            } else if let Some(t) = self.closed_class(&lower, prev, next) {
                if matches!(t, UPos::Sconj | UPos::Cconj) || (lower == "that" && t == UPos::Pron) {
                    seen_main_verb = false;
                }
                TokenTag::new(t)
            } else {
                let after_plural = i > 0
                    && prev == Some(UPos::Noun)
                    && self.kb.is_inflected_noun(&tokens[i - 1].to_lowercase());
                let t = self.open_class(token, &lower, i, prev, next, seen_main_verb, after_plural);
                if t.pos == UPos::Verb {
                    seen_main_verb = true;
                }
                t
            };
            tags.push(tag);
        }
        tags
    }

    fn closed_class(&self, lower: &str, prev: Option<UPos>, next: Option<&String>) -> Option<UPos> {
        let pos = match lower {
            "that" => match prev {
                Some(UPos::Verb) | Some(UPos::Adj) => UPos::Sconj,
                Some(UPos::Noun) | Some(UPos::Propn) => UPos::Pron,
                _ if self.nounish(next) => UPos::Det,
                _ => UPos::Pron,
            },
            "to" => {
                if self.verbish(next) {
                    UPos::Part
                } else {
                    UPos::Adp
                }
            }
            "'s" => UPos::Part,
            _ if BE_FORMS.contains(&lower) || MODALS.contains(&lower) => UPos::Aux,
            _ if HAVE_DO.contains(&lower) => {
                if self.verbish(next) || next.is_some_and(|n| n == "not" || n == "n't") {
                    UPos::Aux
                } else {
                    UPos::Verb
                }
            }
            _ if DETERMINERS.contains(&lower) => UPos::Det,
            _ if PRONOUNS.contains(&lower) => UPos::Pron,
            _ if ADPOSITIONS.contains(&lower) => UPos::Adp,
            _ if CONJUNCTIONS.contains(&lower) => UPos::Cconj,
            _ if SUBORDINATORS.contains(&lower) => UPos::Sconj,
            _ if ADVERBS.contains(&lower) => UPos::Adv,
            _ => return None,
        };
        Some(pos)
    }

    #[allow(clippy::too_many_arguments)]
    fn open_class(
        &self,
        token: &str,
        lower: &str,
        i: usize,
        prev: Option<UPos>,
        next: Option<&String>,
        seen_main_verb: bool,
        after_plural: bool,
    ) -> TokenTag {
        let capitalized = token.chars().next().is_some_and(char::is_uppercase);
        let s = self.senses(lower);
        if capitalized && (self.kb.is_proper_name(lower) || (i > 0 && !s.any())) {
            return TokenTag {
                pos: UPos::Propn,
                ner: self.entity_label(lower),
            };
        }
        if !s.any() {
            let pos = if lower.ends_with("ly") {
                UPos::Adv
            } else if capitalized && i > 0 {
                UPos::Propn
            } else {
                UPos::Noun
            };
            return TokenTag::new(pos);
        }

        let next_nounish = self.nounish(next);
        let noun_slot = |s: Senses| {
            if s.adj > 0 && next_nounish {
                UPos::Adj
            } else if s.noun > 0 {
                UPos::Noun
            } else if s.adj > 0 {
                UPos::Adj
            } else if s.verb > 0 {
                UPos::Verb
            } else {
                UPos::Adv
            }
        };
        let participle =
            lower.ends_with("ed") || lower.ends_with("en") || lower.ends_with("ing") || s.noun == 0;

        let pos = match prev {
            Some(UPos::Det | UPos::Adj | UPos::Num | UPos::Adp) => noun_slot(s),
            Some(UPos::Pron) if i > 0 => noun_slot(s),
            Some(UPos::Noun | UPos::Propn) => {
                // A bare verb form right after a plural noun reads as its predicate.
                let plural_subject = after_plural && self.kb.is_exact_entry(lower, Some(Pos::Verb));
                // "-s" form followed by a determiner: third person singular predicate.
                let third_person = !after_plural
                    && lower.ends_with('s')
                    && next.is_some_and(|n| DETERMINERS.contains(&n.to_lowercase().as_str()));
                if s.verb > 0
                    && !seen_main_verb
                    && (s.noun == 0 || s.verb >= s.noun || plural_subject || third_person)
                {
                    UPos::Verb
                } else {
                    noun_slot(s)
                }
            }
            Some(UPos::Aux) => {
                if s.verb > 0 && participle {
                    UPos::Verb
                } else if s.adj > 0 {
                    UPos::Adj
                } else if s.noun > 0 {
                    UPos::Noun
                } else {
                    UPos::Verb
                }
            }
            Some(UPos::Part) if s.verb > 0 => UPos::Verb,
            Some(UPos::Verb) => {
                if s.adv > 0 && s.noun == 0 && s.adj == 0 {
                    UPos::Adv
                } else {
                    noun_slot(s)
                }
            }
            _ => {
                if s.noun == 0 && s.adj == 0 && s.verb > 0 {
                    UPos::Verb
                } else if s.noun == 0 && s.adj == 0 {
                    UPos::Adv
                } else {
                    noun_slot(s)
                }
            }
        };
        // Subject pronoun followed by an open-class verb.
        let pos = if prev == Some(UPos::Pron) && s.verb > 0 && !seen_main_verb && pos != UPos::Adj {
            UPos::Verb
        } else {
            pos
        };
        TokenTag::new(pos)
    }
}

impl Tagger for LexiconTagger {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor::new(BackendKind::Tagger, "lexicon-wordnet", "1")
    }

    fn tag(&self, tokens: &[String]) -> BackendResult<Vec<TokenTag>> {
        if tokens.is_empty() {
            return Err(BackendError::invalid("cannot tag an empty token list"));
        }
        Ok(self.tag_sentence(tokens))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinals_and_numbers() {
        assert!(is_ordinal("first"));
        assert!(is_ordinal("21st"));
        assert!(!is_ordinal("st"));
        assert!(is_number("5,830"));
        assert!(is_number("3.5"));
        assert!(is_number("twelve"));
        assert!(!is_number("cells"));
    }
}
