//! Tokenization, detokenization, and sentence boundaries.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// Half-open token range `[start, end)` within a sentence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", from = "[usize; 2]")]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn single(index: usize) -> Self {
        Self::new(index, index + 1)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn fits(&self, token_count: usize) -> bool {
        self.start < self.end && self.end <= token_count
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.start, s.end]
    }
}

impl From<[usize; 2]> for Span {
    fn from([start, end]: [usize; 2]) -> Self {
        Span { start, end }
    }
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?:\p{L}\.){2,}|(?:\B-)?\d+(?:[.,]\d+)*%?|[\p{L}\p{N}]+(?:[-'’][\p{L}\p{N}]+)*|\*\*blank\*\*|\S")
            .expect("static regex")
    })
}

/// Split text into word and punctuation tokens. A trailing possessive `'s`
/// becomes its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for m in token_regex().find_iter(text) {
        let t = m.as_str();
        let lower = t.to_lowercase();
        if t.chars().count() > 2 && (lower.ends_with("'s") || lower.ends_with("’s")) {
            let cut = t.len() - if lower.ends_with("'s") { 2 } else { "’s".len() };
            out.push(t[..cut].to_string());
            out.push(t[cut..].to_string());
        } else {
            out.push(t.to_string());
        }
    }
    out
}

fn attaches_left(token: &str) -> bool {
    matches!(
        token,
        "," | "." | ";" | ":" | "!" | "?" | ")" | "]" | "}" | "%" | "'s" | "’s" | "n't"
    )
}

fn attaches_right(token: &str) -> bool {
    matches!(token, "(" | "[" | "{" | "$")
}

/// Join tokens with standard English spacing.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut open_quote = false;
    let mut glue_next = false;
    for tok in tokens {
        let tok = tok.as_ref();
        let is_quote = tok == "\"";
        let glue = out.is_empty()
            || glue_next
            || attaches_left(tok)
            || (is_quote && open_quote);
        if !glue {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = attaches_right(tok) || (is_quote && !open_quote);
        if is_quote {
            open_quote = !open_quote;
        }
    }
    out
}

const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "vs", "etc", "e.g", "i.e", "approx", "inc",
    "ltd", "co", "dept", "est", "mt", "u.s", "ca", "cf", "al", "gen", "col", "lt", "sgt", "capt",
    "gov", "sen", "rep", "rev", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec",
];

/// Abbreviations that only occur before a number ("Fig. 2", "No. 5").
const NUMBER_ABBREVIATIONS: &[&str] = &["no", "fig", "figs", "vol", "p", "pp", "eq", "ch", "sec"];

fn is_abbreviation(word: &str, before_digit: bool) -> bool {
    let w = word.trim_start_matches(['(', '"', '\'']).to_lowercase();
    ABBREVIATIONS.contains(&w.as_str()) || (before_digit && NUMBER_ABBREVIATIONS.contains(&w.as_str()))
}

/// Byte ranges of sentences in `text`, trimmed, in order.
pub fn sentence_bounds(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut bounds = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if matches!(c, '.' | '?' | '!') {
            // Absorb runs of terminators and closing quotes/brackets.
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '?' | '!' | '"' | '\'' | ')' | '”' | '’') {
                j += 1;
            }
            let at_end = j == chars.len();
            let followed_by_space = at_end || chars[j].1.is_whitespace();
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let next = chars.get(k).map(|&(_, ch)| ch);
            let next_word_ok = next.map_or(true, |ch| {
                ch.is_uppercase() || ch.is_ascii_digit() || matches!(ch, '"' | '“' | '(' | '\'')
            });
            let word_before = text[start..pos]
                .rsplit(|ch: char| ch.is_whitespace())
                .next()
                .unwrap_or("");
            let abbreviation =
                c == '.' && is_abbreviation(word_before, next.is_some_and(|ch| ch.is_ascii_digit()));
            let decimal = c == '.'
                && j < chars.len()
                && chars[j].1.is_ascii_digit()
                && i > 0
                && chars[i - 1].1.is_ascii_digit();
            if followed_by_space && next_word_ok && !abbreviation && !decimal {
                let end = if at_end { text.len() } else { chars[j].0 };
                push_trimmed(text, start, end, &mut bounds);
                start = end;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    push_trimmed(text, start, text.len(), &mut bounds);
    bounds
}

fn push_trimmed(text: &str, start: usize, end: usize, out: &mut Vec<(usize, usize)>) {
    let slice = &text[start..end];
    let lead = slice.len() - slice.trim_start().len();
    let trimmed = slice.trim();
    if !trimmed.is_empty() {
        out.push((start + lead, start + lead + trimmed.len()));
    }
}
