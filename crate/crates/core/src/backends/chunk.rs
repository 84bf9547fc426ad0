//! Tag-pattern chunking shared by all taggers.
//!
//! A noun chunk is an optional determiner or possessive followed by
//! premodifying adjectives, numbers, and nouns, ending at a noun head; a lone
//! pronoun is a chunk by itself. A verb chunk is a run of auxiliaries,
//! adverbs, and particles ending at a main verb.

use super::{TokenTag, UPos};
use crate::text::Span;

pub const POSSESSIVE_PRONOUNS: &[&str] = &["my", "your", "his", "her", "its", "our", "their"];

pub fn is_possessive(token: &str) -> bool {
    POSSESSIVE_PRONOUNS.contains(&token.to_lowercase().as_str())
}

fn is_head(pos: UPos) -> bool {
    matches!(pos, UPos::Noun | UPos::Propn)
}

fn is_premodifier(pos: UPos) -> bool {
    matches!(pos, UPos::Adj | UPos::Num | UPos::Noun | UPos::Propn)
}

pub fn noun_chunks(tokens: &[String], tags: &[TokenTag]) -> Vec<Span> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        let pos = tags[i].pos;
        let opener = pos == UPos::Det || (pos == UPos::Pron && is_possessive(&tokens[i]));
        if pos == UPos::Pron && !opener {
            chunks.push(Span::single(i));
            i += 1;
            continue;
        }
        if !(opener || is_premodifier(pos)) {
            i += 1;
            continue;
        }
        let mut j = if opener { i + 1 } else { i };
        let mut last_head = None;
        while j < tags.len() && is_premodifier(tags[j].pos) {
            if is_head(tags[j].pos) {
                last_head = Some(j);
            }
            j += 1;
        }
        match last_head {
            Some(h) => {
                chunks.push(Span::new(i, h + 1));
                i = h + 1;
            }
            None => i += 1,
        }
    }
    chunks
}

pub fn verb_chunks(tags: &[TokenTag]) -> Vec<Span> {
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < tags.len() {
        if !matches!(tags[i].pos, UPos::Aux | UPos::Verb) {
            i += 1;
            continue;
        }
        let mut j = i;
        let mut last_verb = None;
        while j < tags.len() && matches!(tags[j].pos, UPos::Aux | UPos::Verb | UPos::Adv | UPos::Part) {
            if tags[j].pos == UPos::Verb {
                last_verb = Some(j);
            }
            j += 1;
        }
        match last_verb {
            Some(v) => {
                chunks.push(Span::new(i, v + 1));
                i = v + 1;
            }
            None => i = j.max(i + 1),
        }
    }
    chunks
}
