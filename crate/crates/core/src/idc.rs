//! Instance-level distractor candidates: masking, candidate gathering from
//! masked-LM predictions and WordNet siblings, and annotation of instances
//! and candidates by substitution into the stem.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::backends::lexicon::is_closed;
use crate::backends::{
    MaskedPredictor, MaskedSentence, SenseDisambiguator, Tagger, TokenTag, UPos,
};
use crate::error::{PipelineError, PipelineResult};
use crate::stem::{Instance, Sentence};
use crate::text::{tokenize, Span};
use crate::wordnet::{KnowledgeBase, Pos, SynsetRef};

pub fn mask_instance(sentence: &Sentence, span: Span) -> PipelineResult<MaskedSentence> {
    if !span.fits(sentence.tokens.len()) {
        return Err(PipelineError::invalid(format!(
            "span {}..{} outside sentence of {} tokens",
            span.start,
            span.end,
            sentence.tokens.len()
        )));
    }
    Ok(MaskedSentence {
        prefix: sentence.tokens[..span.start].to_vec(),
        suffix: sentence.tokens[span.end..].to_vec(),
        sentence_id: sentence.id,
        span,
    })
}

fn starts_with_vowel_sound(word: &str) -> bool {
    let w = word.to_lowercase();
    const CONSONANT_SOUND: &[&str] = &["uni", "use", "usu", "uti", "eu", "one", "once", "ur"];
    const VOWEL_SOUND: &[&str] = &["hour", "honest", "honor", "honour", "heir"];
    if VOWEL_SOUND.iter().any(|p| w.starts_with(p)) {
        return true;
    }
    if CONSONANT_SOUND.iter().any(|p| w.starts_with(p)) {
        return false;
    }
    w.starts_with(['a', 'e', 'i', 'o', 'u'])
}

/// Replace `span` with the tokens of `replacement`, fixing the agreement of
/// an immediately preceding "a"/"an". Returns the new tokens and the span
/// the replacement occupies.
pub fn substitute(tokens: &[String], span: Span, replacement: &str) -> (Vec<String>, Span) {
    let inserted = tokenize(replacement);
    let mut out = Vec::with_capacity(tokens.len() + inserted.len());
    out.extend_from_slice(&tokens[..span.start]);
    let new_span = Span::new(span.start, span.start + inserted.len());
    if let (Some(article), Some(first)) = (out.last_mut(), inserted.first()) {
        let lower = article.to_lowercase();
        if lower == "a" || lower == "an" {
            let want = if starts_with_vowel_sound(first) { "an" } else { "a" };
            if lower != want {
                let capital = article.starts_with('A');
                *article = if capital {
                    let mut c = want.to_string();
                    c[..1].make_ascii_uppercase();
                    c
                } else {
                    want.to_string()
                };
            }
        }
    }
    out.extend(inserted);
    out.extend_from_slice(&tokens[span.end..]);
    (out, new_span)
}

/// Which depth of hyponyms joins `H_U` below each ancestor of the instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDepth {
    /// Below the immediate hypernyms; `None` is unbounded.
    pub immediate: Option<usize>,
    /// Below every higher ancestor.
    pub higher: Option<usize>,
}

impl Default for HierarchyDepth {
    fn default() -> Self {
        Self {
            immediate: None,
            higher: Some(2),
        }
    }
}

/// `H_U`: the instance synset's ancestors plus the hyponym subtrees rooted at
/// them. A synset without hypernyms (adjectives, adverbs, taxonomy roots)
/// contributes itself, its cluster siblings, and its own hyponyms.
pub fn inherited_synsets(
    kb: &KnowledgeBase,
    synset: SynsetRef,
    depth: HierarchyDepth,
) -> PipelineResult<BTreeSet<SynsetRef>> {
    let ancestors = kb.hypernym_closure(synset)?;
    let mut out: BTreeSet<SynsetRef> = ancestors.iter().copied().collect();
    if ancestors.is_empty() {
        out.insert(synset);
        out.extend(kb.sibling_synsets(synset)?);
        out.extend(kb.hyponym_closure(synset, depth.higher)?);
        return Ok(out);
    }
    let immediate: BTreeSet<SynsetRef> = kb.hypernyms(synset)?.into_iter().collect();
    for a in &ancestors {
        let d = if immediate.contains(a) {
            depth.immediate
        } else {
            depth.higher
        };
        out.extend(kb.hyponym_closure(*a, d)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub instance: Instance,
    pub pos: UPos,
    pub ner: Option<String>,
    pub synset: Option<SynsetRef>,
    pub lexical_label: Option<String>,
    pub inherited_hypernyms: Vec<SynsetRef>,
    /// `H_U`, the synsets the IHHS checker accepts.
    #[serde(skip)]
    pub hierarchy: BTreeSet<SynsetRef>,
}

/// Accept a disambiguated synset only if it is one of the phrase's synsets.
fn grounded(kb: &KnowledgeBase, phrase: &str, synset: Option<SynsetRef>) -> Option<SynsetRef> {
    synset.filter(|s| kb.synsets_of(phrase, None).contains(s))
}

/// POS and NER of a span: the tags of its last (head) token.
fn head_tag(tags: &[TokenTag], span: Span) -> TokenTag {
    tags[span.end - 1].clone()
}

pub fn annotate_instance(
    sentence: &Sentence,
    tags: &[TokenTag],
    instance: &Instance,
    kb: &KnowledgeBase,
    wsd: &dyn SenseDisambiguator,
    depth: HierarchyDepth,
) -> PipelineResult<InstanceInfo> {
    if !instance.span.fits(sentence.tokens.len()) || tags.len() != sentence.tokens.len() {
        return Err(PipelineError::invalid("instance span or tags do not match the sentence"));
    }
    let head = head_tag(tags, instance.span);
    let synset = if instance.in_wordnet {
        let raw = wsd.disambiguate(&sentence.tokens, instance.span)?;
        grounded(kb, &instance.surface.to_lowercase(), raw)
    } else {
        None
    };
    let (lexical_label, inherited_hypernyms, hierarchy) = match synset {
        Some(s) => (
            Some(kb.lexical_label(s)?.to_string()),
            kb.hypernym_closure(s)?,
            inherited_synsets(kb, s, depth)?,
        ),
        None => (None, Vec::new(), BTreeSet::new()),
    };
    Ok(InstanceInfo {
        instance: instance.clone(),
        pos: head.pos,
        ner: head.ner,
        synset,
        lexical_label,
        inherited_hypernyms,
        hierarchy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Origin {
    Predicted { position: usize },
    Sibling,
    Both { position: usize },
}

impl Origin {
    pub fn position(&self) -> Option<usize> {
        match *self {
            Origin::Predicted { position } | Origin::Both { position } => Some(position),
            Origin::Sibling => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Idc {
    pub surface: String,
    pub origin: Origin,
    pub pos: Option<UPos>,
    pub ner: Option<String>,
    pub synset: Option<SynsetRef>,
    pub lexical_label: Option<String>,
    /// `L_Y`.
    pub label_set: BTreeSet<String>,
    /// `S_Y`.
    pub synsets: BTreeSet<SynsetRef>,
}

impl Idc {
    pub fn new(surface: &str, origin: Origin) -> Self {
        Self {
            surface: surface.to_string(),
            origin,
            pos: None,
            ner: None,
            synset: None,
            lexical_label: None,
            label_set: BTreeSet::new(),
            synsets: BTreeSet::new(),
        }
    }
}

/// A filler usable as a candidate: a content word, not punctuation or a
/// subword piece.
pub fn is_content_filler(token: &str) -> bool {
    let t = token.trim();
    !t.is_empty()
        && !t.starts_with("##")
        && t.chars().any(char::is_alphabetic)
        && !is_closed(&t.to_lowercase())
}

/// Predicted fillers (original positions kept) merged with the instance's
/// sibling entries. Siblings of a plural noun instance are pluralized.
pub fn gather_idcs(
    info: &InstanceInfo,
    sentence: &Sentence,
    kb: &KnowledgeBase,
    predictor: &dyn MaskedPredictor,
    k: usize,
) -> PipelineResult<Vec<Idc>> {
    let masked = mask_instance(sentence, info.instance.span)?;
    let predictions = predictor.predict_fillers(&masked, k)?;
    let own = info.instance.surface.to_lowercase();
    let mut out: Vec<Idc> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for p in predictions {
        let key = p.token.to_lowercase();
        if !is_content_filler(&p.token) || key == own || index.contains_key(&key) {
            continue;
        }
        index.insert(key, out.len());
        out.push(Idc::new(
            p.token.trim(),
            Origin::Predicted {
                position: p.position,
            },
        ));
    }
    if let Some(synset) = info.synset {
        let plural = synset.pos == Pos::Noun && kb.is_inflected_noun(&own);
        for entry in kb.sibling_entries(synset)? {
            let last = entry.rsplit(' ').next().unwrap_or(&entry);
            let surface = if plural && !kb.is_inflected_noun(last) {
                kb.pluralize(&entry)
            } else {
                entry
            };
            let key = surface.to_lowercase();
            if key == own {
                continue;
            }
            match index.get(&key) {
                Some(&i) => {
                    if let Origin::Predicted { position } = out[i].origin {
                        out[i].origin = Origin::Both { position };
                    }
                }
                None => {
                    index.insert(key, out.len());
                    out.push(Idc::new(&surface, Origin::Sibling));
                }
            }
        }
    }
    Ok(out)
}

/// Tag and disambiguate the candidate in place of the instance.
pub fn annotate_idc(
    sentence: &Sentence,
    instance: &Instance,
    idc: &Idc,
    kb: &KnowledgeBase,
    wsd: &dyn SenseDisambiguator,
    tagger: &dyn Tagger,
) -> PipelineResult<Idc> {
    if idc.surface.trim().is_empty() {
        return Err(PipelineError::invalid("candidate surface is empty"));
    }
    let (tokens, span) = substitute(&sentence.tokens, instance.span, &idc.surface);
    if span.is_empty() {
        return Err(PipelineError::invalid(format!(
            "candidate {:?} has no tokens",
            idc.surface
        )));
    }
    let tags = tagger.tag(&tokens)?;
    let head = head_tag(&tags, span);
    let phrase = idc.surface.to_lowercase();
    let synsets: BTreeSet<SynsetRef> = kb.synsets_of(&phrase, None).into_iter().collect();
    let synset = if synsets.is_empty() {
        None
    } else {
        wsd.disambiguate(&tokens, span)?
            .filter(|s| synsets.contains(s))
    };
    let lexical_label = match synset {
        Some(s) => Some(kb.lexical_label(s)?.to_string()),
        None => None,
    };
    Ok(Idc {
        surface: idc.surface.clone(),
        origin: idc.origin,
        pos: Some(head.pos),
        ner: head.ner,
        synset,
        lexical_label,
        label_set: kb.lexical_labels_of(&phrase).0,
        synsets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(String::from).collect()
    }

    #[test]
    fn masking_keeps_both_sides() {
        let s = Sentence::new(0, "of abnormal white blood cells.");
        let m = mask_instance(&s, Span::new(2, 5)).unwrap();
        assert_eq!(m.prefix.last().unwrap(), "abnormal");
        assert_eq!(m.suffix, ["."]);
        assert!(mask_instance(&s, Span::new(4, 7)).is_err());
        assert!(mask_instance(&s, Span::new(0, 1)).unwrap().prefix.is_empty());
    }

    #[test]
    fn substitution_repairs_articles() {
        let (t, span) = substitute(&toks("it is a dog ."), Span::new(3, 4), "elephant");
        assert_eq!(t, toks("it is an elephant ."));
        assert_eq!(span, Span::new(3, 4));
        let (t, _) = substitute(&toks("An apple fell ."), Span::new(1, 2), "red blood cell");
        assert_eq!(t, toks("A red blood cell fell ."));
        let (t, span) = substitute(&toks("an owl"), Span::new(1, 2), "hour");
        assert_eq!((t, span), (toks("an hour"), Span::new(1, 2)));
        let (t, span) = substitute(&toks("the cat sat"), Span::new(1, 2), "big dog");
        assert_eq!((t, span), (toks("the big dog sat"), Span::new(1, 3)));
    }

    #[test]
    fn content_fillers() {
        assert!(is_content_filler("cells"));
        assert!(!is_content_filler("the"));
        assert!(!is_content_filler("##ing"));
        assert!(!is_content_filler("."));
        assert!(!is_content_filler("42"));
    }
}
