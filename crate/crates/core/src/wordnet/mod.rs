//! In-memory WordNet 3.0 knowledge base.
//!
//! Reads the Princeton flat-file database (`index.*`, `data.*`, `lexnames`
//! and, when present, the `*.exc` morphology exception lists) and answers the
//! taxonomy queries the generator needs. The base is immutable once loaded.

mod morphy;
mod parser;
pub mod writer;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use morphy::pluralize_noun;

/// The WordNet version acceptance is pinned to.
pub const EXPECTED_VERSION: &str = "3.0";

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("missing WordNet file `{file}` in {dir}")]
    Missing { file: String, dir: String },
    #[error("failed to read `{file}`: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt WordNet file `{file}` at line {line}: {message}")]
    Corrupt {
        file: String,
        line: usize,
        message: String,
    },
    #[error("`{file}` is WordNet {found}, expected {expected}")]
    Version {
        file: String,
        found: String,
        expected: String,
    },
    #[error("unknown synset {0}")]
    UnknownSynset(SynsetRef),
    #[error("invalid synset id `{0}`")]
    BadSynsetId(String),
}

pub type Result<T, E = WordNetError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    pub fn file_suffix(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 'a',
            Pos::Adv => 'r',
        }
    }

    /// Accepts the data-file synset type letters; `s` (adjective satellite) maps to `Adj`.
    pub fn from_letter(c: char) -> Option<Pos> {
        match c {
            'n' => Some(Pos::Noun),
            'v' => Some(Pos::Verb),
            'a' | 's' => Some(Pos::Adj),
            'r' => Some(Pos::Adv),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A synset identifier: part of speech plus the byte offset of its line in `data.<pos>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SynsetRef {
    pub pos: Pos,
    pub offset: u32,
}

impl SynsetRef {
    pub fn new(pos: Pos, offset: u32) -> Self {
        Self { pos, offset }
    }
}

impl fmt::Display for SynsetRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos.letter())
    }
}

impl FromStr for SynsetRef {
    type Err = WordNetError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || WordNetError::BadSynsetId(s.to_string());
        let (offset, pos) = s.trim().split_once('-').ok_or_else(bad)?;
        let mut letters = pos.chars();
        let pos = match (letters.next(), letters.next()) {
            (Some(c), None) => Pos::from_letter(c).ok_or_else(bad)?,
            _ => return Err(bad()),
        };
        let offset = offset.parse().map_err(|_| bad())?;
        Ok(SynsetRef { pos, offset })
    }
}

impl Serialize for SynsetRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SynsetRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Public view of one synset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynsetInfo {
    pub id: SynsetRef,
    /// Lemma phrases in file order, multiword lemmas space-separated.
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub lexical_label: String,
}

/// A set of lexicographer-file names (`L_Y` for a candidate).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LexicalLabelSet(pub BTreeSet<String>);

impl LexicalLabelSet {
    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PointerKind {
    Hypernym,
    InstanceHypernym,
    Hyponym,
    InstanceHyponym,
    SimilarTo,
    Other,
}

impl PointerKind {
    pub(crate) fn from_symbol(sym: &str) -> PointerKind {
        match sym {
            "@" => PointerKind::Hypernym,
            "@i" => PointerKind::InstanceHypernym,
            "~" => PointerKind::Hyponym,
            "~i" => PointerKind::InstanceHyponym,
            "&" => PointerKind::SimilarTo,
            _ => PointerKind::Other,
        }
    }

    fn is_up(self) -> bool {
        matches!(self, PointerKind::Hypernym | PointerKind::InstanceHypernym)
    }

    fn is_down(self) -> bool {
        matches!(self, PointerKind::Hyponym | PointerKind::InstanceHyponym)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Pointer {
    pub kind: PointerKind,
    pub target: SynsetRef,
}

#[derive(Clone, Debug)]
pub(crate) struct SynsetRecord {
    pub lemmas: Vec<String>,
    pub gloss: String,
    pub lexfile: u8,
    pub satellite: bool,
    pub pointers: Vec<Pointer>,
}

/// Options for [`KnowledgeBase::load_with`].
#[derive(Clone, Debug)]
pub struct LoadOptions {
    /// Version the data-file headers must declare. `None` accepts any version.
    pub require_version: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            require_version: Some(EXPECTED_VERSION.to_string()),
        }
    }
}

/// The loaded WordNet database.
pub struct KnowledgeBase {
    lexnames: Vec<String>,
    /// Per part of speech: index lemma (underscore-joined, lowercase) -> synset offsets in file order.
    index: [HashMap<String, Vec<u32>>; 4],
    synsets: HashMap<SynsetRef, SynsetRecord>,
    exceptions: [HashMap<String, Vec<String>>; 4],
    version: Option<String>,
}

impl fmt::Debug for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeBase")
            .field("version", &self.version)
            .field("synsets", &self.synsets.len())
            .field("lexnames", &self.lexnames.len())
            .finish()
    }
}

/// Lowercase, trim, and collapse runs of whitespace to one space.
pub fn normalize_phrase(phrase: &str) -> String {
    phrase
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn index_key(normalized: &str) -> String {
    normalized.replace(' ', "_")
}

impl KnowledgeBase {
    /// Load a WordNet 3.0 database directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        Self::load_with(dir, &LoadOptions::default())
    }

    pub fn load_with(dir: impl AsRef<Path>, options: &LoadOptions) -> Result<Self> {
        parser::load(dir.as_ref(), options)
    }

    pub(crate) fn from_parts(
        lexnames: Vec<String>,
        index: [HashMap<String, Vec<u32>>; 4],
        synsets: HashMap<SynsetRef, SynsetRecord>,
        exceptions: [HashMap<String, Vec<String>>; 4],
        version: Option<String>,
    ) -> Self {
        Self {
            lexnames,
            index,
            synsets,
            exceptions,
            version,
        }
    }

    /// Version string found in the data-file headers, if any.
    pub fn version(&self) -> Option<&str> {
        self.version.as_deref()
    }

    /// The lexicographer-file names, indexed by file number.
    pub fn lexnames(&self) -> &[String] {
        &self.lexnames
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    /// Every synset id, sorted.
    pub fn all_synsets(&self) -> Vec<SynsetRef> {
        let mut all: Vec<_> = self.synsets.keys().copied().collect();
        all.sort_unstable();
        all
    }

    /// Every index lemma for a part of speech, space-joined, sorted.
    pub fn index_lemmas(&self, pos: Pos) -> Vec<String> {
        let mut all: Vec<_> = self.index[pos.index()]
            .keys()
            .map(|k| k.replace('_', " "))
            .collect();
        all.sort_unstable();
        all
    }

    fn record(&self, r: SynsetRef) -> Result<&SynsetRecord> {
        self.synsets.get(&r).ok_or(WordNetError::UnknownSynset(r))
    }

    pub fn contains_synset(&self, r: SynsetRef) -> bool {
        self.synsets.contains_key(&r)
    }

    /// Index lemma keys that the phrase resolves to under `pos`: the exact form
    /// when indexed, otherwise its morphological base forms.
    fn resolve_keys(&self, normalized: &str, pos: Pos) -> Vec<String> {
        if normalized.is_empty() {
            return Vec::new();
        }
        // The form itself first, then any base forms it inflects (so "organs"
        // reaches both the food sense and the senses of "organ").
        let key = index_key(normalized);
        let index = &self.index[pos.index()];
        let mut keys = Vec::new();
        if index.contains_key(&key) {
            keys.push(key.clone());
        }
        for base in morphy::base_forms(&key, pos, &self.exceptions[pos.index()]) {
            if index.contains_key(&base) && !keys.contains(&base) {
                keys.push(base);
            }
        }
        keys
    }

    fn positions(pos: Option<Pos>) -> Vec<Pos> {
        match pos {
            Some(p) => vec![p],
            None => Pos::ALL.to_vec(),
        }
    }

    /// Exact-form lookup only, no morphological fallback.
    pub fn is_exact_entry(&self, phrase: &str, pos: Option<Pos>) -> bool {
        let key = index_key(&normalize_phrase(phrase));
        !key.is_empty()
            && Self::positions(pos)
                .into_iter()
                .any(|p| self.index[p.index()].contains_key(&key))
    }

    /// Whether the phrase (or, failing that, one of its base forms) is an index entry.
    pub fn is_entry(&self, phrase: &str, pos: Option<Pos>) -> bool {
        let normalized = normalize_phrase(phrase);
        Self::positions(pos)
            .into_iter()
            .any(|p| !self.resolve_keys(&normalized, p).is_empty())
    }

    /// Base lemma the phrase resolves to, preferring nouns, then verbs, adjectives, adverbs.
    pub fn lemma_of(&self, phrase: &str, pos: Option<Pos>) -> Option<String> {
        let normalized = normalize_phrase(phrase);
        Self::positions(pos)
            .into_iter()
            .find_map(|p| self.resolve_keys(&normalized, p).into_iter().next())
            .map(|k| k.replace('_', " "))
    }

    /// All synsets having the phrase as a lemma, in index-file order.
    pub fn synsets_of(&self, phrase: &str, pos: Option<Pos>) -> Vec<SynsetRef> {
        let normalized = normalize_phrase(phrase);
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for p in Self::positions(pos) {
            for key in self.resolve_keys(&normalized, p) {
                for &offset in &self.index[p.index()][&key] {
                    let r = SynsetRef::new(p, offset);
                    if seen.insert(r) {
                        out.push(r);
                    }
                }
            }
        }
        out
    }

    pub fn synset(&self, r: SynsetRef) -> Result<SynsetInfo> {
        let rec = self.record(r)?;
        Ok(SynsetInfo {
            id: r,
            lemmas: rec.lemmas.clone(),
            gloss: rec.gloss.clone(),
            lexical_label: self.lexnames[rec.lexfile as usize].clone(),
        })
    }

    pub fn lexical_label(&self, r: SynsetRef) -> Result<&str> {
        let rec = self.record(r)?;
        Ok(&self.lexnames[rec.lexfile as usize])
    }

    pub fn lemmas_of(&self, r: SynsetRef) -> Result<&[String]> {
        Ok(&self.record(r)?.lemmas)
    }

    pub fn gloss_of(&self, r: SynsetRef) -> Result<&str> {
        Ok(&self.record(r)?.gloss)
    }

    pub fn lexical_labels_of(&self, phrase: &str) -> LexicalLabelSet {
        let labels = self
            .synsets_of(phrase, None)
            .into_iter()
            .map(|r| self.lexnames[self.synsets[&r].lexfile as usize].clone())
            .collect();
        LexicalLabelSet(labels)
    }

    /// Direct hypernyms, instance hypernyms included.
    pub fn hypernyms(&self, r: SynsetRef) -> Result<Vec<SynsetRef>> {
        Ok(self
            .record(r)?
            .pointers
            .iter()
            .filter(|p| p.kind.is_up())
            .map(|p| p.target)
            .collect())
    }

    /// Direct hyponyms, instance hyponyms included.
    pub fn hyponyms(&self, r: SynsetRef) -> Result<Vec<SynsetRef>> {
        Ok(self
            .record(r)?
            .pointers
            .iter()
            .filter(|p| p.kind.is_down())
            .map(|p| p.target)
            .collect())
    }

    /// All ancestors of `r` in breadth-first order, without `r` itself.
    pub fn hypernym_closure(&self, r: SynsetRef) -> Result<Vec<SynsetRef>> {
        self.record(r)?;
        let mut seen = HashSet::from([r]);
        let mut order = Vec::new();
        let mut queue = VecDeque::from([r]);
        while let Some(cur) = queue.pop_front() {
            for up in self.hypernyms(cur)? {
                if seen.insert(up) {
                    order.push(up);
                    queue.push_back(up);
                }
            }
        }
        Ok(order)
    }

    /// All descendants of `r` down to `max_depth` levels (unbounded when `None`), without `r`.
    pub fn hyponym_closure(
        &self,
        r: SynsetRef,
        max_depth: Option<usize>,
    ) -> Result<BTreeSet<SynsetRef>> {
        self.record(r)?;
        let mut out = BTreeSet::new();
        let mut queue = VecDeque::from([(r, 0usize)]);
        while let Some((cur, depth)) = queue.pop_front() {
            if max_depth.is_some_and(|d| depth >= d) {
                continue;
            }
            for down in self.hyponyms(cur)? {
                if down != r && out.insert(down) {
                    queue.push_back((down, depth + 1));
                }
            }
        }
        Ok(out)
    }

    /// Head synset of an adjective cluster: itself for heads, the `&` target for satellites.
    fn adjective_heads(&self, r: SynsetRef) -> Result<Vec<SynsetRef>> {
        let rec = self.record(r)?;
        if !rec.satellite {
            return Ok(vec![r]);
        }
        Ok(rec
            .pointers
            .iter()
            .filter(|p| p.kind == PointerKind::SimilarTo)
            .map(|p| p.target)
            .collect())
    }

    /// Synsets sharing a parent with `r` (co-hyponyms); for adjectives, the
    /// same-lexical-file members of its head-adjective cluster.
    pub fn sibling_synsets(&self, r: SynsetRef) -> Result<Vec<SynsetRef>> {
        let rec = self.record(r)?;
        let mut seen = HashSet::from([r]);
        let mut out = Vec::new();
        if r.pos == Pos::Adj {
            for head in self.adjective_heads(r)? {
                let head_rec = self.record(head)?;
                let cluster = std::iter::once(head).chain(
                    head_rec
                        .pointers
                        .iter()
                        .filter(|p| p.kind == PointerKind::SimilarTo)
                        .map(|p| p.target),
                );
                for member in cluster {
                    if self.record(member)?.lexfile == rec.lexfile && seen.insert(member) {
                        out.push(member);
                    }
                }
            }
            return Ok(out);
        }
        for parent in self.hypernyms(r)? {
            for child in self.hyponyms(parent)? {
                if seen.insert(child) {
                    out.push(child);
                }
            }
        }
        Ok(out)
    }

    /// Lemmas of the sibling synsets, deduplicated case-insensitively, never a lemma of `r`.
    pub fn sibling_entries(&self, r: SynsetRef) -> Result<Vec<String>> {
        let own: HashSet<String> = self
            .record(r)?
            .lemmas
            .iter()
            .map(|l| l.to_lowercase())
            .collect();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for sib in self.sibling_synsets(r)? {
            for lemma in &self.record(sib)?.lemmas {
                let lower = lemma.to_lowercase();
                if !own.contains(&lower) && seen.insert(lower) {
                    out.push(lemma.clone());
                }
            }
        }
        Ok(out)
    }

    /// Number of synsets per part of speech (noun, verb, adj, adv) the phrase resolves to.
    pub fn sense_counts(&self, phrase: &str) -> [usize; 4] {
        let normalized = normalize_phrase(phrase);
        Pos::ALL.map(|p| {
            self.resolve_keys(&normalized, p)
                .iter()
                .map(|k| self.index[p.index()][k].len())
                .sum()
        })
    }

    /// Whether every noun sense of the word is written capitalized in the data
    /// files (a proper name such as "Virchow").
    pub fn is_proper_name(&self, word: &str) -> bool {
        let normalized = normalize_phrase(word);
        let senses = self.synsets_of(&normalized, Some(Pos::Noun));
        !senses.is_empty()
            && senses.iter().all(|r| {
                self.synsets[r].lemmas.iter().any(|l| {
                    l.to_lowercase() == normalized && l.chars().next().is_some_and(char::is_uppercase)
                })
            })
    }

    /// Whether `phrase` reaches an indexed noun through morphological
    /// detachment (an inflected plural), whether or not it is indexed itself.
    pub fn is_inflected_noun(&self, phrase: &str) -> bool {
        let normalized = normalize_phrase(phrase);
        let key = index_key(&normalized);
        !key.is_empty()
            && self
                .resolve_keys(&normalized, Pos::Noun)
                .iter()
                .any(|k| *k != key)
    }

    /// Plural of a noun phrase's last word, using the exception list in reverse first.
    pub fn pluralize(&self, phrase: &str) -> String {
        morphy::pluralize_phrase(phrase, &self.exceptions[Pos::Noun.index()])
    }
}
