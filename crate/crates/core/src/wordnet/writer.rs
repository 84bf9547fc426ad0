//! Writes small databases in the WordNet flat-file format.
//!
//! Used to build hermetic fixtures: each synset is described by a local key
//! and its hypernym links; offsets, inverse pointers, and index files are
//! derived so the result loads through [`KnowledgeBase::load`](super::KnowledgeBase::load)
//! exactly like the distributed files.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::path::Path;

use super::{Pos, SynsetRef};

/// The 45 lexicographer files of WordNet 3.0, by file number.
pub const LEXNAMES: [&str; 45] = [
    "adj.all",
    "adj.pert",
    "adv.all",
    "noun.Tops",
    "noun.act",
    "noun.animal",
    "noun.artifact",
    "noun.attribute",
    "noun.body",
    "noun.cognition",
    "noun.communication",
    "noun.event",
    "noun.feeling",
    "noun.food",
    "noun.group",
    "noun.location",
    "noun.motive",
    "noun.object",
    "noun.person",
    "noun.phenomenon",
    "noun.plant",
    "noun.possession",
    "noun.process",
    "noun.quantity",
    "noun.relation",
    "noun.shape",
    "noun.state",
    "noun.substance",
    "noun.time",
    "verb.body",
    "verb.change",
    "verb.cognition",
    "verb.communication",
    "verb.competition",
    "verb.consumption",
    "verb.contact",
    "verb.creation",
    "verb.emotion",
    "verb.motion",
    "verb.perception",
    "verb.possession",
    "verb.social",
    "verb.stative",
    "verb.weather",
    "adj.ppl",
];

const HEADER: &str = "  1 Fixture database in WordNet flat-file format.  \n  2 WordNet 3.0 Copyright 2006 by Princeton University.  All rights reserved.  \n";

#[derive(Clone, Debug)]
struct Entry {
    key: String,
    pos: Pos,
    lexfile: u8,
    satellite: bool,
    lemmas: Vec<String>,
    gloss: String,
    hypernyms: Vec<String>,
    instance_of: Vec<String>,
    similar_to: Vec<String>,
}

/// Builder for a fixture database.
#[derive(Clone, Debug, Default)]
pub struct FixtureBuilder {
    entries: Vec<Entry>,
    exceptions: BTreeMap<(Pos, String), Vec<String>>,
    version: Option<String>,
}

impl FixtureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a synset. `lexname` must be one of [`LEXNAMES`]; `parents` are keys
    /// of previously or subsequently added synsets (hypernym links).
    pub fn synset(
        &mut self,
        key: &str,
        pos: Pos,
        lexname: &str,
        lemmas: &[&str],
        gloss: &str,
        parents: &[&str],
    ) -> &mut Self {
        let lexfile = LEXNAMES
            .iter()
            .position(|n| *n == lexname)
            .unwrap_or_else(|| panic!("unknown lexicographer file {lexname}")) as u8;
        self.entries.push(Entry {
            key: key.to_string(),
            pos,
            lexfile,
            satellite: false,
            lemmas: lemmas.iter().map(|l| l.to_string()).collect(),
            gloss: gloss.to_string(),
            hypernyms: parents.iter().map(|p| p.to_string()).collect(),
            instance_of: Vec::new(),
            similar_to: Vec::new(),
        });
        self
    }

    /// Add an instance-hypernym link from `key` to `class`.
    pub fn instance_of(&mut self, key: &str, class: &str) -> &mut Self {
        let entry = self.entry_mut(key);
        entry.instance_of.push(class.to_string());
        self
    }

    /// Mark adjective `key` as a satellite of the head adjective `head`.
    pub fn satellite_of(&mut self, key: &str, head: &str) -> &mut Self {
        let entry = self.entry_mut(key);
        entry.satellite = true;
        entry.similar_to.push(head.to_string());
        self
    }

    pub fn exception(&mut self, pos: Pos, inflected: &str, base: &str) -> &mut Self {
        self.exceptions
            .entry((pos, inflected.to_string()))
            .or_default()
            .push(base.to_string());
        self
    }

    /// Declare a different version in the data-file headers.
    pub fn version(&mut self, version: &str) -> &mut Self {
        self.version = Some(version.to_string());
        self
    }

    fn entry_mut(&mut self, key: &str) -> &mut Entry {
        self.entries
            .iter_mut()
            .find(|e| e.key == key)
            .unwrap_or_else(|| panic!("unknown fixture synset {key}"))
    }

    /// Write the database into `dir`, returning the synset id assigned to each key.
    pub fn write(&self, dir: &Path) -> io::Result<HashMap<String, SynsetRef>> {
        std::fs::create_dir_all(dir)?;
        let header = match &self.version {
            Some(v) => HEADER.replace("WordNet 3.0", &format!("WordNet {v}")),
            None => HEADER.to_string(),
        };
        let by_key: HashMap<&str, &Entry> =
            self.entries.iter().map(|e| (e.key.as_str(), e)).collect();
        let lookup = |k: &str| -> io::Result<&Entry> {
            by_key.get(k).copied().ok_or_else(|| {
                io::Error::new(io::ErrorKind::InvalidInput, format!("unknown synset {k}"))
            })
        };

        // Pointer lists per key: (symbol, target key).
        let mut pointers: HashMap<&str, Vec<(&'static str, &str)>> = HashMap::new();
        for e in &self.entries {
            for h in &e.hypernyms {
                lookup(h)?;
                pointers.entry(&e.key).or_default().push(("@", h));
            }
            for h in &e.instance_of {
                lookup(h)?;
                pointers.entry(&e.key).or_default().push(("@i", h));
            }
            for s in &e.similar_to {
                lookup(s)?;
                pointers.entry(&e.key).or_default().push(("&", s));
            }
        }
        for e in &self.entries {
            for h in &e.hypernyms {
                pointers.entry(h).or_default().push(("~", &e.key));
            }
            for h in &e.instance_of {
                pointers.entry(h).or_default().push(("~i", &e.key));
            }
            for s in &e.similar_to {
                pointers.entry(s).or_default().push(("&", &e.key));
            }
        }

        let mut ids = HashMap::new();
        for pos in Pos::ALL {
            let members: Vec<&Entry> = self.entries.iter().filter(|e| e.pos == pos).collect();
            // Line length does not depend on offsets (fixed 8-digit fields), so
            // render once with zeros to measure, then assign.
            let mut offset = header.len();
            for e in &members {
                ids.insert(e.key.clone(), SynsetRef::new(pos, offset as u32));
                let probe = render_line(e, 0, &pointers, &|_| SynsetRef::new(pos, 0));
                offset += probe.len();
            }
        }
        for pos in Pos::ALL {
            let mut data = header.clone();
            let mut index: BTreeMap<String, Vec<u32>> = BTreeMap::new();
            for e in self.entries.iter().filter(|e| e.pos == pos) {
                let id = ids[&e.key];
                assert_eq!(id.offset as usize, data.len());
                data.push_str(&render_line(e, id.offset, &pointers, &|k| ids[k]));
                for lemma in &e.lemmas {
                    index
                        .entry(lemma.to_lowercase().replace(' ', "_"))
                        .or_default()
                        .push(id.offset);
                }
            }
            let mut index_text = header.clone();
            for (lemma, offsets) in index {
                index_text.push_str(&format!(
                    "{lemma} {} {} 0 {} 0 {}  \n",
                    pos.letter(),
                    offsets.len(),
                    offsets.len(),
                    offsets
                        .iter()
                        .map(|o| format!("{o:08}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                ));
            }
            std::fs::write(dir.join(format!("data.{}", pos.file_suffix())), data)?;
            std::fs::write(dir.join(format!("index.{}", pos.file_suffix())), index_text)?;
            let exc: String = self
                .exceptions
                .iter()
                .filter(|((p, _), _)| *p == pos)
                .map(|((_, inflected), bases)| format!("{inflected} {}\n", bases.join(" ")))
                .collect();
            std::fs::write(dir.join(format!("{}.exc", pos.file_suffix())), exc)?;
        }
        let lexnames: String = LEXNAMES
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let pos = match name.split('.').next() {
                    Some("noun") => 1,
                    Some("verb") => 2,
                    Some("adj") => 3,
                    _ => 4,
                };
                format!("{i:02}\t{name}\t{pos}\n")
            })
            .collect();
        std::fs::write(dir.join("lexnames"), lexnames)?;
        Ok(ids)
    }
}

fn render_line(
    e: &Entry,
    offset: u32,
    pointers: &HashMap<&str, Vec<(&'static str, &str)>>,
    resolve: &dyn Fn(&str) -> SynsetRef,
) -> String {
    let ss_type = if e.satellite { 's' } else { e.pos.letter() };
    let words: Vec<String> = e
        .lemmas
        .iter()
        .map(|l| format!("{} 0", l.replace(' ', "_")))
        .collect();
    let ptrs = pointers.get(e.key.as_str()).map(Vec::as_slice).unwrap_or(&[]);
    let ptr_text: Vec<String> = ptrs
        .iter()
        .map(|(sym, target)| {
            let t = resolve(target);
            format!("{sym} {:08} {} 0000", t.offset, t.pos.letter())
        })
        .collect();
    let mut line = format!(
        "{offset:08} {:02} {ss_type} {:02x} {} {:03}",
        e.lexfile,
        e.lemmas.len(),
        words.join(" "),
        ptrs.len()
    );
    if !ptr_text.is_empty() {
        line.push(' ');
        line.push_str(&ptr_text.join(" "));
    }
    if e.pos == Pos::Verb {
        line.push_str(" 00");
    }
    line.push_str(&format!(" | {}  \n", e.gloss));
    line
}
