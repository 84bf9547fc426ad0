use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use regex::Regex;

use super::{
    KnowledgeBase, LoadOptions, Pointer, PointerKind, Pos, Result, SynsetRecord, SynsetRef,
    WordNetError,
};

fn read(dir: &Path, file: &str) -> Result<String> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(WordNetError::Missing {
            file: file.to_string(),
            dir: dir.display().to_string(),
        });
    }
    let bytes = std::fs::read(&path).map_err(|source| WordNetError::Io {
        file: file.to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| {
        let line = e.as_bytes()[..e.utf8_error().valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count()
            + 1;
        corrupt(file, line, "invalid UTF-8")
    })
}

fn corrupt(file: &str, line: usize, message: impl Into<String>) -> WordNetError {
    WordNetError::Corrupt {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

/// Lines with their byte offsets and 1-based numbers. License header lines
/// (leading two spaces) are yielded too; callers skip them.
fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').enumerate().map(move |(i, raw)| {
        let start = offset;
        offset += raw.len();
        (i + 1, start, raw.trim_end_matches(['\n', '\r']))
    })
}

fn is_header(line: &str) -> bool {
    line.starts_with("  ")
}

fn header_version(text: &str) -> Option<String> {
    let re = Regex::new(r"WordNet (\d+(?:\.\d+)*) Copyright").expect("static regex");
    text.lines()
        .take_while(|l| is_header(l))
        .find_map(|l| re.captures(l).map(|c| c[1].to_string()))
}

fn parse_lexnames(text: &str) -> Result<Vec<String>> {
    let mut names: Vec<Option<String>> = Vec::new();
    for (line_no, _, line) in lines_with_offsets(text) {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(num), Some(name)) = (fields.next(), fields.next()) else {
            return Err(corrupt("lexnames", line_no, "expected `number name pos`"));
        };
        let num: usize = num
            .parse()
            .map_err(|_| corrupt("lexnames", line_no, format!("bad file number `{num}`")))?;
        if names.len() <= num {
            names.resize(num + 1, None);
        }
        names[num] = Some(name.to_string());
    }
    if names.is_empty() {
        return Err(corrupt("lexnames", 0, "no lexicographer files listed"));
    }
    names
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.ok_or_else(|| corrupt("lexnames", 0, format!("file number {i} missing"))))
        .collect()
}

type IndexMap = HashMap<String, Vec<u32>>;

fn parse_index(file: &str, text: &str) -> Result<(IndexMap, Vec<(u32, usize)>)> {
    let mut index = HashMap::new();
    let mut refs = Vec::new();
    for (line_no, _, line) in lines_with_offsets(text) {
        if is_header(line) || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| corrupt(file, line_no, msg);
        if fields.len() < 6 {
            return Err(bad("too few fields"));
        }
        let synset_cnt: usize = fields[2].parse().map_err(|_| bad("bad synset_cnt"))?;
        let p_cnt: usize = fields[3].parse().map_err(|_| bad("bad p_cnt"))?;
        let offsets_at = 4 + p_cnt + 2;
        if fields.len() != offsets_at + synset_cnt {
            return Err(bad("field count does not match synset_cnt"));
        }
        let offsets = fields[offsets_at..]
            .iter()
            .map(|f| f.parse::<u32>().map_err(|_| bad("bad synset offset")))
            .collect::<Result<Vec<_>>>()?;
        refs.extend(offsets.iter().map(|&o| (o, line_no)));
        index.insert(fields[0].to_lowercase(), offsets);
    }
    Ok((index, refs))
}

fn strip_adj_marker(word: &str) -> &str {
    match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    }
}

#[derive(Debug)]
struct DataFile {
    records: Vec<(SynsetRef, SynsetRecord)>,
    lines: usize,
}

fn parse_data(file: &str, pos: Pos, text: &str, lexfile_count: usize) -> Result<DataFile> {
    if !text.is_empty() && !text.ends_with('\n') {
        let lines = text.lines().count();
        return Err(corrupt(file, lines, "file ends mid-line (truncated?)"));
    }
    let mut records = Vec::new();
    let mut lines = 0;
    for (line_no, byte_offset, line) in lines_with_offsets(text) {
        lines = line_no;
        if is_header(line) || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| corrupt(file, line_no, msg);
        let (head, gloss) = line
            .split_once(" | ")
            .ok_or_else(|| bad("missing gloss separator (truncated?)".into()))?;
        let fields: Vec<&str> = head.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(bad("too few fields".into()));
        }
        let offset: u32 = fields[0]
            .parse()
            .map_err(|_| bad(format!("bad offset `{}`", fields[0])))?;
        if offset as usize != byte_offset {
            return Err(bad(format!(
                "synset offset {offset} does not match byte position {byte_offset}"
            )));
        }
        let lexfile: u8 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad lex_filenum `{}`", fields[1])))?;
        if lexfile as usize >= lexfile_count {
            return Err(bad(format!("lex_filenum {lexfile} not in lexnames")));
        }
        let ss_type = fields[2];
        let satellite = ss_type == "s";
        let w_cnt = usize::from_str_radix(fields[3], 16)
            .map_err(|_| bad(format!("bad w_cnt `{}`", fields[3])))?;
        let mut at = 4;
        let mut lemmas = Vec::with_capacity(w_cnt);
        for _ in 0..w_cnt {
            let word = fields
                .get(at)
                .ok_or_else(|| bad("word list truncated".into()))?;
            lemmas.push(strip_adj_marker(word).replace('_', " "));
            at += 2;
        }
        if lemmas.is_empty() {
            return Err(bad("synset without lemmas".into()));
        }
        let p_cnt: usize = fields
            .get(at)
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| bad("bad p_cnt".into()))?;
        at += 1;
        let mut pointers = Vec::with_capacity(p_cnt);
        for _ in 0..p_cnt {
            let chunk = fields
                .get(at..at + 4)
                .ok_or_else(|| bad("pointer list truncated".into()))?;
            let target_pos = chunk[2]
                .chars()
                .next()
                .and_then(Pos::from_letter)
                .ok_or_else(|| bad(format!("bad pointer pos `{}`", chunk[2])))?;
            let target_offset: u32 = chunk[1]
                .parse()
                .map_err(|_| bad(format!("bad pointer offset `{}`", chunk[1])))?;
            pointers.push(Pointer {
                kind: PointerKind::from_symbol(chunk[0]),
                target: SynsetRef::new(target_pos, target_offset),
            });
            at += 4;
        }
        let gloss = gloss.trim_end().to_string();
        if gloss.is_empty() {
            return Err(bad("empty gloss".into()));
        }
        records.push((
            SynsetRef::new(pos, offset),
            SynsetRecord {
                lemmas,
                gloss,
                lexfile,
                satellite,
                pointers,
            },
        ));
    }
    Ok(DataFile { records, lines })
}

fn parse_exceptions(text: &str) -> HashMap<String, Vec<String>> {
    let mut map: HashMap<String, Vec<String>> = HashMap::new();
    for line in text.lines() {
        let mut fields = line.split_whitespace();
        if let Some(inflected) = fields.next() {
            map.entry(inflected.to_lowercase())
                .or_default()
                .extend(fields.map(str::to_lowercase));
        }
    }
    map
}

pub(super) fn load(dir: &Path, options: &LoadOptions) -> Result<KnowledgeBase> {
    if !dir.is_dir() {
        return Err(WordNetError::Missing {
            file: "index.noun".into(),
            dir: dir.display().to_string(),
        });
    }
    let lexnames = parse_lexnames(&read(dir, "lexnames")?)?;

    let per_pos: Vec<_> = Pos::ALL
        .par_iter()
        .map(|&pos| -> Result<_> {
            let index_file = format!("index.{}", pos.file_suffix());
            let data_file = format!("data.{}", pos.file_suffix());
            let data_text = read(dir, &data_file)?;
            let version = header_version(&data_text);
            if let (Some(required), Some(found)) = (&options.require_version, &version) {
                if required != found {
                    return Err(WordNetError::Version {
                        file: data_file,
                        found: found.clone(),
                        expected: required.clone(),
                    });
                }
            }
            let index_text = read(dir, &index_file)?;
            let (index, refs) = parse_index(&index_file, &index_text)?;
            let data = parse_data(&data_file, pos, &data_text, lexnames.len())?;
            let exc_path = dir.join(format!("{}.exc", pos.file_suffix()));
            let exceptions = if exc_path.is_file() {
                parse_exceptions(&read(dir, &format!("{}.exc", pos.file_suffix()))?)
            } else {
                HashMap::new()
            };
            Ok((pos, index, refs, data, exceptions, version))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut index: [IndexMap; 4] = Default::default();
    let mut exceptions: [HashMap<String, Vec<String>>; 4] = Default::default();
    let mut synsets = HashMap::new();
    let mut data_lines = [0usize; 4];
    let mut version = None;
    let mut index_refs = Vec::new();
    for (pos, idx, refs, data, exc, ver) in per_pos {
        index[pos.index()] = idx;
        exceptions[pos.index()] = exc;
        data_lines[pos.index()] = data.lines;
        synsets.extend(data.records);
        index_refs.push((pos, refs));
        version = version.or(ver);
    }

    for (pos, refs) in &index_refs {
        for &(offset, index_line) in refs {
            let r = SynsetRef::new(*pos, offset);
            if !synsets.contains_key(&r) {
                return Err(corrupt(
                    &format!("data.{}", pos.file_suffix()),
                    data_lines[pos.index()],
                    format!(
                        "synset {r} referenced by index.{}:{index_line} is missing (truncated?)",
                        pos.file_suffix()
                    ),
                ));
            }
        }
    }
    let mut dangling = synsets
        .iter()
        .flat_map(|(from, rec)| rec.pointers.iter().map(move |p| (*from, p.target)))
        .filter(|(_, to)| !synsets.contains_key(to))
        .collect::<Vec<_>>();
    if let Some((from, to)) = dangling.pop() {
        return Err(corrupt(
            &format!("data.{}", to.pos.file_suffix()),
            data_lines[to.pos.index()],
            format!("synset {to} referenced from {from} is missing (truncated?)"),
        ));
    }

    Ok(KnowledgeBase::from_parts(
        lexnames, index, synsets, exceptions, version,
    ))
}
