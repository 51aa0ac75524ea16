//! Bundled data files and the small line formats they are written in.
//!
//! Three formats are used:
//!
//! * word lists: one entry per line;
//! * the synonym lexicon: `phrase<TAB>slot[value]` per line;
//! * sectioned key/value files: `[section]` headers followed by
//!   `key = a | b | c` lines.
//!
//! In all of them blank lines and lines starting with `#` are ignored.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::corpus::canonical_slot_name;

pub const ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");
pub const PRONOUNS: &str = include_str!("../data/pronouns.txt");
pub const CUISINES: &str = include_str!("../data/cuisines.txt");
pub const SYNONYMS: &str = include_str!("../data/synonyms.tsv");
pub const RULES: &str = include_str!("../data/rules.txt");
pub const DISCOURSE_CUES: &str = include_str!("../data/discourse_cues.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn word_list(text: &str) -> Vec<String> {
    content_lines(text).map(|(_, l)| l.to_string()).collect()
}

/// One `phrase -> slot[value]` association.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynonymLine {
    pub phrase: String,
    pub slot: String,
    pub value: String,
}

pub fn parse_synonym_lines(text: &str) -> Result<Vec<SynonymLine>, LexiconError> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let err = |message: &str| LexiconError::Syntax { line, message: message.to_string() };
        let (phrase, target) = l.split_once('\t').ok_or_else(|| err("expected `phrase<TAB>slot[value]`"))?;
        let target = target.trim();
        let open = target.find('[').ok_or_else(|| err("target lacks `[`"))?;
        if !target.ends_with(']') {
            return Err(err("target lacks closing `]`"));
        }
        let slot = canonical_slot_name(&target[..open]);
        let value = target[open + 1..target.len() - 1].trim();
        if phrase.trim().is_empty() || slot.is_empty() || value.is_empty() {
            return Err(err("empty phrase, slot or value"));
        }
        out.push(SynonymLine { phrase: phrase.trim().to_string(), slot, value: value.to_string() });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<Entry>,
}

impl Section {
    pub fn get(&self, key: &str) -> Option<&[String]> {
        self.entries.iter().find(|e| e.key == key).map(|e| e.values.as_slice())
    }
}

pub fn parse_sections(text: &str) -> Result<Vec<Section>, LexiconError> {
    let mut sections: Vec<Section> = Vec::new();
    for (line, l) in content_lines(text) {
        if let Some(name) = l.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or(LexiconError::Syntax { line, message: "unterminated section header".into() })?;
            sections.push(Section { name: name.trim().to_string(), entries: Vec::new() });
            continue;
        }
        let (key, rest) = l
            .split_once('=')
            .ok_or(LexiconError::Syntax { line, message: "expected `key = value`".into() })?;
        let section = sections
            .last_mut()
            .ok_or(LexiconError::Syntax { line, message: "entry before any [section]".into() })?;
        let values = rest.split('|').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
        section.entries.push(Entry { line, key: key.trim().to_string(), values });
    }
    Ok(sections)
}
