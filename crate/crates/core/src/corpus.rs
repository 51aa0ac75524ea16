//! Meaning representations, reference utterances and the text utilities the
//! rest of the pipeline is built on.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("malformed MR: {0}")]
    MalformedMr(String),
    #[error("duplicate slot `{0}`")]
    DuplicateSlot(String),
    #[error("empty input")]
    EmptyInput,
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("sample {id}: reference utterance is empty")]
    EmptyReference { id: String },
}

/// Surface syntax an MR was written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    /// `name[The Golden Curry], food[Japanese], ...`, always an `inform` act.
    E2e,
    /// `inform(name='x';type=television)`, as used by the TV and Laptop sets.
    Rnnlg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    E2e,
    Tv,
    Laptop,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// Lowercases a slot name and turns internal whitespace into underscores.
pub fn canonical_slot_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for ch in raw.trim().chars() {
        if ch.is_whitespace() {
            pending_sep = true;
            continue;
        }
        if pending_sep {
            out.push('_');
            pending_sep = false;
        }
        out.extend(ch.to_lowercase());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SlotValue {
    pub slot: String,
    pub value: String,
}

impl SlotValue {
    pub fn new(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self { slot: slot.into(), value: value.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeaningRepresentation {
    pub da_type: String,
    pub slots: Vec<SlotValue>,
    pub dialect: Dialect,
}

impl MeaningRepresentation {
    pub fn new(da_type: impl Into<String>, slots: Vec<SlotValue>, dialect: Dialect) -> Self {
        Self { da_type: da_type.into(), slots, dialect }
    }

    pub fn inform(slots: Vec<SlotValue>) -> Self {
        Self::new("inform", slots, Dialect::E2e)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.slots.iter().find(|sv| sv.slot == slot).map(|sv| sv.value.as_str())
    }

    pub fn has_slot(&self, slot: &str) -> bool {
        self.slots.iter().any(|sv| sv.slot == slot)
    }

    /// Writes the MR back in its own dialect. Inverse of [`parse_mr`] on
    /// canonical input.
    pub fn serialize(&self) -> String {
        match self.dialect {
            Dialect::E2e => {
                let parts: Vec<String> = self
                    .slots
                    .iter()
                    .map(|sv| alloc::format!("{}[{}]", sv.slot, sv.value))
                    .collect();
                parts.join(", ")
            }
            Dialect::Rnnlg => {
                let parts: Vec<String> = self
                    .slots
                    .iter()
                    .map(|sv| {
                        if sv.value.is_empty() {
                            sv.slot.clone()
                        } else if needs_quotes(&sv.value) {
                            alloc::format!("{}='{}'", sv.slot, sv.value)
                        } else {
                            alloc::format!("{}={}", sv.slot, sv.value)
                        }
                    })
                    .collect();
                alloc::format!("{}({})", self.da_type, parts.join(";"))
            }
        }
    }

    /// Key identifying the MR for uniqueness counts: DA plus ordered slots.
    pub fn key(&self) -> String {
        alloc::format!("{}|{}", self.da_type, self.serialize())
    }

    /// Token sequence fed to the encoder: `da slot value-tokens slot ...`.
    pub fn linearize(&self) -> Vec<String> {
        let mut out = Vec::new();
        out.push(self.da_type.to_lowercase());
        for sv in &self.slots {
            out.push(sv.slot.clone());
            out.extend(tokenize(&sv.value).tokens);
        }
        out
    }
}

fn needs_quotes(value: &str) -> bool {
    value.chars().any(|c| c.is_whitespace() || matches!(c, ';' | '=' | '(' | ')' | '\'' | '"'))
}

/// Parses an MR written in `dialect`.
pub fn parse_mr(text: &str, dialect: Dialect) -> Result<MeaningRepresentation, CorpusError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    match dialect {
        Dialect::E2e => parse_e2e(text),
        Dialect::Rnnlg => parse_rnnlg(text),
    }
}

fn parse_e2e(text: &str) -> Result<MeaningRepresentation, CorpusError> {
    let mut slots: Vec<SlotValue> = Vec::new();
    let mut chars = text.char_indices().peekable();
    loop {
        while let Some(&(_, c)) = chars.peek() {
            if c == ',' || c.is_whitespace() {
                chars.next();
            } else {
                break;
            }
        }
        let Some(&(name_start, _)) = chars.peek() else { break };
        let mut name_end = None;
        for (i, c) in chars.by_ref() {
            match c {
                '[' => {
                    name_end = Some(i);
                    break;
                }
                ']' | ',' => {
                    return Err(CorpusError::MalformedMr(alloc::format!(
                        "unexpected `{c}` at byte {i}"
                    )))
                }
                _ => {}
            }
        }
        let name_end = name_end.ok_or_else(|| {
            CorpusError::MalformedMr(alloc::format!("slot at byte {name_start} has no `[`"))
        })?;
        let slot = canonical_slot_name(&text[name_start..name_end]);
        if slot.is_empty() {
            return Err(CorpusError::MalformedMr(alloc::format!("empty slot name at byte {name_start}")));
        }
        let value_start = name_end + 1;
        let mut depth = 1usize;
        let mut value_end = None;
        for (i, c) in chars.by_ref() {
            match c {
                '[' => depth += 1,
                ']' => {
                    depth -= 1;
                    if depth == 0 {
                        value_end = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let value_end = value_end.ok_or_else(|| {
            CorpusError::MalformedMr(alloc::format!("unbalanced `[` for slot `{slot}`"))
        })?;
        let value = text[value_start..value_end].trim().to_string();
        if slots.iter().any(|sv| sv.slot == slot) {
            return Err(CorpusError::DuplicateSlot(slot));
        }
        slots.push(SlotValue { slot, value });
        // Only a separator may follow a closing bracket.
        if let Some(&(i, c)) = chars.peek() {
            if c != ',' && !c.is_whitespace() {
                return Err(CorpusError::MalformedMr(alloc::format!("unexpected `{c}` at byte {i}")));
            }
        }
    }
    if slots.is_empty() {
        return Err(CorpusError::MalformedMr("no slots".into()));
    }
    Ok(MeaningRepresentation::new("inform", slots, Dialect::E2e))
}

fn parse_rnnlg(text: &str) -> Result<MeaningRepresentation, CorpusError> {
    let open = text
        .find('(')
        .ok_or_else(|| CorpusError::MalformedMr("missing `(`".into()))?;
    if !text.ends_with(')') {
        return Err(CorpusError::MalformedMr("missing closing `)`".into()));
    }
    let da_type = text[..open].trim();
    if da_type.is_empty() {
        return Err(CorpusError::MalformedMr("empty dialogue act".into()));
    }
    let inner = &text[open + 1..text.len() - 1];

    let mut items: Vec<&str> = Vec::new();
    let mut quote: Option<char> = None;
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), _) => {}
            (None, '\'' | '"') => quote = Some(c),
            (None, '(') => depth += 1,
            (None, ')') => {
                depth -= 1;
                if depth < 0 {
                    return Err(CorpusError::MalformedMr("unbalanced `)`".into()));
                }
            }
            (None, ';') if depth == 0 => {
                items.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if quote.is_some() {
        return Err(CorpusError::MalformedMr("unterminated quote".into()));
    }
    if depth != 0 {
        return Err(CorpusError::MalformedMr("unbalanced `(`".into()));
    }
    items.push(&inner[start..]);

    let mut slots = Vec::new();
    for item in items {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (raw_slot, raw_value) = match item.find('=') {
            Some(eq) => (&item[..eq], item[eq + 1..].trim()),
            None => (item, ""),
        };
        let slot = canonical_slot_name(raw_slot);
        if slot.is_empty() {
            return Err(CorpusError::MalformedMr(alloc::format!("empty slot name in `{item}`")));
        }
        let value = strip_quotes(raw_value);
        if has_unbalanced_brackets(value) {
            return Err(CorpusError::MalformedMr(alloc::format!("unbalanced brackets in `{value}`")));
        }
        slots.push(SlotValue { slot, value: value.to_string() });
    }
    Ok(MeaningRepresentation::new(da_type, slots, Dialect::Rnnlg))
}

fn strip_quotes(value: &str) -> &str {
    for q in ['\'', '"'] {
        if value.len() >= 2 && value.starts_with(q) && value.ends_with(q) {
            return &value[1..value.len() - 1];
        }
    }
    value
}

fn has_unbalanced_brackets(value: &str) -> bool {
    let mut square = 0i32;
    let mut round = 0i32;
    for c in value.chars() {
        match c {
            '[' => square += 1,
            ']' => square -= 1,
            '(' => round += 1,
            ')' => round -= 1,
            _ => {}
        }
        if square < 0 || round < 0 {
            return true;
        }
    }
    square != 0 || round != 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub mr: MeaningRepresentation,
    pub reference: String,
    pub id: String,
}

impl Sample {
    pub fn new(id: impl Into<String>, mr: MeaningRepresentation, reference: impl Into<String>) -> Self {
        Self { mr, reference: reference.into(), id: id.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub domain: Domain,
    pub split: Split,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, domain: Domain, split: Split) -> Result<Self, CorpusError> {
        if samples.is_empty() {
            return Err(CorpusError::EmptyDataset);
        }
        if let Some(s) = samples.iter().find(|s| s.reference.trim().is_empty()) {
            return Err(CorpusError::EmptyReference { id: s.id.clone() });
        }
        Ok(Self { samples, domain, split })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    /// Byte spans into the source string, one per token.
    pub offsets: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercasing tokenizer. Words are runs of alphanumerics and `_` that may be
/// joined by internal hyphens or apostrophes; a `.` between digits stays
/// inside the number. Every other non-space character is its own token.
/// Placeholder tokens (`slot_...`) never absorb joiners.
pub fn tokenize(text: &str) -> TokenSequence {
    let mut seq = TokenSequence::default();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |k: usize| if k < chars.len() { chars[k].0 } else { text.len() };
    let mut k = 0;
    while k < chars.len() {
        let (start, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if !is_word_char(c) {
            seq.tokens.push(c.to_lowercase().collect());
            seq.offsets.push((start, end_of(k + 1)));
            k += 1;
            continue;
        }
        let atomic = text[start..].starts_with(crate::delex::PLACEHOLDER_PREFIX);
        let mut j = k + 1;
        loop {
            if j < chars.len() && is_word_char(chars[j].1) {
                j += 1;
                continue;
            }
            if !atomic && j + 1 < chars.len() && is_word_char(chars[j + 1].1) {
                let joiner = chars[j].1;
                let numeric =
                    joiner == '.' && chars[j - 1].1.is_ascii_digit() && chars[j + 1].1.is_ascii_digit();
                if matches!(joiner, '-' | '\'' | '\u{2019}') || numeric {
                    j += 2;
                    continue;
                }
            }
            break;
        }
        let end = end_of(j);
        seq.tokens.push(text[start..end].to_lowercase());
        seq.offsets.push((start, end));
        k = j;
    }
    seq
}

/// Lowercased tokens joined by single spaces.
pub fn normalize(text: &str) -> String {
    tokenize(text).tokens.join(" ")
}

/// Rule-based sentence splitter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceSplitter {
    abbreviations: BTreeSet<String>,
    require_capital: bool,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::new(lexicon::word_list(lexicon::ABBREVIATIONS))
    }
}

impl SentenceSplitter {
    /// `abbreviations` are compared lowercased and without their trailing dot.
    pub fn new(abbreviations: impl IntoIterator<Item = String>) -> Self {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.trim().trim_end_matches('.').to_lowercase())
                .filter(|a| !a.is_empty())
                .collect(),
            require_capital: true,
        }
    }

    /// Also split when the next sentence starts lowercase.
    pub fn case_insensitive(mut self) -> Self {
        self.require_capital = false;
        self
    }

    pub fn split(&self, text: &str) -> Vec<String> {
        let normalized: Vec<&str> = text.split_whitespace().collect();
        let mut sentences = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for (i, word) in normalized.iter().enumerate() {
            current.push(word);
            let Some(next) = normalized.get(i + 1) else { break };
            if self.ends_sentence(word) && self.starts_sentence(next) {
                sentences.push(current.join(" "));
                current.clear();
            }
        }
        if !current.is_empty() {
            sentences.push(current.join(" "));
        }
        sentences
    }

    fn ends_sentence(&self, word: &str) -> bool {
        let core = word.trim_end_matches(['"', '\'', ')', '\u{201d}', '\u{2019}']);
        let Some(last) = core.chars().last() else { return false };
        match last {
            '!' | '?' => true,
            '.' => {
                let stem = core.trim_end_matches('.').trim_start_matches(['(', '"', '\'']);
                !self.abbreviations.contains(&stem.to_lowercase())
            }
            _ => false,
        }
    }

    fn starts_sentence(&self, word: &str) -> bool {
        let first = word.chars().find(|c| c.is_alphanumeric());
        match first {
            Some(c) if self.require_capital => c.is_uppercase(),
            Some(_) => true,
            None => false,
        }
    }
}

/// Splits with the bundled abbreviation list.
pub fn split_sentences(text: &str) -> Vec<String> {
    SentenceSplitter::default().split(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub counts: BTreeMap<Split, usize>,
    pub total: usize,
    pub unique_mr_count: usize,
    pub avg_refs_per_unique_mr: f64,
    /// Over unique MRs.
    pub slot_count_histogram: BTreeMap<usize, f64>,
    /// Over samples.
    pub avg_sentences_by_slot_count: BTreeMap<usize, f64>,
    /// Over samples.
    pub da_distribution: BTreeMap<String, f64>,
    pub slot_type_count: usize,
    pub da_type_count: usize,
}

pub fn compute_stats(dataset: &Dataset) -> DatasetStats {
    compute_stats_many(&[dataset], &SentenceSplitter::default())
}

/// Statistics pooled over several splits of the same corpus.
pub fn compute_stats_many(datasets: &[&Dataset], splitter: &SentenceSplitter) -> DatasetStats {
    let mut counts = BTreeMap::new();
    let mut unique: BTreeMap<String, usize> = BTreeMap::new();
    let mut sentence_sums: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut da_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut slot_types = BTreeSet::new();
    let mut total = 0usize;

    for ds in datasets {
        *counts.entry(ds.split).or_insert(0) += ds.samples.len();
        for s in &ds.samples {
            total += 1;
            unique.entry(s.mr.key()).or_insert(s.mr.slots.len());
            let n_sent = splitter.split(&s.reference).len();
            let e = sentence_sums.entry(s.mr.slots.len()).or_insert((0, 0));
            e.0 += n_sent;
            e.1 += 1;
            *da_counts.entry(s.mr.da_type.clone()).or_insert(0) += 1;
            slot_types.extend(s.mr.slots.iter().map(|sv| sv.slot.clone()));
        }
    }

    let unique_mr_count = unique.len();
    let mut slot_hist: BTreeMap<usize, usize> = BTreeMap::new();
    for n in unique.values() {
        *slot_hist.entry(*n).or_insert(0) += 1;
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };

    DatasetStats {
        counts,
        total,
        unique_mr_count,
        avg_refs_per_unique_mr: ratio(total, unique_mr_count),
        slot_count_histogram: slot_hist.into_iter().map(|(k, v)| (k, ratio(v, unique_mr_count))).collect(),
        avg_sentences_by_slot_count: sentence_sums.into_iter().map(|(k, (s, n))| (k, ratio(s, n))).collect(),
        da_type_count: da_counts.len(),
        da_distribution: da_counts.into_iter().map(|(k, v)| (k, ratio(v, total))).collect(),
        slot_type_count: slot_types.len(),
    }
}
