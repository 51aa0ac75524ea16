//! Delexicalization: verbatim slot values are swapped for placeholder tokens
//! that carry just enough of the value's form (initial vowel, cuisine, plural)
//! for the generator to choose articles and head nouns around them.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, Domain, MeaningRepresentation, Sample};
use crate::lexicon;

pub const PLACEHOLDER_PREFIX: &str = "slot_";

/// Values that never occur verbatim in text and are left alone.
const SENTINEL_VALUES: [&str; 3] = ["dont_care", "none", "dontcare"];

const RESERVED_PREFIXES: [&str; 4] = ["vow_", "con_", "pl_", "cuisine_"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DelexError {
    #[error("slot `{0}` is not delexicalized by this policy")]
    NotDelexicalizable(String),
    #[error("slots both delexicalized and excluded: {0:?}")]
    PolicyOverlap(Vec<String>),
    #[error("slot name `{0}` cannot be encoded in a placeholder")]
    InvalidSlotName(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlaceholderToken {
    pub slot: String,
    /// `Some(true)` for `_vow`, `Some(false)` for `_con`, `None` when the slot
    /// carries no article feature.
    pub vowel: Option<bool>,
    pub cuisine: bool,
    pub plural: bool,
}

impl PlaceholderToken {
    pub fn plain(slot: impl Into<String>) -> Self {
        Self { slot: slot.into(), vowel: None, cuisine: false, plural: false }
    }

    /// `slot[_vow|_con][_pl][_cuisine]_<slot>`
    pub fn surface(&self) -> String {
        let mut s = String::from("slot");
        match self.vowel {
            Some(true) => s.push_str("_vow"),
            Some(false) => s.push_str("_con"),
            None => {}
        }
        if self.plural {
            s.push_str("_pl");
        }
        if self.cuisine {
            s.push_str("_cuisine");
        }
        s.push('_');
        s.push_str(&self.slot);
        s
    }

    pub fn parse(surface: &str) -> Option<Self> {
        let mut rest = surface.strip_prefix(PLACEHOLDER_PREFIX)?;
        let mut vowel = None;
        if let Some(r) = rest.strip_prefix("vow_") {
            vowel = Some(true);
            rest = r;
        } else if let Some(r) = rest.strip_prefix("con_") {
            vowel = Some(false);
            rest = r;
        }
        let plural = match rest.strip_prefix("pl_") {
            Some(r) => {
                rest = r;
                true
            }
            None => false,
        };
        let cuisine = match rest.strip_prefix("cuisine_") {
            Some(r) => {
                rest = r;
                true
            }
            None => false,
        };
        if !valid_slot_name(rest) {
            return None;
        }
        Some(Self { slot: rest.to_string(), vowel, cuisine, plural })
    }
}

fn valid_slot_name(slot: &str) -> bool {
    !slot.is_empty()
        && slot.chars().all(|c| c.is_alphanumeric() || c == '_')
        && !RESERVED_PREFIXES.iter().any(|p| slot.starts_with(p))
}

fn is_sentinel(value: &str) -> bool {
    let v = value.trim();
    v.is_empty() || SENTINEL_VALUES.iter().any(|s| v.eq_ignore_ascii_case(s))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelexPolicy {
    pub delex_slots: BTreeSet<String>,
    pub excluded_slots: BTreeSet<String>,
    /// Lowercased cuisine values.
    pub cuisine_lexicon: BTreeSet<String>,
    /// Slots whose placeholders carry the vowel/consonant and cuisine features.
    pub article_slots: BTreeSet<String>,
    /// Slots whose placeholders carry the plural feature.
    pub plural_slots: BTreeSet<String>,
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl DelexPolicy {
    pub fn new(
        delex_slots: BTreeSet<String>,
        excluded_slots: BTreeSet<String>,
        cuisine_lexicon: impl IntoIterator<Item = String>,
    ) -> Result<Self, DelexError> {
        let overlap: Vec<String> = delex_slots.intersection(&excluded_slots).cloned().collect();
        if !overlap.is_empty() {
            return Err(DelexError::PolicyOverlap(overlap));
        }
        if let Some(bad) = delex_slots.iter().find(|s| !valid_slot_name(s)) {
            return Err(DelexError::InvalidSlotName(bad.clone()));
        }
        Ok(Self {
            delex_slots,
            excluded_slots,
            cuisine_lexicon: cuisine_lexicon.into_iter().map(|c| c.trim().to_lowercase()).collect(),
            article_slots: BTreeSet::new(),
            plural_slots: BTreeSet::new(),
        })
    }

    pub fn with_article_slots(mut self, slots: &[&str]) -> Self {
        self.article_slots = set(slots);
        self
    }

    pub fn with_plural_slots(mut self, slots: &[&str]) -> Self {
        self.plural_slots = set(slots);
        self
    }

    /// Adds `slot` to the delexicalized set, removing it from the excluded one.
    pub fn delexicalizing(mut self, slot: &str) -> Self {
        self.excluded_slots.remove(slot);
        self.delex_slots.insert(slot.to_string());
        self
    }

    /// Defaults per domain. E2E delexicalizes `name` and `near` only; the
    /// TV/Laptop defaults can be widened with [`DelexPolicy::scan_verbatim`].
    pub fn default_for(domain: Domain) -> Self {
        let cuisines = lexicon::word_list(lexicon::CUISINES);
        match domain {
            Domain::E2e | Domain::Synthetic => Self::new(
                set(&["name", "near"]),
                set(&["pricerange", "area", "customer_rating", "familyfriendly", "eattype"]),
                cuisines,
            )
            .expect("static policy")
            .with_article_slots(&["food"]),
            Domain::Tv | Domain::Laptop => Self::new(
                set(&["name", "screensize", "processor", "price", "family"]),
                set(&["pricerange", "screensizerange", "batteryrating", "drive", "weightrange"]),
                cuisines,
            )
            .expect("static policy")
            .with_article_slots(&["accessories"])
            .with_plural_slots(&["accessories"]),
        }
    }

    /// Slots whose (non-sentinel) values occur verbatim in at least
    /// `threshold` of the references of samples carrying them.
    pub fn scan_verbatim(train: &Dataset, threshold: f64) -> BTreeSet<String> {
        let mut counts: alloc::collections::BTreeMap<&str, (usize, usize)> = Default::default();
        for s in &train.samples {
            for sv in &s.mr.slots {
                if is_sentinel(&sv.value) {
                    continue;
                }
                let e = counts.entry(sv.slot.as_str()).or_insert((0, 0));
                e.1 += 1;
                if !find_value(&s.reference, &sv.value).is_empty() {
                    e.0 += 1;
                }
            }
        }
        counts
            .into_iter()
            .filter(|(_, (hit, n))| *n > 0 && (*hit as f64) / (*n as f64) >= threshold)
            .map(|(s, _)| s.to_string())
            .collect()
    }

    /// Extends the delexicalized set with every scanned slot that is not
    /// explicitly excluded.
    pub fn with_scanned(mut self, train: &Dataset, threshold: f64) -> Self {
        for slot in Self::scan_verbatim(train, threshold) {
            if !self.excluded_slots.contains(&slot) && valid_slot_name(&slot) {
                self.delex_slots.insert(slot);
            }
        }
        self
    }

    pub fn is_delexicalized(&self, slot: &str) -> bool {
        self.delex_slots.contains(slot)
    }
}

pub fn placeholder_for(slot: &str, value: &str, policy: &DelexPolicy) -> Result<PlaceholderToken, DelexError> {
    if !policy.delex_slots.contains(slot) {
        return Err(DelexError::NotDelexicalizable(slot.to_string()));
    }
    let mut token = PlaceholderToken::plain(slot);
    if policy.article_slots.contains(slot) {
        token.vowel = value
            .chars()
            .find(|c| c.is_alphabetic())
            .map(|c| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'));
        token.cuisine = policy.cuisine_lexicon.contains(&value.trim().to_lowercase());
    }
    if policy.plural_slots.contains(slot) {
        token.plural = value
            .split_whitespace()
            .last()
            .map(|w| {
                let w = w.to_lowercase();
                w.ends_with('s') && !w.ends_with("ss")
            })
            .unwrap_or(false);
    }
    Ok(token)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub slot: String,
    pub value: String,
    pub placeholder: String,
    /// Byte span in the original utterance; `None` when the value was not
    /// found there.
    pub span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelexSample {
    pub id: String,
    pub delex_mr: MeaningRepresentation,
    pub delex_utterance: String,
    pub substitutions: Vec<Substitution>,
}

impl DelexSample {
    pub fn unsubstituted(&self) -> impl Iterator<Item = &Substitution> {
        self.substitutions.iter().filter(|s| s.span.is_none())
    }

    pub fn into_sample(self) -> Sample {
        Sample::new(self.id, self.delex_mr, self.delex_utterance)
    }
}

/// Delexicalizes every sample, keeping domain and split.
pub fn delexicalize_dataset(ds: &Dataset, policy: &DelexPolicy) -> Dataset {
    Dataset {
        samples: ds.samples.iter().map(|s| delexicalize(s, policy).into_sample()).collect(),
        domain: ds.domain,
        split: ds.split,
    }
}

/// Case-insensitive char comparison; returns the end byte of the match.
fn match_ci(hay: &str, start: usize, needle: &str) -> Option<usize> {
    let mut h = hay[start..].char_indices();
    for nc in needle.chars() {
        let (_, hc) = h.next()?;
        if hc != nc && !hc.to_lowercase().eq(nc.to_lowercase()) {
            return None;
        }
    }
    Some(h.next().map(|(i, _)| start + i).unwrap_or(hay.len()))
}

/// All word-bounded, case-insensitive occurrences of `value` in `text`.
pub(crate) fn find_value(text: &str, value: &str) -> Vec<(usize, usize)> {
    let value = value.trim();
    let mut out = Vec::new();
    if value.is_empty() {
        return out;
    }
    let mut prev: Option<char> = None;
    for (i, c) in text.char_indices() {
        let bounded_left = prev.map_or(true, |p| !p.is_alphanumeric());
        prev = Some(c);
        if !bounded_left {
            continue;
        }
        if let Some(end) = match_ci(text, i, value) {
            let bounded_right = text[end..].chars().next().map_or(true, |n| !n.is_alphanumeric());
            if bounded_right {
                out.push((i, end));
            }
        }
    }
    out
}

/// Placeholder version of an MR: every delexicalized slot with a real value
/// has its value replaced by the placeholder surface.
pub fn delexicalize_mr(mr: &MeaningRepresentation, policy: &DelexPolicy) -> MeaningRepresentation {
    let mut out = mr.clone();
    for sv in &mut out.slots {
        if policy.is_delexicalized(&sv.slot) && !is_sentinel(&sv.value) {
            if let Ok(p) = placeholder_for(&sv.slot, &sv.value, policy) {
                sv.value = p.surface();
            }
        }
    }
    out
}

pub fn delexicalize(sample: &Sample, policy: &DelexPolicy) -> DelexSample {
    let text = sample.reference.as_str();
    struct Hit {
        slot_idx: usize,
        start: usize,
        end: usize,
    }
    let mut hits = Vec::new();
    let mut targets: Vec<(usize, String)> = Vec::new();
    for (idx, sv) in sample.mr.slots.iter().enumerate() {
        if !policy.is_delexicalized(&sv.slot) || is_sentinel(&sv.value) {
            continue;
        }
        let Ok(p) = placeholder_for(&sv.slot, &sv.value, policy) else { continue };
        targets.push((idx, p.surface()));
        for (start, end) in find_value(text, &sv.value) {
            hits.push(Hit { slot_idx: idx, start, end });
        }
    }
    // longest first, then leftmost, then MR order
    hits.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(a.slot_idx.cmp(&b.slot_idx))
    });
    let mut chosen: Vec<&Hit> = Vec::new();
    for h in &hits {
        if chosen.iter().all(|c| h.end <= c.start || h.start >= c.end) {
            chosen.push(h);
        }
    }
    chosen.sort_by_key(|h| h.start);

    let surface_of = |idx: usize| targets.iter().find(|(i, _)| *i == idx).map(|(_, s)| s.clone()).unwrap();
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    let mut substitutions = Vec::new();
    for h in &chosen {
        out.push_str(&text[cursor..h.start]);
        let surface = surface_of(h.slot_idx);
        out.push_str(&surface);
        cursor = h.end;
        let sv = &sample.mr.slots[h.slot_idx];
        substitutions.push(Substitution {
            slot: sv.slot.clone(),
            value: sv.value.clone(),
            placeholder: surface,
            span: Some((h.start, h.end)),
        });
    }
    out.push_str(&text[cursor..]);
    for (idx, surface) in &targets {
        if !chosen.iter().any(|h| h.slot_idx == *idx) {
            let sv = &sample.mr.slots[*idx];
            substitutions.push(Substitution {
                slot: sv.slot.clone(),
                value: sv.value.clone(),
                placeholder: surface.clone(),
                span: None,
            });
        }
    }

    DelexSample {
        id: sample.id.clone(),
        delex_mr: delexicalize_mr(&sample.mr, policy),
        delex_utterance: out,
        substitutions,
    }
}

/// A placeholder occurrence in running text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderSpan {
    pub start: usize,
    pub end: usize,
    pub token: PlaceholderToken,
}

/// Finds word-bounded placeholder tokens in `text`.
pub fn find_placeholders(text: &str) -> Vec<PlaceholderSpan> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut search = 0;
    while let Some(rel) = text[search..].find(PLACEHOLDER_PREFIX) {
        let start = search + rel;
        let left_ok = text[..start].chars().next_back().map_or(true, |c| !(c.is_alphanumeric() || c == '_'));
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        let right_ok = text[end..].chars().next().map_or(true, |c| !c.is_alphanumeric());
        if left_ok && right_ok {
            if let Some(token) = PlaceholderToken::parse(&text[start..end]) {
                out.push(PlaceholderSpan { start, end, token });
            }
        }
        search = end.max(start + PLACEHOLDER_PREFIX.len());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relexicalized {
    pub text: String,
    /// Placeholders whose slot is missing from the MR, left in place.
    pub orphans: Vec<String>,
}

/// Replaces every placeholder whose slot is present in `mr` with the MR value.
pub fn relexicalize(text: &str, mr: &MeaningRepresentation) -> Relexicalized {
    let mut out = String::with_capacity(text.len());
    let mut orphans = Vec::new();
    let mut cursor = 0;
    for ph in find_placeholders(text) {
        out.push_str(&text[cursor..ph.start]);
        match mr.get(&ph.token.slot) {
            Some(value) if !value.starts_with(PLACEHOLDER_PREFIX) => out.push_str(value),
            _ => {
                out.push_str(&text[ph.start..ph.end]);
                orphans.push(text[ph.start..ph.end].to_string());
            }
        }
        cursor = ph.end;
    }
    out.push_str(&text[cursor..]);
    Relexicalized { text: out, orphans }
}

/// Drops any placeholder token that survived relexicalization and tidies the
/// whitespace left behind.
pub fn strip_placeholders(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for ph in find_placeholders(text) {
        out.push_str(&text[cursor..ph.start]);
        cursor = ph.end;
    }
    out.push_str(&text[cursor..]);
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
