//! Heuristic slot alignment.
//!
//! A [`Gazetteer`] collects the phrases that realize each slot (or one value
//! of a slot): values seen verbatim in training references, handcrafted rules
//! and a synonym lexicon. [`align_utterance`] scans every sentence of an
//! utterance for those phrases, assigns each MR slot to the sentence holding
//! its best match, and reports the slots it could not find (`N_u`) along with
//! mentions of slots the MR does not contain (`N_o`).
//!
//! Matching is case-insensitive and hyphen-insensitive: tokens are split on
//! internal hyphens before comparison, so "kid-friendly", "kid friendly" and
//! "non-kid-friendly" all expose the phrase `kid friendly`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Dataset, MeaningRepresentation, SentenceSplitter, SlotValue};
use crate::delex::{PlaceholderToken, PLACEHOLDER_PREFIX};
use crate::lexicon::{self, LexiconError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Syntax(#[from] LexiconError),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

/// A token after hyphen splitting, with its byte span in the sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
struct MatchToken {
    text: String,
    start: usize,
    end: usize,
}

fn match_tokens(text: &str) -> Vec<MatchToken> {
    let seq = tokenize(text);
    let mut out = Vec::with_capacity(seq.len());
    for (tok, &(start, end)) in seq.tokens.iter().zip(&seq.offsets) {
        if tok.starts_with(PLACEHOLDER_PREFIX) || !tok.contains('-') {
            out.push(MatchToken { text: tok.clone(), start, end });
            continue;
        }
        // Lowercasing can change byte lengths, so walk the source instead.
        let src = &text[start..end];
        let mut piece_start = 0;
        for (i, c) in src.char_indices().chain(core::iter::once((src.len(), '-'))) {
            if c == '-' {
                if i > piece_start {
                    out.push(MatchToken {
                        text: src[piece_start..i].to_lowercase(),
                        start: start + piece_start,
                        end: start + i,
                    });
                }
                piece_start = i + c.len_utf8();
            }
        }
    }
    out
}

/// Normal form used for phrases and value keys: hyphen-split lowercased tokens
/// joined by single spaces.
pub fn normalize_phrase(text: &str) -> String {
    match_tokens(text).into_iter().map(|t| t.text).collect::<Vec<_>>().join(" ")
}

fn is_sentinel(value: &str) -> bool {
    let v = value.trim().to_lowercase();
    v.is_empty() || v == "dont_care" || v == "dontcare" || v == "none"
}

fn parse_number(tok: &str) -> Option<f64> {
    if tok.is_empty() || !tok.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    tok.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhraseSource {
    Observed,
    Rule,
    Synonym,
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRange {
    /// Normalized MR value.
    pub value: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Matcher {
    /// Phrases realizing one value (`Some`) or a bare mention of the slot.
    Lexemes { value: Option<String>, phrases: Vec<String> },
    /// Yes/no slots: positive phrases flip under negation, negative phrases
    /// always mean "no".
    Boolean { true_values: Vec<String>, false_values: Vec<String>, positive: Vec<String>, negative: Vec<String> },
    /// A currency symbol followed by numbers; ranges say which values they realize.
    Currency { symbols: Vec<String>, ranges: Vec<ValueRange> },
    /// Phrases that never count as over-generation.
    Weak { phrases: Vec<String> },
    /// Disables matching the raw MR value (for short ambiguous values).
    NoLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRule {
    pub slot: String,
    pub matcher: Matcher,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegationConfig {
    pub cues: BTreeSet<String>,
    pub window: usize,
    /// Tokens the backwards scan does not cross.
    pub stops: BTreeSet<String>,
}

impl Default for NegationConfig {
    fn default() -> Self {
        Self {
            cues: ["not", "non", "no", "n't"].iter().map(|s| s.to_string()).collect(),
            window: 3,
            stops: BTreeSet::new(),
        }
    }
}

impl NegationConfig {
    fn negates(&self, tokens: &[MatchToken], at: usize) -> bool {
        let from = at.saturating_sub(self.window);
        for t in tokens[from..at].iter().rev() {
            if self.stops.contains(&t.text) {
                return false;
            }
            if self.cues.contains(&t.text) || t.text.ends_with("n't") {
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<AlignmentRule>,
    pub negation: NegationConfig,
}

impl RuleSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        Self::parse(lexicon::RULES).expect("bundled rule file parses")
    }

    /// Parses the sectioned rule file format (see `data/rules.txt`).
    pub fn parse(text: &str) -> Result<Self, RuleError> {
        let mut set = RuleSet::default();
        for section in lexicon::parse_sections(text)? {
            if section.name == "negation" {
                let mut neg = NegationConfig { cues: BTreeSet::new(), window: 3, stops: BTreeSet::new() };
                for e in &section.entries {
                    match e.key.as_str() {
                        "cues" => neg.cues = e.values.iter().map(|v| v.to_lowercase()).collect(),
                        "stop" => neg.stops = e.values.iter().map(|v| v.to_lowercase()).collect(),
                        "window" => {
                            neg.window = e.values.first().and_then(|v| v.parse().ok()).ok_or(RuleError::Invalid {
                                line: e.line,
                                message: "window must be an integer".into(),
                            })?
                        }
                        other => {
                            return Err(RuleError::Invalid { line: e.line, message: alloc::format!("unknown key `{other}`") })
                        }
                    }
                }
                set.negation = neg;
                continue;
            }
            let slot = crate::corpus::canonical_slot_name(&section.name);
            let mut boolean: Option<(Vec<String>, Vec<String>, Vec<String>, Vec<String>)> = None;
            let mut symbols = Vec::new();
            let mut ranges = Vec::new();
            for e in &section.entries {
                let key = e.key.as_str();
                let rule = |matcher: Matcher, description: String| AlignmentRule { slot: slot.clone(), matcher, description };
                if let Some(value) = key.strip_prefix("value ") {
                    set.rules.push(rule(
                        Matcher::Lexemes { value: Some(normalize_phrase(value)), phrases: e.values.clone() },
                        alloc::format!("lexemes for {slot}[{}]", value.trim()),
                    ));
                } else if let Some(value) = key.strip_prefix("range ") {
                    let spec = e.values.first().ok_or(RuleError::Invalid { line: e.line, message: "empty range".into() })?;
                    let (lo, hi) = spec
                        .split_once(" - ")
                        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                        .ok_or(RuleError::Invalid { line: e.line, message: "range must be `lo - hi`".into() })?;
                    ranges.push(ValueRange { value: normalize_phrase(value), lo, hi });
                } else {
                    let b = || boolean.clone().unwrap_or_default();
                    match key {
                        "literal" => {
                            if e.values.first().map(String::as_str) == Some("off") {
                                set.rules.push(rule(Matcher::NoLiteral, alloc::format!("no raw-value matching for {slot}")));
                            }
                        }
                        "boolean true" => boolean = Some((e.values.clone(), b().1, b().2, b().3)),
                        "boolean false" => boolean = Some((b().0, e.values.clone(), b().2, b().3)),
                        "positive" => boolean = Some((b().0, b().1, e.values.clone(), b().3)),
                        "negative" => boolean = Some((b().0, b().1, b().2, e.values.clone())),
                        "currency" => symbols = e.values.clone(),
                        "mention" => set.rules.push(rule(
                            Matcher::Lexemes { value: None, phrases: e.values.clone() },
                            alloc::format!("generic mentions of {slot}"),
                        )),
                        "weak" => set.rules.push(rule(
                            Matcher::Weak { phrases: e.values.clone() },
                            alloc::format!("phrases exempt from {slot} over-generation"),
                        )),
                        other => {
                            return Err(RuleError::Invalid { line: e.line, message: alloc::format!("unknown key `{other}`") })
                        }
                    }
                }
            }
            if let Some((t, f, pos, neg)) = boolean {
                set.rules.push(AlignmentRule {
                    slot: slot.clone(),
                    matcher: Matcher::Boolean {
                        true_values: t.iter().map(|v| v.to_lowercase()).collect(),
                        false_values: f.iter().map(|v| v.to_lowercase()).collect(),
                        positive: pos,
                        negative: neg,
                    },
                    description: alloc::format!("boolean realizations of {slot}"),
                });
            }
            if !symbols.is_empty() || !ranges.is_empty() {
                set.rules.push(AlignmentRule {
                    slot: slot.clone(),
                    matcher: Matcher::Currency { symbols, ranges },
                    description: alloc::format!("currency amounts for {slot}"),
                });
            }
        }
        Ok(set)
    }
}

/// Flat synonym lexicon: phrase → (slot, value) targets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SynonymLexicon {
    pub entries: BTreeMap<String, BTreeSet<(String, String)>>,
}

impl SynonymLexicon {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bundled() -> Self {
        Self::parse(lexicon::SYNONYMS).expect("bundled synonym lexicon parses")
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lex = Self::default();
        for line in lexicon::parse_synonym_lines(text)? {
            lex.insert(&line.phrase, &line.slot, &line.value);
        }
        Ok(lex)
    }

    pub fn insert(&mut self, phrase: &str, slot: &str, value: &str) {
        self.entries
            .entry(normalize_phrase(phrase))
            .or_default()
            .insert((slot.to_string(), normalize_phrase(value)));
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Target {
    Value(String),
    Polarity(bool),
    /// Boolean positive phrase, polarity decided by negation at match time.
    Positive,
    Mention,
}

#[derive(Debug, Clone, PartialEq)]
struct IndexEntry {
    tokens: Vec<String>,
    slot: String,
    target: Target,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct BooleanSpec {
    true_values: BTreeSet<String>,
    false_values: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gazetteer {
    realizations: BTreeMap<String, BTreeMap<String, PhraseSource>>,
    value_realizations: BTreeMap<(String, String), BTreeMap<String, PhraseSource>>,
    index: BTreeMap<String, Vec<IndexEntry>>,
    weak: BTreeSet<(String, String)>,
    no_literal: BTreeSet<String>,
    booleans: BTreeMap<String, BooleanSpec>,
    currency_symbols: BTreeMap<String, Vec<String>>,
    ranges: BTreeMap<String, Vec<ValueRange>>,
    negation: NegationConfig,
    splitter: SentenceSplitter,
}

impl Gazetteer {
    fn empty(rules: &RuleSet) -> Self {
        Self {
            realizations: BTreeMap::new(),
            value_realizations: BTreeMap::new(),
            index: BTreeMap::new(),
            weak: BTreeSet::new(),
            no_literal: BTreeSet::new(),
            booleans: BTreeMap::new(),
            currency_symbols: BTreeMap::new(),
            ranges: BTreeMap::new(),
            negation: rules.negation.clone(),
            splitter: SentenceSplitter::default(),
        }
    }

    pub fn with_splitter(mut self, splitter: SentenceSplitter) -> Self {
        self.splitter = splitter;
        self
    }

    pub fn splitter(&self) -> &SentenceSplitter {
        &self.splitter
    }

    fn add(&mut self, slot: &str, phrase: &str, target: Target, source: PhraseSource) {
        let norm = normalize_phrase(phrase);
        if norm.is_empty() {
            return;
        }
        let tokens: Vec<String> = norm.split(' ').map(String::from).collect();
        self.realizations.entry(slot.to_string()).or_default().entry(norm.clone()).or_insert(source);
        if let Target::Value(v) = &target {
            self.value_realizations
                .entry((slot.to_string(), v.clone()))
                .or_default()
                .entry(norm.clone())
                .or_insert(source);
        }
        let entry = IndexEntry { tokens, slot: slot.to_string(), target };
        let bucket = self.index.entry(entry.tokens[0].clone()).or_default();
        if !bucket.contains(&entry) {
            bucket.push(entry);
        }
    }

    /// Registers one more value realization.
    pub fn add_value_phrase(&mut self, slot: &str, value: &str, phrase: &str, source: PhraseSource) {
        self.add(slot, phrase, Target::Value(normalize_phrase(value)), source);
    }

    /// All phrases (normalized) known to realize `slot`.
    pub fn phrases_for(&self, slot: &str) -> impl Iterator<Item = (&str, PhraseSource)> {
        self.realizations.get(slot).into_iter().flatten().map(|(p, s)| (p.as_str(), *s))
    }

    pub fn value_phrases(&self, slot: &str, value: &str) -> impl Iterator<Item = &str> {
        self.value_realizations
            .get(&(slot.to_string(), normalize_phrase(value)))
            .into_iter()
            .flatten()
            .map(|(p, _)| p.as_str())
    }

    pub fn slots(&self) -> impl Iterator<Item = &str> {
        self.realizations.keys().map(String::as_str)
    }

    fn literal_enabled(&self, slot: &str) -> bool {
        !self.no_literal.contains(slot) && !self.booleans.contains_key(slot)
    }
}

/// Builds the gazetteer from training data (optional), a synonym lexicon and
/// handcrafted rules.
pub fn build_gazetteer(train: Option<&Dataset>, lexicon: &SynonymLexicon, rules: &RuleSet) -> Gazetteer {
    let mut gaz = Gazetteer::empty(rules);
    for rule in &rules.rules {
        let slot = rule.slot.as_str();
        match &rule.matcher {
            Matcher::Lexemes { value: Some(v), phrases } => {
                for p in phrases {
                    gaz.add(slot, p, Target::Value(v.clone()), PhraseSource::Rule);
                }
            }
            Matcher::Lexemes { value: None, phrases } => {
                for p in phrases {
                    gaz.add(slot, p, Target::Mention, PhraseSource::Rule);
                    gaz.weak.insert((slot.to_string(), normalize_phrase(p)));
                }
            }
            Matcher::Boolean { true_values, false_values, positive, negative } => {
                let spec = gaz.booleans.entry(slot.to_string()).or_default();
                spec.true_values.extend(true_values.iter().cloned());
                spec.false_values.extend(false_values.iter().cloned());
                for p in positive {
                    gaz.add(slot, p, Target::Positive, PhraseSource::Rule);
                }
                for p in negative {
                    gaz.add(slot, p, Target::Polarity(false), PhraseSource::Rule);
                }
            }
            Matcher::Currency { symbols, ranges } => {
                gaz.currency_symbols.entry(slot.to_string()).or_default().extend(symbols.iter().cloned());
                gaz.ranges.entry(slot.to_string()).or_default().extend(ranges.iter().cloned());
            }
            Matcher::Weak { phrases } => {
                for p in phrases {
                    gaz.weak.insert((slot.to_string(), normalize_phrase(p)));
                }
            }
            Matcher::NoLiteral => {
                gaz.no_literal.insert(slot.to_string());
            }
        }
    }
    for (phrase, targets) in &lexicon.entries {
        for (slot, value) in targets {
            gaz.add(slot, phrase, Target::Value(value.clone()), PhraseSource::Synonym);
        }
    }
    if let Some(train) = train {
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for sample in &train.samples {
            let ref_norm = alloc::format!(" {} ", normalize_phrase(&sample.reference));
            for sv in &sample.mr.slots {
                if is_sentinel(&sv.value) || !gaz.literal_enabled(&sv.slot) {
                    continue;
                }
                let v = normalize_phrase(&sv.value);
                if v.is_empty() || seen.contains(&(sv.slot.clone(), v.clone())) {
                    continue;
                }
                if ref_norm.contains(&alloc::format!(" {v} ")) {
                    seen.insert((sv.slot.clone(), v.clone()));
                    gaz.add(&sv.slot, &v, Target::Value(v.clone()), PhraseSource::Observed);
                }
            }
            for sv in &sample.mr.slots {
                let surface = PlaceholderToken::plain(sv.slot.clone()).surface();
                gaz.realizations.entry(sv.slot.clone()).or_default().entry(surface).or_insert(PhraseSource::Placeholder);
            }
        }
    }
    gaz
}

#[derive(Debug, Clone, PartialEq)]
struct Mention {
    slot: String,
    target: MentionTarget,
    /// Token range in the sentence's match tokens.
    tok_start: usize,
    tok_end: usize,
    span: (usize, usize),
    weak: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum MentionTarget {
    Value(String),
    Polarity(bool),
    Amount(Vec<f64>),
    Placeholder,
    Mention,
}

impl Gazetteer {
    fn mentions(&self, tokens: &[MatchToken], mr: &MeaningRepresentation) -> Vec<Mention> {
        let mut out = Vec::new();
        let push = |out: &mut Vec<Mention>, slot: &str, target, s: usize, e: usize, weak: bool| {
            out.push(Mention {
                slot: slot.to_string(),
                target,
                tok_start: s,
                tok_end: e,
                span: (tokens[s].start, tokens[e - 1].end),
                weak,
            })
        };
        let matches_at = |phrase: &[String], at: usize| {
            at + phrase.len() <= tokens.len() && phrase.iter().zip(&tokens[at..]).all(|(p, t)| *p == t.text)
        };
        for (i, tok) in tokens.iter().enumerate() {
            if tok.text.starts_with(PLACEHOLDER_PREFIX) {
                if let Some(ph) = PlaceholderToken::parse(&tok.text) {
                    push(&mut out, &ph.slot, MentionTarget::Placeholder, i, i + 1, false);
                }
                continue;
            }
            if let Some(entries) = self.index.get(&tok.text) {
                for e in entries {
                    if !matches_at(&e.tokens, i) {
                        continue;
                    }
                    let end = i + e.tokens.len();
                    let weak = self.weak.contains(&(e.slot.clone(), e.tokens.join(" ")));
                    let target = match &e.target {
                        Target::Value(v) => MentionTarget::Value(v.clone()),
                        Target::Polarity(p) => MentionTarget::Polarity(*p),
                        Target::Positive => MentionTarget::Polarity(!self.negation.negates(tokens, i)),
                        Target::Mention => MentionTarget::Mention,
                    };
                    push(&mut out, &e.slot, target, i, end, weak);
                }
            }
            for (slot, symbols) in &self.currency_symbols {
                if symbols.iter().any(|s| *s == tok.text) {
                    let nums: Vec<f64> = tokens[i + 1..].iter().map_while(|t| parse_number(&t.text)).collect();
                    if !nums.is_empty() {
                        let n = nums.len();
                        push(&mut out, slot, MentionTarget::Amount(nums), i, i + 1 + n, false);
                    }
                }
            }
        }
        // Raw MR values, for values the gazetteer has never seen.
        for sv in &mr.slots {
            if is_sentinel(&sv.value) || !self.literal_enabled(&sv.slot) {
                continue;
            }
            let v = normalize_phrase(&sv.value);
            let phrase: Vec<String> = v.split(' ').filter(|s| !s.is_empty()).map(String::from).collect();
            if phrase.is_empty() || phrase[0].starts_with(PLACEHOLDER_PREFIX) {
                continue;
            }
            for i in 0..tokens.len() {
                if matches_at(&phrase, i) {
                    let m = Mention {
                        slot: sv.slot.clone(),
                        target: MentionTarget::Value(v.clone()),
                        tok_start: i,
                        tok_end: i + phrase.len(),
                        span: (tokens[i].start, tokens[i + phrase.len() - 1].end),
                        weak: self.weak.contains(&(sv.slot.clone(), v.clone())),
                    };
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
            }
        }
        out
    }

    fn supports(&self, m: &Mention, sv: &SlotValue) -> bool {
        if m.slot != sv.slot {
            return false;
        }
        match &m.target {
            MentionTarget::Placeholder => true,
            MentionTarget::Mention => is_sentinel(&sv.value),
            MentionTarget::Value(v) => *v == normalize_phrase(&sv.value),
            MentionTarget::Polarity(p) => match self.booleans.get(&sv.slot) {
                Some(spec) => {
                    let val = sv.value.trim().to_lowercase();
                    (*p && spec.true_values.contains(&val)) || (!*p && spec.false_values.contains(&val))
                }
                None => false,
            },
            MentionTarget::Amount(nums) => {
                let v = normalize_phrase(&sv.value);
                self.ranges
                    .get(&sv.slot)
                    .into_iter()
                    .flatten()
                    .filter(|r| r.value == v)
                    .any(|r| nums.iter().all(|n| *n >= r.lo && *n <= r.hi))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedSlot {
    pub slot: String,
    pub value: String,
    /// Position of the slot in the MR.
    pub mr_index: usize,
    /// Byte span within the sentence text.
    pub span: (usize, usize),
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceAlignment {
    pub index: usize,
    pub text: String,
    pub slots: Vec<AlignedSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overgeneration {
    pub slot: String,
    pub sentence: usize,
    pub span: (usize, usize),
    pub phrase: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub per_sentence: Vec<SentenceAlignment>,
    pub unaligned: Vec<SlotValue>,
    pub overgenerated: Vec<Overgeneration>,
    pub total_slots: usize,
}

impl AlignmentReport {
    pub fn n_unaligned(&self) -> usize {
        self.unaligned.len()
    }

    pub fn n_overgenerated(&self) -> usize {
        self.overgenerated.len()
    }

    pub fn aligned_count(&self) -> usize {
        self.per_sentence.iter().map(|s| s.slots.len()).sum()
    }

    pub fn aligned(&self) -> impl Iterator<Item = (usize, &AlignedSlot)> {
        self.per_sentence.iter().flat_map(|s| s.slots.iter().map(move |a| (s.index, a)))
    }

    /// Sentence index the slot at `mr_index` was aligned to.
    pub fn sentence_of(&self, mr_index: usize) -> Option<usize> {
        self.aligned().find(|(_, a)| a.mr_index == mr_index).map(|(i, _)| i)
    }
}

pub fn align_utterance(utterance: &str, mr: &MeaningRepresentation, gaz: &Gazetteer) -> AlignmentReport {
    let sentences = gaz.splitter.split(utterance);
    let tokenized: Vec<Vec<MatchToken>> = sentences.iter().map(|s| match_tokens(s)).collect();
    let mentions: Vec<Vec<Mention>> = tokenized.iter().map(|t| gaz.mentions(t, mr)).collect();

    let mut per_sentence: Vec<SentenceAlignment> = sentences
        .iter()
        .enumerate()
        .map(|(index, text)| SentenceAlignment { index, text: text.clone(), slots: Vec::new() })
        .collect();
    let mut unaligned = Vec::new();

    for (mr_index, sv) in mr.slots.iter().enumerate() {
        // longest match, then earliest
        let mut best: Option<(usize, &Mention)> = None;
        for (si, ms) in mentions.iter().enumerate() {
            for m in ms.iter().filter(|m| gaz.supports(m, sv)) {
                let better = match best {
                    None => true,
                    Some((bsi, b)) => {
                        let (len, blen) = (m.tok_end - m.tok_start, b.tok_end - b.tok_start);
                        len > blen || (len == blen && (si, m.tok_start) < (bsi, b.tok_start))
                    }
                };
                if better {
                    best = Some((si, m));
                }
            }
        }
        match best {
            Some((si, m)) => per_sentence[si].slots.push(AlignedSlot {
                slot: sv.slot.clone(),
                value: sv.value.clone(),
                mr_index,
                span: m.span,
                phrase: sentences[si][m.span.0..m.span.1].to_string(),
            }),
            None => unaligned.push(sv.clone()),
        }
    }

    let mut overgenerated = Vec::new();
    for (si, ms) in mentions.iter().enumerate() {
        let mut ranked: Vec<&Mention> = ms.iter().collect();
        ranked.sort_by(|a, b| {
            let (la, lb) = (a.tok_end - a.tok_start, b.tok_end - b.tok_start);
            lb.cmp(&la)
                .then(mr.has_slot(&b.slot).cmp(&mr.has_slot(&a.slot)))
                .then(a.weak.cmp(&b.weak))
                .then(a.tok_start.cmp(&b.tok_start))
                .then(a.slot.cmp(&b.slot))
        });
        let mut taken: Vec<(usize, usize)> = Vec::new();
        for m in ranked {
            if taken.iter().any(|&(s, e)| m.tok_start < e && s < m.tok_end) {
                continue;
            }
            taken.push((m.tok_start, m.tok_end));
            if !m.weak && !mr.has_slot(&m.slot) {
                overgenerated.push(Overgeneration {
                    slot: m.slot.clone(),
                    sentence: si,
                    span: m.span,
                    phrase: sentences[si][m.span.0..m.span.1].to_string(),
                });
            }
        }
    }
    overgenerated.sort_by(|a, b| (a.sentence, a.span).cmp(&(b.sentence, b.span)));

    AlignmentReport { per_sentence, unaligned, overgenerated, total_slots: mr.slots.len() }
}

/// True iff `sentence` mentions the name value, its placeholder, or one of
/// the given pronouns.
pub fn label_coreference(sentence: &str, name_value: &str, pronouns: &[String]) -> bool {
    let tokens = match_tokens(sentence);
    if tokens.iter().any(|t| pronouns.iter().any(|p| *p == t.text)) {
        return true;
    }
    if tokens.iter().any(|t| PlaceholderToken::parse(&t.text).is_some_and(|p| p.slot == "name")) {
        return true;
    }
    let name = normalize_phrase(name_value);
    if name.is_empty() {
        return false;
    }
    let hay = alloc::format!(" {} ", tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "));
    hay.contains(&alloc::format!(" {name} "))
}

pub fn default_pronouns() -> Vec<String> {
    lexicon::word_list(lexicon::PRONOUNS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_mr, Dialect, Domain, Sample, Split};
    use alloc::vec;

    fn gaz() -> Gazetteer {
        build_gazetteer(None, &SynonymLexicon::bundled(), &RuleSet::bundled())
    }

    fn mr(text: &str) -> MeaningRepresentation {
        parse_mr(text, Dialect::E2e).unwrap()
    }

    #[test]
    fn hyphen_split_offsets() {
        let t = match_tokens("A non-kid-friendly pub");
        let texts: Vec<_> = t.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["a", "non", "kid", "friendly", "pub"]);
        assert_eq!(&"A non-kid-friendly pub"[t[2].start..t[2].end], "kid");
    }

    #[test]
    fn waterman_alignment() {
        let m = mr("name[The Waterman], food[English], priceRange[cheap], customer rating[average], area[city centre], familyFriendly[yes]");
        let utt = "There is a family-friendly, cheap restaurant in the city centre, called The Waterman. It serves English food and has an average rating by customers.";
        let r = align_utterance(utt, &m, &gaz());
        let s0: BTreeSet<_> = r.per_sentence[0].slots.iter().map(|a| a.slot.as_str()).collect();
        let s1: BTreeSet<_> = r.per_sentence[1].slots.iter().map(|a| a.slot.as_str()).collect();
        assert_eq!(s0, ["area", "familyfriendly", "name", "pricerange"].into_iter().collect());
        assert_eq!(s1, ["customer_rating", "food"].into_iter().collect());
        assert_eq!(r.n_unaligned(), 0);
        assert_eq!(r.n_overgenerated(), 0);
    }

    #[test]
    fn placeholders_align_exactly() {
        let m = mr("name[slot_name], near[slot_near]");
        let r = align_utterance("slot_name is near slot_near.", &m, &gaz());
        assert_eq!((r.n_unaligned(), r.n_overgenerated()), (0, 0));
    }

    #[test]
    fn cheap_without_pricerange_is_overgenerated() {
        let m = mr("name[Giraffe], eatType[pub]");
        let r = align_utterance("Giraffe is a cheap pub.", &m, &gaz());
        assert_eq!(r.n_unaligned(), 0);
        assert_eq!(r.overgenerated.len(), 1);
        assert_eq!((r.overgenerated[0].slot.as_str(), r.overgenerated[0].phrase.as_str()), ("pricerange", "cheap"));
    }

    #[test]
    fn negation_flips_boolean_polarity() {
        let g = gaz();
        let no = mr("name[The Cricketers], familyFriendly[no]");
        let yes = mr("name[The Cricketers], familyFriendly[yes]");
        let utt = "The Cricketers has an average customer rating and is not family friendly.";
        assert_eq!(align_utterance(utt, &no, &g).n_unaligned(), 0);
        assert_eq!(align_utterance(utt, &yes, &g).n_unaligned(), 1);
        let utt2 = "The Cricketers is a non-kid-friendly venue.";
        assert_eq!(align_utterance(utt2, &no, &g).n_unaligned(), 0);
        let utt3 = "The Cricketers is not cheap, but kid friendly.";
        assert_eq!(align_utterance(utt3, &yes, &g).n_unaligned(), 0);
    }

    #[test]
    fn currency_amounts_match_ranges() {
        let g = gaz();
        let m = mr("name[Zizzi], priceRange[less than £20]");
        assert_eq!(align_utterance("Zizzi has meals for £15.", &m, &g).n_unaligned(), 0);
        assert_eq!(align_utterance("Zizzi has meals for £45.", &m, &g).n_unaligned(), 1);
        let m2 = mr("name[Zizzi], priceRange[£20-25]");
        assert_eq!(align_utterance("Zizzi costs £20-25.", &m2, &g).n_unaligned(), 0);
    }

    #[test]
    fn synonym_entries_are_retrievable() {
        let g = gaz();
        assert!(g.value_phrases("food", "Italian").any(|p| p == "pasta"));
        let m = mr("name[Zizzi], food[Italian]");
        assert_eq!(align_utterance("Zizzi serves pasta.", &m, &g).n_unaligned(), 0);
    }

    #[test]
    fn gazetteer_from_training_data() {
        let ds = Dataset::new(
            vec![Sample::new(
                "0",
                mr("name[The Golden Curry], familyFriendly[yes], near[The Bakers]"),
                "The Golden Curry is a kid-friendly place near The Bakers.",
            )],
            Domain::E2e,
            Split::Train,
        )
        .unwrap();
        let g = build_gazetteer(Some(&ds), &SynonymLexicon::empty(), &RuleSet::bundled());
        let ff: BTreeSet<_> = g.phrases_for("familyfriendly").map(|(p, _)| p).collect();
        assert!(ff.contains("kid friendly") && ff.contains("family friendly"));
        assert!(g.value_phrases("near", "The Bakers").any(|p| p == "the bakers"));
        // observed values become over-generation evidence elsewhere
        let r = align_utterance("Giraffe is near The Bakers.", &mr("name[Giraffe]"), &g);
        assert_eq!(r.overgenerated.len(), 1);

        let bare = build_gazetteer(Some(&ds), &SynonymLexicon::empty(), &RuleSet::empty());
        let names: Vec<_> = bare.phrases_for("name").map(|(p, s)| (p, s)).collect();
        assert!(names.contains(&("the golden curry", PhraseSource::Observed)));
        assert_eq!(bare.phrases_for("familyfriendly").filter(|(_, s)| *s != PhraseSource::Placeholder).count(), 0);
    }

    #[test]
    fn coreference_labels() {
        let p = default_pronouns();
        assert!(label_coreference("It serves English food.", "The Waterman", &p));
        assert!(!label_coreference("Located near The Bakers.", "The Golden Curry", &p));
        assert!(label_coreference("Its prices are moderate.", "X", &p));
        assert!(label_coreference("The Golden Curry is great.", "The Golden Curry", &p));
        assert!(label_coreference("slot_name is great.", "The Golden Curry", &p));
    }

    #[test]
    fn empty_utterance_leaves_everything_unaligned() {
        let m = mr("name[A], food[Chinese]");
        let r = align_utterance("", &m, &gaz());
        assert_eq!(r.n_unaligned(), 2);
        assert_eq!(r.total_slots, 2);
    }

    #[test]
    fn rule_file_errors() {
        assert!(matches!(RuleSet::parse("[x]\nbogus = a"), Err(RuleError::Invalid { line: 2, .. })));
        assert!(matches!(RuleSet::parse("[x]\nrange a = 1 to 2"), Err(RuleError::Invalid { .. })));
    }
}
