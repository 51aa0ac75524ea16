//! Reference selection by discourse complexity.
//!
//! Utterances are profiled with lexical/positional cue rules (contrast,
//! subordination, aggregation, apposition) and scored; the training set is
//! then filtered to the best-scoring references of every MR.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Dataset, SentenceSplitter};
use crate::delex::find_value;
use crate::lexicon::{self, LexiconError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StyleError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("invalid selection policy: {0}")]
    Policy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DiscourseProfile {
    pub contrastive_cues: usize,
    pub subordinate_markers: usize,
    pub aggregation_markers: usize,
    pub apposition_markers: usize,
    pub sentence_count: usize,
    pub token_count: usize,
}

/// Cue word lists, normally read from `data/discourse_cues.txt`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CueLexicon {
    contrastive: Vec<Vec<String>>,
    subordinate: BTreeSet<String>,
    that_blockers: BTreeSet<String>,
    aggregation_verbs: BTreeSet<String>,
    naming_heads: Vec<Vec<String>>,
    determiners: BTreeSet<String>,
    name_tokens: BTreeSet<String>,
    splitter: SentenceSplitter,
}

impl Default for CueLexicon {
    fn default() -> Self {
        Self::parse(lexicon::DISCOURSE_CUES).expect("bundled cue file parses")
    }
}

fn phrases(values: &[String]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = values.iter().map(|v| tokenize(v).tokens).filter(|t| !t.is_empty()).collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()));
    out
}

fn words(values: &[String]) -> BTreeSet<String> {
    values.iter().map(|v| v.to_lowercase()).collect()
}

impl CueLexicon {
    pub fn parse(text: &str) -> Result<Self, StyleError> {
        let sections = lexicon::parse_sections(text)?;
        let cues = sections
            .iter()
            .find(|s| s.name == "cues")
            .ok_or_else(|| StyleError::Policy("cue file lacks a [cues] section".into()))?;
        let get = |k: &str| cues.get(k).unwrap_or(&[]);
        Ok(Self {
            contrastive: phrases(get("contrastive")),
            subordinate: words(get("subordinate")),
            that_blockers: words(get("that_blockers")),
            aggregation_verbs: words(get("aggregation_verbs")),
            naming_heads: phrases(get("naming_heads")),
            determiners: words(get("determiners")),
            name_tokens: words(get("name_tokens")),
            splitter: SentenceSplitter::default().case_insensitive(),
        })
    }
}

fn starts_with(tokens: &[String], at: usize, phrase: &[String]) -> bool {
    at + phrase.len() <= tokens.len() && tokens[at..at + phrase.len()] == *phrase
}

fn is_word(t: &str) -> bool {
    t.chars().next().is_some_and(|c| c.is_alphanumeric())
}

/// Longest cue appositive segments may have, in tokens.
const MAX_APPOSITIVE: usize = 6;

pub fn profile_utterance(utterance: &str) -> DiscourseProfile {
    profile_with(utterance, None, &CueLexicon::default())
}

/// Profiles an utterance; occurrences of `name` are treated as the name
/// placeholder.
pub fn profile_with(utterance: &str, name: Option<&str>, cues: &CueLexicon) -> DiscourseProfile {
    let mut text = String::from(utterance);
    if let Some(name) = name.filter(|n| !n.trim().is_empty()) {
        for (s, e) in find_value(utterance, name).into_iter().rev() {
            text.replace_range(s..e, "slot_name");
        }
    }
    let sentences = cues.splitter.split(&text);
    let mut p = DiscourseProfile { sentence_count: sentences.len().max(1), ..Default::default() };
    for sentence in &sentences {
        let toks = tokenize(sentence).tokens;
        p.token_count += toks.iter().filter(|t| is_word(t)).count();
        let mut i = 0;
        while i < toks.len() {
            if let Some(c) = cues.contrastive.iter().find(|c| starts_with(&toks, i, c)) {
                p.contrastive_cues += 1;
                i += c.len();
                continue;
            }
            let t = toks[i].as_str();
            if cues.subordinate.contains(t) {
                p.subordinate_markers += 1;
            } else if t == "that" && i > 0 && (toks[i - 1] == "," || !cues.that_blockers.contains(&toks[i - 1])) {
                p.subordinate_markers += 1;
            } else if t == "and" {
                let next = toks.get(i + 1).map(String::as_str);
                let next = if next == Some("also") { toks.get(i + 2).map(String::as_str) } else { next };
                if next.is_some_and(|n| cues.aggregation_verbs.contains(n)) {
                    p.aggregation_markers += 1;
                }
            }
            i += 1;
        }
        p.apposition_markers += appositions(&toks, cues);
    }
    p
}

fn appositions(toks: &[String], cues: &CueLexicon) -> usize {
    let segments: Vec<&[String]> = toks.split(|t| t == ",").collect();
    let mut n = 0;
    for k in 1..segments.len() {
        let seg: Vec<&String> = segments[k].iter().filter(|t| is_word(t)).collect();
        if seg.is_empty() || seg.len() > MAX_APPOSITIVE {
            continue;
        }
        // the segment must be closed by another comma or end the sentence
        let closed = k + 1 < segments.len() || segments[k].iter().any(|t| t == ".") || seg.len() <= 3;
        if !closed {
            continue;
        }
        let seg_tokens: Vec<String> = seg.iter().map(|s| s.to_string()).collect();
        let named = cues.naming_heads.iter().any(|h| starts_with(&seg_tokens, 0, h));
        let bare_name = seg.len() == 1 && cues.name_tokens.contains(seg[0]);
        let after_name = segments[k - 1].iter().rev().find(|t| is_word(t)).is_some_and(|t| cues.name_tokens.contains(t))
            && cues.determiners.contains(seg[0]);
        if named || bare_name || after_name {
            n += 1;
        }
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CueWeights {
    pub contrastive: f64,
    pub subordinate: f64,
    pub aggregation: f64,
    pub apposition: f64,
}

impl Default for CueWeights {
    fn default() -> Self {
        Self { contrastive: 2.0, subordinate: 1.5, aggregation: 1.0, apposition: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SelectionMode {
    /// Keep the best `n` references of every MR; `None` keeps everything.
    TopPerMr { n: Option<usize> },
    /// Keep references scoring at least `min_score`, plus the best one of
    /// every MR.
    Threshold { min_score: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionPolicy {
    pub weights: CueWeights,
    pub sentence_penalty: f64,
    pub mode: SelectionMode,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        Self { weights: CueWeights::default(), sentence_penalty: 1.0, mode: SelectionMode::TopPerMr { n: Some(4) } }
    }
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<(), StyleError> {
        let w = &self.weights;
        let all = [w.contrastive, w.subordinate, w.aggregation, w.apposition];
        if all.iter().any(|x| !x.is_finite() || *x < 0.0) || !all.iter().any(|x| *x > 0.0) {
            return Err(StyleError::Policy("weights must be non-negative with at least one positive".into()));
        }
        if !(self.sentence_penalty >= 0.0 && self.sentence_penalty.is_finite()) {
            return Err(StyleError::Policy("sentence penalty must be a non-negative number".into()));
        }
        if self.mode == (SelectionMode::TopPerMr { n: Some(0) }) {
            return Err(StyleError::Policy("top-n must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn complexity_score(p: &DiscourseProfile, policy: &SelectionPolicy) -> f64 {
    let w = &policy.weights;
    w.contrastive * p.contrastive_cues as f64
        + w.subordinate * p.subordinate_markers as f64
        + w.aggregation * p.aggregation_markers as f64
        + w.apposition * p.apposition_markers as f64
        - policy.sentence_penalty * (p.sentence_count.max(1) - 1) as f64
}

/// Filters a dataset to its most complex references. Every MR keeps at least
/// one reference and the original sample order is preserved.
pub fn select_references(dataset: &Dataset, policy: &SelectionPolicy) -> Result<Dataset, StyleError> {
    select_with(dataset, policy, &CueLexicon::default())
}

pub fn select_with(dataset: &Dataset, policy: &SelectionPolicy, cues: &CueLexicon) -> Result<Dataset, StyleError> {
    policy.validate()?;
    let scored: Vec<(f64, DiscourseProfile)> = dataset
        .samples
        .iter()
        .map(|s| {
            let p = profile_with(&s.reference, s.mr.get("name"), cues);
            (complexity_score(&p, policy), p)
        })
        .collect();
    let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, s) in dataset.samples.iter().enumerate() {
        groups.entry(s.mr.key()).or_default().push(i);
    }
    let mut keep = alloc::vec![false; dataset.samples.len()];
    for idx in groups.values_mut() {
        idx.sort_by(|&a, &b| {
            let (sa, pa) = &scored[a];
            let (sb, pb) = &scored[b];
            sb.total_cmp(sa)
                .then(pa.sentence_count.cmp(&pb.sentence_count))
                .then(pa.token_count.cmp(&pb.token_count))
                .then(a.cmp(&b))
        });
        match policy.mode {
            SelectionMode::TopPerMr { n } => {
                for &i in idx.iter().take(n.unwrap_or(usize::MAX)) {
                    keep[i] = true;
                }
            }
            SelectionMode::Threshold { min_score } => {
                keep[idx[0]] = true;
                for &i in idx.iter() {
                    if scored[i].0 >= min_score {
                        keep[i] = true;
                    }
                }
            }
        }
    }
    let samples = dataset.samples.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.clone()).collect();
    Ok(Dataset { samples, domain: dataset.domain, split: dataset.split })
}
