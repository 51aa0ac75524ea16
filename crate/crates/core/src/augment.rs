//! Training-set expansion: utterance/MR splitting and slot permutation.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aligner::{align_utterance, default_pronouns, label_coreference, AlignmentReport, Gazetteer};
use crate::corpus::{Dataset, MeaningRepresentation, Sample, SlotValue, Split};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("augmentation applies to the train split only, got {0}")]
    WrongSplit(Split),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub pronouns: Vec<String>,
    pub position_slot_name: String,
    /// Keep samples with unaligned slots (with those slots removed) instead
    /// of dropping them.
    pub keep_unalignable: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { pronouns: default_pronouns(), position_slot_name: "position".into(), keep_unalignable: true }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.pronouns.is_empty() {
            return Err(AugmentError::Config("pronoun list is empty".into()));
        }
        if self.position_slot_name.trim().is_empty() {
            return Err(AugmentError::Config("position slot name is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PermutationConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        Self { k: 5, seed: 0 }
    }
}

/// Splits a sample into one sub-sample per sentence of its reference.
///
/// Sentences to which no slot is aligned (and which do not refer to the name)
/// produce nothing.
pub fn split_sample(sample: &Sample, gaz: &Gazetteer, cfg: &SplitConfig) -> Vec<Sample> {
    let report = align_utterance(&sample.reference, &sample.mr, gaz);
    split_with_report(sample, &report, cfg)
}

fn split_with_report(sample: &Sample, report: &AlignmentReport, cfg: &SplitConfig) -> Vec<Sample> {
    let name = sample.mr.get("name");
    let mut out = Vec::new();
    for sent in &report.per_sentence {
        let aligned: BTreeSet<usize> = sent.slots.iter().map(|a| a.mr_index).collect();
        let coref = name.is_some_and(|n| label_coreference(&sent.text, n, &cfg.pronouns));
        let slots: Vec<SlotValue> = sample
            .mr
            .slots
            .iter()
            .enumerate()
            .filter(|(i, sv)| aligned.contains(i) || (coref && sv.slot == "name"))
            .map(|(_, sv)| sv.clone())
            .collect();
        if slots.is_empty() {
            continue;
        }
        let mut mr = MeaningRepresentation::new(sample.mr.da_type.clone(), slots, sample.mr.dialect);
        let position = if sent.index == 0 { "outer" } else { "inner" };
        mr.slots.push(SlotValue::new(cfg.position_slot_name.clone(), position));
        out.push(Sample::new(format!("{}#s{}", sample.id, sent.index), mr, sent.text.trim()));
    }
    out
}

/// Removes the report's unaligned slots from the MR. Returns `None` when no
/// slot would remain.
pub fn handle_unaligned(sample: &Sample, report: &AlignmentReport) -> Option<Sample> {
    if report.unaligned.is_empty() {
        return Some(sample.clone());
    }
    let mut mr = sample.mr.clone();
    let mut missing = report.unaligned.clone();
    mr.slots.retain(|sv| match missing.iter().position(|m| m == sv) {
        Some(i) => {
            missing.swap_remove(i);
            false
        }
        None => true,
    });
    if mr.slots.is_empty() {
        return None;
    }
    Some(Sample { mr, ..sample.clone() })
}

/// The original sample followed by up to `k` distinct reorderings of its slots.
pub fn permute_slots<R: Rng + ?Sized>(sample: &Sample, cfg: &PermutationConfig, rng: &mut R) -> Vec<Sample> {
    let mut seen: Vec<Vec<SlotValue>> = Vec::new();
    seen.push(sample.mr.slots.clone());
    let n = sample.mr.slots.len();
    let max_distinct = (1..=n).try_fold(1usize, |acc, i| acc.checked_mul(i)).unwrap_or(usize::MAX);
    let target = cfg.k.min(max_distinct.saturating_sub(1));
    let mut attempts = 0;
    while seen.len() <= target && attempts < 50 * (cfg.k + 1) {
        attempts += 1;
        let mut slots = sample.mr.slots.clone();
        slots.shuffle(rng);
        if !seen.contains(&slots) {
            seen.push(slots);
        }
    }
    seen.into_iter()
        .enumerate()
        .map(|(j, slots)| {
            let id = if j == 0 { sample.id.clone() } else { format!("{}#p{}", sample.id, j) };
            let mr = MeaningRepresentation::new(sample.mr.da_type.clone(), slots, sample.mr.dialect);
            Sample::new(id, mr, sample.reference.clone())
        })
        .collect()
}

fn slot_set(mr: &MeaningRepresentation, skip: &str) -> BTreeSet<(String, String)> {
    mr.slots.iter().filter(|s| s.slot != skip).map(|s| (s.slot.clone(), s.value.clone())).collect()
}

/// Cleans every training sample of unaligned slots, adds its split
/// sub-samples and optionally permutes everything.
pub fn expand_dataset(
    dataset: &Dataset,
    gaz: &Gazetteer,
    split_cfg: Option<&SplitConfig>,
    perm_cfg: Option<&PermutationConfig>,
) -> Result<Dataset, AugmentError> {
    if dataset.split != Split::Train {
        return Err(AugmentError::WrongSplit(dataset.split));
    }
    if let Some(cfg) = split_cfg {
        cfg.validate()?;
    }
    let mut out = Vec::with_capacity(dataset.samples.len() * 2);
    for sample in &dataset.samples {
        let report = align_utterance(&sample.reference, &sample.mr, gaz);
        let keep = split_cfg.map_or(true, |c| c.keep_unalignable) || report.unaligned.is_empty();
        let cleaned = if keep { handle_unaligned(sample, &report) } else { None };
        let parent_set = cleaned.as_ref().map(|c| slot_set(&c.mr, ""));
        if let Some(c) = cleaned {
            out.push(c);
        }
        if let Some(cfg) = split_cfg {
            let subs = split_with_report(sample, &report, cfg);
            let single = subs.len() == 1 && report.per_sentence.len() == 1;
            for sub in subs {
                if single && parent_set.as_ref() == Some(&slot_set(&sub.mr, &cfg.position_slot_name)) {
                    continue;
                }
                out.push(sub);
            }
        }
    }
    if let Some(p) = perm_cfg.filter(|p| p.k > 0) {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        out = out.iter().flat_map(|s| permute_slots(s, p, &mut rng)).collect();
    }
    Dataset::new(out, dataset.domain, dataset.split).map_err(|e| AugmentError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aligner::{build_gazetteer, RuleSet, SynonymLexicon};
    use crate::corpus::{parse_mr, Dialect, Domain};
    use alloc::vec;

    fn gaz() -> Gazetteer {
        build_gazetteer(None, &SynonymLexicon::bundled(), &RuleSet::bundled())
    }

    fn sample(mr: &str, utt: &str) -> Sample {
        Sample::new("x", parse_mr(mr, Dialect::E2e).unwrap(), utt)
    }

    fn keys(s: &Sample) -> Vec<String> {
        s.mr.slots.iter().map(|s| format!("{}={}", s.slot, s.value)).collect()
    }

    const WATERMAN_MR: &str = "name[The Waterman], food[English], priceRange[cheap], customer rating[average], area[city centre], familyFriendly[yes]";
    const WATERMAN_UTT: &str = "There is a family-friendly, cheap restaurant in the city centre, called The Waterman. It serves English food and has an average rating by customers.";

    #[test]
    fn waterman_split() {
        let subs = split_sample(&sample(WATERMAN_MR, WATERMAN_UTT), &gaz(), &SplitConfig::default());
        assert_eq!(subs.len(), 2);
        assert_eq!(
            keys(&subs[0]),
            ["name=The Waterman", "pricerange=cheap", "area=city centre", "familyfriendly=yes", "position=outer"]
        );
        assert_eq!(keys(&subs[1]), ["name=The Waterman", "food=English", "customer_rating=average", "position=inner"]);
        assert_eq!(subs[1].reference, "It serves English food and has an average rating by customers.");
    }

    #[test]
    fn single_sentence_split() {
        let s = sample("name[Giraffe], eatType[pub]", "Giraffe is a pub.");
        let subs = split_sample(&s, &gaz(), &SplitConfig::default());
        assert_eq!(subs.len(), 1);
        assert_eq!(keys(&subs[0]), ["name=Giraffe", "eattype=pub", "position=outer"]);
    }

    #[test]
    fn pronoun_pulls_in_name() {
        let s = sample("name[Giraffe], eatType[pub], area[riverside]", "Giraffe is a pub. It has a riverside view.");
        let subs = split_sample(&s, &gaz(), &SplitConfig::default());
        assert_eq!(keys(&subs[1]), ["name=Giraffe", "area=riverside", "position=inner"]);
    }

    #[test]
    fn unaligned_handling() {
        let g = gaz();
        let full = sample("name[Giraffe], eatType[pub]", "Giraffe is a pub.");
        let r = align_utterance(&full.reference, &full.mr, &g);
        assert_eq!(handle_unaligned(&full, &r), Some(full.clone()));

        let s = sample("name[Giraffe], eatType[pub], food[Chinese]", "Giraffe is a pub.");
        let r = align_utterance(&s.reference, &s.mr, &g);
        let cleaned = handle_unaligned(&s, &r).unwrap();
        assert_eq!(keys(&cleaned), ["name=Giraffe", "eattype=pub"]);
        assert_eq!(cleaned.reference, s.reference);

        let none = sample("food[Chinese]", "Nothing relevant here.");
        let r = align_utterance(&none.reference, &none.mr, &g);
        assert_eq!(handle_unaligned(&none, &r), None);
    }

    #[test]
    fn permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let five = sample("name[A], food[Chinese], area[riverside], eatType[pub], priceRange[cheap]", "u");
        let out = permute_slots(&five, &PermutationConfig { k: 5, seed: 1 }, &mut rng);
        assert_eq!(out.len(), 6);
        assert_eq!(out[0], five);
        let distinct: BTreeSet<_> = out.iter().map(keys).collect();
        assert_eq!(distinct.len(), 6);

        let one = sample("name[A]", "u");
        assert_eq!(permute_slots(&one, &PermutationConfig { k: 5, seed: 1 }, &mut rng).len(), 1);
        assert_eq!(permute_slots(&five, &PermutationConfig { k: 0, seed: 1 }, &mut rng), vec![five.clone()]);
        let two = sample("name[A], food[Chinese]", "u");
        assert_eq!(permute_slots(&two, &PermutationConfig { k: 5, seed: 1 }, &mut rng).len(), 2);
    }

    #[test]
    fn expand_rules() {
        let g = gaz();
        let train = Dataset::new(
            vec![sample(WATERMAN_MR, WATERMAN_UTT), sample("name[Giraffe], eatType[pub]", "Giraffe is a pub.")],
            Domain::E2e,
            Split::Train,
        )
        .unwrap();
        let out = expand_dataset(&train, &g, Some(&SplitConfig::default()), None).unwrap();
        // two originals, two sub-samples from the split, single-sentence duplicate dropped
        assert_eq!(out.len(), 4);
        let identity = expand_dataset(&train, &g, None, None).unwrap();
        assert_eq!(identity.samples, train.samples);

        let mut val = train.clone();
        val.split = Split::Validation;
        assert_eq!(expand_dataset(&val, &g, None, None), Err(AugmentError::WrongSplit(Split::Validation)));
        let bad = SplitConfig { pronouns: vec![], ..SplitConfig::default() };
        assert!(matches!(expand_dataset(&train, &g, Some(&bad), None), Err(AugmentError::Config(_))));
    }
}
