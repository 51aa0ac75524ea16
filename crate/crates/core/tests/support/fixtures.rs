//! Hand-labelled alignment fixture and the slot-error-rate fixture.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ensnlg_core::aligner::{align_utterance, Gazetteer};
use ensnlg_core::corpus::{parse_mr, Dialect, MeaningRepresentation};

pub const ALIGNER_GOLD: &str = include_str!("../fixtures/aligner_gold.tsv");
pub const ERR_FIXTURE: &str = include_str!("../fixtures/err_fixture.tsv");

pub struct GoldAlignment {
    pub mr: MeaningRepresentation,
    pub utterance: String,
    pub realized: BTreeSet<String>,
    pub overgenerated: BTreeSet<String>,
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
}

fn slot_set(field: Option<&str>) -> BTreeSet<String> {
    field.unwrap_or("").split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

pub fn gold_alignments() -> Vec<GoldAlignment> {
    data_lines(ALIGNER_GOLD)
        .map(|l| {
            let mut f = l.split('\t');
            let mr = parse_mr(f.next().unwrap(), Dialect::E2e).unwrap();
            let utterance = f.next().unwrap().to_string();
            GoldAlignment { mr, utterance, realized: slot_set(f.next()), overgenerated: slot_set(f.next()) }
        })
        .collect()
}

pub fn err_rows() -> Vec<(String, MeaningRepresentation)> {
    data_lines(ERR_FIXTURE)
        .map(|l| {
            let (mr, hyp) = l.split_once('\t').unwrap();
            (hyp.to_string(), parse_mr(mr, Dialect::E2e).unwrap())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Agreement {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Agreement {
    pub fn precision(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fp).max(1) as f64
    }

    pub fn recall(&self) -> f64 {
        self.tp as f64 / (self.tp + self.fn_).max(1) as f64
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

/// Slot-level agreement with the gold labels. Every realized MR slot and every
/// over-generated slot is one positive item; the aligner's aligned and
/// over-generated slots are its predictions.
pub fn alignment_agreement(gaz: &Gazetteer) -> (Agreement, Vec<String>) {
    let mut a = Agreement::default();
    let mut disagreements = Vec::new();
    for (i, g) in gold_alignments().iter().enumerate() {
        let r = align_utterance(&g.utterance, &g.mr, gaz);
        let aligned: BTreeSet<String> = r.aligned().map(|(_, s)| s.slot.clone()).collect();
        let over: BTreeSet<String> = r.overgenerated.iter().map(|o| o.slot.clone()).collect();
        for (pred, gold, kind) in [(&aligned, &g.realized, "aligned"), (&over, &g.overgenerated, "overgenerated")] {
            a.tp += pred.intersection(gold).count();
            for s in pred.difference(gold) {
                a.fp += 1;
                disagreements.push(format!("#{i} spurious {kind} {s}"));
            }
            for s in gold.difference(pred) {
                a.fn_ += 1;
                disagreements.push(format!("#{i} missed {kind} {s}"));
            }
        }
    }
    (a, disagreements)
}
