//! Candidate pooling across submodels and slot-alignment reranking.
//!
//! Each submodel contributes its top beam candidates. A candidate's final
//! score is `exp(normalized log-prob) × s_align`, where
//! `s_align = N / ((N_u + 1)(N_o + 1))` rewards realizing every MR slot and
//! nothing else.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aligner::{align_utterance, AlignmentReport, Gazetteer};
use crate::corpus::{parse_mr, CorpusError, Dialect, MeaningRepresentation};
use crate::delex::{delexicalize_mr, find_value, relexicalize, strip_placeholders, DelexPolicy};
use crate::neural::{NeuralError, Submodel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("slot alignment score needs N ≥ 1 and N_u ≤ N (got N={n}, N_u={nu})")]
    Domain { n: usize, nu: usize },
    #[error("candidate pool is empty")]
    EmptyPool,
    #[error("ensemble has no submodels")]
    NoSubmodels,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
}

/// `N / ((N_u + 1)(N_o + 1))`.
pub fn slot_alignment_score(n: usize, n_u: usize, n_o: usize) -> Result<f64, EnsembleError> {
    if n < 1 || n_u > n {
        return Err(EnsembleError::Domain { n, nu: n_u });
    }
    Ok(n as f64 / ((n_u + 1) as f64 * (n_o + 1) as f64))
}

/// Score of a report; MRs without slots (e.g. `goodbye()`) score 1.
pub fn report_score(report: &AlignmentReport) -> f64 {
    slot_alignment_score(report.total_slots, report.n_unaligned(), report.n_overgenerated()).unwrap_or(1.0)
}

/// Joins tokens into text: no space before closing punctuation, none around
/// apostrophes and in-word hyphens, none after currency signs, and the first
/// letter of every sentence capitalized.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = true;
    let mut capitalize = true;
    for t in tokens {
        let t = t.as_ref();
        let closing = matches!(t, "." | "," | "!" | "?" | ";" | ":" | ")" | "%");
        let joiner = matches!(t, "'" | "’" | "-");
        if !(glue_next || closing || joiner) {
            out.push(' ');
        }
        if capitalize && t.chars().next().is_some_and(char::is_alphabetic) && !t.starts_with(crate::delex::PLACEHOLDER_PREFIX) {
            let mut cs = t.chars();
            out.extend(cs.next().into_iter().flat_map(char::to_uppercase));
            out.push_str(cs.as_str());
            capitalize = false;
        } else {
            out.push_str(t);
            if t.chars().next().is_some_and(char::is_alphanumeric) {
                capitalize = false;
            }
        }
        glue_next = joiner || matches!(t, "£" | "$" | "€" | "(");
        if matches!(t, "." | "!" | "?") {
            capitalize = true;
        }
    }
    out
}

/// Restores the MR's own casing of every slot value found in `text`.
pub fn restore_value_case(text: &str, mr: &MeaningRepresentation) -> String {
    let mut out = String::from(text);
    for sv in &mr.slots {
        if sv.value.starts_with(crate::delex::PLACEHOLDER_PREFIX) || sv.value.trim().is_empty() {
            continue;
        }
        for (s, e) in find_value(&out.clone(), &sv.value).into_iter().rev() {
            if out[s..e].len() == sv.value.trim().len() {
                out.replace_range(s..e, sv.value.trim());
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub tokens: Vec<String>,
    pub log_prob: f64,
    pub normalized_score: f64,
    pub source_model: String,
    /// Position of the source model in the ensemble roster.
    pub source_index: usize,
    pub beam_rank: usize,
}

impl Candidate {
    pub fn text(&self) -> String {
        detokenize(&self.tokens)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidatePool {
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub utterance: String,
    pub s_align: f64,
    pub final_score: f64,
    pub report: AlignmentReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankResult {
    pub ranked: Vec<RankedCandidate>,
}

impl RerankResult {
    pub fn winner(&self) -> &RankedCandidate {
        &self.ranked[0]
    }
}

/// Relexicalizes every candidate with `mr`, aligns it against `mr` and sorts
/// by `exp(normalized_score) × s_align`, ties by roster order then beam rank.
pub fn rerank(pool: &CandidatePool, mr: &MeaningRepresentation, gaz: &Gazetteer) -> Result<RerankResult, EnsembleError> {
    if pool.candidates.is_empty() {
        return Err(EnsembleError::EmptyPool);
    }
    let mut ranked: Vec<RankedCandidate> = pool
        .candidates
        .iter()
        .map(|c| {
            let utterance = restore_value_case(&relexicalize(&c.text(), mr).text, mr);
            let report = align_utterance(&utterance, mr, gaz);
            let s_align = report_score(&report);
            RankedCandidate {
                final_score: libm::exp(c.normalized_score) * s_align,
                candidate: c.clone(),
                utterance,
                s_align,
                report,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.final_score
            .total_cmp(&a.final_score)
            .then(a.candidate.source_index.cmp(&b.candidate.source_index))
            .then(a.candidate.beam_rank.cmp(&b.candidate.beam_rank))
    });
    Ok(RerankResult { ranked })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub name: String,
    pub model: Submodel,
    /// Length-penalty exponent used when decoding with this member.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<Member>,
    pub pool_k: usize,
    pub max_len: usize,
}

impl Ensemble {
    /// Top `pool_k` beam candidates of every member for a delexicalized MR.
    pub fn pool(&self, delex_mr: &MeaningRepresentation) -> Result<CandidatePool, EnsembleError> {
        if self.members.is_empty() {
            return Err(EnsembleError::NoSubmodels);
        }
        let mut candidates = Vec::new();
        for (i, m) in self.members.iter().enumerate() {
            let hyps = m.model.decode(delex_mr, self.pool_k.max(1), m.alpha, self.max_len)?;
            for (rank, h) in hyps.into_iter().enumerate() {
                candidates.push(Candidate {
                    tokens: m.model.tgt_vocab.decode(&h.tokens),
                    log_prob: h.log_prob,
                    normalized_score: h.normalized_score,
                    source_model: m.name.clone(),
                    source_index: i,
                    beam_rank: rank,
                });
            }
        }
        Ok(CandidatePool { candidates })
    }

    /// Delexicalizes, pools, reranks and relexicalizes; the returned
    /// utterance never contains placeholder tokens.
    pub fn generate_mr(
        &self,
        mr: &MeaningRepresentation,
        policy: &DelexPolicy,
        gaz: &Gazetteer,
    ) -> Result<(String, RerankResult), EnsembleError> {
        let pool = self.pool(&delexicalize_mr(mr, policy))?;
        let result = rerank(&pool, mr, gaz)?;
        let utterance = strip_placeholders(&result.winner().utterance);
        Ok((utterance, result))
    }

    pub fn generate(
        &self,
        raw_mr: &str,
        dialect: Dialect,
        policy: &DelexPolicy,
        gaz: &Gazetteer,
    ) -> Result<(String, RerankResult), EnsembleError> {
        self.generate_mr(&parse_mr(raw_mr, dialect)?, policy, gaz)
    }
}

/// Convenience: a single-member "ensemble" as used to score a submodel alone.
pub fn solo(name: &str, model: Submodel, alpha: f64, pool_k: usize, max_len: usize) -> Ensemble {
    Ensemble { members: alloc::vec![Member { name: name.to_string(), model, alpha }], pool_k, max_len }
}
