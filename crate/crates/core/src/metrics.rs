//! Corpus-level automatic metrics: BLEU, NIST, METEOR-lite, ROUGE-L and the
//! slot error rate.
//!
//! All text metrics work on the lowercased tokens produced by
//! [`tokenize`](crate::corpus::tokenize).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aligner::{align_utterance, Gazetteer};
use crate::corpus::{tokenize, MeaningRepresentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no hypotheses to evaluate")]
    EmptyInput,
    #[error("pair {0} has no references")]
    NoReferences(usize),
    #[error("pair {0} has no MR, which the slot error rate needs")]
    MissingMr(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub hypothesis: String,
    pub references: Vec<String>,
    pub mr: Option<MeaningRepresentation>,
}

impl EvalPair {
    pub fn new(hypothesis: impl Into<String>, references: Vec<String>) -> Self {
        Self { hypothesis: hypothesis.into(), references, mr: None }
    }
}

struct Tokenized {
    hyp: Vec<String>,
    refs: Vec<Vec<String>>,
}

fn prepare(pairs: &[EvalPair]) -> Result<Vec<Tokenized>, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.references.is_empty() {
                return Err(MetricsError::NoReferences(i));
            }
            Ok(Tokenized { hyp: tokenize(&p.hypothesis).tokens, refs: p.references.iter().map(|r| tokenize(r).tokens).collect() })
        })
        .collect()
}

fn ngrams(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut m = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Largest count of every n-gram across the references.
fn max_ref_counts(refs: &[Vec<String>], n: usize) -> BTreeMap<&[String], usize> {
    let mut m: BTreeMap<&[String], usize> = BTreeMap::new();
    for r in refs {
        for (g, c) in ngrams(r, n) {
            let e = m.entry(g).or_insert(0);
            *e = (*e).max(c);
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BleuConfig {
    pub max_n: usize,
    /// Replaces zero match counts by this value when set.
    pub smoothing: Option<f64>,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self { max_n: 4, smoothing: None }
    }
}

/// Corpus BLEU with clipped n-gram precisions and a brevity penalty against
/// the closest reference length (shorter on ties).
pub fn bleu(pairs: &[EvalPair], cfg: &BleuConfig) -> Result<f64, MetricsError> {
    let data = prepare(pairs)?;
    let mut matched = vec![0.0; cfg.max_n];
    let mut total = vec![0.0; cfg.max_n];
    let (mut c, mut r) = (0usize, 0usize);
    for t in &data {
        c += t.hyp.len();
        r += t
            .refs
            .iter()
            .map(|x| x.len())
            .min_by_key(|&l| (l.abs_diff(t.hyp.len()), l))
            .unwrap_or(0);
        for n in 1..=cfg.max_n {
            let refc = max_ref_counts(&t.refs, n);
            for (g, k) in ngrams(&t.hyp, n) {
                matched[n - 1] += k.min(refc.get(g).copied().unwrap_or(0)) as f64;
                total[n - 1] += k as f64;
            }
        }
    }
    if c == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    for n in 0..cfg.max_n {
        let m = match (matched[n], cfg.smoothing) {
            (m, _) if m > 0.0 => m,
            (_, Some(eps)) if total[n] > 0.0 => eps,
            _ => return Ok(0.0),
        };
        log_sum += libm::log(m / total[n]);
    }
    let bp = if c > r { 1.0 } else { libm::exp(1.0 - r as f64 / c as f64) };
    Ok(bp * libm::exp(log_sum / cfg.max_n as f64))
}

/// Information weight of every n-gram (orders `1..=max_n`) in a reference
/// corpus: `log2(count(w_1..w_{n-1}) / count(w_1..w_n))`, with the total word
/// count standing in for the empty prefix.
pub fn ngram_information(references: &[Vec<String>], max_n: usize) -> BTreeMap<Vec<String>, f64> {
    let mut counts: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let mut words = 0usize;
    for r in references {
        words += r.len();
        for n in 1..=max_n {
            for (g, c) in ngrams(r, n) {
                *counts.entry(g.to_vec()).or_insert(0) += c;
            }
        }
    }
    counts
        .iter()
        .map(|(g, &c)| {
            let prefix = if g.len() == 1 { words } else { counts[&g[..g.len() - 1]] };
            (g.clone(), libm::log2(prefix as f64 / c as f64))
        })
        .collect()
}

/// NIST score: information-weighted n-gram matches per hypothesis n-gram,
/// summed over orders, times `exp(β · ln²(min(c / r̄, 1)))` where `r̄` is the
/// summed average reference length and `β` makes the factor ½ at 2/3 length.
pub fn nist(pairs: &[EvalPair], max_n: usize) -> Result<f64, MetricsError> {
    let data = prepare(pairs)?;
    let all_refs: Vec<Vec<String>> = data.iter().flat_map(|t| t.refs.iter().cloned()).collect();
    let info = ngram_information(&all_refs, max_n);
    let mut score = 0.0;
    for n in 1..=max_n {
        let (mut gain, mut total) = (0.0, 0usize);
        for t in &data {
            let refc = max_ref_counts(&t.refs, n);
            for (g, k) in ngrams(&t.hyp, n) {
                let m = k.min(refc.get(g).copied().unwrap_or(0));
                if m > 0 {
                    gain += m as f64 * info.get(g).copied().unwrap_or(0.0);
                }
                total += k;
            }
        }
        if total > 0 {
            score += gain / total as f64;
        }
    }
    let c: usize = data.iter().map(|t| t.hyp.len()).sum();
    let r: f64 = data.iter().map(|t| t.refs.iter().map(Vec::len).sum::<usize>() as f64 / t.refs.len() as f64).sum();
    let ratio = if r > 0.0 { (c as f64 / r).min(1.0) } else { 1.0 };
    if ratio <= 0.0 {
        return Ok(0.0);
    }
    let beta = libm::log(0.5) / libm::pow(libm::log(1.5), 2.0);
    Ok(score * libm::exp(beta * libm::pow(libm::log(ratio), 2.0)))
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// LCS F-measure against the best reference of each pair, averaged.
pub fn rouge_l(pairs: &[EvalPair], beta: f64) -> Result<f64, MetricsError> {
    let data = prepare(pairs)?;
    let b2 = beta * beta;
    let total: f64 = data
        .iter()
        .map(|t| {
            t.refs
                .iter()
                .map(|r| {
                    let l = lcs(&t.hyp, r) as f64;
                    if l == 0.0 {
                        return 0.0;
                    }
                    let (p, rec) = (l / t.hyp.len() as f64, l / r.len() as f64);
                    (1.0 + b2) * p * rec / (rec + b2 * p)
                })
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / data.len() as f64)
}

/// Small rule-based suffix stripper used by METEOR-lite's stem stage.
pub fn stem(word: &str) -> String {
    const RULES: [(&str, &str); 13] = [
        ("ational", "ate"),
        ("ization", "ize"),
        ("iveness", "ive"),
        ("fulness", "ful"),
        ("ousness", "ous"),
        ("ingly", ""),
        ("edly", ""),
        ("sses", "ss"),
        ("ies", "y"),
        ("ing", ""),
        ("ed", ""),
        ("ly", ""),
        ("s", ""),
    ];
    let mut w = word.to_lowercase();
    for (suffix, repl) in RULES {
        if let Some(base) = w.strip_suffix(suffix) {
            if base.chars().count() < 3 || (suffix == "s" && (base.ends_with('s') || base.ends_with('u') || base.ends_with('i'))) {
                continue;
            }
            let base = ["shes", "ches", "xes", "zes"]
                .iter()
                .find(|e| w.ends_with(*e))
                .map_or(base, |_| &w[..w.len() - 2]);
            w = alloc::format!("{base}{repl}");
            break;
        }
    }
    if w.chars().count() > 3 && w.ends_with('e') {
        w.pop();
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeteorConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MeteorConfig {
    fn default() -> Self {
        Self { alpha: 0.9, beta: 3.0, gamma: 0.5 }
    }
}

/// Word alignment: exact matches first, then stems. Within a stage each
/// hypothesis word takes the unmatched reference position that extends the
/// current chunk, otherwise the leftmost one.
fn meteor_alignment(hyp: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut ref_used = vec![false; reference.len()];
    let mut hyp_match: Vec<Option<usize>> = vec![None; hyp.len()];
    let stems_h: Vec<String> = hyp.iter().map(|w| stem(w)).collect();
    let stems_r: Vec<String> = reference.iter().map(|w| stem(w)).collect();
    for stage in 0..2 {
        for i in 0..hyp.len() {
            if hyp_match[i].is_some() {
                continue;
            }
            let eq = |j: usize| if stage == 0 { hyp[i] == reference[j] } else { stems_h[i] == stems_r[j] };
            let continuing = i
                .checked_sub(1)
                .and_then(|p| hyp_match[p])
                .map(|j| j + 1)
                .filter(|&j| j < reference.len() && !ref_used[j] && eq(j));
            let pick = continuing.or_else(|| (0..reference.len()).find(|&j| !ref_used[j] && eq(j)));
            if let Some(j) = pick {
                ref_used[j] = true;
                hyp_match[i] = Some(j);
            }
        }
    }
    hyp_match.iter().enumerate().filter_map(|(i, m)| m.map(|j| (i, j))).collect()
}

/// Number of runs of alignment links contiguous and monotone in both strings.
fn chunks(links: &[(usize, usize)]) -> usize {
    if links.is_empty() {
        return 0;
    }
    1 + links.windows(2).filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1)).count()
}

pub fn meteor_segment(hyp: &[String], reference: &[String], cfg: &MeteorConfig) -> f64 {
    let links = meteor_alignment(hyp, reference);
    let m = links.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let p = m / hyp.len() as f64;
    let r = m / reference.len() as f64;
    let fmean = p * r / (cfg.alpha * p + (1.0 - cfg.alpha) * r);
    let frag = if links.len() > 1 { (chunks(&links) - 1) as f64 / (m - 1.0) } else { 0.0 };
    fmean * (1.0 - cfg.gamma * libm::pow(frag, cfg.beta))
}

/// METEOR without synonym or paraphrase stages: best reference per pair,
/// averaged over the corpus.
pub fn meteor_lite(pairs: &[EvalPair], cfg: &MeteorConfig) -> Result<f64, MetricsError> {
    let data = prepare(pairs)?;
    let total: f64 =
        data.iter().map(|t| t.refs.iter().map(|r| meteor_segment(&t.hyp, r, cfg)).fold(0.0, f64::max)).sum();
    Ok(total / data.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrMode {
    /// Missed slots only.
    HumanEval,
    /// Missed plus over-generated slots.
    Rnnlg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrReport {
    pub unaligned: usize,
    pub overgenerated: usize,
    pub total_slots: usize,
    pub err: f64,
}

/// `Σ N_u / Σ N`, plus `Σ N_o` in the numerator in RNNLG mode. A corpus
/// without slots scores 0.
pub fn slot_error_rate(outputs: &[(String, MeaningRepresentation)], gaz: &Gazetteer, mode: ErrMode) -> ErrReport {
    let (mut nu, mut no, mut n) = (0, 0, 0);
    for (utt, mr) in outputs {
        let r = align_utterance(utt, mr, gaz);
        nu += r.n_unaligned();
        no += r.n_overgenerated();
        n += r.total_slots;
    }
    let errors = match mode {
        ErrMode::HumanEval => nu,
        ErrMode::Rnnlg => nu + no,
    };
    ErrReport { unaligned: nu, overgenerated: no, total_slots: n, err: if n == 0 { 0.0 } else { errors as f64 / n as f64 } }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub bleu: BleuConfig,
    pub nist_max_n: usize,
    pub rouge_beta: f64,
    pub meteor: MeteorConfig,
    pub err_mode: ErrMode,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { bleu: BleuConfig::default(), nist_max_n: 5, rouge_beta: 1.2, meteor: MeteorConfig::default(), err_mode: ErrMode::HumanEval }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub bleu: f64,
    pub nist: f64,
    pub meteor_lite: f64,
    pub rouge_l: f64,
    pub err: Option<ErrReport>,
    pub pairs: usize,
    pub config: MetricConfig,
    pub notes: Vec<String>,
}

/// All text metrics, plus the slot error rate when every pair has an MR and
/// a gazetteer is given.
pub fn evaluate(pairs: &[EvalPair], cfg: &MetricConfig, gaz: Option<&Gazetteer>) -> Result<MetricReport, MetricsError> {
    let err = match gaz {
        Some(g) if pairs.iter().any(|p| p.mr.is_some()) => {
            let outputs = pairs
                .iter()
                .enumerate()
                .map(|(i, p)| p.mr.clone().map(|m| (p.hypothesis.clone(), m)).ok_or(MetricsError::MissingMr(i)))
                .collect::<Result<Vec<_>, _>>()?;
            Some(slot_error_rate(&outputs, g, cfg.err_mode))
        }
        _ => None,
    };
    Ok(MetricReport {
        bleu: bleu(pairs, &cfg.bleu)?,
        nist: nist(pairs, cfg.nist_max_n)?,
        meteor_lite: meteor_lite(pairs, &cfg.meteor)?,
        rouge_l: rouge_l(pairs, cfg.rouge_beta)?,
        err,
        pairs: pairs.len(),
        config: cfg.clone(),
        notes: vec!["meteor_lite uses exact and stem matching only (no synonym or paraphrase stages)".to_string()],
    })
}
