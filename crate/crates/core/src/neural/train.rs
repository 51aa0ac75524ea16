use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::beam::{beam_search, BoundDecoder, Hypothesis};
use super::model::Seq2Seq;
use super::vocab::{Vocab, EOS};
use super::{Hyperparams, NeuralError};
use crate::corpus::{tokenize, Dataset, MeaningRepresentation};

/// A network together with the vocabularies it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Submodel {
    pub net: Seq2Seq,
    pub src_vocab: Vocab,
    pub tgt_vocab: Vocab,
}

impl Submodel {
    pub fn source_ids(&self, mr: &MeaningRepresentation) -> Vec<usize> {
        self.src_vocab.encode(&mr.linearize())
    }

    /// Beam candidates for a (delexicalized) MR, best first.
    pub fn decode(&self, mr: &MeaningRepresentation, width: usize, alpha: f64, max_len: usize) -> Result<Vec<Hypothesis>, NeuralError> {
        let enc = self.net.encode(&self.source_ids(mr))?;
        Ok(beam_search(&BoundDecoder { net: &self.net, enc }, width, alpha, max_len))
    }

    pub fn detokenize(&self, ids: &[usize]) -> String {
        self.tgt_vocab.decode(ids).join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-token cross-entropy over the epoch's batches.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    /// Mean per-token loss of the freshly initialized model on the training set.
    pub initial_loss: f64,
    pub epochs: Vec<EpochLog>,
}

struct Example {
    src: Vec<usize>,
    tgt: Vec<usize>,
}

fn examples(ds: &Dataset, src: &Vocab, tgt: &Vocab) -> Vec<Example> {
    ds.samples
        .iter()
        .map(|s| {
            let mut t = tgt.encode(&tokenize(&s.reference).tokens);
            t.push(EOS);
            Example { src: src.encode(&s.mr.linearize()), tgt: t }
        })
        .filter(|e| !e.src.is_empty())
        .collect()
}

fn mean_loss(net: &Seq2Seq, ex: &[Example]) -> Result<f64, NeuralError> {
    let mut total = 0.0;
    let mut tokens = 0;
    for e in ex {
        total += net.sequence_loss(&e.src, &e.tgt, None)?;
        tokens += e.tgt.len();
    }
    Ok(if tokens == 0 { 0.0 } else { total / tokens as f64 })
}

struct Adam {
    lr: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn step(&mut self, net: &mut Seq2Seq, grads: &[Vec<f64>]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(Self::B1, self.t as f64);
        let c2 = 1.0 - libm::pow(Self::B2, self.t as f64);
        for (pid, g) in grads.iter().enumerate() {
            let p = &mut net.params_mut().get_mut(pid).values;
            for (k, gk) in g.iter().enumerate() {
                let m = &mut self.m[pid][k];
                let v = &mut self.v[pid][k];
                *m = Self::B1 * *m + (1.0 - Self::B1) * gk;
                *v = Self::B2 * *v + (1.0 - Self::B2) * gk * gk;
                p[k] -= self.lr * (*m / c1) / (libm::sqrt(*v / c2) + Self::EPS);
            }
        }
    }
}

fn clip(grads: &mut [Vec<f64>], max_norm: f64) {
    let norm = libm::sqrt(grads.iter().flatten().map(|g| g * g).sum::<f64>());
    if norm > max_norm {
        let s = max_norm / norm;
        grads.iter_mut().flatten().for_each(|g| *g *= s);
    }
}

/// Trains a submodel on a delexicalized dataset. Vocabulary sizes in `hyper`
/// are replaced by those of the vocabularies built from `train`.
pub fn train(train: &Dataset, validation: Option<&Dataset>, hyper: &Hyperparams) -> Result<(Submodel, TrainingLog), NeuralError> {
    let src_seqs: Vec<Vec<String>> = train.samples.iter().map(|s| s.mr.linearize()).collect();
    let tgt_seqs: Vec<Vec<String>> = train.samples.iter().map(|s| tokenize(&s.reference).tokens).collect();
    let src_vocab = Vocab::build(src_seqs.iter(), 1);
    let tgt_vocab = Vocab::build(tgt_seqs.iter(), 1);
    let hyper = Hyperparams { src_vocab_size: src_vocab.len(), tgt_vocab_size: tgt_vocab.len(), ..hyper.clone() };
    let mut net = Seq2Seq::new(hyper.clone())?;

    let train_ex = examples(train, &src_vocab, &tgt_vocab);
    if train_ex.is_empty() {
        return Err(NeuralError::EmptyTrainingSet);
    }
    let val_ex = validation.map(|v| examples(v, &src_vocab, &tgt_vocab));

    let mut log = TrainingLog { initial_loss: mean_loss(&net, &train_ex)?, epochs: Vec::new() };
    let mut adam = Adam { lr: hyper.learning_rate, m: net.params().zeros_like(), v: net.params().zeros_like(), t: 0 };
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..train_ex.len()).collect();
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        let (mut epoch_loss, mut epoch_tokens) = (0.0, 0usize);
        for batch in order.chunks(hyper.batch_size) {
            let tokens: usize = batch.iter().map(|&i| train_ex[i].tgt.len()).sum();
            let mut grads = net.params().zeros_like();
            for &i in batch {
                let e = &train_ex[i];
                epoch_loss += net.sequence_loss(&e.src, &e.tgt, Some((&mut grads, 1.0 / tokens as f64)))?;
            }
            epoch_tokens += tokens;
            clip(&mut grads, hyper.clip_norm);
            adam.step(&mut net, &grads);
        }
        let val_loss = match &val_ex {
            Some(v) if !v.is_empty() => Some(mean_loss(&net, v)?),
            _ => None,
        };
        log.epochs.push(EpochLog { epoch, train_loss: epoch_loss / epoch_tokens as f64, val_loss });
    }
    Ok((Submodel { net, src_vocab, tgt_vocab }, log))
}

/// Mean per-token loss of a trained submodel on a dataset.
pub fn evaluate_loss(model: &Submodel, ds: &Dataset) -> Result<f64, NeuralError> {
    mean_loss(&model.net, &examples(ds, &model.src_vocab, &model.tgt_vocab))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Worst relative error per parameter tensor.
    pub per_group: Vec<(String, f64)>,
    pub checked: usize,
    pub max_absolute_error: f64,
    /// Largest absolute analytic gradient seen, to tell a vacuous check apart.
    pub max_abs_gradient: f64,
}

/// Denominator floor of the relative error. Central differences on a loss of
/// magnitude `L` carry round-off of roughly `L · 2⁻⁵² / ε`, about 1e-10 for
/// the losses and `ε` used here, so smaller gradients cannot be resolved.
pub const GRAD_CHECK_FLOOR: f64 = 1e-5;

/// Compares the analytic gradient of the summed loss against central finite
/// differences for every parameter entry. Relative error is
/// `|a − n| / max(|a|, |n|, GRAD_CHECK_FLOOR)`.
pub fn grad_check(net: &Seq2Seq, src: &[usize], tgt: &[usize], eps: f64) -> Result<GradCheckReport, NeuralError> {
    let mut grads = net.params().zeros_like();
    net.sequence_loss(src, tgt, Some((&mut grads, 1.0)))?;
    let mut probe = net.clone();
    let mut report = GradCheckReport { max_relative_error: 0.0, per_group: Vec::new(), checked: 0, max_absolute_error: 0.0, max_abs_gradient: 0.0 };
    for pid in 0..net.params().len() {
        let mut worst: f64 = 0.0;
        for k in 0..net.params().get(pid).len() {
            let orig = net.params().get(pid).values[k];
            probe.params_mut().get_mut(pid).values[k] = orig + eps;
            let up = probe.sequence_loss(src, tgt, None)?;
            probe.params_mut().get_mut(pid).values[k] = orig - eps;
            let down = probe.sequence_loss(src, tgt, None)?;
            probe.params_mut().get_mut(pid).values[k] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let analytic = grads[pid][k];
            let abs = (analytic - numeric).abs();
            let rel = abs / analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR);
            report.max_absolute_error = report.max_absolute_error.max(abs);
            worst = worst.max(rel);
            report.max_abs_gradient = report.max_abs_gradient.max(analytic.abs());
            report.checked += 1;
        }
        report.per_group.push((net.params().name(pid).into(), worst));
        report.max_relative_error = report.max_relative_error.max(worst);
    }
    Ok(report)
}

/// Zero gradients of every parameter, used for the empty-target case.
pub fn loss_gradients(net: &Seq2Seq, src: &[usize], tgt: &[usize]) -> Result<(f64, Vec<Vec<f64>>), NeuralError> {
    let mut grads = net.params().zeros_like();
    let loss = net.sequence_loss(src, tgt, Some((&mut grads, 1.0)))?;
    Ok((loss, grads))
}
