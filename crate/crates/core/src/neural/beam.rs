//! Beam search with length normalization.

use alloc::vec::Vec;

use super::model::{DecoderState, EncoderOutput, Seq2Seq};
use super::vocab::{BOS, EOS};

/// Anything that yields next-token log-probabilities from a state.
pub trait StepModel {
    type State: Clone;

    fn start(&self) -> Self::State;

    /// Log-probabilities of the next token after feeding `token`, and the
    /// updated state.
    fn step(&self, state: &Self::State, token: usize) -> (Vec<f64>, Self::State);

    fn bos(&self) -> usize {
        BOS
    }

    fn eos(&self) -> usize {
        EOS
    }
}

/// `lp(Y) = ((5 + |Y|) / 6)^α`.
pub fn length_penalty(len: usize, alpha: f64) -> f64 {
    libm::pow((5.0 + len as f64) / 6.0, alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    /// Emitted tokens without the start and end markers.
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub normalized_score: f64,
    /// Whether the hypothesis ended with the end token.
    pub finished: bool,
}

impl Hypothesis {
    /// `|Y|`: decoding steps taken, counting the end token.
    pub fn length(&self) -> usize {
        self.tokens.len() + usize::from(self.finished)
    }
}

fn finish(tokens: Vec<usize>, log_prob: f64, finished: bool, alpha: f64) -> Hypothesis {
    let len = tokens.len() + usize::from(finished);
    Hypothesis { normalized_score: log_prob / length_penalty(len, alpha), tokens, log_prob, finished }
}

/// Keeps the `width` best partial hypotheses (by log-probability) at every
/// step; hypotheses emitting the end token are set aside. Returns at most
/// `width` hypotheses sorted by normalized score, best first.
pub fn beam_search<M: StepModel>(model: &M, width: usize, alpha: f64, max_len: usize) -> Vec<Hypothesis> {
    let width = width.max(1);
    let eos = model.eos();
    let mut live: Vec<(Vec<usize>, f64, M::State, usize)> = alloc::vec![(Vec::new(), 0.0, model.start(), model.bos())];
    let mut done: Vec<Hypothesis> = Vec::new();
    for _ in 0..max_len {
        let mut expansions: Vec<(f64, usize, usize, M::State)> = Vec::new();
        for (b, (_, lp, state, last)) in live.iter().enumerate() {
            let (logp, next) = model.step(state, *last);
            for (tok, l) in logp.iter().enumerate() {
                if l.is_finite() {
                    expansions.push((lp + l, b, tok, next.clone()));
                }
            }
        }
        expansions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        expansions.truncate(width);
        let mut next_live = Vec::with_capacity(width);
        for (lp, b, tok, state) in expansions {
            let mut tokens = live[b].0.clone();
            if tok == eos {
                done.push(finish(tokens, lp, true, alpha));
            } else {
                tokens.push(tok);
                next_live.push((tokens, lp, state, tok));
            }
        }
        live = next_live;
        if live.is_empty() {
            break;
        }
    }
    done.extend(live.into_iter().map(|(tokens, lp, _, _)| finish(tokens, lp, false, alpha)));
    done.sort_by(|a, b| b.normalized_score.total_cmp(&a.normalized_score));
    done.truncate(width);
    done
}

/// Arg-max decoding, for reference.
pub fn greedy_decode<M: StepModel>(model: &M, alpha: f64, max_len: usize) -> Hypothesis {
    let mut state = model.start();
    let mut last = model.bos();
    let mut tokens = Vec::new();
    let mut lp = 0.0;
    for _ in 0..max_len {
        let (logp, next) = model.step(&state, last);
        let (tok, l) = logp
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &l)| if l > best.1 { (i, l) } else { best });
        lp += l;
        if tok == model.eos() {
            return finish(tokens, lp, true, alpha);
        }
        tokens.push(tok);
        state = next;
        last = tok;
    }
    finish(tokens, lp, false, alpha)
}

/// A trained network bound to one encoded source sequence.
pub struct BoundDecoder<'a> {
    pub net: &'a Seq2Seq,
    pub enc: EncoderOutput,
}

impl StepModel for BoundDecoder<'_> {
    type State = DecoderState;

    fn start(&self) -> DecoderState {
        self.net.initial_state(&self.enc)
    }

    fn step(&self, state: &DecoderState, token: usize) -> (Vec<f64>, DecoderState) {
        self.net.decode_step_log(token, state, &self.enc)
    }
}
