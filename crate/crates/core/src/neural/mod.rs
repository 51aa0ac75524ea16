//! Attentional encoder-decoder submodels.
//!
//! Two encoders are available: a bidirectional LSTM and a pooling encoder
//! (position-augmented embeddings, windowed mean, projection and `tanh`).
//! The decoder is an LSTM stack fed with the previous token embedding and the
//! attention context; attention is a one-hidden-layer MLP over the encoder
//! states conditioned on the previous top-layer decoder state.
//!
//! Everything runs in `f64` on a small reverse-mode tape ([`tape`]).

use alloc::string::String;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod beam;
pub mod model;
pub mod tape;
pub mod tensor;
pub mod train;
pub mod vocab;

pub use beam::{beam_search, greedy_decode, length_penalty, Hypothesis, StepModel};
pub use model::{AttentionWeights, DecoderState, EncoderOutput, Seq2Seq};
pub use tensor::{Params, Tensor};
pub use train::{grad_check, train, GradCheckReport, Submodel, TrainingLog};
pub use vocab::{Vocab, BOS, EOS, UNK};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("source sequence is empty")]
    EmptySource,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("tensor `{name}` has shape {found:?}, expected {expected:?}")]
    ShapeMismatch { name: String, expected: alloc::vec::Vec<usize>, found: alloc::vec::Vec<usize> },
    #[error("missing tensor `{0}`")]
    MissingTensor(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    Bilstm,
    CnnPooling,
}

impl core::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            EncoderKind::Bilstm => "bilstm",
            EncoderKind::CnnPooling => "cnn_pooling",
        })
    }
}

impl core::str::FromStr for EncoderKind {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bilstm" => Ok(EncoderKind::Bilstm),
            "cnn_pooling" | "cnn" => Ok(EncoderKind::CnnPooling),
            other => Err(NeuralError::Config(alloc::format!("unknown encoder kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub src_vocab_size: usize,
    pub tgt_vocab_size: usize,
    pub embed_dim: usize,
    pub encoder: EncoderKind,
    /// Per-direction size for the BiLSTM; the pooling encoder outputs twice
    /// this size so both encoders produce states of equal width.
    pub encoder_hidden: usize,
    pub decoder_layers: usize,
    pub decoder_hidden: usize,
    pub attention_dim: usize,
    /// Longest source position with its own embedding (pooling encoder).
    pub max_positions: usize,
    pub beam_width: usize,
    pub length_penalty: f64,
    pub max_decode_len: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub clip_norm: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            src_vocab_size: 3,
            tgt_vocab_size: 3,
            embed_dim: 32,
            encoder: EncoderKind::Bilstm,
            encoder_hidden: 64,
            decoder_layers: 1,
            decoder_hidden: 64,
            attention_dim: 64,
            max_positions: 64,
            beam_width: 10,
            length_penalty: 0.6,
            max_decode_len: 60,
            learning_rate: 1e-3,
            epochs: 10,
            batch_size: 16,
            clip_norm: 5.0,
            init_scale: 0.1,
            seed: 1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), NeuralError> {
        let dims = [
            ("src_vocab_size", self.src_vocab_size),
            ("tgt_vocab_size", self.tgt_vocab_size),
            ("embed_dim", self.embed_dim),
            ("encoder_hidden", self.encoder_hidden),
            ("decoder_layers", self.decoder_layers),
            ("decoder_hidden", self.decoder_hidden),
            ("attention_dim", self.attention_dim),
            ("max_positions", self.max_positions),
            ("beam_width", self.beam_width),
            ("max_decode_len", self.max_decode_len),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(NeuralError::Config(alloc::format!("{name} must be at least 1")));
            }
        }
        if self.src_vocab_size < 3 || self.tgt_vocab_size < 3 {
            return Err(NeuralError::Config("vocabularies must hold the three special tokens".into()));
        }
        if !(0.0..=2.0).contains(&self.length_penalty) {
            return Err(NeuralError::Config("length penalty must lie in [0, 2]".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::Config("learning rate must be positive".into()));
        }
        if !(self.init_scale > 0.0 && self.clip_norm > 0.0) {
            return Err(NeuralError::Config("init scale and clip norm must be positive".into()));
        }
        Ok(())
    }

    /// Width of the encoder states `h_i`.
    pub fn context_dim(&self) -> usize {
        2 * self.encoder_hidden
    }
}
