use std::path::PathBuf;

use ensnlg_core::aligner::RuleError;
use ensnlg_core::augment::AugmentError;
use ensnlg_core::corpus::CorpusError;
use ensnlg_core::ensemble::EnsembleError;
use ensnlg_core::lexicon::LexiconError;
use ensnlg_core::metrics::MetricsError;
use ensnlg_core::neural::NeuralError;
use ensnlg_core::styleselect::StyleError;
use ensnlg_core::synthetic::GrammarError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlgError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: row {row}: {message}", path.display())]
    Parse { path: PathBuf, row: usize, message: String },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: checkpoint format version {found}, expected {expected}", path.display())]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("{}: tensor `{name}` has shape {found:?}, expected {expected:?}", path.display())]
    ShapeMismatch { path: PathBuf, name: String, expected: Vec<usize>, found: Vec<usize> },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

impl NlgError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NlgError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        NlgError::Format { path: path.into(), message: message.into() }
    }

    /// Short name of the failure class, used in CLI diagnostics.
    pub fn class(&self) -> &'static str {
        match self {
            NlgError::Io { .. } => "io",
            NlgError::Parse { .. } | NlgError::Format { .. } | NlgError::Corpus(_) => "input",
            NlgError::VersionMismatch { .. } | NlgError::ShapeMismatch { .. } => "checkpoint",
            NlgError::Config(_) | NlgError::Rules(_) | NlgError::Lexicon(_) | NlgError::Style(_) | NlgError::Augment(_) => {
                "config"
            }
            NlgError::Neural(_) => "model",
            NlgError::Ensemble(_) => "ensemble",
            NlgError::Metrics(_) => "metrics",
            NlgError::Grammar(_) => "grammar",
        }
    }

    /// Process exit code for the failure class.
    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "io" => 3,
            "input" => 4,
            "checkpoint" => 5,
            "config" => 6,
            "model" => 7,
            "ensemble" => 8,
            "metrics" => 9,
            _ => 10,
        }
    }
}

pub type Result<T, E = NlgError> = std::result::Result<T, E>;
