//! Core algorithms for a slot-aligned, ensemble data-to-text generator.
//!
//! Everything in this crate is pure computation over in-memory values and
//! builds without `std` (only `alloc` is required). File formats, model
//! checkpoints and the command-line front end live in the companion `ensnlg`
//! crate.
//!
//! The pipeline, in the order the modules are usually used:
//!
//! * [`corpus`]: meaning representations (MRs), tokenization, sentence
//!   splitting and dataset statistics.
//! * [`delex`]: featureful placeholder tokens for verbatim slot values.
//! * [`aligner`]: gazetteer-driven slot alignment producing the unaligned and
//!   over-generated counts.
//! * [`augment`]: utterance/MR splitting and slot permutation.
//! * [`styleselect`]: discourse-cue scoring and reference selection.
//! * [`neural`]: attentional encoder-decoder submodels, training and beam
//!   search.
//! * [`ensemble`]: candidate pooling and slot-alignment reranking.
//! * [`metrics`]: BLEU, NIST, METEOR-lite, ROUGE-L and slot error rate.
//! * [`synthetic`]: a seeded restaurant-domain corpus generator for
//!   self-contained end-to-end runs.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aligner;
pub mod augment;
pub mod corpus;
pub mod delex;
pub mod ensemble;
pub mod lexicon;
pub mod metrics;
pub mod neural;
pub mod styleselect;
pub mod synthetic;

pub use aligner::{AlignmentReport, Gazetteer};
pub use corpus::{Dataset, Dialect, Domain, MeaningRepresentation, Sample, SlotValue, Split};
pub use delex::{DelexPolicy, PlaceholderToken};
