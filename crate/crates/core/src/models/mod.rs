//! Native trainable components: a binary sentence gate, a linear-chain
//! sequence tagger and a span-type classifier, all averaged perceptrons
//! over hashed sparse features. Predictions produced elsewhere (e.g. by a
//! fine-tuned transformer) come in through [`external`].

pub mod external;
pub mod features;
pub mod file;
pub mod linear;
pub mod tagger;
pub mod viterbi;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{serialize_conll, Corpus, CorpusError};
use crate::spans::TagScheme;

pub use external::{ExternalPredictions, ValidatedExternal};
pub use features::{featurize_sentence, featurize_span_query, featurize_token, FeatureVector, SpanQuery};
pub use file::{AnyModel, ModelKind};
pub use linear::{train_gate, train_span_classifier, GateModel, LinearModel, TyperModel};
pub use tagger::{train_tagger, viterbi_decode, ChainTaggerModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("token index {index} out of range for sentence of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("training corpus contains no entity spans")]
    NoSpansInCorpus,
    #[error("invalid hyper-parameters: {0}")]
    InvalidHyper(String),
    #[error("invalid model file: {0}")]
    InvalidModelFile(String),
    #[error("line {line}: malformed JSON ({message})")]
    MalformedJson { line: usize, message: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("unknown sentence id `{0}`")]
    UnknownSentenceId(String),
    #[error("sentence `{id}`: {what} has length {found}, expected {expected}")]
    LengthMismatch { id: String, what: &'static str, expected: usize, found: usize },
    #[error("external predictions mix typed and untyped tags")]
    MixedSchemes,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Training hyper-parameters shared by all perceptron trainers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub epochs: usize,
    pub seed: u64,
    /// Step size of each perceptron update.
    pub learning_rate: f64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { epochs: 10, seed: 42, learning_rate: 1.0 }
    }
}

impl Hyper {
    pub(crate) fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::InvalidHyper("epochs must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ModelError::InvalidHyper("learning rate must be positive and finite".into()));
        }
        Ok(())
    }
}

/// Provenance recorded in every model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub averaged: bool,
    pub corpus_fingerprint: String,
    pub feature_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<TagScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_subset: Option<String>,
}

impl TrainMeta {
    pub(crate) fn new(hyper: &Hyper, corpus: &Corpus) -> Self {
        TrainMeta {
            epochs: hyper.epochs,
            seed: hyper.seed,
            learning_rate: hyper.learning_rate,
            averaged: true,
            corpus_fingerprint: corpus_fingerprint(corpus),
            feature_hash: features::FEATURE_HASH.to_string(),
            scheme: None,
            train_subset: None,
        }
    }

    pub(crate) fn untrained() -> Self {
        TrainMeta {
            epochs: 0,
            seed: 0,
            learning_rate: 0.0,
            averaged: false,
            corpus_fingerprint: String::new(),
            feature_hash: features::FEATURE_HASH.to_string(),
            scheme: None,
            train_subset: None,
        }
    }
}

/// SHA-256 of the corpus in its canonical serialized form.
pub fn corpus_fingerprint(corpus: &Corpus) -> String {
    let text = serialize_conll(corpus).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Index of the highest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        assert_eq!(argmax(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(argmax(&[1.0, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[-1.0, -3.0]), 0);
    }

    #[test]
    fn zero_epochs_rejected() {
        let h = Hyper { epochs: 0, ..Hyper::default() };
        assert!(matches!(h.validate(), Err(ModelError::InvalidHyper(_))));
    }
}
