//! Software-mention recognition with flat and cascaded pipelines.
//!
//! Three approaches share one set of building blocks:
//!
//! 1. a flat tagger over 27 typed BIO labels;
//! 2. an untyped BIO extractor followed by a span-type classifier;
//! 3. a sentence gate in front of approach 2.
//!
//! Components are either native averaged-perceptron models
//! ([`models`]) or predictions produced elsewhere and loaded from JSONL
//! ([`models::external`]). [`eval`] scores spans by exact match and can
//! isolate each cascade stage on gold inputs.

pub mod cli;
pub mod corpus;
pub mod eval;
pub mod models;
pub mod pipeline;
pub mod spans;
pub mod synthetic;

pub use corpus::{
    corpus_stats, parse_conll, serialize_conll, Corpus, CorpusError, EntityGroup, EntityRole, EntityType,
    LabeledSentence, Sentence, StatsReport,
};
pub use eval::{
    compare_approaches, diagnose_stage1, diagnose_stage2, diagnose_stage3, evaluate, ClassKey, ClassMetrics,
    CompareTable, EvalError, EvalReport,
};
pub use pipeline::{Approach, Gate, Pipeline, PipelineError, SentencePrediction, Tagger, Typer};
pub use spans::{decode_bio, encode_bio, Span, Tag, TagScheme, TagSequence};
