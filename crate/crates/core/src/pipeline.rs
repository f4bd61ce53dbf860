//! The three end-to-end recognizers.
//!
//! * **Flat** (approach 1): one tagger over the 27-label typed scheme.
//! * **Two-stage** (approach 2): an untyped tagger finds spans, then a
//!   typer labels each span independently.
//! * **Three-stage** (approach 3): a sentence gate runs first. Sentences it
//!   rejects get no spans and never reach the tagger or typer; the rest go
//!   through the two-stage path unchanged.
//!
//! Components are trait objects, so native models and externally produced
//! predictions plug in interchangeably.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{Corpus, EntityType, Sentence};
use crate::models::{viterbi_decode, ChainTaggerModel, GateModel, ModelError, TyperModel, ValidatedExternal};
use crate::spans::{apply_types, decode_bio, Span, SpanError, TagScheme, TagSequence};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{component} uses the {found} scheme but approach {approach} needs {expected}")]
    SchemeMismatch { component: &'static str, approach: u8, expected: TagScheme, found: TagScheme },
    #[error("external tags use the {found} scheme but {expected} is required")]
    ExternalSchemeMismatch { expected: TagScheme, found: TagScheme },
    #[error("approach {approach} requires a {component}")]
    MissingComponent { approach: u8, component: &'static str },
    #[error("approach {approach} does not use a {component}")]
    UnexpectedComponent { approach: u8, component: &'static str },
    #[error("no external {what} for sentence `{id}`")]
    MissingExternal { what: &'static str, id: String },
    #[error("sentence `{id}`: tagger returned {found} tags for {expected} tokens")]
    LengthMismatch { id: String, expected: usize, found: usize },
    #[error("unknown approach {0}; expected 1, 2 or 3")]
    UnknownApproach(u8),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Span(#[from] SpanError),
}

/// Sentence-level entity detector.
pub trait Gate: Send + Sync {
    fn contains_entity(&self, sentence: &Sentence) -> Result<bool, PipelineError>;
}

/// Word-level BIO tagger.
pub trait Tagger: Send + Sync {
    fn scheme(&self) -> TagScheme;
    fn tag(&self, sentence: &Sentence) -> Result<TagSequence, PipelineError>;
}

/// Assigns an entity type to one detected span.
pub trait Typer: Send + Sync {
    fn classify(&self, sentence: &Sentence, span: &Span) -> Result<EntityType, PipelineError>;
}

impl Gate for GateModel {
    fn contains_entity(&self, sentence: &Sentence) -> Result<bool, PipelineError> {
        Ok(self.predict(sentence))
    }
}

impl Tagger for ChainTaggerModel {
    fn scheme(&self) -> TagScheme {
        ChainTaggerModel::scheme(self)
    }

    fn tag(&self, sentence: &Sentence) -> Result<TagSequence, PipelineError> {
        Ok(viterbi_decode(self, sentence))
    }
}

impl Typer for TyperModel {
    fn classify(&self, sentence: &Sentence, span: &Span) -> Result<EntityType, PipelineError> {
        Ok(self.predict_span(sentence, span)?)
    }
}

/// Gate decisions read from an external predictions file.
#[derive(Debug, Clone)]
pub struct ExternalGate(pub ValidatedExternal);

impl Gate for ExternalGate {
    fn contains_entity(&self, sentence: &Sentence) -> Result<bool, PipelineError> {
        self.0
            .gate(sentence.id())
            .ok_or_else(|| PipelineError::MissingExternal { what: "gate decision", id: sentence.id().to_string() })
    }
}

/// Word-level tags read from an external predictions file.
#[derive(Debug, Clone)]
pub struct ExternalTagger {
    data: ValidatedExternal,
    scheme: TagScheme,
}

impl ExternalTagger {
    /// Fails when the file's inferred scheme differs from `scheme`.
    pub fn new(data: ValidatedExternal, scheme: TagScheme) -> Result<Self, PipelineError> {
        if let Some(found) = data.inner().scheme() {
            if found != scheme {
                return Err(PipelineError::ExternalSchemeMismatch { expected: scheme, found });
            }
        }
        Ok(ExternalTagger { data, scheme })
    }
}

impl Tagger for ExternalTagger {
    fn scheme(&self) -> TagScheme {
        self.scheme
    }

    fn tag(&self, sentence: &Sentence) -> Result<TagSequence, PipelineError> {
        self.data
            .tags(sentence.id(), self.scheme)
            .ok_or_else(|| PipelineError::MissingExternal { what: "tags", id: sentence.id().to_string() })
    }
}

/// Span types read from an external predictions file, keyed by
/// `(sentence id, start, end)`.
#[derive(Debug, Clone)]
pub struct ExternalTyper(pub ValidatedExternal);

impl Typer for ExternalTyper {
    fn classify(&self, sentence: &Sentence, span: &Span) -> Result<EntityType, PipelineError> {
        self.0.span_type(sentence.id(), span.start(), span.end()).ok_or_else(|| PipelineError::MissingExternal {
            what: "span type",
            id: format!("{}[{}..{}]", sentence.id(), span.start(), span.end()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Approach {
    /// Token classification over the 27 typed labels.
    Flat,
    /// Untyped extraction followed by span typing.
    TwoStage,
    /// Sentence gate, then extraction and typing.
    ThreeStage,
}

impl Approach {
    pub fn number(self) -> u8 {
        match self {
            Approach::Flat => 1,
            Approach::TwoStage => 2,
            Approach::ThreeStage => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self, PipelineError> {
        match n {
            1 => Ok(Approach::Flat),
            2 => Ok(Approach::TwoStage),
            3 => Ok(Approach::ThreeStage),
            other => Err(PipelineError::UnknownApproach(other)),
        }
    }

    pub fn tagger_scheme(self) -> TagScheme {
        match self {
            Approach::Flat => TagScheme::Full27,
            _ => TagScheme::Untyped3,
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "approach {}", self.number())
    }
}

/// Intermediate outputs of each stage for one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTrace {
    /// Gate decision; absent when no gate ran.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_gate",
        deserialize_with = "de_gate"
    )]
    pub gate: Option<bool>,
    /// Span boundaries found by the tagger; absent when it was not invoked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub untyped: Option<Vec<(usize, usize)>>,
    /// Typer outputs, one per untyped span; absent when it was not invoked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types: Option<Vec<EntityType>>,
}

fn ser_gate<S: Serializer>(gate: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
    match gate {
        Some(g) => s.serialize_u8(u8::from(*g)),
        None => s.serialize_none(),
    }
}

fn de_gate<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<bool>, D::Error> {
    let v: Option<u8> = Option::deserialize(d)?;
    match v {
        None => Ok(None),
        Some(0) => Ok(Some(false)),
        Some(1) => Ok(Some(true)),
        Some(other) => Err(serde::de::Error::custom(format!("gate must be 0 or 1, got {other}"))),
    }
}

impl StageTrace {
    pub fn tagger_invoked(&self) -> bool {
        self.untyped.is_some()
    }

    pub fn typer_calls(&self) -> usize {
        self.types.as_ref().map_or(0, Vec::len)
    }
}

/// Typed spans predicted for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePrediction {
    pub sentence_id: String,
    pub spans: Vec<Span>,
    #[serde(default)]
    pub trace: StageTrace,
}

impl SentencePrediction {
    pub fn new(sentence_id: impl Into<String>, spans: Vec<Span>) -> Self {
        SentencePrediction { sentence_id: sentence_id.into(), spans, trace: StageTrace::default() }
    }
}

fn checked_tags(tagger: &dyn Tagger, sentence: &Sentence) -> Result<TagSequence, PipelineError> {
    let tags = tagger.tag(sentence)?;
    if tags.len() != sentence.len() {
        return Err(PipelineError::LengthMismatch {
            id: sentence.id().to_string(),
            expected: sentence.len(),
            found: tags.len(),
        });
    }
    Ok(tags)
}

fn require_scheme(tagger: &dyn Tagger, approach: Approach) -> Result<(), PipelineError> {
    let expected = approach.tagger_scheme();
    if tagger.scheme() != expected {
        return Err(PipelineError::SchemeMismatch {
            component: "tagger",
            approach: approach.number(),
            expected,
            found: tagger.scheme(),
        });
    }
    Ok(())
}

pub fn run_approach1(tagger: &dyn Tagger, sentence: &Sentence) -> Result<SentencePrediction, PipelineError> {
    require_scheme(tagger, Approach::Flat)?;
    let spans = decode_bio(&checked_tags(tagger, sentence)?);
    Ok(SentencePrediction {
        sentence_id: sentence.id().to_string(),
        trace: StageTrace { gate: None, untyped: Some(spans.iter().map(Span::bounds).collect()), types: None },
        spans,
    })
}

pub fn run_approach2(
    tagger: &dyn Tagger,
    typer: &dyn Typer,
    sentence: &Sentence,
) -> Result<SentencePrediction, PipelineError> {
    require_scheme(tagger, Approach::TwoStage)?;
    let untyped = decode_bio(&checked_tags(tagger, sentence)?);
    let types = untyped.iter().map(|span| typer.classify(sentence, span)).collect::<Result<Vec<_>, _>>()?;
    let spans = apply_types(&untyped, &types)?;
    Ok(SentencePrediction {
        sentence_id: sentence.id().to_string(),
        spans,
        trace: StageTrace { gate: None, untyped: Some(untyped.iter().map(Span::bounds).collect()), types: Some(types) },
    })
}

pub fn run_approach3(
    gate: &dyn Gate,
    tagger: &dyn Tagger,
    typer: &dyn Typer,
    sentence: &Sentence,
) -> Result<SentencePrediction, PipelineError> {
    require_scheme(tagger, Approach::ThreeStage)?;
    if !gate.contains_entity(sentence)? {
        return Ok(SentencePrediction {
            sentence_id: sentence.id().to_string(),
            spans: Vec::new(),
            trace: StageTrace { gate: Some(false), untyped: None, types: None },
        });
    }
    let mut prediction = run_approach2(tagger, typer, sentence)?;
    prediction.trace.gate = Some(true);
    Ok(prediction)
}

/// A validated combination of components for one approach.
#[derive(Clone)]
pub struct Pipeline {
    approach: Approach,
    gate: Option<Arc<dyn Gate>>,
    tagger: Arc<dyn Tagger>,
    typer: Option<Arc<dyn Typer>>,
}

impl fmt::Debug for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pipeline")
            .field("approach", &self.approach)
            .field("tagger_scheme", &self.tagger.scheme())
            .field("gate", &self.gate.is_some())
            .field("typer", &self.typer.is_some())
            .finish()
    }
}

impl Pipeline {
    /// Checks that exactly the components `approach` needs are present and
    /// that the tagger uses the matching scheme.
    pub fn new(
        approach: Approach,
        gate: Option<Arc<dyn Gate>>,
        tagger: Option<Arc<dyn Tagger>>,
        typer: Option<Arc<dyn Typer>>,
    ) -> Result<Self, PipelineError> {
        let n = approach.number();
        let missing = |component| PipelineError::MissingComponent { approach: n, component };
        let unexpected = |component| PipelineError::UnexpectedComponent { approach: n, component };
        let tagger = tagger.ok_or_else(|| missing("tagger"))?;
        match approach {
            Approach::Flat => {
                if gate.is_some() {
                    return Err(unexpected("gate"));
                }
                if typer.is_some() {
                    return Err(unexpected("typer"));
                }
            }
            Approach::TwoStage => {
                if gate.is_some() {
                    return Err(unexpected("gate"));
                }
                if typer.is_none() {
                    return Err(missing("typer"));
                }
            }
            Approach::ThreeStage => {
                if gate.is_none() {
                    return Err(missing("gate"));
                }
                if typer.is_none() {
                    return Err(missing("typer"));
                }
            }
        }
        require_scheme(tagger.as_ref(), approach)?;
        Ok(Pipeline { approach, gate, tagger, typer })
    }

    pub fn flat(tagger: Arc<dyn Tagger>) -> Result<Self, PipelineError> {
        Self::new(Approach::Flat, None, Some(tagger), None)
    }

    pub fn two_stage(tagger: Arc<dyn Tagger>, typer: Arc<dyn Typer>) -> Result<Self, PipelineError> {
        Self::new(Approach::TwoStage, None, Some(tagger), Some(typer))
    }

    pub fn three_stage(
        gate: Arc<dyn Gate>,
        tagger: Arc<dyn Tagger>,
        typer: Arc<dyn Typer>,
    ) -> Result<Self, PipelineError> {
        Self::new(Approach::ThreeStage, Some(gate), Some(tagger), Some(typer))
    }

    pub fn approach(&self) -> Approach {
        self.approach
    }

    pub fn predict(&self, sentence: &Sentence) -> Result<SentencePrediction, PipelineError> {
        let tagger = self.tagger.as_ref();
        match self.approach {
            Approach::Flat => run_approach1(tagger, sentence),
            Approach::TwoStage => run_approach2(tagger, self.typer.as_deref().expect("validated"), sentence),
            Approach::ThreeStage => run_approach3(
                self.gate.as_deref().expect("validated"),
                tagger,
                self.typer.as_deref().expect("validated"),
                sentence,
            ),
        }
    }

    /// One prediction per sentence, in corpus order. Sentences are processed
    /// in parallel; on failure the error of the earliest failing sentence is
    /// returned.
    pub fn predict_corpus(&self, corpus: &Corpus) -> Result<Vec<SentencePrediction>, PipelineError> {
        let results: Vec<Result<SentencePrediction, PipelineError>> =
            corpus.sentences().par_iter().map(|s| self.predict(s.sentence())).collect();
        results.into_iter().collect()
    }
}

/// Writes predictions as JSONL, one record per line. The stage trace is
/// included only when `with_trace` is set.
pub fn write_predictions_jsonl(predictions: &[SentencePrediction], with_trace: bool) -> String {
    #[derive(Serialize)]
    struct Out<'a> {
        sentence_id: &'a str,
        spans: &'a [Span],
        #[serde(skip_serializing_if = "Option::is_none")]
        trace: Option<&'a StageTrace>,
    }
    let mut out = String::new();
    for p in predictions {
        let rec = Out { sentence_id: &p.sentence_id, spans: &p.spans, trace: with_trace.then_some(&p.trace) };
        out.push_str(&serde_json::to_string(&rec).expect("predictions serialize"));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct PredictionParseError {
    pub line: usize,
    pub message: String,
}

/// Reads prediction JSONL. Spans within a record must be disjoint.
pub fn read_predictions_jsonl(text: &str) -> Result<Vec<SentencePrediction>, PredictionParseError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| PredictionParseError { line: i + 1, message };
        let mut p: SentencePrediction = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        p.spans.sort();
        if let Some(w) = p.spans.windows(2).find(|w| w[1].start() < w[0].end()) {
            return Err(err(format!(
                "overlapping spans ({}, {}) and ({}, {})",
                w[0].start(),
                w[0].end(),
                w[1].start(),
                w[1].end()
            )));
        }
        out.push(p);
    }
    Ok(out)
}
