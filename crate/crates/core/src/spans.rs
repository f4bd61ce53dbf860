//! BIO tag schemes, span decoding/encoding and scheme transforms.
//!
//! Two schemes are supported: the typed 27-label inventory (`B-<Type>`,
//! `I-<Type>` for each of the 13 entity types, plus `O`) and the untyped
//! `{O, B, I}` scheme used by the extraction stage.
//!
//! Decoding is total. Malformed sequences are repaired: an `I` that does not
//! continue a compatible open span starts a new one, and a type change
//! closes the previous span.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EntityType;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpanError {
    #[error("spans ({0}, {1}) and ({2}, {3}) overlap")]
    OverlappingSpans(usize, usize, usize, usize),
    #[error("span ({start}, {end}) is outside a sentence of length {len}")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("span ({0}, {1}) has no entity type; the typed scheme requires one")]
    MissingTypeForFullScheme(usize, usize),
    #[error("{spans} spans but {types} types")]
    LengthMismatch { spans: usize, types: usize },
    #[error("empty span ({0}, {0})")]
    EmptySpan(usize),
    #[error("label `{0}` is not valid for the {1} scheme")]
    InvalidLabel(String, TagScheme),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagScheme {
    Full27,
    Untyped3,
}

impl TagScheme {
    /// Labels in id order. For the typed scheme this is the B-/I- pair for
    /// each entity type in canonical order followed by `O`.
    pub fn labels(self) -> Vec<Tag> {
        match self {
            TagScheme::Full27 => EntityType::ALL
                .iter()
                .flat_map(|t| [Tag::Begin(Some(*t)), Tag::Inside(Some(*t))])
                .chain(std::iter::once(Tag::Outside))
                .collect(),
            TagScheme::Untyped3 => vec![Tag::Outside, Tag::Begin(None), Tag::Inside(None)],
        }
    }

    pub fn num_labels(self) -> usize {
        match self {
            TagScheme::Full27 => 27,
            TagScheme::Untyped3 => 3,
        }
    }

    pub fn label_id(self, tag: Tag) -> Option<usize> {
        if !tag.fits(self) {
            return None;
        }
        Some(match (self, tag) {
            (TagScheme::Full27, Tag::Outside) => 26,
            (TagScheme::Full27, Tag::Begin(Some(t))) => 2 * t.index(),
            (TagScheme::Full27, Tag::Inside(Some(t))) => 2 * t.index() + 1,
            (TagScheme::Untyped3, Tag::Outside) => 0,
            (TagScheme::Untyped3, Tag::Begin(None)) => 1,
            (TagScheme::Untyped3, Tag::Inside(None)) => 2,
            _ => unreachable!("checked by fits"),
        })
    }

    pub fn tag(self, id: usize) -> Option<Tag> {
        match self {
            TagScheme::Full27 if id == 26 => Some(Tag::Outside),
            TagScheme::Full27 if id < 26 => {
                let ty = EntityType::from_index(id / 2)?;
                Some(if id.is_multiple_of(2) { Tag::Begin(Some(ty)) } else { Tag::Inside(Some(ty)) })
            }
            TagScheme::Untyped3 => match id {
                0 => Some(Tag::Outside),
                1 => Some(Tag::Begin(None)),
                2 => Some(Tag::Inside(None)),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for TagScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TagScheme::Full27 => "full27",
            TagScheme::Untyped3 => "untyped3",
        })
    }
}

impl FromStr for TagScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full27" => Ok(TagScheme::Full27),
            "untyped3" => Ok(TagScheme::Untyped3),
            other => Err(format!("unknown tag scheme `{other}`")),
        }
    }
}

/// A single BIO label. Typed labels carry `Some(type)`, untyped ones `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(Option<EntityType>),
    Inside(Option<EntityType>),
}

impl Tag {
    pub fn fits(self, scheme: TagScheme) -> bool {
        match (self, scheme) {
            (Tag::Outside, _) => true,
            (Tag::Begin(t) | Tag::Inside(t), TagScheme::Full27) => t.is_some(),
            (Tag::Begin(t) | Tag::Inside(t), TagScheme::Untyped3) => t.is_none(),
        }
    }

    pub fn entity_type(self) -> Option<EntityType> {
        match self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => t,
        }
    }

    /// Drops the entity type, keeping the position marker.
    pub fn untyped(self) -> Tag {
        match self {
            Tag::Outside => Tag::Outside,
            Tag::Begin(_) => Tag::Begin(None),
            Tag::Inside(_) => Tag::Inside(None),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Outside => f.write_str("O"),
            Tag::Begin(None) => f.write_str("B"),
            Tag::Inside(None) => f.write_str("I"),
            Tag::Begin(Some(t)) => write!(f, "B-{t}"),
            Tag::Inside(Some(t)) => write!(f, "I-{t}"),
        }
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let typed = |rest: &str| rest.parse::<EntityType>().map(Some).map_err(|_| format!("unknown label `{s}`"));
        match s {
            "O" => Ok(Tag::Outside),
            "B" => Ok(Tag::Begin(None)),
            "I" => Ok(Tag::Inside(None)),
            _ => {
                if let Some(rest) = s.strip_prefix("B-") {
                    typed(rest).map(Tag::Begin)
                } else if let Some(rest) = s.strip_prefix("I-") {
                    typed(rest).map(Tag::Inside)
                } else {
                    Err(format!("unknown label `{s}`"))
                }
            }
        }
    }
}

/// Per-token labels, all valid for `scheme`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TagSequence {
    scheme: TagScheme,
    tags: Vec<Tag>,
}

impl TagSequence {
    pub fn new(scheme: TagScheme, tags: Vec<Tag>) -> Result<Self, SpanError> {
        if let Some(bad) = tags.iter().find(|t| !t.fits(scheme)) {
            return Err(SpanError::InvalidLabel(bad.to_string(), scheme));
        }
        Ok(TagSequence { scheme, tags })
    }

    pub fn from_ids(scheme: TagScheme, ids: &[usize]) -> Result<Self, SpanError> {
        let tags = ids
            .iter()
            .map(|&id| scheme.tag(id).ok_or_else(|| SpanError::InvalidLabel(format!("#{id}"), scheme)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TagSequence { scheme, tags })
    }

    /// Parses canonical label strings.
    pub fn parse<S: AsRef<str>>(scheme: TagScheme, labels: &[S]) -> Result<Self, SpanError> {
        let tags = labels
            .iter()
            .map(|l| l.as_ref().parse::<Tag>().map_err(|_| SpanError::InvalidLabel(l.as_ref().to_string(), scheme)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(scheme, tags)
    }

    pub fn all_outside(scheme: TagScheme, len: usize) -> Self {
        TagSequence { scheme, tags: vec![Tag::Outside; len] }
    }

    pub fn scheme(&self) -> TagScheme {
        self.scheme
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn ids(&self) -> Vec<usize> {
        self.tags.iter().map(|t| self.scheme.label_id(*t).expect("validated on construction")).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.tags.iter().map(Tag::to_string).collect()
    }

    /// Re-labels an all-`O` sequence under another scheme. Returns `None`
    /// when the sequence contains scheme-specific labels.
    pub fn rescheme_outside(&self, scheme: TagScheme) -> Option<TagSequence> {
        if self.scheme == scheme {
            return Some(self.clone());
        }
        self.tags.iter().all(|t| *t == Tag::Outside).then(|| TagSequence::all_outside(scheme, self.len()))
    }
}

/// Half-open token interval `[start, end)` with an optional entity type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpan", into = "RawSpan")]
pub struct Span {
    start: usize,
    end: usize,
    entity_type: Option<EntityType>,
}

#[derive(Serialize, Deserialize)]
struct RawSpan {
    start: usize,
    end: usize,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    entity_type: Option<EntityType>,
}

impl TryFrom<RawSpan> for Span {
    type Error = SpanError;

    fn try_from(raw: RawSpan) -> Result<Self, Self::Error> {
        Span::new(raw.start, raw.end, raw.entity_type)
    }
}

impl From<Span> for RawSpan {
    fn from(span: Span) -> Self {
        RawSpan { start: span.start, end: span.end, entity_type: span.entity_type }
    }
}

impl Span {
    pub fn new(start: usize, end: usize, entity_type: Option<EntityType>) -> Result<Self, SpanError> {
        if start >= end {
            return Err(SpanError::EmptySpan(start));
        }
        Ok(Span { start, end, entity_type })
    }

    pub fn typed(start: usize, end: usize, ty: EntityType) -> Result<Self, SpanError> {
        Self::new(start, end, Some(ty))
    }

    pub fn untyped(start: usize, end: usize) -> Result<Self, SpanError> {
        Self::new(start, end, None)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entity_type(&self) -> Option<EntityType> {
        self.entity_type
    }

    pub fn bounds(&self) -> (usize, usize) {
        (self.start, self.end)
    }

    pub fn with_type(self, ty: Option<EntityType>) -> Span {
        Span { entity_type: ty, ..self }
    }
}

/// Decodes a tag sequence into sorted, disjoint spans.
pub fn decode_bio(tags: &TagSequence) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, Option<EntityType>)> = None;
    let close = |open: &mut Option<(usize, Option<EntityType>)>, end: usize, spans: &mut Vec<Span>| {
        if let Some((start, ty)) = open.take() {
            spans.push(Span { start, end, entity_type: ty });
        }
    };
    for (i, tag) in tags.tags().iter().enumerate() {
        match *tag {
            Tag::Outside => close(&mut open, i, &mut spans),
            Tag::Begin(ty) => {
                close(&mut open, i, &mut spans);
                open = Some((i, ty));
            }
            Tag::Inside(ty) => match open {
                Some((_, open_ty)) if open_ty == ty => {}
                _ => {
                    close(&mut open, i, &mut spans);
                    open = Some((i, ty));
                }
            },
        }
    }
    close(&mut open, tags.len(), &mut spans);
    spans
}

/// Writes spans as BIO tags over `length` tokens.
///
/// Under the untyped scheme span types are dropped.
pub fn encode_bio(spans: &[Span], length: usize, scheme: TagScheme) -> Result<TagSequence, SpanError> {
    let mut sorted = spans.to_vec();
    sorted.sort();
    for s in &sorted {
        if s.end > length {
            return Err(SpanError::SpanOutOfRange { start: s.start, end: s.end, len: length });
        }
        if scheme == TagScheme::Full27 && s.entity_type.is_none() {
            return Err(SpanError::MissingTypeForFullScheme(s.start, s.end));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(SpanError::OverlappingSpans(pair[0].start, pair[0].end, pair[1].start, pair[1].end));
        }
    }
    let mut tags = vec![Tag::Outside; length];
    for s in &sorted {
        let ty = match scheme {
            TagScheme::Full27 => s.entity_type,
            TagScheme::Untyped3 => None,
        };
        tags[s.start] = Tag::Begin(ty);
        for tag in &mut tags[s.start + 1..s.end] {
            *tag = Tag::Inside(ty);
        }
    }
    Ok(TagSequence { scheme, tags })
}

/// Maps typed labels onto the untyped scheme (`B-X` to `B`, `I-X` to `I`).
pub fn collapse_scheme(tags: &TagSequence) -> TagSequence {
    TagSequence { scheme: TagScheme::Untyped3, tags: tags.tags().iter().map(|t| t.untyped()).collect() }
}

pub fn erase_types(spans: &[Span]) -> Vec<Span> {
    spans.iter().map(|s| s.with_type(None)).collect()
}

/// Attaches the i-th type to the i-th span. Boundaries are unchanged.
pub fn apply_types(spans: &[Span], types: &[EntityType]) -> Result<Vec<Span>, SpanError> {
    if spans.len() != types.len() {
        return Err(SpanError::LengthMismatch { spans: spans.len(), types: types.len() });
    }
    Ok(spans.iter().zip(types).map(|(s, t)| s.with_type(Some(*t))).collect())
}

/// Whether the sequence contains at least one entity.
pub fn sentence_entity_label(tags: &TagSequence) -> bool {
    tags.tags().iter().any(|t| *t != Tag::Outside)
}
