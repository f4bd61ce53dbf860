//! Predictions produced outside this crate, read from JSONL.
//!
//! One record per line; each record names a sentence and carries any of
//! word-level `tags`, a sentence `gate` decision and `span_types`:
//!
//! ```text
//! {"sentence_id": "s0", "tags": ["O", "B-Application_Usage"]}
//! {"sentence_id": "s0", "gate": 1}
//! {"sentence_id": "s0", "span_types": [{"start": 1, "end": 2, "type": "Application_Usage"}]}
//! ```
//!
//! The tag scheme is inferred: typed labels mean the 27-label scheme, bare
//! `B`/`I` the untyped one. Files whose tags are all `O` fit either.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::corpus::{Corpus, EntityType};
use crate::spans::{Tag, TagScheme, TagSequence};

use super::ModelError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    sentence_id: String,
    #[serde(default)]
    tags: Option<Vec<String>>,
    #[serde(default)]
    gate: Option<u8>,
    #[serde(default)]
    span_types: Option<Vec<RawSpanType>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpanType {
    start: usize,
    end: usize,
    #[serde(rename = "type")]
    entity_type: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalPredictions {
    tags: BTreeMap<String, Vec<Tag>>,
    gates: BTreeMap<String, bool>,
    span_types: BTreeMap<String, BTreeMap<(usize, usize), EntityType>>,
    scheme: Option<TagScheme>,
}

fn tag_scheme(tag: Tag) -> Option<TagScheme> {
    match tag {
        Tag::Outside => None,
        Tag::Begin(Some(_)) | Tag::Inside(Some(_)) => Some(TagScheme::Full27),
        Tag::Begin(None) | Tag::Inside(None) => Some(TagScheme::Untyped3),
    }
}

fn merge_scheme(a: Option<TagScheme>, b: Option<TagScheme>) -> Result<Option<TagScheme>, ModelError> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(ModelError::MixedSchemes),
        (x, y) => Ok(x.or(y)),
    }
}

impl ExternalPredictions {
    pub fn parse_jsonl(text: &str) -> Result<Self, ModelError> {
        let mut out = ExternalPredictions::default();
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let malformed = |message: String| ModelError::MalformedJson { line: lineno, message };
            let rec: Record = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
            if rec.tags.is_none() && rec.gate.is_none() && rec.span_types.is_none() {
                return Err(malformed("record carries no tags, gate or span_types".into()));
            }
            let id = rec.sentence_id;
            if let Some(labels) = rec.tags {
                let tags = labels
                    .iter()
                    .map(|l| l.parse::<Tag>().map_err(|_| ModelError::UnknownLabel { line: lineno, label: l.clone() }))
                    .collect::<Result<Vec<_>, _>>()?;
                for t in &tags {
                    out.scheme = merge_scheme(out.scheme, tag_scheme(*t))?;
                }
                if out.tags.insert(id.clone(), tags).is_some() {
                    return Err(malformed(format!("duplicate tags for `{id}`")));
                }
            }
            if let Some(g) = rec.gate {
                if g > 1 {
                    return Err(malformed(format!("gate must be 0 or 1, got {g}")));
                }
                if out.gates.insert(id.clone(), g == 1).is_some() {
                    return Err(malformed(format!("duplicate gate for `{id}`")));
                }
            }
            if let Some(spans) = rec.span_types {
                let entry = out.span_types.entry(id.clone()).or_default();
                for s in spans {
                    let ty = s
                        .entity_type
                        .parse::<EntityType>()
                        .map_err(|_| ModelError::UnknownLabel { line: lineno, label: s.entity_type.clone() })?;
                    if s.start >= s.end {
                        return Err(malformed(format!("empty span ({}, {})", s.start, s.end)));
                    }
                    if entry.insert((s.start, s.end), ty).is_some() {
                        return Err(malformed(format!("duplicate span ({}, {}) for `{id}`", s.start, s.end)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::parse_jsonl(&text)
    }

    /// Combines two prediction sets; the same field for the same sentence
    /// may not appear in both.
    pub fn merge(mut self, other: ExternalPredictions) -> Result<Self, ModelError> {
        let dup = |what: &str, id: &str| ModelError::MalformedJson {
            line: 0,
            message: format!("duplicate {what} for `{id}` across files"),
        };
        self.scheme = merge_scheme(self.scheme, other.scheme)?;
        for (id, t) in other.tags {
            if self.tags.insert(id.clone(), t).is_some() {
                return Err(dup("tags", &id));
            }
        }
        for (id, g) in other.gates {
            if self.gates.insert(id.clone(), g).is_some() {
                return Err(dup("gate", &id));
            }
        }
        for (id, spans) in other.span_types {
            let entry = self.span_types.entry(id.clone()).or_default();
            for (k, v) in spans {
                if entry.insert(k, v).is_some() {
                    return Err(dup("span type", &id));
                }
            }
        }
        Ok(self)
    }

    /// Inferred tag scheme; `None` when no tag is B or I.
    pub fn scheme(&self) -> Option<TagScheme> {
        self.scheme
    }

    pub fn has_tags(&self) -> bool {
        !self.tags.is_empty()
    }

    pub fn has_gates(&self) -> bool {
        !self.gates.is_empty()
    }

    pub fn has_span_types(&self) -> bool {
        !self.span_types.is_empty()
    }

    /// Checks every record against `corpus`: ids must exist, tag sequences
    /// must match token counts and typed spans must lie inside the sentence.
    pub fn validate(self, corpus: &Corpus) -> Result<ValidatedExternal, ModelError> {
        let lengths: BTreeMap<&str, usize> = corpus.sentences().iter().map(|s| (s.id(), s.sentence().len())).collect();
        let len_of = |id: &str| lengths.get(id).copied().ok_or_else(|| ModelError::UnknownSentenceId(id.to_string()));
        for (id, tags) in &self.tags {
            let n = len_of(id)?;
            if tags.len() != n {
                return Err(ModelError::LengthMismatch {
                    id: id.clone(),
                    what: "tags",
                    expected: n,
                    found: tags.len(),
                });
            }
        }
        for id in self.gates.keys() {
            len_of(id)?;
        }
        for (id, spans) in &self.span_types {
            let n = len_of(id)?;
            if let Some(&(_, end)) = spans.keys().find(|(_, end)| *end > n) {
                return Err(ModelError::LengthMismatch { id: id.clone(), what: "span end", expected: n, found: end });
            }
        }
        Ok(ValidatedExternal(Arc::new(self)))
    }
}

/// Predictions checked against a specific corpus. Cheap to clone.
#[derive(Debug, Clone)]
pub struct ValidatedExternal(Arc<ExternalPredictions>);

impl ValidatedExternal {
    pub fn inner(&self) -> &ExternalPredictions {
        &self.0
    }

    /// Tags for `id` under `scheme`, or `None` if no record exists or the
    /// record does not fit the scheme.
    pub fn tags(&self, id: &str, scheme: TagScheme) -> Option<TagSequence> {
        let tags = self.0.tags.get(id)?;
        TagSequence::new(scheme, tags.clone()).ok()
    }

    pub fn gate(&self, id: &str) -> Option<bool> {
        self.0.gates.get(id).copied()
    }

    pub fn span_type(&self, id: &str, start: usize, end: usize) -> Option<EntityType> {
        self.0.span_types.get(id)?.get(&(start, end)).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conll;

    fn corpus() -> Corpus {
        parse_conll("We\tO\nused\tO\nSPSS\tB-Application_Usage\n\n").unwrap()
    }

    #[test]
    fn accepts_matching_record() {
        let ext =
            ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","tags":["O","O","B-Application_Usage"]}"#).unwrap();
        assert_eq!(ext.scheme(), Some(TagScheme::Full27));
        let v = ext.validate(&corpus()).unwrap();
        assert_eq!(v.tags("s0", TagScheme::Full27).unwrap().labels(), ["O", "O", "B-Application_Usage"]);
        assert!(v.tags("s0", TagScheme::Untyped3).is_none());
    }

    #[test]
    fn length_mismatch() {
        let ext = ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","tags":["O","O"]}"#).unwrap();
        assert!(matches!(ext.validate(&corpus()), Err(ModelError::LengthMismatch { expected: 3, found: 2, .. })));
    }

    #[test]
    fn unknown_sentence() {
        let ext = ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s9","gate":1}"#).unwrap();
        assert!(matches!(
            ext.validate(&corpus()),
            Err(ModelError::UnknownSentenceId(id)) if id == "s9"
        ));
    }

    #[test]
    fn bad_labels_and_json() {
        assert!(matches!(
            ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","tags":["B-Foo"]}"#),
            Err(ModelError::UnknownLabel { line: 1, .. })
        ));
        assert!(matches!(
            ExternalPredictions::parse_jsonl("{\"sentence_id\":\"s0\",\"gate\":1}\nnot json"),
            Err(ModelError::MalformedJson { line: 2, .. })
        ));
        assert!(matches!(
            ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","gate":2}"#),
            Err(ModelError::MalformedJson { .. })
        ));
        assert!(matches!(
            ExternalPredictions::parse_jsonl(
                "{\"sentence_id\":\"a\",\"tags\":[\"B\"]}\n{\"sentence_id\":\"b\",\"tags\":[\"B-PlugIn_Usage\"]}"
            ),
            Err(ModelError::MixedSchemes)
        ));
        assert!(matches!(
            ExternalPredictions::parse_jsonl(
                r#"{"sentence_id":"s0","span_types":[{"start":0,"end":1,"type":"Nope"}]}"#
            ),
            Err(ModelError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn merges_files_by_field() {
        let a = ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","gate":1}"#).unwrap();
        let b = ExternalPredictions::parse_jsonl(
            r#"{"sentence_id":"s0","span_types":[{"start":2,"end":3,"type":"Application_Usage"}]}"#,
        )
        .unwrap();
        let v = a.merge(b).unwrap().validate(&corpus()).unwrap();
        assert_eq!(v.gate("s0"), Some(true));
        assert_eq!(v.span_type("s0", 2, 3).unwrap().to_string(), "Application_Usage");
        assert_eq!(v.span_type("s0", 0, 1), None);
        let again = ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","gate":0}"#).unwrap();
        let dup = ExternalPredictions::parse_jsonl(r#"{"sentence_id":"s0","gate":1}"#).unwrap();
        assert!(again.merge(dup).is_err());
    }

    #[test]
    fn span_past_sentence_end_rejected() {
        let ext = ExternalPredictions::parse_jsonl(
            r#"{"sentence_id":"s0","span_types":[{"start":2,"end":4,"type":"Application_Usage"}]}"#,
        )
        .unwrap();
        assert!(matches!(ext.validate(&corpus()), Err(ModelError::LengthMismatch { .. })));
    }
}
