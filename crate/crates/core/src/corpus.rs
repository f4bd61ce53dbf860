//! Tokenized, BIO-annotated corpora: the entity inventory, sentence data
//! model, the tab-separated token/label file format and dataset statistics.
//!
//! Input is always pre-tokenized. Token text is kept byte-for-byte: no case
//! folding, no punctuation stripping.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::spans::{decode_bio, Tag, TagScheme, TagSequence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: malformed line ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),
    #[error("invalid token `{0}`: tokens must be non-empty and contain no tab or newline")]
    InvalidToken(String),
    #[error("`{0}` is not one of the 13 valid entity types")]
    InvalidEntityType(String),
    #[error("sentence `{id}` has {tokens} tokens but {tags} tags")]
    LengthMismatch { id: String, tokens: usize, tags: usize },
}

/// Software category of a mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityGroup {
    Application,
    OperatingSystem,
    PlugIn,
    ProgrammingEnvironment,
    SoftwareCoreference,
}

impl EntityGroup {
    pub const ALL: [EntityGroup; 5] = [
        EntityGroup::Application,
        EntityGroup::OperatingSystem,
        EntityGroup::PlugIn,
        EntityGroup::ProgrammingEnvironment,
        EntityGroup::SoftwareCoreference,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityGroup::Application => "Application",
            EntityGroup::OperatingSystem => "OperatingSystem",
            EntityGroup::PlugIn => "PlugIn",
            EntityGroup::ProgrammingEnvironment => "ProgrammingEnvironment",
            EntityGroup::SoftwareCoreference => "SoftwareCoreference",
        }
    }
}

/// The role a software mention plays in its sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityRole {
    Creation,
    Deposition,
    Mention,
    Usage,
}

impl EntityRole {
    pub const ALL: [EntityRole; 4] =
        [EntityRole::Creation, EntityRole::Deposition, EntityRole::Mention, EntityRole::Usage];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityRole::Creation => "Creation",
            EntityRole::Deposition => "Deposition",
            EntityRole::Mention => "Mention",
            EntityRole::Usage => "Usage",
        }
    }
}

/// A valid `(group, role)` pair. Only 13 of the 20 combinations occur in the
/// annotation scheme and only those can be constructed.
///
/// Ordering follows [`EntityType::ALL`], which is also the label order used
/// by the typed BIO inventory and by the span-type classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EntityType {
    group: EntityGroup,
    role: EntityRole,
}

const fn et(group: EntityGroup, role: EntityRole) -> EntityType {
    EntityType { group, role }
}

impl EntityType {
    pub const ALL: [EntityType; 13] = {
        use EntityGroup::*;
        use EntityRole::*;
        [
            et(Application, Creation),
            et(Application, Deposition),
            et(Application, Mention),
            et(Application, Usage),
            et(OperatingSystem, Mention),
            et(OperatingSystem, Usage),
            et(PlugIn, Creation),
            et(PlugIn, Deposition),
            et(PlugIn, Mention),
            et(PlugIn, Usage),
            et(ProgrammingEnvironment, Mention),
            et(ProgrammingEnvironment, Usage),
            et(SoftwareCoreference, Deposition),
        ]
    };

    pub fn new(group: EntityGroup, role: EntityRole) -> Result<Self, CorpusError> {
        let candidate = et(group, role);
        if Self::ALL.contains(&candidate) {
            Ok(candidate)
        } else {
            Err(CorpusError::InvalidEntityType(candidate.to_string()))
        }
    }

    pub fn group(self) -> EntityGroup {
        self.group
    }

    pub fn role(self) -> EntityRole {
        self.role
    }

    /// Position in [`EntityType::ALL`].
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|t| *t == self).expect("constructed entity types are always in the inventory")
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl PartialOrd for EntityType {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EntityType {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.group.as_str(), self.role.as_str())
    }
}

impl FromStr for EntityType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|t| t.to_string() == s)
            .copied()
            .ok_or_else(|| CorpusError::InvalidEntityType(s.to_string()))
    }
}

impl Serialize for EntityType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    text: String,
    index: usize,
}

impl Token {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

fn validate_token(text: &str) -> Result<(), CorpusError> {
    if text.is_empty() || text.contains(['\t', '\n', '\r']) {
        return Err(CorpusError::InvalidToken(text.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    id: String,
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new<I, S>(id: impl Into<String>, tokens: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens = tokens
            .into_iter()
            .enumerate()
            .map(|(index, text)| {
                let text = text.into();
                validate_token(&text)?;
                Ok(Token { text, index })
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        if tokens.is_empty() {
            return Err(CorpusError::InvalidCorpus("sentence has no tokens".into()));
        }
        Ok(Sentence { id: id.into(), tokens })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token_texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }

    /// Tokens joined by single spaces.
    pub fn text(&self) -> String {
        self.token_texts().collect::<Vec<_>>().join(" ")
    }

    /// Space-joined text of the tokens in `start..end`.
    pub fn slice_text(&self, start: usize, end: usize) -> String {
        self.tokens[start..end].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ")
    }

    fn with_id(mut self, id: String) -> Self {
        self.id = id;
        self
    }
}

/// A sentence paired with gold tags in the typed 27-label scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    sentence: Sentence,
    tags: TagSequence,
}

impl LabeledSentence {
    pub fn new(sentence: Sentence, tags: TagSequence) -> Result<Self, CorpusError> {
        if tags.scheme() != TagScheme::Full27 {
            return Err(CorpusError::InvalidCorpus(format!(
                "gold tags for `{}` must use the typed scheme",
                sentence.id()
            )));
        }
        if tags.len() != sentence.len() {
            return Err(CorpusError::LengthMismatch {
                id: sentence.id().to_string(),
                tokens: sentence.len(),
                tags: tags.len(),
            });
        }
        Ok(LabeledSentence { sentence, tags })
    }

    /// A sentence with every tag `O`.
    pub fn unlabeled(sentence: Sentence) -> Self {
        let tags = TagSequence::all_outside(TagScheme::Full27, sentence.len());
        LabeledSentence { sentence, tags }
    }

    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn tags(&self) -> &TagSequence {
        &self.tags
    }

    pub fn id(&self) -> &str {
        self.sentence.id()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    sentences: Vec<LabeledSentence>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate sentence ids.
    pub fn new(sentences: Vec<LabeledSentence>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for s in &sentences {
            if !seen.insert(s.id()) {
                return Err(CorpusError::InvalidCorpus(format!("duplicate sentence id `{}`", s.id())));
            }
        }
        Ok(Corpus { sentences })
    }

    pub fn sentences(&self) -> &[LabeledSentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&LabeledSentence> {
        self.sentences.iter().find(|s| s.id() == id)
    }

    /// Keeps sentences matching `keep`, preserving order and ids.
    pub fn filter(&self, mut keep: impl FnMut(&LabeledSentence) -> bool) -> Corpus {
        Corpus { sentences: self.sentences.iter().filter(|s| keep(s)).cloned().collect() }
    }

    /// Concatenates corpora and re-assigns positional ids.
    pub fn concat(parts: impl IntoIterator<Item = Corpus>) -> Corpus {
        let sentences = parts
            .into_iter()
            .flat_map(|c| c.sentences)
            .enumerate()
            .map(|(i, s)| LabeledSentence { sentence: s.sentence.with_id(positional_id(i)), tags: s.tags })
            .collect();
        Corpus { sentences }
    }
}

pub(crate) fn positional_id(block: usize) -> String {
    format!("s{block}")
}

/// Parses the tab-separated token/label format.
///
/// One `token\tlabel` per line, sentences separated by exactly one blank
/// line. Sentence ids are assigned positionally as `s0`, `s1`, ...
pub fn parse_conll(text: &str) -> Result<Corpus, CorpusError> {
    if text.chars().all(|c| c == '\n') {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<Tag> = Vec::new();
    let mut previous_blank = false;

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<Tag>| -> Result<(), CorpusError> {
        let id = positional_id(sentences.len());
        let sentence = Sentence::new(id, tokens.drain(..))?;
        let seq = TagSequence::new(TagScheme::Full27, std::mem::take(tags))
            .expect("labels were validated against the typed inventory");
        sentences.push(LabeledSentence::new(sentence, seq)?);
        Ok(())
    };

    // `split('\n')` yields a trailing "" for input ending in '\n'.
    let lines: Vec<&str> = text.split('\n').collect();
    let last = lines.len() - 1;
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        if line.is_empty() {
            if i == last {
                break;
            }
            if tokens.is_empty() {
                let reason = if previous_blank { "consecutive blank lines" } else { "blank line before any token" };
                return Err(CorpusError::MalformedLine { line: lineno, reason: reason.into() });
            }
            flush(&mut tokens, &mut tags)?;
            previous_blank = true;
            continue;
        }
        previous_blank = false;
        let mut cols = line.split('\t');
        let (token, label) = match (cols.next(), cols.next(), cols.next()) {
            (Some(token), Some(label), None) => (token, label),
            _ => return Err(CorpusError::MalformedLine { line: lineno, reason: "expected exactly one tab".into() }),
        };
        if token.is_empty() || token.contains('\r') {
            return Err(CorpusError::MalformedLine { line: lineno, reason: "empty or invalid token".into() });
        }
        let tag = label
            .parse::<Tag>()
            .ok()
            .filter(|t| t.fits(TagScheme::Full27))
            .ok_or_else(|| CorpusError::UnknownLabel { line: lineno, label: label.to_string() })?;
        tokens.push(token.to_string());
        tags.push(tag);
    }
    if !tokens.is_empty() {
        flush(&mut tokens, &mut tags)?;
    }
    if sentences.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    Ok(Corpus { sentences })
}

/// Writes the corpus in the format read by [`parse_conll`]. Every sentence,
/// including the last, is followed by a blank line.
pub fn serialize_conll(corpus: &Corpus) -> Result<String, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::InvalidCorpus("no sentences to write".into()));
    }
    let mut out = String::new();
    for s in corpus.sentences() {
        for (token, tag) in s.sentence().tokens().iter().zip(s.tags().tags()) {
            out.push_str(token.text());
            out.push('\t');
            out.push_str(&tag.to_string());
            out.push('\n');
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub sentence_count: usize,
    pub sentences_with_entity: usize,
    pub total_entities: usize,
    pub total_tokens: usize,
    pub max_length: usize,
    /// Mean tokens per sentence, rounded half-up to two decimals.
    pub avg_length: f64,
    pub per_type_counts: BTreeMap<EntityType, usize>,
    #[serde(serialize_with = "serialize_group_map")]
    pub per_group_totals: BTreeMap<EntityGroup, usize>,
}

fn serialize_group_map<S: Serializer>(map: &BTreeMap<EntityGroup, usize>, serializer: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = serializer.serialize_map(Some(map.len()))?;
    for (group, count) in map {
        m.serialize_entry(group.as_str(), count)?;
    }
    m.end()
}

/// `numerator / denominator` rounded half-up to two decimals, computed in
/// integers so that e.g. 28.325 never drifts to 28.32.
fn round_half_up_2(numerator: usize, denominator: usize) -> f64 {
    if denominator == 0 {
        return 0.0;
    }
    let hundredths = (200 * numerator as u128 + denominator as u128) / (2 * denominator as u128);
    hundredths as f64 / 100.0
}

/// Per-type and per-group entity counts over decoded gold spans.
pub fn entity_distribution(corpus: &Corpus) -> (BTreeMap<EntityType, usize>, BTreeMap<EntityGroup, usize>) {
    let mut per_type: BTreeMap<EntityType, usize> = EntityType::ALL.iter().map(|t| (*t, 0)).collect();
    let mut per_group: BTreeMap<EntityGroup, usize> = EntityGroup::ALL.iter().map(|g| (*g, 0)).collect();
    for s in corpus.sentences() {
        for span in decode_bio(s.tags()) {
            let ty = span.entity_type().expect("typed scheme always yields typed spans");
            *per_type.get_mut(&ty).unwrap() += 1;
            *per_group.get_mut(&ty.group()).unwrap() += 1;
        }
    }
    (per_type, per_group)
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut sentences_with_entity = 0;
    let mut total_tokens = 0;
    let mut max_length = 0;
    for s in corpus.sentences() {
        let n = s.sentence().len();
        total_tokens += n;
        max_length = max_length.max(n);
        if !decode_bio(s.tags()).is_empty() {
            sentences_with_entity += 1;
        }
    }
    let (per_type_counts, per_group_totals) = entity_distribution(corpus);
    StatsReport {
        sentence_count: corpus.len(),
        sentences_with_entity,
        total_entities: per_type_counts.values().sum(),
        total_tokens,
        max_length,
        avg_length: round_half_up_2(total_tokens, corpus.len()),
        per_type_counts,
        per_group_totals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE: &str = "We\tO\nused\tO\nSPSS\tB-Application_Usage\n\n";

    #[test]
    fn thirteen_types_in_canonical_order() {
        assert_eq!(EntityType::ALL.len(), 13);
        assert_eq!(EntityType::ALL[0].to_string(), "Application_Creation");
        assert_eq!(EntityType::ALL[12].to_string(), "SoftwareCoreference_Deposition");
        let mut constructible = 0;
        for g in EntityGroup::ALL {
            for r in EntityRole::ALL {
                if EntityType::new(g, r).is_ok() {
                    constructible += 1;
                }
            }
        }
        assert_eq!(constructible, 13);
        assert!(EntityType::new(EntityGroup::SoftwareCoreference, EntityRole::Usage).is_err());
        assert!(EntityType::new(EntityGroup::OperatingSystem, EntityRole::Creation).is_err());
        assert!("SoftwareCoreference_Usage".parse::<EntityType>().is_err());
        for (i, t) in EntityType::ALL.iter().enumerate() {
            assert_eq!(t.index(), i);
            assert_eq!(t.to_string().parse::<EntityType>().unwrap(), *t);
        }
    }

    #[test]
    fn parses_single_sentence() {
        let corpus = parse_conll(ONE).unwrap();
        assert_eq!(corpus.len(), 1);
        let s = &corpus.sentences()[0];
        assert_eq!(s.id(), "s0");
        assert_eq!(s.sentence().len(), 3);
        assert_eq!(decode_bio(s.tags()).len(), 1);
        assert_eq!(serialize_conll(&corpus).unwrap(), ONE);
    }

    #[test]
    fn accepts_eof_without_trailing_blank_line() {
        let a = parse_conll("A\tO\nB\tO\n").unwrap();
        let b = parse_conll("A\tO\nB\tO").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(parse_conll(""), Err(CorpusError::EmptyCorpus));
        assert_eq!(parse_conll("\n"), Err(CorpusError::EmptyCorpus));
    }

    #[test]
    fn rejects_unknown_labels() {
        assert!(matches!(parse_conll("X\tB-Foo_Bar\n\n"), Err(CorpusError::UnknownLabel { line: 1, .. })));
        // untyped labels are not part of the corpus inventory
        assert!(matches!(parse_conll("X\tB\n\n"), Err(CorpusError::UnknownLabel { .. })));
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse_conll("X O\n\n"), Err(CorpusError::MalformedLine { line: 1, .. })));
        assert!(matches!(parse_conll("X\tO\tO\n\n"), Err(CorpusError::MalformedLine { line: 1, .. })));
        assert!(matches!(parse_conll("X\tO\n\n\nY\tO\n\n"), Err(CorpusError::MalformedLine { line: 3, .. })));
        assert!(matches!(parse_conll("\tO\n\n"), Err(CorpusError::MalformedLine { line: 1, .. })));
        assert!(matches!(parse_conll("\nX\tO\n"), Err(CorpusError::MalformedLine { line: 1, .. })));
    }

    #[test]
    fn serialize_rejects_empty_corpus() {
        assert!(matches!(serialize_conll(&Corpus::default()), Err(CorpusError::InvalidCorpus(_))));
    }

    #[test]
    fn tab_in_token_rejected_at_construction() {
        assert!(matches!(Sentence::new("s0", ["a\tb"]), Err(CorpusError::InvalidToken(_))));
        assert!(Sentence::new("s0", ["line\nbreak"]).is_err());
        assert!(Sentence::new("s0", [""]).is_err());
        assert!(Sentence::new("s0", Vec::<String>::new()).is_err());
    }

    #[test]
    fn case_and_punctuation_preserved() {
        let corpus = parse_conll("SPSS\tO\n(v.2)\tO\nspss\tO\n\n").unwrap();
        let texts: Vec<_> = corpus.sentences()[0].sentence().token_texts().collect();
        assert_eq!(texts, ["SPSS", "(v.2)", "spss"]);
    }

    #[test]
    fn stats_for_single_all_outside_sentence() {
        let corpus = parse_conll("a\tO\nb\tO\nc\tO\nd\tO\n").unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.sentence_count, 1);
        assert_eq!(stats.sentences_with_entity, 0);
        assert_eq!(stats.total_entities, 0);
        assert_eq!(stats.max_length, 4);
        assert_eq!(stats.avg_length, 4.0);
        assert!(stats.per_type_counts.values().all(|&c| c == 0));
        assert!(stats.per_group_totals.values().all(|&c| c == 0));
    }

    #[test]
    fn average_length_rounds_half_up() {
        assert_eq!(round_half_up_2(5665, 200), 28.33); // 28.325
        assert_eq!(round_half_up_2(2832, 100), 28.32);
        assert_eq!(round_half_up_2(1, 3), 0.33);
        assert_eq!(round_half_up_2(2, 3), 0.67);
        assert_eq!(round_half_up_2(0, 0), 0.0);
    }

    #[test]
    fn stray_inside_counts_as_entity_sentence() {
        let corpus = parse_conll("a\tI-PlugIn_Usage\nb\tO\n\nc\tO\n\n").unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.sentences_with_entity, 1);
        assert_eq!(stats.total_entities, 1);
        assert_eq!(stats.per_group_totals[&EntityGroup::PlugIn], 1);
    }

    #[test]
    fn concat_reassigns_ids() {
        let a = parse_conll(ONE).unwrap();
        let b = parse_conll("x\tO\n").unwrap();
        let c = Corpus::concat([a, b]);
        let ids: Vec<_> = c.sentences().iter().map(|s| s.id().to_string()).collect();
        assert_eq!(ids, ["s0", "s1"]);
    }
}
