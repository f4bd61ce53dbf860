//! Hashed sparse feature templates for tokens, sentences and span queries.
//!
//! Feature names are hashed with 64-bit FNV-1a. Collisions are accepted.

use crate::corpus::Sentence;
use crate::spans::Span;

use super::ModelError;

/// Name of the hash function recorded in model metadata.
pub const FEATURE_HASH: &str = "fnv1a-64";

/// Context tokens kept on each side of a span.
pub const SPAN_CONTEXT: usize = 3;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn feature_hash(name: &str) -> u64 {
    name.bytes().fold(FNV_OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// A set of active binary features (each with value 1.0), sorted and
/// deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeatureVector(Vec<u64>);

impl FeatureVector {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ids: Vec<u64> = names.into_iter().map(|n| feature_hash(n.as_ref())).collect();
        ids.sort_unstable();
        ids.dedup();
        FeatureVector(ids)
    }

    pub fn ids(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.binary_search(&feature_hash(name)).is_ok()
    }
}

/// Character-class shape: uppercase `X`, lowercase `x`, digit `d`, anything
/// else `.`.
pub fn word_shape(word: &str) -> String {
    word.chars()
        .map(|c| {
            if c.is_uppercase() {
                'X'
            } else if c.is_lowercase() {
                'x'
            } else if c.is_numeric() {
                'd'
            } else {
                '.'
            }
        })
        .collect()
}

fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn is_all_caps(word: &str) -> bool {
    let mut letters = word.chars().filter(|c| c.is_alphabetic()).peekable();
    letters.peek().is_some() && letters.all(char::is_uppercase)
}

fn has_digit(word: &str) -> bool {
    word.chars().any(|c| c.is_numeric())
}

fn push_word_templates(out: &mut Vec<String>, word: &str, slot: &str) {
    let chars: Vec<char> = word.chars().collect();
    out.push(format!("w{slot}={word}"));
    out.push(format!("lw{slot}={}", word.to_lowercase()));
    out.push(format!("shape{slot}={}", word_shape(word)));
    for n in 1..=3 {
        if chars.len() >= n {
            let prefix: String = chars[..n].iter().collect();
            let suffix: String = chars[chars.len() - n..].iter().collect();
            out.push(format!("p{n}{slot}={prefix}"));
            out.push(format!("s{n}{slot}={suffix}"));
        }
    }
    if is_capitalized(word) {
        out.push(format!("cap{slot}=1"));
    }
    if is_all_caps(word) {
        out.push(format!("allcaps{slot}=1"));
    }
    if has_digit(word) {
        out.push(format!("digit{slot}=1"));
    }
}

/// Feature names for token `i`. The centre token uses bare template names
/// (`w=`, `lw=`, ...); neighbours at offsets -2..=2 use `w[-1]=` etc. Slots
/// past the sentence edges emit `w[-k]=<BOS>` / `w[+k]=<EOS>`.
pub fn token_feature_names(sentence: &Sentence, i: usize) -> Result<Vec<String>, ModelError> {
    if i >= sentence.len() {
        return Err(ModelError::IndexOutOfRange { index: i, len: sentence.len() });
    }
    let tokens = sentence.tokens();
    let mut out = vec!["bias".to_string()];
    for offset in -2i64..=2 {
        let slot = if offset == 0 { String::new() } else { format!("[{offset:+}]") };
        let pos = i as i64 + offset;
        if pos < 0 {
            out.push(format!("w{slot}=<BOS>"));
        } else if pos as usize >= tokens.len() {
            out.push(format!("w{slot}=<EOS>"));
        } else {
            push_word_templates(&mut out, tokens[pos as usize].text(), &slot);
        }
    }
    Ok(out)
}

pub fn featurize_token(sentence: &Sentence, i: usize) -> Result<FeatureVector, ModelError> {
    token_feature_names(sentence, i).map(FeatureVector::from_names)
}

/// Per-token feature vectors for a whole sentence.
pub fn featurize_tokens(sentence: &Sentence) -> Vec<FeatureVector> {
    (0..sentence.len()).map(|i| featurize_token(sentence, i).expect("index in range")).collect()
}

/// Bag of word, lowercase and shape features plus lowercase bigrams.
pub fn sentence_feature_names(sentence: &Sentence) -> Vec<String> {
    let mut out = vec!["bias".to_string()];
    let lower: Vec<String> = sentence.token_texts().map(str::to_lowercase).collect();
    for (word, lw) in sentence.token_texts().zip(&lower) {
        out.push(format!("w={word}"));
        out.push(format!("lw={lw}"));
        out.push(format!("shape={}", word_shape(word)));
    }
    for pair in lower.windows(2) {
        out.push(format!("bg={}|{}", pair[0], pair[1]));
    }
    out
}

pub fn featurize_sentence(sentence: &Sentence) -> FeatureVector {
    FeatureVector::from_names(sentence_feature_names(sentence))
}

/// The span-typing input: the mention, its surrounding tokens and the whole
/// sentence. [`SpanQuery::prompt`] renders the question-style prompt used by
/// external classifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanQuery {
    pub span_text: String,
    /// Span tokens, in order.
    pub span_tokens: Vec<String>,
    /// Up to [`SPAN_CONTEXT`] tokens before the span, in sentence order.
    pub left_context: Vec<String>,
    /// Up to [`SPAN_CONTEXT`] tokens after the span, in sentence order.
    pub right_context: Vec<String>,
    pub sentence_text: String,
}

impl SpanQuery {
    pub fn new(sentence: &Sentence, span: &Span) -> Result<Self, ModelError> {
        if span.end() > sentence.len() {
            return Err(ModelError::IndexOutOfRange { index: span.end(), len: sentence.len() });
        }
        let texts: Vec<&str> = sentence.token_texts().collect();
        let left_start = span.start().saturating_sub(SPAN_CONTEXT);
        let right_end = (span.end() + SPAN_CONTEXT).min(texts.len());
        let owned = |s: &[&str]| s.iter().map(|t| t.to_string()).collect::<Vec<_>>();
        Ok(SpanQuery {
            span_text: sentence.slice_text(span.start(), span.end()),
            span_tokens: owned(&texts[span.start()..span.end()]),
            left_context: owned(&texts[left_start..span.start()]),
            right_context: owned(&texts[span.end()..right_end]),
            sentence_text: sentence.text(),
        })
    }

    pub fn prompt(&self) -> String {
        format!("What is {} in the sentence: {}", self.span_text, self.sentence_text)
    }
}

pub fn span_query_feature_names(q: &SpanQuery) -> Vec<String> {
    let mut out = vec!["bias".to_string()];
    out.push(format!("span={}", q.span_text));
    out.push(format!("span_lw={}", q.span_text.to_lowercase()));
    let shapes: Vec<String> = q.span_tokens.iter().map(|t| word_shape(t)).collect();
    out.push(format!("span_shape={}", shapes.join(" ")));
    for (tok, shape) in q.span_tokens.iter().zip(&shapes) {
        out.push(format!("stok={tok}"));
        out.push(format!("stok_lw={}", tok.to_lowercase()));
        out.push(format!("sshape={shape}"));
    }
    let len = q.span_tokens.len();
    out.push(if len >= 4 { "len=4+".to_string() } else { format!("len={len}") });
    for k in 1..=SPAN_CONTEXT {
        match q.left_context.len().checked_sub(k).map(|i| &q.left_context[i]) {
            Some(w) => {
                out.push(format!("left-{k}={w}"));
                out.push(format!("left-{k}_lw={}", w.to_lowercase()));
                out.push(format!("lbag={}", w.to_lowercase()));
            }
            None => out.push(format!("left-{k}=<BOS>")),
        }
        match q.right_context.get(k - 1) {
            Some(w) => {
                out.push(format!("right+{k}={w}"));
                out.push(format!("right+{k}_lw={}", w.to_lowercase()));
                out.push(format!("rbag={}", w.to_lowercase()));
            }
            None => out.push(format!("right+{k}=<EOS>")),
        }
    }
    for w in q.sentence_text.split(' ') {
        out.push(format!("sent={}", w.to_lowercase()));
    }
    out
}

pub fn featurize_span_query(q: &SpanQuery) -> FeatureVector {
    FeatureVector::from_names(span_query_feature_names(q))
}
