//! Independent reference implementations and generators shared by the
//! integration suites. Nothing here calls the library's decoding, matching
//! or scoring code; oracles work on plain strings and tuples.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};

use cascade_ner::corpus::{Corpus, EntityType, LabeledSentence, Sentence};
use cascade_ner::pipeline::{Gate, PipelineError, Tagger, Typer};
use cascade_ner::spans::{Span, TagScheme, TagSequence};
use proptest::prelude::*;

pub const TYPE_NAMES: [&str; 13] = [
    "Application_Creation",
    "Application_Deposition",
    "Application_Mention",
    "Application_Usage",
    "OperatingSystem_Mention",
    "OperatingSystem_Usage",
    "PlugIn_Creation",
    "PlugIn_Deposition",
    "PlugIn_Mention",
    "PlugIn_Usage",
    "ProgrammingEnvironment_Mention",
    "ProgrammingEnvironment_Usage",
    "SoftwareCoreference_Deposition",
];

/// `(start, end, type index)` as produced by [`spans_strategy`].
pub type RawSpans = Vec<(usize, usize, usize)>;

/// `(start, end, type)` with `end` exclusive; type `None` for untyped.
pub type RefSpan = (usize, usize, Option<String>);

/// All label strings of a scheme, written out by hand.
pub fn label_strings(typed: bool) -> Vec<String> {
    let mut out = vec!["O".to_string()];
    if typed {
        for t in TYPE_NAMES {
            out.push(format!("B-{t}"));
            out.push(format!("I-{t}"));
        }
    } else {
        out.push("B".into());
        out.push("I".into());
    }
    out
}

/// Reference BIO reader: a span starts at every `B`, at an `I` following
/// `O`, and at an `I` whose type differs from the open span's.
pub fn ref_decode(labels: &[String]) -> Vec<RefSpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, Option<String>)> = None;
    for (i, label) in labels.iter().enumerate() {
        let (prefix, ty) = match label.split_once('-') {
            Some((p, t)) => (p, Some(t.to_string())),
            None => (label.as_str(), None),
        };
        let starts_new = match prefix {
            "O" => {
                if let Some((s, t)) = open.take() {
                    spans.push((s, i, t));
                }
                continue;
            }
            "B" => true,
            "I" => !matches!(&open, Some((_, t)) if *t == ty),
            other => panic!("unexpected prefix {other}"),
        };
        if starts_new {
            if let Some((s, t)) = open.take() {
                spans.push((s, i, t));
            }
            open = Some((i, ty));
        }
    }
    if let Some((s, t)) = open {
        spans.push((s, labels.len(), t));
    }
    spans
}

pub fn to_ref(spans: &[Span]) -> Vec<RefSpan> {
    spans.iter().map(|s| (s.start(), s.end(), s.entity_type().map(|t| t.to_string()))).collect()
}

/// Every label sequence of length `n` over `labels`, in lexicographic order.
pub fn all_sequences(labels: &[String], n: usize) -> Vec<Vec<String>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                labels.iter().map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Maximum path score over all `l^n` label paths.
pub fn brute_force_max(emissions: &[Vec<f64>], transitions: &[f64], start: &[f64], stop: &[f64]) -> f64 {
    let n = emissions.len();
    let l = start.len();
    let mut best = f64::NEG_INFINITY;
    let total = l.pow(n as u32);
    for code in 0..total {
        let mut path = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            path.push(c % l);
            c /= l;
        }
        let mut score = start[path[0]] + stop[path[n - 1]];
        for i in 0..n {
            score += emissions[i][path[i]];
            if i > 0 {
                score += transitions[path[i - 1] * l + path[i]];
            }
        }
        best = best.max(score);
    }
    best
}

/// Per-class `(tp, fp, fn)` by comparing every gold span with every
/// predicted span of the same sentence.
pub fn brute_force_counts(gold: &[Vec<RefSpan>], pred: &[Vec<RefSpan>]) -> BTreeMap<String, (usize, usize, usize)> {
    let mut counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        for gs in g {
            let hit = p.iter().any(|ps| ps == gs);
            let e = counts.entry(gs.2.clone().unwrap_or_default()).or_default();
            if hit {
                e.0 += 1;
            } else {
                e.2 += 1;
            }
        }
        for ps in p {
            if !g.iter().any(|gs| gs == ps) {
                counts.entry(ps.2.clone().unwrap_or_default()).or_default().1 += 1;
            }
        }
    }
    counts
}

/// Support-weighted precision, recall and F1 from per-class counts, with
/// 0/0 taken as 0 and zero-support classes skipped.
pub fn weighted_from_counts(counts: &BTreeMap<String, (usize, usize, usize)>) -> (f64, f64, f64) {
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut p, mut r, mut f, mut w) = (0.0, 0.0, 0.0, 0usize);
    for &(tp, fp, fn_) in counts.values() {
        let support = tp + fn_;
        if support == 0 {
            continue;
        }
        let pc = div(tp, tp + fp);
        let rc = div(tp, support);
        let fc = if pc + rc == 0.0 { 0.0 } else { 2.0 * pc * rc / (pc + rc) };
        p += support as f64 * pc;
        r += support as f64 * rc;
        f += support as f64 * fc;
        w += support;
    }
    if w == 0 {
        (0.0, 0.0, 0.0)
    } else {
        (p / w as f64, r / w as f64, f / w as f64)
    }
}

/// Reference scorer over raw tag strings, sentence by sentence.
pub fn reference_scores(gold_tags: &[Vec<String>], pred_tags: &[Vec<String>]) -> (f64, f64, f64) {
    let g: Vec<_> = gold_tags.iter().map(|t| ref_decode(t)).collect();
    let p: Vec<_> = pred_tags.iter().map(|t| ref_decode(t)).collect();
    weighted_from_counts(&brute_force_counts(&g, &p))
}

pub fn entity_type(i: usize) -> EntityType {
    TYPE_NAMES[i].parse().unwrap()
}

/// Disjoint, sorted, typed spans over a sentence of length `len`.
pub fn spans_strategy(len: usize, max_spans: usize) -> impl Strategy<Value = RawSpans> {
    // Cut the sentence into up to `2 * max_spans + 1` gaps and spans.
    prop::collection::vec((0usize..3, 1usize..4, 0usize..13), 0..=max_spans).prop_map(move |parts| {
        let mut out = Vec::new();
        let mut pos = 0;
        for (gap, width, ty) in parts {
            let start = pos + gap;
            let end = start + width;
            if end > len {
                break;
            }
            out.push((start, end, ty));
            pos = end;
        }
        out
    })
}

pub fn make_spans(raw: &[(usize, usize, usize)]) -> Vec<Span> {
    raw.iter().map(|&(s, e, t)| Span::typed(s, e, entity_type(t)).unwrap()).collect()
}

/// Random labeled corpus: up to `max_sentences` sentences of 1..=8 tokens,
/// each with up to `max_spans` gold spans.
pub fn corpus_strategy(max_sentences: usize, max_spans: usize) -> impl Strategy<Value = Corpus> {
    prop::collection::vec(
        (1usize..=8).prop_flat_map(move |len| (Just(len), spans_strategy(len, max_spans))),
        1..=max_sentences,
    )
    .prop_map(|sentences| build_corpus(&sentences))
}

pub fn build_corpus(sentences: &[(usize, RawSpans)]) -> Corpus {
    let labeled = sentences
        .iter()
        .enumerate()
        .map(|(i, (len, raw))| {
            let tokens: Vec<String> = (0..*len).map(|j| format!("w{i}_{j}")).collect();
            let sentence = Sentence::new(format!("s{i}"), tokens).unwrap();
            let tags = cascade_ner::spans::encode_bio(&make_spans(raw), *len, TagScheme::Full27).unwrap();
            LabeledSentence::new(sentence, tags).unwrap()
        })
        .collect();
    Corpus::new(labeled).unwrap()
}

/// Components that read the answers off a gold corpus and count calls.
pub struct Oracle {
    gold: HashMap<String, TagSequence>,
    scheme: TagScheme,
    pub gate_calls: AtomicUsize,
    pub tagger_calls: AtomicUsize,
    pub typer_calls: AtomicUsize,
}

impl Oracle {
    pub fn new(corpus: &Corpus, scheme: TagScheme) -> Self {
        Oracle {
            gold: corpus.sentences().iter().map(|s| (s.id().to_string(), s.tags().clone())).collect(),
            scheme,
            gate_calls: AtomicUsize::new(0),
            tagger_calls: AtomicUsize::new(0),
            typer_calls: AtomicUsize::new(0),
        }
    }

    fn gold_labels(&self, id: &str) -> Vec<String> {
        self.gold[id].labels()
    }
}

impl Gate for Oracle {
    fn contains_entity(&self, sentence: &Sentence) -> Result<bool, PipelineError> {
        self.gate_calls.fetch_add(1, Ordering::SeqCst);
        Ok(self.gold_labels(sentence.id()).iter().any(|l| l != "O"))
    }
}

impl Tagger for Oracle {
    fn scheme(&self) -> TagScheme {
        self.scheme
    }

    fn tag(&self, sentence: &Sentence) -> Result<TagSequence, PipelineError> {
        self.tagger_calls.fetch_add(1, Ordering::SeqCst);
        let labels: Vec<String> = self
            .gold_labels(sentence.id())
            .into_iter()
            .map(|l| match self.scheme {
                TagScheme::Full27 => l,
                TagScheme::Untyped3 => l.split('-').next().unwrap().to_string(),
            })
            .collect();
        Ok(TagSequence::parse(self.scheme, &labels).unwrap())
    }
}

impl Typer for Oracle {
    fn classify(&self, sentence: &Sentence, span: &Span) -> Result<EntityType, PipelineError> {
        self.typer_calls.fetch_add(1, Ordering::SeqCst);
        let labels = self.gold_labels(sentence.id());
        let ty = labels[span.start()].split_once('-').expect("oracle asked about a gold span").1;
        Ok(ty.parse().unwrap())
    }
}
