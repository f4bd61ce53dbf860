//! Exact-match span evaluation and stage-isolated diagnostics.
//!
//! A predicted span is correct only when its start, end and type all equal
//! those of a gold span. Per-class precision, recall and F1 use the 0/0 = 0
//! convention. The headline "weighted" figures average per-class metrics
//! with gold support as weights, over classes with non-zero support.
//! Reports keep full precision; serialization rounds to three decimals.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{Corpus, EntityType};
use crate::pipeline::{Gate, Pipeline, PipelineError, SentencePrediction, Tagger, Typer};
use crate::spans::{decode_bio, erase_types, sentence_entity_label, Span};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no prediction for gold sentence `{0}`")]
    MissingPrediction(String),
    #[error("more than one prediction for sentence `{0}`")]
    DuplicatePrediction(String),
    #[error("prediction for unknown sentence `{0}`")]
    UnknownSentenceId(String),
    #[error("sentence `{id}`: predicted span ({start}, {end}) is outside the sentence")]
    SpanOutOfRange { id: String, start: usize, end: usize },
    #[error("sentence `{id}`: predicted span ({start}, {end}) has no type")]
    UntypedPrediction { id: String, start: usize, end: usize },
    #[error("no gold spans to evaluate")]
    NoSpansInCorpus,
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// What a row of a report counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassKey {
    /// A typed entity class.
    Type(EntityType),
    /// Untyped spans (boundary-only evaluation).
    Entity,
    /// Sentence gate class 0 (`false`) or 1 (`true`).
    Gate(bool),
}

impl fmt::Display for ClassKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassKey::Type(t) => write!(f, "{t}"),
            ClassKey::Entity => f.write_str("ENTITY"),
            ClassKey::Gate(g) => write!(f, "{}", u8::from(*g)),
        }
    }
}

impl Serialize for ClassKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Counts) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn round3<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64((x * 1000.0).round() / 1000.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    #[serde(rename = "type")]
    pub class: ClassKey,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    #[serde(serialize_with = "round3")]
    pub precision: f64,
    #[serde(serialize_with = "round3")]
    pub recall: f64,
    #[serde(serialize_with = "round3")]
    pub f1: f64,
    pub support: usize,
}

impl ClassMetrics {
    pub fn from_counts(class: ClassKey, c: Counts) -> Self {
        let precision = ratio(c.tp, c.tp + c.fp);
        let recall = ratio(c.tp, c.tp + c.fn_);
        ClassMetrics {
            class,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            precision,
            recall,
            f1: harmonic(precision, recall),
            support: c.tp + c.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Aggregate {
    #[serde(serialize_with = "round3")]
    pub precision: f64,
    #[serde(serialize_with = "round3")]
    pub recall: f64,
    #[serde(serialize_with = "round3")]
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Totals {
    pub gold: usize,
    pub predicted: usize,
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub weighted: Aggregate,
    pub micro: Aggregate,
    #[serde(rename = "macro")]
    pub macro_avg: Aggregate,
    pub totals: Totals,
}

impl EvalReport {
    /// Builds a report from per-class counts. Classes appear in key order.
    pub fn from_counts(counts: &BTreeMap<ClassKey, Counts>) -> Self {
        let per_class: Vec<ClassMetrics> = counts.iter().map(|(k, c)| ClassMetrics::from_counts(*k, *c)).collect();
        let supported: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
        let total_support: usize = supported.iter().map(|m| m.support).sum();
        let weighted_mean = |f: fn(&ClassMetrics) -> f64| {
            if total_support == 0 {
                0.0
            } else {
                supported.iter().map(|m| m.support as f64 * f(m)).sum::<f64>() / total_support as f64
            }
        };
        let macro_mean = |f: fn(&ClassMetrics) -> f64| {
            if supported.is_empty() {
                0.0
            } else {
                supported.iter().map(|m| f(m)).sum::<f64>() / supported.len() as f64
            }
        };
        let mut sum = Counts::default();
        for c in counts.values() {
            sum += *c;
        }
        let micro_p = ratio(sum.tp, sum.tp + sum.fp);
        let micro_r = ratio(sum.tp, sum.tp + sum.fn_);
        EvalReport {
            weighted: Aggregate {
                precision: weighted_mean(|m| m.precision),
                recall: weighted_mean(|m| m.recall),
                f1: weighted_mean(|m| m.f1),
            },
            macro_avg: Aggregate {
                precision: macro_mean(|m| m.precision),
                recall: macro_mean(|m| m.recall),
                f1: macro_mean(|m| m.f1),
            },
            micro: Aggregate { precision: micro_p, recall: micro_r, f1: harmonic(micro_p, micro_r) },
            totals: Totals { gold: sum.tp + sum.fn_, predicted: sum.tp + sum.fp, matched: sum.tp },
            per_class,
        }
    }

    pub fn class(&self, key: ClassKey) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|m| m.class == key)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text table: one row per class, then the aggregates.
    pub fn render_table(&self) -> String {
        let width = self
            .per_class
            .iter()
            .map(|m| m.class.to_string().len())
            .chain(["Entity class".len(), "weighted avg".len()])
            .max()
            .unwrap_or(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}",
            "Entity class", "Precision", "Recall", "F1-score", "Support"
        );
        let _ = writeln!(out, "{}", "-".repeat(width + 45));
        for m in &self.per_class {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>7}",
                m.class.to_string(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 45));
        for (name, agg) in
            [("weighted avg", &self.weighted), ("micro avg", &self.micro), ("macro avg", &self.macro_avg)]
        {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>7}",
                name, agg.precision, agg.recall, agg.f1, self.totals.gold
            );
        }
        out
    }
}

/// Index pairs `(gold, predicted)` of spans equal in start, end and type.
pub fn match_exact(gold: &[Span], pred: &[Span]) -> Vec<(usize, usize)> {
    let mut by_span: HashMap<Span, Vec<usize>> = HashMap::new();
    for (j, p) in pred.iter().enumerate().rev() {
        by_span.entry(*p).or_default().push(j);
    }
    gold.iter().enumerate().filter_map(|(i, g)| by_span.get_mut(g).and_then(Vec::pop).map(|j| (i, j))).collect()
}

/// Adds one sentence's exact-match counts into `counts`, keyed by `key`.
pub fn count_sentence(
    gold: &[Span],
    pred: &[Span],
    key: impl Fn(&Span) -> ClassKey,
    counts: &mut BTreeMap<ClassKey, Counts>,
) {
    let matches = match_exact(gold, pred);
    let matched_gold: HashSet<usize> = matches.iter().map(|m| m.0).collect();
    let matched_pred: HashSet<usize> = matches.iter().map(|m| m.1).collect();
    for (i, g) in gold.iter().enumerate() {
        let c = counts.entry(key(g)).or_default();
        if matched_gold.contains(&i) {
            c.tp += 1;
        } else {
            c.fn_ += 1;
        }
    }
    for (j, p) in pred.iter().enumerate() {
        if !matched_pred.contains(&j) {
            counts.entry(key(p)).or_default().fp += 1;
        }
    }
}

fn type_key(span: &Span) -> ClassKey {
    ClassKey::Type(span.entity_type().expect("checked typed"))
}

/// Scores typed predictions against the gold corpus. Every gold sentence
/// needs exactly one prediction.
pub fn evaluate(gold: &Corpus, preds: &[SentencePrediction]) -> Result<EvalReport, EvalError> {
    let mut by_id: HashMap<&str, &SentencePrediction> = HashMap::new();
    let known: HashSet<&str> = gold.sentences().iter().map(|s| s.id()).collect();
    for p in preds {
        if !known.contains(p.sentence_id.as_str()) {
            return Err(EvalError::UnknownSentenceId(p.sentence_id.clone()));
        }
        if by_id.insert(p.sentence_id.as_str(), p).is_some() {
            return Err(EvalError::DuplicatePrediction(p.sentence_id.clone()));
        }
    }
    let mut counts = BTreeMap::new();
    for s in gold.sentences() {
        let p = by_id.get(s.id()).ok_or_else(|| EvalError::MissingPrediction(s.id().to_string()))?;
        for span in &p.spans {
            if span.end() > s.sentence().len() {
                return Err(EvalError::SpanOutOfRange { id: s.id().to_string(), start: span.start(), end: span.end() });
            }
            if span.entity_type().is_none() {
                return Err(EvalError::UntypedPrediction {
                    id: s.id().to_string(),
                    start: span.start(),
                    end: span.end(),
                });
            }
        }
        count_sentence(&decode_bio(s.tags()), &p.spans, type_key, &mut counts);
    }
    Ok(EvalReport::from_counts(&counts))
}

/// Gate accuracy as a two-class problem (0 = no entity, 1 = entity).
pub fn diagnose_stage1(gate: &dyn Gate, corpus: &Corpus) -> Result<EvalReport, EvalError> {
    let mut counts: BTreeMap<ClassKey, Counts> =
        [false, true].into_iter().map(|g| (ClassKey::Gate(g), Counts::default())).collect();
    for s in corpus.sentences() {
        let truth = sentence_entity_label(s.tags());
        let guess = gate.contains_entity(s.sentence())?;
        if truth == guess {
            counts.get_mut(&ClassKey::Gate(truth)).unwrap().tp += 1;
        } else {
            counts.get_mut(&ClassKey::Gate(truth)).unwrap().fn_ += 1;
            counts.get_mut(&ClassKey::Gate(guess)).unwrap().fp += 1;
        }
    }
    Ok(EvalReport::from_counts(&counts))
}

/// Boundary-only span detection on the sentences that truly contain
/// entities, as if the gate were perfect.
pub fn diagnose_stage2(tagger: &dyn Tagger, corpus: &Corpus) -> Result<EvalReport, EvalError> {
    let mut counts = BTreeMap::from([(ClassKey::Entity, Counts::default())]);
    for s in corpus.sentences() {
        let gold = erase_types(&decode_bio(s.tags()));
        if gold.is_empty() {
            continue;
        }
        let tags = tagger.tag(s.sentence())?;
        if tags.len() != s.sentence().len() {
            return Err(PipelineError::LengthMismatch {
                id: s.id().to_string(),
                expected: s.sentence().len(),
                found: tags.len(),
            }
            .into());
        }
        let pred = erase_types(&decode_bio(&tags));
        count_sentence(&gold, &pred, |_| ClassKey::Entity, &mut counts);
    }
    Ok(EvalReport::from_counts(&counts))
}

/// Span typing on gold boundaries, as if extraction were perfect.
pub fn diagnose_stage3(typer: &dyn Typer, corpus: &Corpus) -> Result<EvalReport, EvalError> {
    let mut counts = BTreeMap::new();
    let mut any = false;
    for s in corpus.sentences() {
        let gold = decode_bio(s.tags());
        any |= !gold.is_empty();
        let pred = gold
            .iter()
            .map(|g| Ok(g.with_type(Some(typer.classify(s.sentence(), g)?))))
            .collect::<Result<Vec<_>, PipelineError>>()?;
        count_sentence(&gold, &pred, type_key, &mut counts);
    }
    if !any {
        return Err(EvalError::NoSpansInCorpus);
    }
    Ok(EvalReport::from_counts(&counts))
}

/// One evaluated system in a comparison grid.
#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub system: String,
    pub approach: u8,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
}

impl CompareTable {
    pub fn row(&self, system: &str, approach: u8) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.system == system && r.approach == approach)
    }

    /// Grid with one line per system and precision / recall / F1 columns
    /// for each approach. Missing cells print as `-`.
    pub fn render_grid(&self) -> String {
        let mut systems: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !systems.contains(&r.system.as_str()) {
                systems.push(&r.system);
            }
        }
        let width = systems.iter().map(|s| s.len()).chain(["Models".len()]).max().unwrap_or(6);
        let mut out = String::new();
        let _ = write!(out, "{:<width$}", "");
        for a in 1..=3 {
            let _ = write!(out, " | {:^23}", format!("Approach {a}"));
        }
        out.push('\n');
        let _ = write!(out, "{:<width$}", "Models");
        for _ in 1..=3 {
            let _ = write!(out, " | {:>7} {:>7} {:>7}", "P", "R", "F1");
        }
        out.push('\n');
        let _ = writeln!(out, "{}", "-".repeat(width + 3 * 26));
        for sys in systems {
            let _ = write!(out, "{sys:<width$}");
            for a in 1..=3u8 {
                match self.row(sys, a) {
                    Some(r) => {
                        let w = &r.report.weighted;
                        let _ = write!(out, " | {:>7.3} {:>7.3} {:>7.3}", w.precision, w.recall, w.f1);
                    }
                    None => {
                        let _ = write!(out, " | {:>7} {:>7} {:>7}", "-", "-", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs and scores each named pipeline on the gold corpus.
pub fn compare_approaches(systems: &[(String, Pipeline)], gold: &Corpus) -> Result<CompareTable, EvalError> {
    let rows = systems
        .iter()
        .map(|(name, pipeline)| {
            let preds = pipeline.predict_corpus(gold)?;
            Ok(CompareRow {
                system: name.clone(),
                approach: pipeline.approach().number(),
                report: evaluate(gold, &preds)?,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(CompareTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conll;

    fn ty(s: &str) -> EntityType {
        s.parse().unwrap()
    }

    fn typed(start: usize, end: usize, t: &str) -> Span {
        Span::typed(start, end, ty(t)).unwrap()
    }

    fn gold_as_predictions(corpus: &Corpus) -> Vec<SentencePrediction> {
        corpus.sentences().iter().map(|s| SentencePrediction::new(s.id(), decode_bio(s.tags()))).collect()
    }

    fn two_sentences() -> Corpus {
        parse_conll(
            "SPSS\tB-Application_Usage\nwas\tO\nused\tO\n\n\
             with\tO\nthe\tB-PlugIn_Usage\nplugin\tI-PlugIn_Usage\n\n",
        )
        .unwrap()
    }

    #[test]
    fn exact_match_examples() {
        let g = [typed(0, 1, "Application_Usage")];
        assert_eq!(match_exact(&g, &[typed(0, 1, "Application_Usage")]), [(0, 0)]);
        assert!(match_exact(&[typed(0, 2, "Application_Usage")], &[typed(0, 1, "Application_Usage")]).is_empty());
        assert!(match_exact(&g, &[typed(0, 1, "Application_Mention")]).is_empty());
    }

    #[test]
    fn two_sentence_example() {
        let gold = two_sentences();
        let preds = vec![
            SentencePrediction::new("s0", vec![typed(0, 1, "Application_Usage")]),
            SentencePrediction::new("s1", vec![typed(1, 2, "PlugIn_Usage")]),
        ];
        let r = evaluate(&gold, &preds).unwrap();
        let app = r.class(ClassKey::Type(ty("Application_Usage"))).unwrap();
        assert_eq!((app.precision, app.recall, app.f1, app.support), (1.0, 1.0, 1.0, 1));
        let plug = r.class(ClassKey::Type(ty("PlugIn_Usage"))).unwrap();
        assert_eq!((plug.precision, plug.recall, plug.f1, plug.support), (0.0, 0.0, 0.0, 1));
        assert_eq!(r.weighted, Aggregate { precision: 0.5, recall: 0.5, f1: 0.5 });
        assert_eq!(r.micro.precision, 0.5);
        assert_eq!(r.micro.recall, 0.5);
        assert_eq!(r.totals, Totals { gold: 2, predicted: 2, matched: 1 });
    }

    #[test]
    fn identity_and_empty() {
        let gold = two_sentences();
        let r = evaluate(&gold, &gold_as_predictions(&gold)).unwrap();
        assert_eq!(r.weighted, Aggregate { precision: 1.0, recall: 1.0, f1: 1.0 });
        assert_eq!(r.micro, Aggregate { precision: 1.0, recall: 1.0, f1: 1.0 });
        assert!(r.per_class.iter().all(|m| m.fp == 0 && m.fn_ == 0));

        let empty: Vec<_> = gold.sentences().iter().map(|s| SentencePrediction::new(s.id(), vec![])).collect();
        let r = evaluate(&gold, &empty).unwrap();
        assert_eq!(r.weighted, Aggregate::default());
        assert_eq!(r.micro, Aggregate::default());
    }

    #[test]
    fn prediction_id_errors() {
        let gold = two_sentences();
        let mut preds = gold_as_predictions(&gold);
        preds.pop();
        assert!(matches!(evaluate(&gold, &preds), Err(EvalError::MissingPrediction(id)) if id == "s1"));
        let mut preds = gold_as_predictions(&gold);
        preds.push(SentencePrediction::new("s0", vec![]));
        assert!(matches!(evaluate(&gold, &preds), Err(EvalError::DuplicatePrediction(_))));
        let mut preds = gold_as_predictions(&gold);
        preds.push(SentencePrediction::new("s7", vec![]));
        assert!(matches!(evaluate(&gold, &preds), Err(EvalError::UnknownSentenceId(_))));
        let preds = vec![
            SentencePrediction::new("s0", vec![Span::untyped(0, 1).unwrap()]),
            SentencePrediction::new("s1", vec![]),
        ];
        assert!(matches!(evaluate(&gold, &preds), Err(EvalError::UntypedPrediction { .. })));
    }

    #[test]
    fn zero_support_class_only_affects_micro() {
        let gold = parse_conll("SPSS\tB-Application_Usage\nx\tO\n\n").unwrap();
        let preds =
            vec![SentencePrediction::new("s0", vec![typed(0, 1, "Application_Usage"), typed(1, 2, "PlugIn_Creation")])];
        let r = evaluate(&gold, &preds).unwrap();
        assert_eq!(r.weighted.precision, 1.0);
        assert_eq!(r.micro.precision, 0.5);
        let spurious = r.class(ClassKey::Type(ty("PlugIn_Creation"))).unwrap();
        assert_eq!((spurious.fp, spurious.support), (1, 0));
    }

    struct Always(bool);
    impl Gate for Always {
        fn contains_entity(&self, _: &crate::corpus::Sentence) -> Result<bool, PipelineError> {
            Ok(self.0)
        }
    }

    #[test]
    fn stage1_always_closed_gate() {
        // 3 positive, 5 negative sentences
        let mut text = String::new();
        for i in 0..8 {
            let label = if i < 3 { "B-Application_Usage" } else { "O" };
            text.push_str(&format!("w\t{label}\n\n"));
        }
        let corpus = parse_conll(&text).unwrap();
        let r = diagnose_stage1(&Always(false), &corpus).unwrap();
        let neg = r.class(ClassKey::Gate(false)).unwrap();
        let pos = r.class(ClassKey::Gate(true)).unwrap();
        assert_eq!((neg.tp, neg.fp, neg.fn_), (5, 3, 0));
        assert_eq!((pos.tp, pos.fp, pos.fn_), (0, 0, 3));
        assert_eq!(pos.recall, 0.0);
        let p0 = 5.0 / 8.0;
        assert!((r.weighted.precision - p0 * p0).abs() < 1e-12);
        assert!((r.weighted.recall - 5.0 / 8.0).abs() < 1e-12);
        let f0 = 2.0 * p0 / (p0 + 1.0);
        assert!((r.weighted.f1 - 5.0 / 8.0 * f0).abs() < 1e-12);

        let perfect = diagnose_stage1(&Always(true), &parse_conll("w\tB-PlugIn_Usage\n").unwrap()).unwrap();
        assert_eq!(perfect.weighted, Aggregate { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    struct FixedTags(Vec<&'static str>);
    impl Tagger for FixedTags {
        fn scheme(&self) -> crate::spans::TagScheme {
            crate::spans::TagScheme::Untyped3
        }
        fn tag(&self, _: &crate::corpus::Sentence) -> Result<crate::spans::TagSequence, PipelineError> {
            Ok(crate::spans::TagSequence::parse(crate::spans::TagScheme::Untyped3, &self.0).unwrap())
        }
    }

    #[test]
    fn stage2_finds_one_of_two() {
        let gold = parse_conll("a\tB-Application_Usage\nb\tO\nc\tB-PlugIn_Usage\nd\tI-PlugIn_Usage\n\n").unwrap();
        let r = diagnose_stage2(&FixedTags(vec!["B", "O", "O", "O"]), &gold).unwrap();
        let m = r.class(ClassKey::Entity).unwrap();
        assert_eq!((m.precision, m.recall), (1.0, 0.5));
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stage2_skips_sentences_without_entities() {
        // the tagger would fire on the negative sentence, but it is never asked
        let gold = parse_conll("x\tO\n\nSPSS\tB-Application_Usage\n\n").unwrap();
        let r = diagnose_stage2(&FixedTags(vec!["B"]), &gold).unwrap();
        assert_eq!(r.weighted, Aggregate { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    struct Majority;
    impl Typer for Majority {
        fn classify(&self, _: &crate::corpus::Sentence, _: &Span) -> Result<EntityType, PipelineError> {
            Ok("Application_Usage".parse().unwrap())
        }
    }

    #[test]
    fn stage3_majority_typer() {
        let gold =
            parse_conll("a\tB-Application_Usage\nb\tO\nc\tB-Application_Usage\n\nd\tB-PlugIn_Usage\n\n").unwrap();
        let r = diagnose_stage3(&Majority, &gold).unwrap();
        let major = r.class(ClassKey::Type(ty("Application_Usage"))).unwrap();
        assert!((major.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(major.recall, 1.0);
        let minor = r.class(ClassKey::Type(ty("PlugIn_Usage"))).unwrap();
        assert_eq!((minor.precision, minor.recall), (0.0, 0.0));
        assert!((r.weighted.precision - 4.0 / 9.0).abs() < 1e-12);
        assert!((r.weighted.recall - 2.0 / 3.0).abs() < 1e-12);

        let empty = parse_conll("x\tO\n\n").unwrap();
        assert!(matches!(diagnose_stage3(&Majority, &empty), Err(EvalError::NoSpansInCorpus)));
    }

    #[test]
    fn report_json_rounds_to_three_decimals() {
        let mut counts = BTreeMap::new();
        counts.insert(ClassKey::Entity, Counts { tp: 2, fp: 0, fn_: 1 });
        let r = EvalReport::from_counts(&counts);
        let json = r.to_json();
        assert!(json.contains("\"recall\": 0.667"));
        assert!(json.contains("\"type\": \"ENTITY\""));
        assert!(json.contains("\"fn\": 1"));
        assert!((r.per_class[0].recall - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.render_table().contains("ENTITY"));
    }
}
