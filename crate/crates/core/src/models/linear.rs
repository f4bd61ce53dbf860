//! Averaged multiclass perceptron, used for the sentence gate and the
//! span-type classifier.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, EntityType, Sentence};
use crate::spans::{decode_bio, sentence_entity_label, Span};

use super::features::{featurize_sentence, featurize_span_query, FeatureVector, SpanQuery};
use super::{argmax, Hyper, ModelError, TrainMeta};

/// Sparse weight table with lazily accumulated averages.
///
/// Keeps the live weights `w` and the step-weighted update sum `acc`; the
/// averaged weights after `c` steps are `w - acc / c`.
#[derive(Debug, Clone)]
pub(crate) struct AveragingTable {
    n_labels: usize,
    live: HashMap<u64, Vec<f64>>,
    acc: HashMap<u64, Vec<f64>>,
}

impl AveragingTable {
    pub(crate) fn new(n_labels: usize) -> Self {
        AveragingTable { n_labels, live: HashMap::new(), acc: HashMap::new() }
    }

    pub(crate) fn add_scores(&self, fv: &FeatureVector, scores: &mut [f64]) {
        for f in fv.ids() {
            if let Some(w) = self.live.get(f) {
                for (s, w) in scores.iter_mut().zip(w) {
                    *s += w;
                }
            }
        }
    }

    pub(crate) fn update(&mut self, fv: &FeatureVector, label: usize, delta: f64, step: f64) {
        let n = self.n_labels;
        for f in fv.ids() {
            self.live.entry(*f).or_insert_with(|| vec![0.0; n])[label] += delta;
            self.acc.entry(*f).or_insert_with(|| vec![0.0; n])[label] += step * delta;
        }
    }

    pub(crate) fn averaged(&self, steps: f64) -> BTreeMap<u64, Vec<f64>> {
        self.live
            .iter()
            .filter_map(|(f, w)| {
                let acc = &self.acc[f];
                let avg: Vec<f64> = w.iter().zip(acc).map(|(w, a)| w - a / steps).collect();
                avg.iter().any(|x| *x != 0.0).then_some((*f, avg))
            })
            .collect()
    }
}

/// Dense counterpart of [`AveragingTable`] for small fixed-size parameter
/// blocks (transition matrices).
#[derive(Debug, Clone)]
pub(crate) struct AveragingVec {
    pub(crate) live: Vec<f64>,
    acc: Vec<f64>,
}

impl AveragingVec {
    pub(crate) fn new(len: usize) -> Self {
        AveragingVec { live: vec![0.0; len], acc: vec![0.0; len] }
    }

    pub(crate) fn update(&mut self, i: usize, delta: f64, step: f64) {
        self.live[i] += delta;
        self.acc[i] += step * delta;
    }

    pub(crate) fn averaged(&self, steps: f64) -> Vec<f64> {
        self.live.iter().zip(&self.acc).map(|(w, a)| w - a / steps).collect()
    }
}

/// A trained (or zero) linear classifier over hashed features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub(crate) labels: Vec<String>,
    pub(crate) weights: BTreeMap<u64, Vec<f64>>,
    pub(crate) meta: TrainMeta,
}

impl LinearModel {
    pub fn zero(labels: Vec<String>) -> Self {
        LinearModel { labels, weights: BTreeMap::new(), meta: TrainMeta::untrained() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn scores(&self, fv: &FeatureVector) -> Vec<f64> {
        let mut scores = vec![0.0; self.labels.len()];
        for f in fv.ids() {
            if let Some(w) = self.weights.get(f) {
                for (s, w) in scores.iter_mut().zip(w) {
                    *s += w;
                }
            }
        }
        scores
    }

    /// Highest-scoring label index, ties broken towards the lowest index.
    pub fn predict(&self, fv: &FeatureVector) -> usize {
        argmax(&self.scores(fv))
    }
}

/// Runs the averaged perceptron over `(features, label)` examples.
pub(crate) fn train_multiclass(
    examples: &[(FeatureVector, usize)],
    n_labels: usize,
    hyper: &Hyper,
) -> BTreeMap<u64, Vec<f64>> {
    let mut table = AveragingTable::new(n_labels);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut step = 1.0;
    let mut scores = vec![0.0; n_labels];
    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (fv, gold) = &examples[i];
            scores.iter_mut().for_each(|s| *s = 0.0);
            table.add_scores(fv, &mut scores);
            let guess = argmax(&scores);
            if guess != *gold {
                table.update(fv, *gold, hyper.learning_rate, step);
                table.update(fv, guess, -hyper.learning_rate, step);
            }
            step += 1.0;
        }
    }
    table.averaged(step)
}

/// Binary classifier deciding whether a sentence mentions any software.
/// Label 0 is "no entity", label 1 is "contains an entity".
#[derive(Debug, Clone, PartialEq)]
pub struct GateModel(pub(crate) LinearModel);

impl GateModel {
    pub fn labels() -> Vec<String> {
        vec!["0".into(), "1".into()]
    }

    pub fn zero() -> Self {
        GateModel(LinearModel::zero(Self::labels()))
    }

    pub fn linear(&self) -> &LinearModel {
        &self.0
    }

    pub fn predict(&self, sentence: &Sentence) -> bool {
        self.0.predict(&featurize_sentence(sentence)) == 1
    }
}

/// Classifier assigning one of the 13 entity types to a detected span.
#[derive(Debug, Clone, PartialEq)]
pub struct TyperModel(pub(crate) LinearModel);

impl TyperModel {
    pub fn labels() -> Vec<String> {
        EntityType::ALL.iter().map(|t| t.to_string()).collect()
    }

    pub fn zero() -> Self {
        TyperModel(LinearModel::zero(Self::labels()))
    }

    pub fn linear(&self) -> &LinearModel {
        &self.0
    }

    pub fn predict(&self, query: &SpanQuery) -> EntityType {
        let idx = self.0.predict(&featurize_span_query(query));
        EntityType::ALL[idx]
    }

    pub fn predict_span(&self, sentence: &Sentence, span: &Span) -> Result<EntityType, ModelError> {
        SpanQuery::new(sentence, span).map(|q| self.predict(&q))
    }
}

pub fn train_gate(corpus: &Corpus, hyper: &Hyper) -> Result<GateModel, ModelError> {
    hyper.validate()?;
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let examples: Vec<(FeatureVector, usize)> = corpus
        .sentences()
        .iter()
        .map(|s| (featurize_sentence(s.sentence()), usize::from(sentence_entity_label(s.tags()))))
        .collect();
    let positives = examples.iter().filter(|(_, y)| *y == 1).count();
    if positives == 0 || positives == examples.len() {
        log::warn!(
            "gate training corpus has a single class ({} of {} sentences contain entities); \
             the model will predict the majority class",
            positives,
            examples.len()
        );
    }
    let weights = train_multiclass(&examples, 2, hyper);
    Ok(GateModel(LinearModel { labels: GateModel::labels(), weights, meta: TrainMeta::new(hyper, corpus) }))
}

/// Trains the span-type classifier on every gold span of the corpus.
pub fn train_span_classifier(corpus: &Corpus, hyper: &Hyper) -> Result<TyperModel, ModelError> {
    hyper.validate()?;
    let mut examples = Vec::new();
    for s in corpus.sentences() {
        for span in decode_bio(s.tags()) {
            let q = SpanQuery::new(s.sentence(), &span)?;
            let ty = span.entity_type().expect("gold spans are typed");
            examples.push((featurize_span_query(&q), ty.index()));
        }
    }
    if examples.is_empty() {
        return Err(ModelError::NoSpansInCorpus);
    }
    let weights = train_multiclass(&examples, EntityType::ALL.len(), hyper);
    Ok(TyperModel(LinearModel { labels: TyperModel::labels(), weights, meta: TrainMeta::new(hyper, corpus) }))
}
