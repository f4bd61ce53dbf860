//! Linear-chain sequence tagger trained with the averaged structured
//! perceptron.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Sentence};
use crate::spans::{collapse_scheme, TagScheme, TagSequence};

use super::features::{featurize_tokens, FeatureVector};
use super::linear::{AveragingTable, AveragingVec};
use super::viterbi::{viterbi, ChainScores};
use super::{Hyper, ModelError, TrainMeta};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTaggerModel {
    pub(crate) scheme: TagScheme,
    pub(crate) emissions: BTreeMap<u64, Vec<f64>>,
    /// Row-major `from * n_labels + to`.
    pub(crate) transitions: Vec<f64>,
    pub(crate) start: Vec<f64>,
    pub(crate) stop: Vec<f64>,
    pub(crate) meta: TrainMeta,
}

impl ChainTaggerModel {
    pub fn zero(scheme: TagScheme) -> Self {
        let l = scheme.num_labels();
        ChainTaggerModel {
            scheme,
            emissions: BTreeMap::new(),
            transitions: vec![0.0; l * l],
            start: vec![0.0; l],
            stop: vec![0.0; l],
            meta: TrainMeta::untrained(),
        }
    }

    pub fn scheme(&self) -> TagScheme {
        self.scheme
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn labels(&self) -> Vec<String> {
        self.scheme.labels().iter().map(|t| t.to_string()).collect()
    }

    pub fn num_labels(&self) -> usize {
        self.scheme.num_labels()
    }

    pub fn emission_scores(&self, features: &[FeatureVector]) -> Vec<Vec<f64>> {
        let l = self.num_labels();
        features
            .iter()
            .map(|fv| {
                let mut scores = vec![0.0; l];
                for f in fv.ids() {
                    if let Some(w) = self.emissions.get(f) {
                        for (s, w) in scores.iter_mut().zip(w) {
                            *s += w;
                        }
                    }
                }
                scores
            })
            .collect()
    }

    /// Best label-id path and its score.
    pub fn decode_ids(&self, sentence: &Sentence) -> (Vec<usize>, f64) {
        let emissions = self.emission_scores(&featurize_tokens(sentence));
        viterbi(&ChainScores {
            emissions: &emissions,
            transitions: &self.transitions,
            start: &self.start,
            stop: &self.stop,
        })
    }

    /// Score of an arbitrary label-id path under this model.
    pub fn path_score(&self, sentence: &Sentence, path: &[usize]) -> f64 {
        let emissions = self.emission_scores(&featurize_tokens(sentence));
        ChainScores { emissions: &emissions, transitions: &self.transitions, start: &self.start, stop: &self.stop }
            .path_score(path)
    }
}

pub fn viterbi_decode(model: &ChainTaggerModel, sentence: &Sentence) -> TagSequence {
    let (ids, _) = model.decode_ids(sentence);
    TagSequence::from_ids(model.scheme, &ids).expect("decoded ids are within the label set")
}

struct Instance {
    features: Vec<FeatureVector>,
    gold: Vec<usize>,
}

/// Structured perceptron: each epoch decodes every sentence with the live
/// weights and, on a mismatch, adds the gold path's features and subtracts
/// the predicted path's. Returns averaged weights.
pub fn train_tagger(corpus: &Corpus, scheme: TagScheme, hyper: &Hyper) -> Result<ChainTaggerModel, ModelError> {
    hyper.validate()?;
    if corpus.is_empty() {
        return Err(ModelError::EmptyCorpus);
    }
    let l = scheme.num_labels();
    let instances: Vec<Instance> = corpus
        .sentences()
        .iter()
        .map(|s| {
            let tags = match scheme {
                TagScheme::Full27 => s.tags().clone(),
                TagScheme::Untyped3 => collapse_scheme(s.tags()),
            };
            Instance { features: featurize_tokens(s.sentence()), gold: tags.ids() }
        })
        .collect();

    let mut emissions = AveragingTable::new(l);
    let mut transitions = AveragingVec::new(l * l);
    let mut start = AveragingVec::new(l);
    let mut stop = AveragingVec::new(l);
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..instances.len()).collect();
    let lr = hyper.learning_rate;
    let mut step = 1.0;

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &idx in &order {
            let inst = &instances[idx];
            let em: Vec<Vec<f64>> = inst
                .features
                .iter()
                .map(|fv| {
                    let mut s = vec![0.0; l];
                    emissions.add_scores(fv, &mut s);
                    s
                })
                .collect();
            let (pred, _) = viterbi(&ChainScores {
                emissions: &em,
                transitions: &transitions.live,
                start: &start.live,
                stop: &stop.live,
            });
            if pred != inst.gold {
                let gold = &inst.gold;
                for (i, fv) in inst.features.iter().enumerate() {
                    if gold[i] != pred[i] {
                        emissions.update(fv, gold[i], lr, step);
                        emissions.update(fv, pred[i], -lr, step);
                    }
                }
                start.update(gold[0], lr, step);
                start.update(pred[0], -lr, step);
                for i in 1..gold.len() {
                    transitions.update(gold[i - 1] * l + gold[i], lr, step);
                    transitions.update(pred[i - 1] * l + pred[i], -lr, step);
                }
                stop.update(gold[gold.len() - 1], lr, step);
                stop.update(pred[pred.len() - 1], -lr, step);
            }
            step += 1.0;
        }
    }

    let mut meta = TrainMeta::new(hyper, corpus);
    meta.scheme = Some(scheme);
    Ok(ChainTaggerModel {
        scheme,
        emissions: emissions.averaged(step),
        transitions: transitions.averaged(step),
        start: start.averaged(step),
        stop: stop.averaged(step),
        meta,
    })
}
