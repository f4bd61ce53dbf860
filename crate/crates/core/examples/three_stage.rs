//! Approach 3: a sentence gate in front of extraction and typing.
//!
//! Trained on a corpus where only 10% of sentences mention software; the
//! gate keeps the extractor away from the other 90%.

use std::sync::Arc;

use cascade_ner::eval::evaluate;
use cascade_ner::models::{train_gate, train_span_classifier, train_tagger, Hyper};
use cascade_ner::pipeline::{write_predictions_jsonl, Pipeline};
use cascade_ner::spans::{sentence_entity_label, TagScheme};
use cascade_ner::synthetic::{generate, holdout_split, SyntheticConfig};

fn main() {
    let corpus = generate(&SyntheticConfig { sentences: 1000, entity_rate: 0.1, seed: 42 });
    let (train, test) = holdout_split(&corpus, 5);
    let hyper = Hyper::default();
    // the extractor is trained only on sentences the gate would pass
    let gated = train.filter(|s| sentence_entity_label(s.tags()));
    let pipeline = Pipeline::three_stage(
        Arc::new(train_gate(&train, &hyper).unwrap()),
        Arc::new(train_tagger(&gated, TagScheme::Untyped3, &hyper).unwrap()),
        Arc::new(train_span_classifier(&train, &hyper).unwrap()),
    )
    .unwrap();
    let preds = pipeline.predict_corpus(&test).unwrap();
    let closed = preds.iter().filter(|p| p.trace.gate == Some(false)).count();
    println!("{} of {} sentences stopped at the gate", closed, preds.len());
    print!("{}", write_predictions_jsonl(&preds[..3], true));
    print!("{}", evaluate(&test, &preds).unwrap().render_table());
}
