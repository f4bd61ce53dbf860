//! Approach 1: one tagger over the 27 typed labels.
//!
//! Trains on the bundled synthetic corpus, evaluates on a held-out fifth
//! and saves the model as JSON.

use std::sync::Arc;

use cascade_ner::eval::evaluate;
use cascade_ner::models::{train_tagger, viterbi_decode, AnyModel, Hyper};
use cascade_ner::pipeline::Pipeline;
use cascade_ner::spans::{sentence_entity_label, TagScheme};
use cascade_ner::synthetic::{generate, holdout_split, SyntheticConfig};

fn main() {
    let corpus = generate(&SyntheticConfig::default());
    let (train, test) = holdout_split(&corpus, 5);
    let model = train_tagger(&train, TagScheme::Full27, &Hyper::default()).unwrap();

    let s = test.sentences().iter().find(|s| sentence_entity_label(s.tags())).unwrap();
    println!("{}", s.sentence().text());
    println!("{}", viterbi_decode(&model, s.sentence()).labels().join(" "));

    let out = std::env::temp_dir().join("cascade-ner-flat.json");
    AnyModel::from(model.clone()).save(&out).unwrap();
    println!("saved {}", out.display());

    let pipeline = Pipeline::flat(Arc::new(model)).unwrap();
    let report = evaluate(&test, &pipeline.predict_corpus(&test).unwrap()).unwrap();
    print!("{}", report.render_table());
}
