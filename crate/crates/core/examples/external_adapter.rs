//! Plugging in predictions made elsewhere (for example by a fine-tuned
//! transformer) through the JSONL adapter.
//!
//! Here the "external system" is simulated by reading the gold tags and
//! corrupting every seventh sentence.

use std::sync::Arc;

use cascade_ner::corpus::parse_conll;
use cascade_ner::eval::evaluate;
use cascade_ner::models::ExternalPredictions;
use cascade_ner::pipeline::{ExternalTagger, Pipeline};
use cascade_ner::spans::TagScheme;

fn main() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture50.conll")).unwrap();
    let corpus = parse_conll(&text).unwrap();

    let mut jsonl = String::new();
    for (i, s) in corpus.sentences().iter().enumerate() {
        let mut tags = s.tags().labels();
        if i % 7 == 0 {
            tags.iter_mut().for_each(|t| *t = "O".into());
        }
        jsonl += &serde_json::json!({"sentence_id": s.id(), "tags": tags}).to_string();
        jsonl.push('\n');
    }

    let external = ExternalPredictions::parse_jsonl(&jsonl).unwrap();
    println!("inferred scheme: {:?}", external.scheme());
    let validated = external.validate(&corpus).unwrap();
    let tagger = ExternalTagger::new(validated, TagScheme::Full27).unwrap();
    let pipeline = Pipeline::flat(Arc::new(tagger)).unwrap();
    let report = evaluate(&corpus, &pipeline.predict_corpus(&corpus).unwrap()).unwrap();
    print!("{}", report.render_table());
}
