//! Approach 2: untyped extraction, then per-span typing.

use std::sync::Arc;

use cascade_ner::eval::evaluate;
use cascade_ner::models::{train_span_classifier, train_tagger, Hyper, SpanQuery};
use cascade_ner::pipeline::Pipeline;
use cascade_ner::spans::{decode_bio, TagScheme};
use cascade_ner::synthetic::{generate, holdout_split, SyntheticConfig};

fn main() {
    let corpus = generate(&SyntheticConfig::default());
    let (train, test) = holdout_split(&corpus, 5);
    let hyper = Hyper::default();
    let tagger = train_tagger(&train, TagScheme::Untyped3, &hyper).unwrap();
    let typer = train_span_classifier(&train, &hyper).unwrap();

    // what the typer sees for one span
    let s = test.sentences().iter().find(|s| !decode_bio(s.tags()).is_empty()).unwrap();
    let span = decode_bio(s.tags())[0];
    let query = SpanQuery::new(s.sentence(), &span).unwrap();
    println!("{}", query.prompt());
    println!("-> {}", typer.predict(&query));

    let pipeline = Pipeline::two_stage(Arc::new(tagger), Arc::new(typer)).unwrap();
    let preds = pipeline.predict_corpus(&test).unwrap();
    print!("{}", evaluate(&test, &preds).unwrap().render_table());
}
