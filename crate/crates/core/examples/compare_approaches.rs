//! The three approaches side by side on the same held-out data.

use std::sync::Arc;

use cascade_ner::eval::compare_approaches;
use cascade_ner::models::{train_gate, train_span_classifier, train_tagger, Hyper};
use cascade_ner::pipeline::Pipeline;
use cascade_ner::spans::{sentence_entity_label, TagScheme};
use cascade_ner::synthetic::{generate, holdout_split, SyntheticConfig};

fn main() {
    for rate in [0.5, 0.1] {
        let corpus = generate(&SyntheticConfig { sentences: 1000, entity_rate: rate, seed: 42 });
        let (train, test) = holdout_split(&corpus, 5);
        let hyper = Hyper::default();
        let gated = train.filter(|s| sentence_entity_label(s.tags()));
        let tagger = Arc::new(train_tagger(&gated, TagScheme::Untyped3, &hyper).unwrap());
        let typer = Arc::new(train_span_classifier(&train, &hyper).unwrap());
        let flat = Arc::new(train_tagger(&train, TagScheme::Full27, &hyper).unwrap());
        let gate = Arc::new(train_gate(&train, &hyper).unwrap());
        let systems = vec![
            ("perceptron".to_string(), Pipeline::flat(flat).unwrap()),
            ("perceptron".to_string(), Pipeline::two_stage(tagger.clone(), typer.clone()).unwrap()),
            ("perceptron".to_string(), Pipeline::three_stage(gate, tagger, typer).unwrap()),
        ];
        let table = compare_approaches(&systems, &test).unwrap();
        println!("entity rate {rate}");
        print!("{}", table.render_grid());
        println!();
    }
}
