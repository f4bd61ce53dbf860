//! Each cascade stage scored on its own, with everything upstream taken
//! from gold.

use cascade_ner::corpus::parse_conll;
use cascade_ner::eval::{diagnose_stage1, diagnose_stage2, diagnose_stage3};
use cascade_ner::models::{train_gate, train_span_classifier, train_tagger, Hyper};
use cascade_ner::spans::{sentence_entity_label, TagScheme};
use cascade_ner::synthetic::{generate, holdout_split, SyntheticConfig};

fn main() {
    let (train, _) = holdout_split(&generate(&SyntheticConfig::default()), 5);
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture50.conll")).unwrap();
    let test = parse_conll(&text).unwrap();
    let hyper = Hyper::default();

    // models trained on synthetic text, scored on the hand-written fixture
    let gate = train_gate(&train, &hyper).unwrap();
    let gated = train.filter(|s| sentence_entity_label(s.tags()));
    let tagger = train_tagger(&gated, TagScheme::Untyped3, &hyper).unwrap();
    let typer = train_span_classifier(&train, &hyper).unwrap();

    for (stage, report) in [
        (1, diagnose_stage1(&gate, &test).unwrap()),
        (2, diagnose_stage2(&tagger, &test).unwrap()),
        (3, diagnose_stage3(&typer, &test).unwrap()),
    ] {
        let w = report.weighted;
        println!("stage {stage}: P {:.3}  R {:.3}  F1 {:.3}", w.precision, w.recall, w.f1);
    }
}
