mod common;

use cascade_ner::corpus::parse_conll;
use cascade_ner::models::viterbi::{viterbi, ChainScores};
use cascade_ner::models::{train_tagger, Hyper};
use cascade_ner::spans::{collapse_scheme, TagScheme};
use common::brute_force_max;
use proptest::prelude::*;

fn chain_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=6, 1usize..=5).prop_flat_map(|(n, l)| {
        let w = -5.0f64..5.0;
        (
            prop::collection::vec(prop::collection::vec(w.clone(), l), n),
            prop::collection::vec(w.clone(), l * l),
            prop::collection::vec(w.clone(), l),
            prop::collection::vec(w, l),
        )
    })
}

proptest! {
    #[test]
    fn viterbi_finds_the_maximum((em, tr, st, sp) in chain_strategy()) {
        let chain = ChainScores { emissions: &em, transitions: &tr, start: &st, stop: &sp };
        let (path, score) = viterbi(&chain);
        prop_assert_eq!(path.len(), em.len());
        prop_assert!((chain.path_score(&path) - score).abs() < 1e-9);
        prop_assert!((brute_force_max(&em, &tr, &st, &sp) - score).abs() < 1e-9);
    }

    #[test]
    fn integer_ties_resolve_to_lowest_path((n, l) in (1usize..=4, 1usize..=4)) {
        let em = vec![vec![0.0; l]; n];
        let tr = vec![0.0; l * l];
        let zeros = vec![0.0; l];
        let (path, _) = viterbi(&ChainScores { emissions: &em, transitions: &tr, start: &zeros, stop: &zeros });
        prop_assert_eq!(path, vec![0; n]);
    }
}

#[test]
fn trained_tagger_decodes_at_least_the_gold_score() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture50.conll")).unwrap();
    let corpus = parse_conll(&text).unwrap();
    let model = train_tagger(&corpus, TagScheme::Untyped3, &Hyper { epochs: 3, ..Hyper::default() }).unwrap();
    for s in corpus.sentences() {
        let (_, best) = model.decode_ids(s.sentence());
        let gold = model.path_score(s.sentence(), &collapse_scheme(s.tags()).ids());
        assert!(best >= gold - 1e-9, "{}", s.id());
    }
}
