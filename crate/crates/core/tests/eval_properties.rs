mod common;

use cascade_ner::eval::{evaluate, ClassKey};
use cascade_ner::pipeline::SentencePrediction;
use cascade_ner::spans::decode_bio;
use common::{brute_force_counts, corpus_strategy, make_spans, spans_strategy, to_ref, weighted_from_counts};
use proptest::prelude::*;

/// A gold corpus plus one random prediction set per sentence.
fn gold_and_preds() -> impl Strategy<Value = (cascade_ner::corpus::Corpus, Vec<SentencePrediction>)> {
    corpus_strategy(10, 3).prop_flat_map(|corpus| {
        let per_sentence: Vec<_> = corpus
            .sentences()
            .iter()
            .map(|s| {
                let id = s.id().to_string();
                let gold = decode_bio(s.tags());
                // mix gold spans back in so matches are common
                (spans_strategy(s.sentence().len(), 3), any::<bool>()).prop_map(move |(raw, reuse)| {
                    let spans = if reuse && !gold.is_empty() { gold.clone() } else { make_spans(&raw) };
                    SentencePrediction::new(id.clone(), spans)
                })
            })
            .collect();
        (Just(corpus), per_sentence)
    })
}

proptest! {
    #[test]
    fn counts_match_brute_force((corpus, preds) in gold_and_preds()) {
        let report = evaluate(&corpus, &preds).unwrap();
        let gold: Vec<_> = corpus.sentences().iter().map(|s| to_ref(&decode_bio(s.tags()))).collect();
        let pred: Vec<_> = preds.iter().map(|p| to_ref(&p.spans)).collect();
        let expected = brute_force_counts(&gold, &pred);
        let got: std::collections::BTreeMap<String, (usize, usize, usize)> = report
            .per_class
            .iter()
            .map(|m| (m.class.to_string(), (m.tp, m.fp, m.fn_)))
            .collect();
        prop_assert_eq!(got, expected.clone());
        let (p, r, f) = weighted_from_counts(&expected);
        prop_assert!((report.weighted.precision - p).abs() < 1e-12);
        prop_assert!((report.weighted.recall - r).abs() < 1e-12);
        prop_assert!((report.weighted.f1 - f).abs() < 1e-12);
    }

    #[test]
    fn totals_are_consistent((corpus, preds) in gold_and_preds()) {
        let report = evaluate(&corpus, &preds).unwrap();
        let gold_total: usize = corpus.sentences().iter().map(|s| decode_bio(s.tags()).len()).sum();
        let pred_total: usize = preds.iter().map(|p| p.spans.len()).sum();
        let tp: usize = report.per_class.iter().map(|m| m.tp).sum();
        let fp: usize = report.per_class.iter().map(|m| m.fp).sum();
        let fn_: usize = report.per_class.iter().map(|m| m.fn_).sum();
        prop_assert_eq!(tp + fn_, gold_total);
        prop_assert_eq!(tp + fp, pred_total);
        prop_assert_eq!(report.totals.matched, tp);
    }

    #[test]
    fn weighted_lies_between_class_extremes((corpus, preds) in gold_and_preds()) {
        let report = evaluate(&corpus, &preds).unwrap();
        let supported: Vec<_> = report.per_class.iter().filter(|m| m.support > 0).collect();
        prop_assume!(!supported.is_empty());
        for (get, agg) in [
            (Box::new(|m: &cascade_ner::eval::ClassMetrics| m.precision) as Box<dyn Fn(&_) -> f64>, report.weighted.precision),
            (Box::new(|m: &cascade_ner::eval::ClassMetrics| m.recall), report.weighted.recall),
            (Box::new(|m: &cascade_ner::eval::ClassMetrics| m.f1), report.weighted.f1),
        ] {
            let lo = supported.iter().map(|m| get(m)).fold(f64::INFINITY, f64::min);
            let hi = supported.iter().map(|m| get(m)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= agg && agg <= hi + 1e-12);
        }
    }

    #[test]
    fn dropping_a_correct_span_never_raises_recall((corpus, preds) in gold_and_preds(), pick in any::<prop::sample::Index>()) {
        let before = evaluate(&corpus, &preds).unwrap();
        let mut correct = Vec::new();
        for (i, p) in preds.iter().enumerate() {
            let gold = decode_bio(corpus.sentences()[i].tags());
            for (j, s) in p.spans.iter().enumerate() {
                if gold.contains(s) {
                    correct.push((i, j));
                }
            }
        }
        prop_assume!(!correct.is_empty());
        let (i, j) = correct[pick.index(correct.len())];
        let mut fewer = preds.clone();
        let removed = fewer[i].spans.remove(j);
        let after = evaluate(&corpus, &fewer).unwrap();
        prop_assert!(after.micro.recall <= before.micro.recall);
        let key = ClassKey::Type(removed.entity_type().unwrap());
        prop_assert!(after.class(key).unwrap().recall <= before.class(key).unwrap().recall);
    }

    #[test]
    fn adding_a_spurious_span_never_raises_precision((corpus, preds) in gold_and_preds(), pick in any::<prop::sample::Index>(), ty in 0usize..13) {
        let before = evaluate(&corpus, &preds).unwrap();
        // find a sentence with a free token for a one-token spurious span
        let mut slots = Vec::new();
        for (i, p) in preds.iter().enumerate() {
            let gold = decode_bio(corpus.sentences()[i].tags());
            for t in 0..corpus.sentences()[i].sentence().len() {
                let free = p.spans.iter().all(|s| t < s.start() || t >= s.end());
                let candidate = make_spans(&[(t, t + 1, ty)])[0];
                if free && !gold.contains(&candidate) {
                    slots.push((i, candidate));
                }
            }
        }
        prop_assume!(!slots.is_empty());
        let (i, span) = slots[pick.index(slots.len())];
        let mut more = preds.clone();
        more[i].spans.push(span);
        more[i].spans.sort_by_key(|s| s.start());
        let after = evaluate(&corpus, &more).unwrap();
        prop_assert!(after.micro.precision <= before.micro.precision);
        let key = ClassKey::Type(span.entity_type().unwrap());
        let prev = before.class(key).map_or(0.0, |m| m.precision);
        prop_assert!(after.class(key).unwrap().precision <= prev);
    }

    #[test]
    fn gold_scores_one(corpus in corpus_strategy(10, 3)) {
        let preds: Vec<_> = corpus
            .sentences()
            .iter()
            .map(|s| SentencePrediction::new(s.id(), decode_bio(s.tags())))
            .collect();
        let report = evaluate(&corpus, &preds).unwrap();
        prop_assert!(report.per_class.iter().all(|m| m.fp == 0 && m.fn_ == 0));
        let any_gold = report.totals.gold > 0;
        if any_gold {
            prop_assert_eq!(report.weighted.f1, 1.0);
            prop_assert_eq!(report.micro.f1, 1.0);
            prop_assert_eq!(report.macro_avg.f1, 1.0);
        }
    }
}
