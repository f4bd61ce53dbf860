//! Corpus statistics and per-type entity counts.
//!
//! ```text
//! cargo run --example corpus_stats -- [FILE.conll]
//! ```
//!
//! Defaults to the bundled 50-sentence fixture.

use cascade_ner::corpus::{corpus_stats, parse_conll};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/fixture50.conll").to_string());
    let text = std::fs::read_to_string(&path).expect("readable corpus");
    let corpus = match parse_conll(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    };
    let stats = corpus_stats(&corpus);
    println!("sentences             {}", stats.sentence_count);
    println!("sentences with entity {}", stats.sentences_with_entity);
    println!("total entities        {}", stats.total_entities);
    println!("max length            {}", stats.max_length);
    println!("avg length            {:.2}", stats.avg_length);
    println!();
    for (ty, n) in &stats.per_type_counts {
        println!("{:<32}{n:>6}", ty.to_string());
    }
    println!();
    for (group, n) in &stats.per_group_totals {
        println!("{:<32}{n:>6}", group.as_str());
    }
}
