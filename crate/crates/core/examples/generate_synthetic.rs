//! Writes the bundled synthetic corpus (or a variant) as CoNLL.
//!
//! ```text
//! cargo run --example generate_synthetic -- [OUT] [SENTENCES] [ENTITY_RATE] [SEED]
//! ```
//!
//! Without arguments the default corpus is printed to stdout.

use cascade_ner::corpus::corpus_stats;
use cascade_ner::synthetic::{generate, generate_conll, SyntheticConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = SyntheticConfig::default();
    if let Some(n) = args.get(1) {
        config.sentences = n.parse().expect("SENTENCES must be an integer");
    }
    if let Some(r) = args.get(2) {
        config.entity_rate = r.parse().expect("ENTITY_RATE must be a number");
    }
    if let Some(s) = args.get(3) {
        config.seed = s.parse().expect("SEED must be an integer");
    }
    let text = generate_conll(&config);
    match args.first() {
        Some(path) => {
            std::fs::write(path, &text).expect("write output");
            let stats = corpus_stats(&generate(&config));
            eprintln!(
                "wrote {path}: {} sentences, {} with entities, {} entities",
                stats.sentence_count, stats.sentences_with_entity, stats.total_entities
            );
        }
        None => print!("{text}"),
    }
}
