//! BIO tags to spans and back, in both tag schemes.

use cascade_ner::spans::{decode_bio, encode_bio, erase_types, TagScheme, TagSequence};

fn main() {
    let tokens = ["Celeste", "was", "written", "in", "C", "#"];
    let labels =
        ["B-Application_Creation", "O", "O", "O", "B-ProgrammingEnvironment_Usage", "I-ProgrammingEnvironment_Usage"];
    let tags = TagSequence::parse(TagScheme::Full27, &labels).unwrap();
    let spans = decode_bio(&tags);
    for s in &spans {
        println!(
            "[{}, {}) {:<30} {}",
            s.start(),
            s.end(),
            s.entity_type().unwrap().to_string(),
            tokens[s.start()..s.end()].join(" ")
        );
    }

    let untyped = encode_bio(&spans, tokens.len(), TagScheme::Untyped3).unwrap();
    println!("untyped: {}", untyped.labels().join(" "));
    assert_eq!(decode_bio(&untyped), erase_types(&spans));

    // ill-formed input is repaired, never rejected: a stray I opens a span
    let messy = TagSequence::parse(TagScheme::Untyped3, &["I", "I", "O", "I", "B"]).unwrap();
    let repaired: Vec<_> = decode_bio(&messy).iter().map(|s| s.bounds()).collect();
    println!("I I O I B -> {repaired:?}");
}
