//! Deterministic synthetic corpus with four entity types.
//!
//! Sentences come from fixed templates. The same application names appear
//! after "using" (usage) and after "developed" / "present" (creation), so
//! typing needs context; plug-ins and programming environments use their
//! own name pools. Negative sentences never contain a pool name.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{parse_conll, Corpus};

const APPLICATIONS: &[&str] = &[
    "SPSS",
    "GraphPad Prism",
    "ImageJ",
    "MATLAB",
    "Stata",
    "FlowJo",
    "Celeste",
    "BLAST",
    "Cytoscape",
    "QuPath",
    "MaxQuant",
    "Excel",
];

const PLUGINS: &[&str] = &["lme4", "ggplot2", "NumPy", "Bioconductor", "pandas", "limma", "scikit-learn", "DESeq2"];

const ENVIRONMENTS: &[&str] = &["R", "Python", "C #", "Java", "Perl", "Julia", "Visual Basic"];

const SUBJECTS: &[&str] =
    &["The samples", "All participants", "The cells", "Our results", "These data", "The controls"];
const VERBS: &[&str] = &["were stored", "were collected", "were compared", "were measured", "were grouped"];
const TAILS: &[&str] = &[
    "at room temperature",
    "after two weeks",
    "by two observers",
    "in triplicate",
    "according to the protocol",
    "using the standard procedure",
    "with the usual care",
];

/// Generation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub sentences: usize,
    /// Probability that a sentence carries at least one entity.
    pub entity_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig { sentences: 300, entity_rate: 0.5, seed: 42 }
    }
}

fn push_plain(out: &mut Vec<(String, String)>, text: &str) {
    out.extend(text.split(' ').map(|w| (w.to_string(), "O".to_string())));
}

fn push_entity(out: &mut Vec<(String, String)>, name: &str, ty: &str) {
    for (i, w) in name.split(' ').enumerate() {
        let prefix = if i == 0 { "B" } else { "I" };
        out.push((w.to_string(), format!("{prefix}-{ty}")));
    }
}

fn positive(rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut s = Vec::new();
    let app = *APPLICATIONS.choose(rng).expect("non-empty pool");
    let plugin = *PLUGINS.choose(rng).expect("non-empty pool");
    let env = *ENVIRONMENTS.choose(rng).expect("non-empty pool");
    match rng.random_range(0..6) {
        0 => {
            push_plain(&mut s, "Data were analysed using");
            push_entity(&mut s, app, "Application_Usage");
            push_plain(&mut s, ".");
        }
        1 => {
            push_plain(&mut s, "Images were quantified using");
            push_entity(&mut s, app, "Application_Usage");
            push_plain(&mut s, "software .");
        }
        2 => {
            push_plain(&mut s, "We developed");
            push_entity(&mut s, app, "Application_Creation");
            push_plain(&mut s, ", a new tool for this task .");
        }
        3 => {
            push_plain(&mut s, "Here we present");
            push_entity(&mut s, app, "Application_Creation");
            push_plain(&mut s, ", an open source framework .");
        }
        4 => {
            push_plain(&mut s, "Models were fitted with the");
            push_entity(&mut s, plugin, "PlugIn_Usage");
            push_plain(&mut s, "package in");
            push_entity(&mut s, env, "ProgrammingEnvironment_Usage");
            push_plain(&mut s, ".");
        }
        _ => {
            push_plain(&mut s, "All scripts were written in");
            push_entity(&mut s, env, "ProgrammingEnvironment_Usage");
            push_plain(&mut s, ".");
        }
    }
    s
}

fn negative(rng: &mut ChaCha8Rng) -> Vec<(String, String)> {
    let mut s = Vec::new();
    push_plain(&mut s, SUBJECTS.choose(rng).expect("non-empty pool"));
    push_plain(&mut s, VERBS.choose(rng).expect("non-empty pool"));
    push_plain(&mut s, TAILS.choose(rng).expect("non-empty pool"));
    push_plain(&mut s, ".");
    s
}

/// CoNLL text of a generated corpus. Identical configs give identical text.
pub fn generate_conll(config: &SyntheticConfig) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut text = String::new();
    for _ in 0..config.sentences {
        let sentence =
            if rng.random_bool(config.entity_rate.clamp(0.0, 1.0)) { positive(&mut rng) } else { negative(&mut rng) };
        for (w, t) in sentence {
            text.push_str(&w);
            text.push('\t');
            text.push_str(&t);
            text.push('\n');
        }
        text.push('\n');
    }
    text
}

/// Generated corpus with sentence ids `s0`, `s1`, ...
pub fn generate(config: &SyntheticConfig) -> Corpus {
    if config.sentences == 0 {
        return Corpus::default();
    }
    parse_conll(&generate_conll(config)).expect("generated text is valid CoNLL")
}

/// Deterministic split: every `k`-th sentence (starting with the first)
/// goes to the held-out part. Returns `(train, held_out)`.
pub fn holdout_split(corpus: &Corpus, k: usize) -> (Corpus, Corpus) {
    assert!(k >= 2, "split period must be at least 2");
    let held: std::collections::HashSet<&str> =
        corpus.sentences().iter().enumerate().filter(|(i, _)| i % k == 0).map(|(_, s)| s.id()).collect();
    (corpus.filter(|s| !held.contains(s.id())), corpus.filter(|s| held.contains(s.id())))
}
