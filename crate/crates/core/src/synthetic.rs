//! Deterministic synthetic corpora for tests, benchmarks, and demos.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Sentence};

const ENTITY_KINDS: [&str; 4] = ["PER", "LOC", "ORG", "MISC"];

/// A linearly separable corpus: every word type carries exactly one tag, so
/// a per-position (word, tag) feature separates the data. Tags are IOB2
/// (`O` plus `B-X`/`I-X` for `n_classes` entity kinds), giving
/// `2·n_classes + 1` labels.
pub fn separable_corpus(n_sentences: usize, n_classes: usize, seed: u64) -> Corpus {
    assert!((1..=ENTITY_KINDS.len()).contains(&n_classes));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fillers: Vec<String> = (0..8).map(|i| format!("w{i}")).collect();
    let begin_words: Vec<Vec<String>> = (0..n_classes)
        .map(|c| (0..5).map(|i| format!("{}b{i}", ENTITY_KINDS[c].to_lowercase())).collect())
        .collect();
    let inside_words: Vec<Vec<String>> = (0..n_classes)
        .map(|c| (0..5).map(|i| format!("{}i{i}", ENTITY_KINDS[c].to_lowercase())).collect())
        .collect();

    let mut corpus = Corpus::default();
    for _ in 0..n_sentences {
        let target = rng.random_range(3..=7);
        let mut surfaces: Vec<String> = Vec::new();
        let mut tags: Vec<String> = Vec::new();
        while surfaces.len() < target {
            if rng.random::<f64>() < 0.55 {
                surfaces.push(fillers.choose(&mut rng).unwrap().clone());
                tags.push("O".into());
            } else {
                let c = rng.random_range(0..n_classes);
                surfaces.push(begin_words[c].choose(&mut rng).unwrap().clone());
                tags.push(format!("B-{}", ENTITY_KINDS[c]));
                if rng.random::<f64>() < 0.5 && surfaces.len() < target {
                    surfaces.push(inside_words[c].choose(&mut rng).unwrap().clone());
                    tags.push(format!("I-{}", ENTITY_KINDS[c]));
                }
            }
        }
        let tag_refs: Vec<&str> = tags.iter().map(String::as_str).collect();
        corpus.push(Sentence::from_surfaces(surfaces), &tag_refs);
    }
    corpus
}

/// An NER-shaped corpus with mild ambiguity: a few word types occur both as
/// filler and inside entities, so no labeling rule is exact and span F1
/// stays below 1. Labels are IOB2 over PER/LOC/ORG.
pub fn ner_corpus(n_sentences: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fillers: Vec<String> = [
        "the", "a", "of", "in", "said", "on", "for", "with", "to", "from", "at", "and",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let first_names = ["anna", "boris", "carla", "david", "elena", "felix"];
    let last_names = ["ruiz", "okafor", "smith", "tanaka", "weber", "jones"];
    let places = ["paris", "lima", "oslo", "cairo", "quito", "berne"];
    let org_heads = ["acme", "globex", "initech", "umbrel", "vandelay"];
    let org_tails = ["corp", "labs", "group"];
    // ambiguous word types: appear as filler and as entity parts
    let ambiguous = ["amber", "sterling", "drew"];

    let mut corpus = Corpus::default();
    for _ in 0..n_sentences {
        let target = rng.random_range(5..=11);
        let mut surfaces: Vec<String> = Vec::new();
        let mut tags: Vec<String> = Vec::new();
        while surfaces.len() < target {
            let roll: f64 = rng.random();
            if roll < 0.55 {
                let word = if rng.random::<f64>() < 0.12 {
                    ambiguous.choose(&mut rng).unwrap().to_string()
                } else {
                    fillers.choose(&mut rng).unwrap().clone()
                };
                surfaces.push(word);
                tags.push("O".into());
            } else if roll < 0.75 {
                let first = if rng.random::<f64>() < 0.15 {
                    ambiguous.choose(&mut rng).unwrap().to_string()
                } else {
                    first_names.choose(&mut rng).unwrap().to_string()
                };
                surfaces.push(first);
                tags.push("B-PER".into());
                if surfaces.len() < target {
                    surfaces.push(last_names.choose(&mut rng).unwrap().to_string());
                    tags.push("I-PER".into());
                }
            } else if roll < 0.9 {
                surfaces.push(places.choose(&mut rng).unwrap().to_string());
                tags.push("B-LOC".into());
            } else {
                surfaces.push(org_heads.choose(&mut rng).unwrap().to_string());
                tags.push("B-ORG".into());
                if rng.random::<f64>() < 0.7 && surfaces.len() < target {
                    surfaces.push(org_tails.choose(&mut rng).unwrap().to_string());
                    tags.push("I-ORG".into());
                }
            }
        }
        let tag_refs: Vec<&str> = tags.iter().map(String::as_str).collect();
        corpus.push(Sentence::from_surfaces(surfaces), &tag_refs);
    }
    corpus
}

/// A corpus built from four fixed sentence patterns, each repeated
/// `n_copies` times in seeded-shuffled order. Any 80/10/10 split leaves
/// every pattern in the train portion once `n_copies` exceeds the held-out
/// fifth, so a learner that reproduces its training data scores a perfect
/// span F1 on dev and test.
pub fn pattern_corpus(n_copies: usize, seed: u64) -> Corpus {
    let patterns: [(&[&str], &[&str]); 4] = [
        (&["anna", "ruiz", "spoke"], &["B-PER", "I-PER", "O"]),
        (&["the", "mayor", "met", "anna"], &["O", "O", "O", "B-PER"]),
        (&["boris", "visited", "the", "park"], &["B-PER", "O", "O", "O"]),
        (&["the", "end"], &["O", "O"]),
    ];
    let mut order: Vec<usize> = (0..patterns.len() * n_copies).map(|i| i % patterns.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut corpus = Corpus::default();
    for p in order {
        let (words, tags) = patterns[p];
        corpus.push(Sentence::from_surfaces(words.iter().copied()), tags);
    }
    corpus
}

/// A corpus with uniformly random labels over `n_labels`; generally not
/// separable. Label names are `L0..L{n-1}`.
pub fn random_corpus(n_sentences: usize, n_labels: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: Vec<String> = (0..12).map(|i| format!("v{i}")).collect();
    let names: Vec<String> = (0..n_labels).map(|i| format!("L{i}")).collect();
    let mut corpus = Corpus::default();
    for _ in 0..n_sentences {
        let len = rng.random_range(2..=6);
        let surfaces: Vec<String> =
            (0..len).map(|_| vocab.choose(&mut rng).unwrap().clone()).collect();
        let tags: Vec<&str> =
            (0..len).map(|_| names[rng.random_range(0..n_labels)].as_str()).collect();
        corpus.push(Sentence::from_surfaces(surfaces), &tags);
    }
    corpus
}
