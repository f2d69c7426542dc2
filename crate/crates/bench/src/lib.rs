//! Shared fixtures for the benchmark suite: a fixed grammar, a synthetic
//! corpus with gold trees, and deterministic predictions to score against
//! them. Everything is seeded so benchmark inputs never drift between runs.

use pcfg_lab::experiment::{generate_synthetic, SynthConfig};
use pcfg_lab::grammar::{sample_prior, Grammar};
use pcfg_lab::inducer::{gibbs_run, GibbsConfig, ViterbiParser};
use pcfg_lab::treebank::{Corpus, Tree};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// A moderately sparse five-category grammar over twelve words.
pub fn fixture_grammar() -> Grammar {
    let mut rng = StdRng::seed_from_u64(3);
    sample_prior(5, 12, 0.1, &mut rng).expect("fixture grammar")
}

/// A deterministic sentence of `len` tokens drawn from a vocabulary of
/// `vocab` words, cycling with a stride so neighboring tokens differ.
pub fn fixture_sentence(len: usize, vocab: usize) -> Vec<usize> {
    (0..len).map(|i| (i * 5 + i / vocab) % vocab).collect()
}

/// A 200-sentence synthetic corpus with gold trees attached.
pub fn fixture_corpus() -> Corpus {
    let synth = generate_synthetic(&SynthConfig {
        categories: 5,
        vocab: 12,
        beta_gen: 0.02,
        sentences: 200,
        max_len: 10,
        seed: 5,
    })
    .expect("fixture corpus");
    Corpus::from_raw_text(&synth.corpus_text())
        .expect("tokenize")
        .with_gold(synth.gold)
        .expect("aligned gold")
}

/// Viterbi predictions from a briefly induced grammar, paired with the
/// corpus gold trees — realistic inputs for the scoring benchmarks.
pub fn fixture_tree_pairs(corpus: &Corpus) -> (Vec<Tree>, Vec<Tree>) {
    let state = gibbs_run(
        corpus,
        &GibbsConfig {
            categories: 5,
            beta: 0.01,
            depth_bound: None,
            iterations: 2,
            seed: 9,
        },
    )
    .expect("short induction");
    let parser = ViterbiParser::new(&state.grammar, None).expect("viterbi tables");
    let pred = corpus
        .sentences()
        .iter()
        .map(|s| parser.parse(s).expect("parse").to_tree(corpus.vocab()))
        .collect();
    let gold = corpus.gold().expect("gold").to_vec();
    (gold, pred)
}
