//! Benchmarks for the numeric hot loops: inside charts with and without a
//! depth bound, Viterbi parsing, posterior tree sampling, a short Gibbs
//! run, corpus scoring, and the permutation test.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pcfg_lab::eval::{evaluate, per_sentence_brackets, permutation_test};
use pcfg_lab::inducer::{gibbs_run, inside_chart, sample_tree, viterbi_parse, GibbsConfig};
use pcfg_lab_bench::{fixture_corpus, fixture_grammar, fixture_sentence, fixture_tree_pairs};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn charts(c: &mut Criterion) {
    let grammar = fixture_grammar();
    let sentence = fixture_sentence(20, grammar.vocab_size());

    c.bench_function("inside_chart/n20_unbounded", |b| {
        b.iter(|| inside_chart(black_box(&sentence), &grammar, None).unwrap())
    });
    c.bench_function("inside_chart/n20_depth2", |b| {
        b.iter(|| inside_chart(black_box(&sentence), &grammar, Some(2)).unwrap())
    });
    c.bench_function("viterbi_parse/n20", |b| {
        b.iter(|| viterbi_parse(black_box(&sentence), &grammar, None).unwrap())
    });

    let chart = inside_chart(&sentence, &grammar, None).unwrap();
    let mut rng = StdRng::seed_from_u64(17);
    c.bench_function("sample_tree/n20", |b| {
        b.iter(|| sample_tree(black_box(&chart), &grammar, &mut rng).unwrap())
    });
}

fn induction(c: &mut Criterion) {
    let corpus = fixture_corpus();
    c.bench_function("gibbs_run/200_sentences_5_iters", |b| {
        b.iter(|| {
            gibbs_run(
                black_box(&corpus),
                &GibbsConfig {
                    categories: 5,
                    beta: 0.01,
                    depth_bound: None,
                    iterations: 5,
                    seed: 1,
                },
            )
            .unwrap()
        })
    });
}

fn scoring(c: &mut Criterion) {
    let corpus = fixture_corpus();
    let (gold, pred) = fixture_tree_pairs(&corpus);

    c.bench_function("evaluate/200_sentences", |b| {
        b.iter(|| evaluate(black_box(&gold), black_box(&pred)).unwrap())
    });

    let induced = per_sentence_brackets(&gold, &pred).unwrap();
    let perfect = per_sentence_brackets(&gold, &gold).unwrap();
    c.bench_function("permutation_test/200x10000", |bench| {
        bench.iter(|| {
            let mut rng = StdRng::seed_from_u64(23);
            permutation_test(black_box(&induced), black_box(&perfect), 10_000, &mut rng)
                .unwrap()
        })
    });
}

criterion_group!(benches, charts, induction, scoring);
criterion_main!(benches);
