//! A laboratory for unsupervised grammar induction.
//!
//! The crate learns probabilistic context-free grammars from raw token
//! sequences by Gibbs sampling under a symmetric Dirichlet prior, optionally
//! restricting the sampler to parses whose center-embedding depth stays under
//! a fixed bound, and scores the induced trees against reference treebanks
//! with both unlabeled bracketing metrics and label-aware ones built on
//! homogeneity and V-measure.
//!
//! Modules:
//!
//! - [`treebank`]: bracketed trees, corpora, and evaluation normalization
//! - [`grammar`]: grammar parameters, rule counts, prior/posterior sampling
//! - [`depth`]: center-embedding depth annotation and bounds
//! - [`inducer`]: inside charts, tree sampling, Viterbi parsing, Gibbs runs
//! - [`eval`]: bracketing scores, label metrics, paired permutation tests
//! - [`experiment`]: end-to-end runs, parameter sweeps, synthetic corpora
//! - [`rng`]: deterministic stream derivation shared by everything above

pub mod depth;
pub mod eval;
pub mod experiment;
pub mod grammar;
pub mod inducer;
pub mod rng;
pub mod treebank;

pub use depth::{annotate_depths, check_bound, tree_depth, DepthAnnotation, Side};
pub use eval::{
    bracket_prf, evaluate, homogeneity_completeness_v, matched_label_pairs, normalize_pairs,
    per_sentence_brackets, permutation_test, rh, rvm, BracketScores, EvalReport, LabelPairs,
    PermutationTest, SentenceBrackets,
};
pub use experiment::{
    generate_synthetic, run_experiment, sweep, ExperimentConfig, ExperimentReport, SweepAxis,
    SynthConfig, Synthetic,
};
pub use grammar::{
    resample_posterior, sample_prior, tree_rule_counts, Expansion, Grammar, RuleCounts,
};
pub use inducer::{
    corpus_log_joint, gibbs_run, gibbs_run_with, inside_chart, sample_tree, viterbi_parse, Chart,
    GibbsConfig, GibbsState, ViterbiParser,
};
pub use treebank::{
    collapse_unaries, corpus_stats, gold_constituents, parse_bracketed, serialize,
    strip_punctuation, BinaryTree, Corpus, CorpusStats, PunctPolicy, Span, Tree, Vocabulary,
};
