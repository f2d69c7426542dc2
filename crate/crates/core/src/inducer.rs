//! Inside charts, tree sampling, Viterbi parsing, and the Gibbs sweep that
//! alternates them with grammar resampling.
//!
//! The chart is a CKY table over half-open spans. Bounded charts additionally
//! split every cell by the center-embedding state a constituent would occupy
//! — its depth `d` and the side it hangs on — so that a depth bound `D` turns
//! into `2 D` "modes" per cell and illegal combinations are simply never
//! built. Unbounded charts are the same machinery with a single mode.
//!
//! Probabilities are kept in plain `f64` with one shared power-of-two scaling
//! exponent per span. Rescaling by powers of two is exact, so chart totals
//! agree with unscaled arithmetic to ordinary rounding error even for
//! sentence probabilities far below the underflow threshold.

use rayon::prelude::*;

use rand::Rng;
use thiserror::Error;

use crate::grammar::{
    resample_posterior, sample_prior, Grammar, GrammarError, RuleCounts,
};
use crate::rng::{substream, STREAM_POSTERIOR, STREAM_PRIOR, STREAM_TREES};
use crate::treebank::{BinaryTree, Corpus};

#[derive(Debug, Error)]
pub enum InducerError {
    #[error("cannot parse an empty sentence")]
    EmptySentence,
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("token id {token} at position {position} is outside the grammar vocabulary of {vocab}")]
    OovToken { position: usize, token: usize, vocab: usize },
    #[error("depth bound must be at least 1 (got {0})")]
    InvalidBound(usize),
    #[error("at least one iteration is required")]
    InvalidIterations,
    #[error("sentence has zero probability under the grammar")]
    ZeroMass,
    #[error("chart was built for a different grammar shape")]
    GrammarMismatch,
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// Multiplies every value by `2^e`, stepping so intermediates stay finite
/// even when `e` is far outside the exponent range of a single `f64` factor.
fn scale_by_pow2(values: &mut [f64], e: i32) {
    let mut remaining = e;
    while remaining != 0 {
        let step = remaining.clamp(-900, 900);
        let factor = 2f64.powi(step);
        for v in values.iter_mut() {
            *v *= factor;
        }
        remaining -= step;
    }
}

/// `2^e` for non-positive `e`; underflows to zero for very negative `e`,
/// which callers treat as a vanished contribution.
#[inline]
fn pow2(e: i32) -> f64 {
    debug_assert!(e <= 0);
    if e < -2200 {
        0.0
    } else if e >= -1000 {
        2f64.powi(e)
    } else {
        2f64.powi(-1000) * 2f64.powi(e + 1000)
    }
}

const LN_2: f64 = std::f64::consts::LN_2;

/// Inside table for one sentence: summed parse mass for every span, category
/// and (for bounded parsing) embedding mode.
#[derive(Debug, Clone)]
pub struct Chart {
    n: usize,
    categories: usize,
    vocab: usize,
    bound: Option<usize>,
    modes: usize,
    sentence: Vec<usize>,
    /// `lex[i * C + cat]`: emission probability of token `i` under `cat`.
    lex: Vec<f64>,
    lex_mass: Vec<bool>,
    /// `inside[(cell * modes + mode) * C + cat]` with `cell = i * (n+1) + j`,
    /// scaled by `2^-span_exp[cell]`.
    inside: Vec<f64>,
    span_exp: Vec<i32>,
    span_mass: Vec<bool>,
    root_log_prob: f64,
}

impl Chart {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> Option<usize> {
        self.bound
    }

    /// Natural log of the total parse mass of the sentence;
    /// `f64::NEG_INFINITY` when no parse exists.
    pub fn sentence_log_prob(&self) -> f64 {
        self.root_log_prob
    }

    #[inline]
    fn cell(&self, i: usize, j: usize) -> usize {
        i * (self.n + 1) + j
    }

    #[inline]
    fn scores(&self, i: usize, j: usize, mode: usize) -> &[f64] {
        let start = (self.cell(i, j) * self.modes + mode) * self.categories;
        &self.inside[start..start + self.categories]
    }

    #[inline]
    fn lex_scores(&self, i: usize) -> &[f64] {
        &self.lex[i * self.categories..(i + 1) * self.categories]
    }

    /// Mode indices of the children of a parent in `mode`: the left slot is
    /// `None` when the bound forbids a branching left child there.
    #[inline]
    fn child_modes(&self, mode: usize) -> (Option<usize>, usize) {
        match self.bound {
            None => (Some(0), 0),
            Some(max_depth) => {
                let depth = mode / 2 + 1;
                let side = mode % 2;
                // A branching left child sinks one level when its parent
                // hangs on the right; right children inherit the depth.
                let left_depth = depth + side;
                let left = (left_depth <= max_depth).then(|| (left_depth - 1) * 2);
                (left, (depth - 1) * 2 + 1)
            }
        }
    }

    fn child_exp(&self, i: usize, j: usize) -> i32 {
        if j - i == 1 {
            0
        } else {
            self.span_exp[self.cell(i, j)]
        }
    }

    fn child_mass(&self, i: usize, j: usize) -> bool {
        if j - i == 1 {
            self.lex_mass[i]
        } else {
            self.span_mass[self.cell(i, j)]
        }
    }
}

fn validate_bound(bound: Option<usize>) -> Result<usize, InducerError> {
    match bound {
        None => Ok(1),
        Some(0) => Err(InducerError::InvalidBound(0)),
        Some(d) => Ok(2 * d),
    }
}

/// Builds the inside chart for a sentence of token ids, optionally keeping
/// only parses whose center-embedding depth stays within `bound`.
pub fn inside_chart(
    sentence: &[usize],
    grammar: &Grammar,
    bound: Option<usize>,
) -> Result<Chart, InducerError> {
    if sentence.is_empty() {
        return Err(InducerError::EmptySentence);
    }
    let modes = validate_bound(bound)?;
    let vocab = grammar.vocab_size();
    for (position, &token) in sentence.iter().enumerate() {
        if token >= vocab {
            return Err(InducerError::OovToken { position, token, vocab });
        }
    }
    let n = sentence.len();
    let c = grammar.categories();
    let cells = (n + 1) * (n + 1);

    let mut chart = Chart {
        n,
        categories: c,
        vocab,
        bound,
        modes,
        sentence: sentence.to_vec(),
        lex: vec![0.0; n * c],
        lex_mass: vec![false; n],
        inside: vec![0.0; cells * modes * c],
        span_exp: vec![0; cells],
        span_mass: vec![false; cells],
        root_log_prob: f64::NEG_INFINITY,
    };

    for (i, &token) in sentence.iter().enumerate() {
        for cat in 0..c {
            let p = grammar.terminal_prob(cat, token);
            chart.lex[i * c + cat] = p;
            if p > 0.0 {
                chart.lex_mass[i] = true;
            }
        }
    }

    let mut acc = vec![0.0; modes * c];
    let mut outer = vec![0.0; c * c];
    for width in 2..=n {
        for i in 0..=n - width {
            let j = i + width;
            acc.fill(0.0);

            // Shared scaling exponent: the largest child-pair exponent among
            // splits that can carry mass at all.
            let mut emax = i32::MIN;
            for k in i + 1..j {
                if chart.child_mass(i, k) && chart.child_mass(k, j) {
                    emax = emax.max(chart.child_exp(i, k) + chart.child_exp(k, j));
                }
            }
            let cell = chart.cell(i, j);
            if emax == i32::MIN {
                continue; // no split has mass; the span stays empty
            }

            for k in i + 1..j {
                if !(chart.child_mass(i, k) && chart.child_mass(k, j)) {
                    continue;
                }
                let adj = pow2(chart.child_exp(i, k) + chart.child_exp(k, j) - emax);
                if adj == 0.0 {
                    continue;
                }
                for mode in 0..modes {
                    let (left_mode, right_mode) = chart.child_modes(mode);
                    let left: &[f64] = if k - i == 1 {
                        chart.lex_scores(i)
                    } else {
                        match left_mode {
                            Some(m) => chart.scores(i, k, m),
                            None => continue,
                        }
                    };
                    let right: &[f64] = if j - k == 1 {
                        chart.lex_scores(k)
                    } else {
                        chart.scores(k, j, right_mode)
                    };
                    for l in 0..c {
                        let lv = left[l] * adj;
                        let row = &mut outer[l * c..(l + 1) * c];
                        if lv == 0.0 {
                            row.fill(0.0);
                        } else {
                            for (o, &rv) in row.iter_mut().zip(right) {
                                *o = lv * rv;
                            }
                        }
                    }
                    for parent in 0..c {
                        let row = grammar.row(parent);
                        let mut sum = 0.0;
                        for (x, &o) in outer.iter().enumerate() {
                            sum += row[x] * o;
                        }
                        acc[mode * c + parent] += sum;
                    }
                }
            }

            let max = acc.iter().cloned().fold(0.0f64, f64::max);
            if max > 0.0 {
                let shift = max.log2().floor() as i32;
                scale_by_pow2(&mut acc, -shift);
                let start = cell * modes * c;
                chart.inside[start..start + modes * c].copy_from_slice(&acc);
                chart.span_exp[cell] = emax + shift;
                chart.span_mass[cell] = true;
            }
        }
    }

    // Root: mode (depth 1, left side), which is mode 0 in every regime.
    let total: f64 = if n == 1 {
        (0..c).map(|cat| grammar.root_prob(cat) * chart.lex[cat]).sum()
    } else {
        let scores = chart.scores(0, n, 0);
        (0..c).map(|cat| grammar.root_prob(cat) * scores[cat]).sum()
    };
    if total > 0.0 {
        let exp = if n == 1 { 0 } else { chart.span_exp[chart.cell(0, n)] };
        chart.root_log_prob = total.ln() + f64::from(exp) * LN_2;
    }
    Ok(chart)
}

fn draw_categorical<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draws one tree from the exact posterior over parses encoded by the chart.
/// The grammar must be the one the chart was built from.
pub fn sample_tree<R: Rng + ?Sized>(
    chart: &Chart,
    grammar: &Grammar,
    rng: &mut R,
) -> Result<BinaryTree, InducerError> {
    if grammar.categories() != chart.categories || grammar.vocab_size() != chart.vocab {
        return Err(InducerError::GrammarMismatch);
    }
    let c = chart.categories;
    let n = chart.n;
    let mut weights = vec![0.0; c];
    let scores: &[f64] =
        if n == 1 { chart.lex_scores(0) } else { chart.scores(0, n, 0) };
    for cat in 0..c {
        weights[cat] = grammar.root_prob(cat) * scores[cat];
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(InducerError::ZeroMass);
    }
    let root = draw_categorical(&weights, total, rng);
    descend(chart, grammar, rng, 0, n, root, 0)
}

/// Walks top-down from `(i, j, parent, mode)`, re-deriving each cell's split
/// weights and drawing one. Weights are recomputed in the same order both
/// passes, so the draw is exact with respect to the chart's arithmetic.
fn descend<R: Rng + ?Sized>(
    chart: &Chart,
    grammar: &Grammar,
    rng: &mut R,
    i: usize,
    j: usize,
    parent: usize,
    mode: usize,
) -> Result<BinaryTree, InducerError> {
    if j - i == 1 {
        return Ok(BinaryTree::Preterminal { cat: parent, word: chart.sentence[i] });
    }
    let c = chart.categories;
    let row = grammar.row(parent);
    let (left_mode, right_mode) = chart.child_modes(mode);

    let mut emax = i32::MIN;
    for k in i + 1..j {
        if chart.child_mass(i, k) && chart.child_mass(k, j) {
            emax = emax.max(chart.child_exp(i, k) + chart.child_exp(k, j));
        }
    }
    if emax == i32::MIN {
        return Err(InducerError::ZeroMass);
    }

    // Pass 1 totals the split weights; pass 2 replays the identical sequence
    // of additions against the drawn threshold.
    let visit = |stop: Option<f64>| -> (f64, Option<(usize, usize, usize)>) {
        let mut acc = 0.0;
        let mut last: Option<(usize, usize, usize)> = None;
        for k in i + 1..j {
            if !(chart.child_mass(i, k) && chart.child_mass(k, j)) {
                continue;
            }
            let adj = pow2(chart.child_exp(i, k) + chart.child_exp(k, j) - emax);
            if adj == 0.0 {
                continue;
            }
            let left: &[f64] = if k - i == 1 {
                chart.lex_scores(i)
            } else {
                match left_mode {
                    Some(m) => chart.scores(i, k, m),
                    None => continue,
                }
            };
            let right: &[f64] = if j - k == 1 {
                chart.lex_scores(k)
            } else {
                chart.scores(k, j, right_mode)
            };
            for l in 0..c {
                let lv = left[l] * adj;
                if lv == 0.0 {
                    continue;
                }
                for r in 0..c {
                    let w = row[l * c + r] * lv * right[r];
                    if w > 0.0 {
                        acc += w;
                        last = Some((k, l, r));
                        if stop.is_some_and(|threshold| threshold < acc) {
                            return (acc, last);
                        }
                    }
                }
            }
        }
        (acc, last)
    };
    let (total, fallback) = visit(None);
    if total <= 0.0 {
        return Err(InducerError::ZeroMass);
    }
    let u = rng.random::<f64>() * total;
    let (k, l, r) = visit(Some(u)).1.or(fallback).expect("positive total implies a pick");

    let left_child_mode = if k - i == 1 { 0 } else { left_mode.expect("picked split is legal") };
    let left = descend(chart, grammar, rng, i, k, l, left_child_mode)?;
    let right = descend(chart, grammar, rng, k, j, r, right_mode)?;
    Ok(BinaryTree::Branch { cat: parent, left: Box::new(left), right: Box::new(right) })
}

/// Reusable max-product parser: the grammar's log tables are computed once
/// and shared across sentences.
pub struct ViterbiParser<'g> {
    grammar: &'g Grammar,
    bound: Option<usize>,
    modes: usize,
    log_rows: Vec<Vec<f64>>,
    log_root: Vec<f64>,
}

impl<'g> ViterbiParser<'g> {
    pub fn new(grammar: &'g Grammar, bound: Option<usize>) -> Result<ViterbiParser<'g>, InducerError> {
        let modes = validate_bound(bound)?;
        let log_rows = (0..grammar.categories())
            .map(|p| grammar.row(p).iter().map(|&x| x.ln()).collect())
            .collect();
        let log_root = grammar.root().iter().map(|&x| x.ln()).collect();
        Ok(ViterbiParser { grammar, bound, modes, log_rows, log_root })
    }

    /// The highest-probability parse, with deterministic tie-breaking: the
    /// first candidate in (split, left category, right category) order wins,
    /// and the root category is the smallest among maximizers.
    pub fn parse(&self, sentence: &[usize]) -> Result<BinaryTree, InducerError> {
        if sentence.is_empty() {
            return Err(InducerError::EmptySentence);
        }
        let vocab = self.grammar.vocab_size();
        for (position, &token) in sentence.iter().enumerate() {
            if token >= vocab {
                return Err(InducerError::OovToken { position, token, vocab });
            }
        }
        let n = sentence.len();
        let c = self.grammar.categories();
        let modes = self.modes;
        let term = c * c;

        let mut lex = vec![f64::NEG_INFINITY; n * c];
        for (i, &token) in sentence.iter().enumerate() {
            for cat in 0..c {
                lex[i * c + cat] = self.log_rows[cat][term + token];
            }
        }

        if n == 1 {
            let mut best = f64::NEG_INFINITY;
            let mut best_cat = None;
            for (cat, (&root, &emit)) in self.log_root.iter().zip(&lex).enumerate() {
                let score = root + emit;
                if score > best {
                    best = score;
                    best_cat = Some(cat);
                }
            }
            let cat = best_cat.filter(|_| best > f64::NEG_INFINITY).ok_or(InducerError::ZeroMass)?;
            return Ok(BinaryTree::Preterminal { cat, word: sentence[0] });
        }

        let cells = (n + 1) * (n + 1);
        let mut table = vec![f64::NEG_INFINITY; cells * modes * c];
        let mut back = vec![[0u32; 3]; cells * modes * c];
        let cell = |i: usize, j: usize| i * (n + 1) + j;
        let slot = |i: usize, j: usize, m: usize, p: usize| (cell(i, j) * modes + m) * c + p;
        let child_modes = |mode: usize| -> (Option<usize>, usize) {
            match self.bound {
                None => (Some(0), 0),
                Some(max_depth) => {
                    let depth = mode / 2 + 1;
                    let side = mode % 2;
                    let left_depth = depth + side;
                    let left = (left_depth <= max_depth).then(|| (left_depth - 1) * 2);
                    (left, (depth - 1) * 2 + 1)
                }
            }
        };

        for width in 2..=n {
            for i in 0..=n - width {
                let j = i + width;
                for mode in 0..modes {
                    let (left_mode, right_mode) = child_modes(mode);
                    for k in i + 1..j {
                        let left_base: Option<usize> = if k - i == 1 {
                            Some(usize::MAX) // sentinel: read from lex
                        } else {
                            left_mode.map(|m| slot(i, k, m, 0))
                        };
                        let Some(left_base) = left_base else { continue };
                        let right_base = if j - k == 1 {
                            usize::MAX
                        } else {
                            slot(k, j, right_mode, 0)
                        };
                        for parent in 0..c {
                            let row = &self.log_rows[parent];
                            let target = slot(i, j, mode, parent);
                            let mut best = table[target];
                            let mut best_back = back[target];
                            let mut improved = false;
                            for l in 0..c {
                                let lv = if left_base == usize::MAX {
                                    lex[i * c + l]
                                } else {
                                    table[left_base + l]
                                };
                                if lv == f64::NEG_INFINITY {
                                    continue;
                                }
                                for r in 0..c {
                                    let rv = if right_base == usize::MAX {
                                        lex[k * c + r]
                                    } else {
                                        table[right_base + r]
                                    };
                                    let score = row[l * c + r] + lv + rv;
                                    if score > best {
                                        best = score;
                                        best_back = [k as u32, l as u32, r as u32];
                                        improved = true;
                                    }
                                }
                            }
                            if improved {
                                table[target] = best;
                                back[target] = best_back;
                            }
                        }
                    }
                }
            }
        }

        let mut best = f64::NEG_INFINITY;
        let mut best_cat = None;
        for cat in 0..c {
            let score = self.log_root[cat] + table[slot(0, n, 0, cat)];
            if score > best {
                best = score;
                best_cat = Some(cat);
            }
        }
        let root = best_cat.filter(|_| best > f64::NEG_INFINITY).ok_or(InducerError::ZeroMass)?;

        struct Rebuild<'a> {
            sentence: &'a [usize],
            back: &'a [[u32; 3]],
            slot: &'a dyn Fn(usize, usize, usize, usize) -> usize,
            child_modes: &'a dyn Fn(usize) -> (Option<usize>, usize),
        }
        impl Rebuild<'_> {
            fn node(&self, i: usize, j: usize, parent: usize, mode: usize) -> BinaryTree {
                if j - i == 1 {
                    return BinaryTree::Preterminal { cat: parent, word: self.sentence[i] };
                }
                let [k, l, r] = self.back[(self.slot)(i, j, mode, parent)];
                let (k, l, r) = (k as usize, l as usize, r as usize);
                let (left_mode, right_mode) = (self.child_modes)(mode);
                let left_child_mode =
                    if k - i == 1 { 0 } else { left_mode.expect("legal backpointer") };
                let left = self.node(i, k, l, left_child_mode);
                let right = self.node(k, j, r, right_mode);
                BinaryTree::Branch { cat: parent, left: Box::new(left), right: Box::new(right) }
            }
        }
        let rebuild =
            Rebuild { sentence, back: &back, slot: &slot, child_modes: &child_modes };
        Ok(rebuild.node(0, n, root, 0))
    }
}

/// One-shot convenience wrapper around [`ViterbiParser`].
pub fn viterbi_parse(
    sentence: &[usize],
    grammar: &Grammar,
    bound: Option<usize>,
) -> Result<BinaryTree, InducerError> {
    ViterbiParser::new(grammar, bound)?.parse(sentence)
}

/// Joint log probability of trees and their sentences under a grammar: root
/// choices plus every expansion. Trees must lie inside the grammar's
/// category and vocabulary ranges.
pub fn corpus_log_joint(grammar: &Grammar, trees: &[BinaryTree]) -> f64 {
    let c = grammar.categories();
    let term = c * c;
    let log_rows: Vec<Vec<f64>> = (0..c)
        .map(|p| grammar.row(p).iter().map(|&x| x.ln()).collect())
        .collect();
    fn node_sum(tree: &BinaryTree, log_rows: &[Vec<f64>], c: usize, term: usize) -> f64 {
        match tree {
            BinaryTree::Preterminal { cat, word } => log_rows[*cat][term + *word],
            BinaryTree::Branch { cat, left, right } => {
                log_rows[*cat][left.cat() * c + right.cat()]
                    + node_sum(left, log_rows, c, term)
                    + node_sum(right, log_rows, c, term)
            }
        }
    }
    let mut total = 0.0;
    for tree in trees {
        total += grammar.root_prob(tree.cat()).ln();
        total += node_sum(tree, &log_rows, c, term);
    }
    total
}

/// Settings for one Gibbs run.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub categories: usize,
    pub beta: f64,
    pub depth_bound: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
}

/// Final state of a Gibbs run: the last grammar and tree assignment, with
/// the joint log probability after every iteration.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub grammar: Grammar,
    pub trees: Vec<BinaryTree>,
    pub log_joint_trace: Vec<f64>,
    pub seed: u64,
}

impl GibbsState {
    pub fn log_joint(&self) -> f64 {
        corpus_log_joint(&self.grammar, &self.trees)
    }
}

/// Runs the sampler: draw a grammar from the prior, then alternate tree
/// sampling (given the grammar) with grammar resampling (given the rule
/// counts of the current trees).
///
/// All randomness is derived from `config.seed` through fixed per-purpose
/// streams — one per (iteration, sentence) for trees, one per iteration for
/// the grammar — so results are reproducible bit-for-bit regardless of how
/// sentences are scheduled across threads.
pub fn gibbs_run(corpus: &Corpus, config: &GibbsConfig) -> Result<GibbsState, InducerError> {
    gibbs_run_with(corpus, config, |_, _| {})
}

/// [`gibbs_run`] with a per-iteration callback receiving the 0-based
/// iteration index and the joint log probability after its grammar update.
pub fn gibbs_run_with<F>(
    corpus: &Corpus,
    config: &GibbsConfig,
    mut on_iteration: F,
) -> Result<GibbsState, InducerError>
where
    F: FnMut(usize, f64),
{
    if corpus.is_empty() {
        return Err(InducerError::EmptyCorpus);
    }
    if config.iterations == 0 {
        return Err(InducerError::InvalidIterations);
    }
    if config.depth_bound == Some(0) {
        return Err(InducerError::InvalidBound(0));
    }
    let vocab = corpus.vocab().len();
    let mut grammar = sample_prior(
        config.categories,
        vocab,
        config.beta,
        &mut substream(config.seed, STREAM_PRIOR, 0, 0),
    )?;
    let mut trees = Vec::new();
    let mut trace = Vec::with_capacity(config.iterations);
    for iteration in 0..config.iterations {
        let sampled: Result<Vec<BinaryTree>, InducerError> = corpus
            .sentences()
            .par_iter()
            .enumerate()
            .map(|(idx, sentence)| {
                let chart = inside_chart(sentence, &grammar, config.depth_bound)?;
                let mut rng =
                    substream(config.seed, STREAM_TREES, iteration as u64, idx as u64);
                sample_tree(&chart, &grammar, &mut rng)
            })
            .collect();
        trees = sampled?;
        let mut counts = RuleCounts::new(config.categories, vocab);
        for tree in &trees {
            counts.observe(tree);
        }
        grammar = resample_posterior(
            &counts,
            config.beta,
            &mut substream(config.seed, STREAM_POSTERIOR, iteration as u64, 0),
        )?;
        let log_joint = corpus_log_joint(&grammar, &trees);
        trace.push(log_joint);
        on_iteration(iteration, log_joint);
    }
    Ok(GibbsState { grammar, trees, log_joint_trace: trace, seed: config.seed })
}
