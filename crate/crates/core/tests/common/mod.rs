//! Independent reference implementations used by the integration tests.
//!
//! Everything here recomputes quantities the library also produces, but by
//! the most direct route available — exhaustive enumeration over tree
//! shapes, brute-force counting, closed-form entropies — deliberately
//! avoiding the dynamic programming, scaling, and pooling shortcuts the
//! library uses, so the two sides form a genuine cross-check.
//!
//! Each integration test target compiles this module independently and
//! uses its own subset of the oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use pcfg_lab::eval::SentenceBrackets;
use pcfg_lab::grammar::Grammar;
use pcfg_lab::treebank::{BinaryTree, Span, Tree};
use rand::Rng;

// ---------------------------------------------------------------------------
// Tree shapes and exhaustive parsing

/// An unlabeled binary tree shape over a contiguous range of leaf positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shape {
    Leaf(usize),
    Branch(Box<Shape>, Box<Shape>),
}

/// Every binary tree shape over leaves `lo..hi`.
pub fn enumerate_shapes(lo: usize, hi: usize) -> Vec<Shape> {
    assert!(hi > lo);
    if hi - lo == 1 {
        return vec![Shape::Leaf(lo)];
    }
    let mut shapes = Vec::new();
    for split in lo + 1..hi {
        for left in enumerate_shapes(lo, split) {
            for right in enumerate_shapes(split, hi) {
                shapes.push(Shape::Branch(Box::new(left.clone()), Box::new(right)));
            }
        }
    }
    shapes
}

/// The shape of a concrete binary tree, with leaf positions assigned
/// left to right.
pub fn shape_of(tree: &BinaryTree) -> Shape {
    fn walk(tree: &BinaryTree, offset: &mut usize) -> Shape {
        match tree {
            BinaryTree::Preterminal { .. } => {
                let leaf = Shape::Leaf(*offset);
                *offset += 1;
                leaf
            }
            BinaryTree::Branch { left, right, .. } => {
                let l = walk(left, offset);
                let r = walk(right, offset);
                Shape::Branch(Box::new(l), Box::new(r))
            }
        }
    }
    walk(tree, &mut 0)
}

/// Total derivation probability of one shape by root category, summing over
/// every interior category labeling directly on the tree structure.
pub fn shape_inside(shape: &Shape, sentence: &[usize], grammar: &Grammar) -> Vec<f64> {
    let categories = grammar.categories();
    match shape {
        Shape::Leaf(position) => (0..categories)
            .map(|cat| grammar.terminal_prob(cat, sentence[*position]))
            .collect(),
        Shape::Branch(left, right) => {
            let lv = shape_inside(left, sentence, grammar);
            let rv = shape_inside(right, sentence, grammar);
            (0..categories)
                .map(|parent| {
                    let mut total = 0.0;
                    for (lc, &lp) in lv.iter().enumerate() {
                        for (rc, &rp) in rv.iter().enumerate() {
                            total += grammar.binary_prob(parent, lc, rc) * lp * rp;
                        }
                    }
                    total
                })
                .collect()
        }
    }
}

/// Root-weighted total probability of one shape.
pub fn shape_mass(shape: &Shape, sentence: &[usize], grammar: &Grammar) -> f64 {
    shape_inside(shape, sentence, grammar)
        .iter()
        .enumerate()
        .map(|(cat, &p)| grammar.root_prob(cat) * p)
        .sum()
}

/// Sentence probability by summing every shape's mass.
pub fn enumerated_sentence_mass(sentence: &[usize], grammar: &Grammar) -> f64 {
    enumerate_shapes(0, sentence.len())
        .iter()
        .map(|shape| shape_mass(shape, sentence, grammar))
        .sum()
}

/// Center-embedding depth of a shape: the root sits at depth 1 on the left
/// side, a left child sinks one level exactly when its parent hangs on the
/// right side, and only branching nodes count toward the maximum.
pub fn shape_depth(shape: &Shape) -> usize {
    fn walk(shape: &Shape, depth: usize, on_right_side: bool, max: &mut usize) {
        if let Shape::Branch(left, right) = shape {
            *max = (*max).max(depth);
            walk(left, depth + usize::from(on_right_side), false, max);
            walk(right, depth, true, max);
        }
    }
    let mut max = 1;
    walk(shape, 1, false, &mut max);
    max
}

/// Sentence probability restricted to shapes within a depth bound.
pub fn enumerated_bounded_mass(sentence: &[usize], grammar: &Grammar, bound: usize) -> f64 {
    enumerate_shapes(0, sentence.len())
        .iter()
        .filter(|shape| shape_depth(shape) <= bound)
        .map(|shape| shape_mass(shape, sentence, grammar))
        .sum()
}

/// Best derivation log-probability of one shape by root category
/// (`NEG_INFINITY` where no derivation exists).
pub fn shape_best(shape: &Shape, sentence: &[usize], grammar: &Grammar) -> Vec<f64> {
    let categories = grammar.categories();
    match shape {
        Shape::Leaf(position) => (0..categories)
            .map(|cat| grammar.terminal_prob(cat, sentence[*position]).ln())
            .collect(),
        Shape::Branch(left, right) => {
            let lv = shape_best(left, sentence, grammar);
            let rv = shape_best(right, sentence, grammar);
            (0..categories)
                .map(|parent| {
                    let mut best = f64::NEG_INFINITY;
                    for (lc, &lp) in lv.iter().enumerate() {
                        for (rc, &rp) in rv.iter().enumerate() {
                            let score =
                                grammar.binary_prob(parent, lc, rc).ln() + lp + rp;
                            if score > best {
                                best = score;
                            }
                        }
                    }
                    best
                })
                .collect()
        }
    }
}

/// Viterbi log-probability by exhaustive search over shapes and labelings.
pub fn enumerated_viterbi_logprob(sentence: &[usize], grammar: &Grammar) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for shape in enumerate_shapes(0, sentence.len()) {
        for (cat, &score) in shape_best(&shape, sentence, grammar).iter().enumerate() {
            let total = grammar.root_prob(cat).ln() + score;
            if total > best {
                best = total;
            }
        }
    }
    best
}

/// The exact posterior over tree shapes for one sentence, as a map from
/// shape to normalized probability.
pub fn shape_posterior(sentence: &[usize], grammar: &Grammar) -> BTreeMap<Shape, f64> {
    let shapes = enumerate_shapes(0, sentence.len());
    let masses: Vec<f64> =
        shapes.iter().map(|s| shape_mass(s, sentence, grammar)).collect();
    let total: f64 = masses.iter().sum();
    shapes.into_iter().zip(masses).map(|(s, m)| (s, m / total)).collect()
}

// ---------------------------------------------------------------------------
// A random grammar that owes nothing to the library's samplers

/// A dense random grammar: every row is independent uniform noise,
/// normalized by hand and handed to the validating constructor.
pub fn random_grammar<R: Rng + ?Sized>(categories: usize, vocab: usize, rng: &mut R) -> Grammar {
    let width = categories * categories + vocab;
    let rows: Vec<Vec<f64>> = (0..categories)
        .map(|_| normalized_noise(width, rng))
        .collect();
    let root = normalized_noise(categories, rng);
    Grammar::from_parts(categories, vocab, 1.0, rows, root).expect("valid random grammar")
}

fn normalized_noise<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

// ---------------------------------------------------------------------------
// Bracketing and clustering metrics, the slow way

/// Labeled spans of width >= 2, collected by an explicit position walk.
pub fn brute_spans(tree: &Tree) -> Vec<(Span, String)> {
    fn walk(tree: &Tree, start: usize, spans: &mut Vec<(Span, String)>) -> usize {
        match tree {
            Tree::Leaf(_) => start + 1,
            Tree::Node { label, children } => {
                let mut end = start;
                for child in children {
                    end = walk(child, end, spans);
                }
                if end - start >= 2 {
                    spans.push(((start, end), label.clone()));
                }
                end
            }
        }
    }
    let mut spans = Vec::new();
    walk(tree, 0, &mut spans);
    spans
}

/// Multiset intersection size of two span lists, labels ignored, via sort
/// and two-pointer merge.
pub fn merge_matched(a: &[(Span, String)], b: &[(Span, String)]) -> u64 {
    let mut xs: Vec<Span> = a.iter().map(|s| s.0).collect();
    let mut ys: Vec<Span> = b.iter().map(|s| s.0).collect();
    xs.sort_unstable();
    ys.sort_unstable();
    let (mut i, mut j, mut matched) = (0, 0, 0);
    while i < xs.len() && j < ys.len() {
        match xs[i].cmp(&ys[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                matched += 1;
                i += 1;
                j += 1;
            }
        }
    }
    matched
}

/// Per-sentence counts by the merge route.
pub fn brute_sentence_brackets(gold: &Tree, pred: &Tree) -> SentenceBrackets {
    let g = brute_spans(gold);
    let p = brute_spans(pred);
    SentenceBrackets {
        matched: merge_matched(&g, &p),
        gold_total: g.len() as u64,
        pred_total: p.len() as u64,
    }
}

/// Corpus precision/recall/F1 from pooled counts.
pub fn brute_prf(gold: &[Tree], pred: &[Tree]) -> (f64, f64, f64) {
    let (mut matched, mut gold_total, mut pred_total) = (0u64, 0u64, 0u64);
    for (g, p) in gold.iter().zip(pred) {
        let counts = brute_sentence_brackets(g, p);
        matched += counts.matched;
        gold_total += counts.gold_total;
        pred_total += counts.pred_total;
    }
    prf_from_counts(matched, gold_total, pred_total)
}

pub fn prf_from_counts(matched: u64, gold_total: u64, pred_total: u64) -> (f64, f64, f64) {
    let p = if pred_total == 0 { 0.0 } else { matched as f64 / pred_total as f64 };
    let r = if gold_total == 0 { 0.0 } else { matched as f64 / gold_total as f64 };
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

/// Label pairs of span-matched constituents: per shared span, sorted label
/// lists zipped to the shorter length, pooled over sentences.
pub fn brute_label_pairs(gold: &[Tree], pred: &[Tree]) -> Vec<(String, String)> {
    let mut pairs = Vec::new();
    for (g, p) in gold.iter().zip(pred) {
        let mut gold_by_span: BTreeMap<Span, Vec<String>> = BTreeMap::new();
        for (span, label) in brute_spans(g) {
            gold_by_span.entry(span).or_default().push(label);
        }
        let mut pred_by_span: BTreeMap<Span, Vec<String>> = BTreeMap::new();
        for (span, label) in brute_spans(p) {
            pred_by_span.entry(span).or_default().push(label);
        }
        for (span, mut gold_labels) in gold_by_span {
            let Some(pred_labels) = pred_by_span.get_mut(&span) else { continue };
            gold_labels.sort();
            pred_labels.sort();
            for (gl, pl) in gold_labels.into_iter().zip(pred_labels.iter()) {
                pairs.push((gl, pl.clone()));
            }
        }
    }
    pairs
}

/// Homogeneity, completeness, and V-measure from an explicit contingency
/// table, conditioning cluster by cluster rather than via joint entropies.
pub fn brute_hcv(pairs: &[(String, String)]) -> (f64, f64, f64) {
    if pairs.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = pairs.len() as f64;
    let classes: BTreeSet<&str> = pairs.iter().map(|(g, _)| g.as_str()).collect();
    let clusters: BTreeSet<&str> = pairs.iter().map(|(_, p)| p.as_str()).collect();
    let count = |f: &dyn Fn(&(String, String)) -> bool| {
        pairs.iter().filter(|pair| f(pair)) .count() as f64
    };

    let entropy = |weights: Vec<f64>| -> f64 {
        weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -(w / n) * (w / n).ln())
            .sum()
    };
    let h_class = entropy(
        classes.iter().map(|&cl| count(&|p| p.0 == cl)).collect(),
    );
    let h_cluster = entropy(
        clusters.iter().map(|&k| count(&|p| p.1 == k)).collect(),
    );

    // H(C|K) = sum_k P(k) H(C | K = k), each inner entropy on its own.
    let mut h_class_given_cluster = 0.0;
    for &k in &clusters {
        let nk = count(&|p| p.1 == k);
        let mut inner = 0.0;
        for &cl in &classes {
            let nck = count(&|p| p.0 == cl && p.1 == k);
            if nck > 0.0 {
                inner -= (nck / nk) * (nck / nk).ln();
            }
        }
        h_class_given_cluster += (nk / n) * inner;
    }
    let mut h_cluster_given_class = 0.0;
    for &cl in &classes {
        let nc = count(&|p| p.0 == cl);
        let mut inner = 0.0;
        for &k in &clusters {
            let nck = count(&|p| p.0 == cl && p.1 == k);
            if nck > 0.0 {
                inner -= (nck / nc) * (nck / nc).ln();
            }
        }
        h_cluster_given_class += (nc / n) * inner;
    }

    let h = if h_class == 0.0 { 1.0 } else { 1.0 - h_class_given_cluster / h_class };
    let c = if h_cluster == 0.0 { 1.0 } else { 1.0 - h_cluster_given_class / h_cluster };
    let v = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
    (h, c, v)
}

pub fn brute_rh(gold: &[Tree], pred: &[Tree]) -> f64 {
    let (_, recall, _) = brute_prf(gold, pred);
    let (h, _, _) = brute_hcv(&brute_label_pairs(gold, pred));
    recall * h
}

pub fn brute_rvm(gold: &[Tree], pred: &[Tree]) -> f64 {
    let (_, recall, _) = brute_prf(gold, pred);
    let (_, _, v) = brute_hcv(&brute_label_pairs(gold, pred));
    recall * v
}

// ---------------------------------------------------------------------------
// Exact paired permutation distribution

/// Fraction of all 2^n swap patterns whose |micro-F1 difference| reaches
/// the observed one. Only feasible for small n.
pub fn exact_permutation_fraction(a: &[SentenceBrackets], b: &[SentenceBrackets]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    assert!(n <= 20, "exact enumeration is exponential");
    let f1 = |records: &[SentenceBrackets]| {
        let matched = records.iter().map(|r| r.matched).sum();
        let gold = records.iter().map(|r| r.gold_total).sum();
        let pred = records.iter().map(|r| r.pred_total).sum();
        prf_from_counts(matched, gold, pred).2
    };
    let observed = (f1(a) - f1(b)).abs();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                xs.push(b[i]);
                ys.push(a[i]);
            } else {
                xs.push(a[i]);
                ys.push(b[i]);
            }
        }
        if (f1(&xs) - f1(&ys)).abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

// ---------------------------------------------------------------------------
// Random trees for metric cross-checks

/// A random flat-or-nested tree over `tokens[lo..hi]` with labels drawn
/// from `labels`; internal nodes always have at least two children, so the
/// result is already in normalized (unary-free) form.
pub fn random_tree<R: Rng + ?Sized>(tokens: &[String], labels: &[&str], rng: &mut R) -> Tree {
    fn build<R: Rng + ?Sized>(
        tokens: &[String],
        lo: usize,
        hi: usize,
        labels: &[&str],
        rng: &mut R,
    ) -> Tree {
        let label = labels[rng.random_range(0..labels.len())].to_string();
        if hi - lo == 1 {
            return Tree::node(label, vec![Tree::leaf(tokens[lo].clone())]);
        }
        let width = hi - lo;
        let arity = rng.random_range(2..=width.min(4));
        // Random distinct split points partition the range into `arity`
        // contiguous pieces.
        let mut cuts = BTreeSet::new();
        while cuts.len() < arity - 1 {
            cuts.insert(rng.random_range(lo + 1..hi));
        }
        let mut children = Vec::with_capacity(arity);
        let mut start = lo;
        for cut in cuts.into_iter().chain([hi]) {
            children.push(build(tokens, start, cut, labels, rng));
            start = cut;
        }
        Tree::node(label, children)
    }
    build(tokens, 0, tokens.len(), labels, rng)
}

/// An aligned (gold, pred) corpus of `sentences` random tree pairs with
/// yields up to `max_len` tokens.
pub fn random_tree_pairs<R: Rng + ?Sized>(
    sentences: usize,
    max_len: usize,
    rng: &mut R,
) -> (Vec<Tree>, Vec<Tree>) {
    let gold_labels = ["S", "NP", "VP", "PP"];
    let pred_labels = ["0", "1", "2", "3", "4"];
    let mut gold = Vec::with_capacity(sentences);
    let mut pred = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let len = rng.random_range(1..=max_len);
        let tokens: Vec<String> = (0..len).map(|t| format!("t{t}")).collect();
        gold.push(random_tree(&tokens, &gold_labels, rng));
        pred.push(random_tree(&tokens, &pred_labels, rng));
    }
    (gold, pred)
}

/// Splits one predicted label: each internal node labeled `target` is
/// independently renamed to `fresh` with probability one half.
pub fn refine_label<R: Rng + ?Sized>(
    trees: &[Tree],
    target: &str,
    fresh: &str,
    rng: &mut R,
) -> Vec<Tree> {
    fn walk<R: Rng + ?Sized>(tree: &Tree, target: &str, fresh: &str, rng: &mut R) -> Tree {
        match tree {
            Tree::Leaf(token) => Tree::leaf(token.clone()),
            Tree::Node { label, children } => {
                let label = if label == target && rng.random::<bool>() {
                    fresh.to_string()
                } else {
                    label.clone()
                };
                Tree::Node {
                    label,
                    children: children
                        .iter()
                        .map(|child| walk(child, target, fresh, rng))
                        .collect(),
                }
            }
        }
    }
    trees.iter().map(|tree| walk(tree, target, fresh, rng)).collect()
}

/// The internal-node labels present in a tree, in occurrence order.
pub fn internal_labels(tree: &Tree) -> Vec<String> {
    fn walk(tree: &Tree, out: &mut Vec<String>) {
        if let Tree::Node { label, children } = tree {
            out.push(label.clone());
            for child in children {
                walk(child, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, &mut out);
    out
}
