//! Scoring induced trees against reference trees.
//!
//! Unlabeled quality is standard bracketing precision/recall/F1 over labeled
//! spans with the labels ignored. Because induced categories are anonymous
//! integers, labeled quality is measured instead through the pairing of gold
//! and predicted labels on span-matched constituents: homogeneity asks
//! whether each induced category maps to one gold label, V-measure balances
//! that against completeness, and the headline scores RH and RVM multiply
//! them by unlabeled recall so that degenerate flat parses cannot score well.
//!
//! All functions expect trees that are already normalized (unaries collapsed,
//! punctuation removed) — [`normalize_pairs`] does exactly that to aligned
//! gold/predicted sequences.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::{substream, STREAM_PERMUTATION};
use crate::treebank::{
    collapse_unaries, gold_constituents, punct_positions, remove_leaves, PunctPolicy, Span, Tree,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold and predicted tree sequences have different lengths ({gold} vs {pred})")]
    TreeCountMismatch { gold: usize, pred: usize },
    #[error("sentence {0}: gold and predicted yields differ")]
    YieldMismatch(usize),
    #[error("per-sentence score records have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("a permutation test needs at least one iteration")]
    NoIterations,
}

/// Per-sentence bracket counts, the unit the permutation test resamples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SentenceBrackets {
    pub matched: u64,
    pub gold_total: u64,
    pub pred_total: u64,
}

/// Micro-pooled bracketing scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketScores {
    pub matched: u64,
    pub gold_total: u64,
    pub pred_total: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl BracketScores {
    fn from_counts(matched: u64, gold_total: u64, pred_total: u64) -> BracketScores {
        let precision =
            if pred_total == 0 { 0.0 } else { matched as f64 / pred_total as f64 };
        let recall = if gold_total == 0 { 0.0 } else { matched as f64 / gold_total as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        BracketScores { matched, gold_total, pred_total, precision, recall, f1 }
    }
}

/// The multiset of (gold label, predicted label) pairs collected from
/// span-matched constituents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelPairs {
    pub pairs: Vec<(String, String)>,
}

/// Homogeneity, completeness, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hcv {
    pub h: f64,
    pub c: f64,
    pub v: f64,
}

fn check_alignment(gold: &[Tree], pred: &[Tree]) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::TreeCountMismatch { gold: gold.len(), pred: pred.len() });
    }
    for (idx, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.leaves() != p.leaves() {
            return Err(EvalError::YieldMismatch(idx));
        }
    }
    Ok(())
}

fn span_groups(tree: &Tree) -> (usize, HashMap<Span, Vec<String>>) {
    let spans = gold_constituents(tree);
    let total = spans.len();
    let mut groups: HashMap<Span, Vec<String>> = HashMap::new();
    for (span, label) in spans {
        groups.entry(span).or_default().push(label);
    }
    (total, groups)
}

fn match_sentence(gold: &Tree, pred: &Tree) -> (SentenceBrackets, Vec<(String, String)>) {
    let (gold_total, gold_groups) = span_groups(gold);
    let (pred_total, mut pred_groups) = span_groups(pred);
    let mut matched = 0u64;
    let mut pairs = Vec::new();
    // Deterministic order: walk gold spans sorted, pair sorted label lists.
    let mut gold_spans: Vec<(&Span, &Vec<String>)> = gold_groups.iter().collect();
    gold_spans.sort();
    for (span, gold_labels) in gold_spans {
        let Some(pred_labels) = pred_groups.get_mut(span) else { continue };
        let mut gold_labels = gold_labels.clone();
        gold_labels.sort();
        pred_labels.sort();
        let pairing = gold_labels.len().min(pred_labels.len());
        matched += pairing as u64;
        for (g, p) in gold_labels.into_iter().zip(pred_labels.iter()) {
            pairs.push((g, p.clone()));
        }
    }
    (
        SentenceBrackets {
            matched,
            gold_total: gold_total as u64,
            pred_total: pred_total as u64,
        },
        pairs,
    )
}

/// Span-match counts for each sentence pair separately.
pub fn per_sentence_brackets(
    gold: &[Tree],
    pred: &[Tree],
) -> Result<Vec<SentenceBrackets>, EvalError> {
    check_alignment(gold, pred)?;
    Ok(gold.iter().zip(pred).map(|(g, p)| match_sentence(g, p).0).collect())
}

/// Micro-pooled precision/recall/F1 over all sentences. Spans are compared
/// as multisets; labels play no role.
pub fn bracket_prf(gold: &[Tree], pred: &[Tree]) -> Result<BracketScores, EvalError> {
    let per = per_sentence_brackets(gold, pred)?;
    let matched = per.iter().map(|s| s.matched).sum();
    let gold_total = per.iter().map(|s| s.gold_total).sum();
    let pred_total = per.iter().map(|s| s.pred_total).sum();
    Ok(BracketScores::from_counts(matched, gold_total, pred_total))
}

/// Collects the label pairs of all span-matched constituents, pooled over
/// sentences. When a span occurs several times on one side, sorted label
/// lists are zipped up to the smaller multiplicity.
pub fn matched_label_pairs(gold: &[Tree], pred: &[Tree]) -> Result<LabelPairs, EvalError> {
    check_alignment(gold, pred)?;
    let mut pairs = Vec::new();
    for (g, p) in gold.iter().zip(pred) {
        pairs.extend(match_sentence(g, p).1);
    }
    Ok(LabelPairs { pairs })
}

fn entropy_from_counts(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    let mut h = 0.0;
    for count in counts {
        if count > 0 {
            let p = count as f64 / n;
            h -= p * p.ln();
        }
    }
    h
}

/// Homogeneity, completeness, and V-measure of the label pairing.
///
/// Homogeneity is `1 - H(gold | pred) / H(gold)`, taken as 1 when the gold
/// labels are already pure (`H(gold) = 0`); completeness is the mirror
/// image; V is their harmonic mean. An empty pairing scores 0 everywhere.
pub fn homogeneity_completeness_v(pairs: &LabelPairs) -> Hcv {
    if pairs.pairs.is_empty() {
        return Hcv { h: 0.0, c: 0.0, v: 0.0 };
    }
    let n = pairs.pairs.len() as f64;
    // Ordered maps keep the entropy summation order, and therefore the
    // scores, identical from process to process.
    let mut gold_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut pred_counts: BTreeMap<&str, u64> = BTreeMap::new();
    let mut joint: BTreeMap<(&str, &str), u64> = BTreeMap::new();
    for (g, p) in &pairs.pairs {
        *gold_counts.entry(g).or_insert(0) += 1;
        *pred_counts.entry(p).or_insert(0) += 1;
        *joint.entry((g, p)).or_insert(0) += 1;
    }
    let h_gold = entropy_from_counts(gold_counts.values().copied(), n);
    let h_pred = entropy_from_counts(pred_counts.values().copied(), n);
    // H(gold | pred) = H(joint) - H(pred), and symmetrically.
    let h_joint = entropy_from_counts(joint.values().copied(), n);
    let h_gold_given_pred = h_joint - h_pred;
    let h_pred_given_gold = h_joint - h_gold;
    let h = if h_gold == 0.0 {
        1.0
    } else {
        (1.0 - h_gold_given_pred / h_gold).clamp(0.0, 1.0)
    };
    let c = if h_pred == 0.0 {
        1.0
    } else {
        (1.0 - h_pred_given_gold / h_pred).clamp(0.0, 1.0)
    };
    let v = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
    Hcv { h, c, v }
}

/// Recall-weighted homogeneity: unlabeled recall times the homogeneity of
/// the matched label pairing.
pub fn rh(gold: &[Tree], pred: &[Tree]) -> Result<f64, EvalError> {
    let scores = bracket_prf(gold, pred)?;
    let hcv = homogeneity_completeness_v(&matched_label_pairs(gold, pred)?);
    Ok(scores.recall * hcv.h)
}

/// Recall-weighted V-measure.
pub fn rvm(gold: &[Tree], pred: &[Tree]) -> Result<f64, EvalError> {
    let scores = bracket_prf(gold, pred)?;
    let hcv = homogeneity_completeness_v(&matched_label_pairs(gold, pred)?);
    Ok(scores.recall * hcv.v)
}

/// Everything the scorers produce, in one flat record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub sentences: usize,
    pub matched: u64,
    pub gold_total: u64,
    pub pred_total: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched_pairs: usize,
    pub h: f64,
    pub c: f64,
    pub v: f64,
    pub rh: f64,
    pub rvm: f64,
}

/// Runs every metric over aligned, normalized tree sequences.
pub fn evaluate(gold: &[Tree], pred: &[Tree]) -> Result<EvalReport, EvalError> {
    let scores = bracket_prf(gold, pred)?;
    let pairs = matched_label_pairs(gold, pred)?;
    let hcv = homogeneity_completeness_v(&pairs);
    Ok(EvalReport {
        sentences: gold.len(),
        matched: scores.matched,
        gold_total: scores.gold_total,
        pred_total: scores.pred_total,
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
        matched_pairs: pairs.pairs.len(),
        h: hcv.h,
        c: hcv.c,
        v: hcv.v,
        rh: scores.recall * hcv.h,
        rvm: scores.recall * hcv.v,
    })
}

/// Gold/predicted pairs after evaluation normalization: punctuation removed
/// (at positions determined on the gold side), unary chains collapsed.
/// Pairs whose whole yield was punctuation are dropped and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPairs {
    pub gold: Vec<Tree>,
    pub pred: Vec<Tree>,
    pub skipped: usize,
}

/// Normalizes aligned gold/predicted trees for scoring. Punctuation
/// positions are decided on the gold tree (tokens or tags, per `policy`) and
/// removed from both sides so the yields stay aligned even when predicted
/// preterminal labels are anonymous integers.
pub fn normalize_pairs(
    gold: &[Tree],
    pred: &[Tree],
    policy: &PunctPolicy,
) -> Result<NormalizedPairs, EvalError> {
    check_alignment(gold, pred)?;
    let mut out = NormalizedPairs { gold: Vec::new(), pred: Vec::new(), skipped: 0 };
    for (g, p) in gold.iter().zip(pred) {
        let remove = punct_positions(g, policy);
        match (remove_leaves(g, &remove), remove_leaves(p, &remove)) {
            (Some(g2), Some(p2)) => {
                out.gold.push(collapse_unaries(&g2));
                out.pred.push(collapse_unaries(&p2));
            }
            _ => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Result of a paired permutation test on micro-F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationTest {
    pub f1_a: f64,
    pub f1_b: f64,
    pub observed: f64,
    pub iterations: usize,
    pub p_value: f64,
}

fn micro_f1(records: impl Iterator<Item = SentenceBrackets>) -> f64 {
    let mut matched = 0u64;
    let mut gold = 0u64;
    let mut pred = 0u64;
    for r in records {
        matched += r.matched;
        gold += r.gold_total;
        pred += r.pred_total;
    }
    BracketScores::from_counts(matched, gold, pred).f1
}

/// Paired permutation test for the micro-F1 difference of two systems
/// against the same gold trees.
///
/// Each iteration swaps the two systems' per-sentence records independently
/// with probability one half and recomputes the absolute micro-F1 gap. The
/// reported p-value uses the add-one estimator
/// `(1 + #{stat >= observed}) / (1 + iterations)`, so it can never be
/// exactly zero; identical inputs give exactly 1.
pub fn permutation_test<R: Rng + ?Sized>(
    a: &[SentenceBrackets],
    b: &[SentenceBrackets],
    iterations: usize,
    rng: &mut R,
) -> Result<PermutationTest, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if iterations == 0 {
        return Err(EvalError::NoIterations);
    }
    let f1_a = micro_f1(a.iter().copied());
    let f1_b = micro_f1(b.iter().copied());
    let observed = (f1_a - f1_b).abs();
    let master: u64 = rng.random();
    let hits: u64 = (0..iterations as u64)
        .into_par_iter()
        .map(|iteration| {
            let mut rng = substream(master, STREAM_PERMUTATION, iteration, 0);
            let mut swapped_a = (0u64, 0u64, 0u64);
            let mut swapped_b = (0u64, 0u64, 0u64);
            for (ra, rb) in a.iter().zip(b) {
                let (x, y) = if rng.random::<bool>() { (rb, ra) } else { (ra, rb) };
                swapped_a.0 += x.matched;
                swapped_a.1 += x.gold_total;
                swapped_a.2 += x.pred_total;
                swapped_b.0 += y.matched;
                swapped_b.1 += y.gold_total;
                swapped_b.2 += y.pred_total;
            }
            let fa = BracketScores::from_counts(swapped_a.0, swapped_a.1, swapped_a.2).f1;
            let fb = BracketScores::from_counts(swapped_b.0, swapped_b.1, swapped_b.2).f1;
            u64::from((fa - fb).abs() >= observed)
        })
        .sum();
    Ok(PermutationTest {
        f1_a,
        f1_b,
        observed,
        iterations,
        p_value: (1 + hits) as f64 / (1 + iterations) as f64,
    })
}
