//! Grammar parameters and their conjugate resampling.
//!
//! A grammar over `C` categories and `V` token types keeps one probability
//! row per parent category. A row spans every expansion the parent allows:
//! the `C*C` ordered binary splits (`left * C + right`) followed by the `V`
//! terminal emissions (`C*C + word`). A separate length-`C` row distributes
//! the root category. Rows are draws from a symmetric `Dirichlet(beta)`; with
//! observed rule counts the posterior is again Dirichlet with per-cell shape
//! `beta + count`, which is what makes Gibbs sweeps cheap.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use thiserror::Error;

use crate::treebank::{BinaryTree, Tree, TreebankError, Vocabulary};

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("grammar needs positive dimensions and beta (got C={categories}, V={vocab}, beta={beta})")]
    InvalidParameters { categories: usize, vocab: usize, beta: f64 },
    #[error("parent index {parent} out of range for {categories} categories")]
    ParentOutOfRange { parent: usize, categories: usize },
    #[error("expansion {0} out of range")]
    ExpansionOutOfRange(String),
    #[error("row for {parent} has probabilities summing to {sum}")]
    NotNormalized { parent: String, sum: f64 },
    #[error("row for {parent} contains a negative or non-finite probability")]
    BadProbability { parent: String },
    #[error("grammar text line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("vocabulary has {vocab} types but the grammar expects {expected}")]
    VocabSizeMismatch { vocab: usize, expected: usize },
    #[error(transparent)]
    Tree(#[from] TreebankError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One way a parent category can rewrite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expansion {
    Binary { left: usize, right: usize },
    Terminal { word: usize },
}

/// A complete parameter set: per-parent expansion rows plus the root
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    categories: usize,
    vocab: usize,
    beta: f64,
    /// `rows[parent][left * C + right]` and `rows[parent][C*C + word]`.
    rows: Vec<Vec<f64>>,
    root: Vec<f64>,
}

/// Sum tolerance when validating externally supplied rows.
const ROW_SUM_TOLERANCE: f64 = 1e-9;

impl Grammar {
    /// Assembles a grammar from explicit rows, validating shapes and
    /// normalization.
    pub fn from_parts(
        categories: usize,
        vocab: usize,
        beta: f64,
        rows: Vec<Vec<f64>>,
        root: Vec<f64>,
    ) -> Result<Grammar, GrammarError> {
        validate_dims(categories, vocab, beta)?;
        if rows.len() != categories {
            return Err(GrammarError::InvalidParameters { categories, vocab, beta });
        }
        let width = categories * categories + vocab;
        for (parent, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(GrammarError::ExpansionOutOfRange(format!(
                    "row {parent} has {} entries, expected {width}",
                    row.len()
                )));
            }
            check_row(row, &parent.to_string())?;
        }
        if root.len() != categories {
            return Err(GrammarError::InvalidParameters { categories, vocab, beta });
        }
        check_row(&root, "ROOT")?;
        Ok(Grammar { categories, vocab, beta, rows, root })
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Number of expansions per row, `C*C + V`.
    pub fn row_width(&self) -> usize {
        self.categories * self.categories + self.vocab
    }

    pub fn row(&self, parent: usize) -> &[f64] {
        &self.rows[parent]
    }

    pub fn root(&self) -> &[f64] {
        &self.root
    }

    #[inline]
    pub fn binary_prob(&self, parent: usize, left: usize, right: usize) -> f64 {
        self.rows[parent][left * self.categories + right]
    }

    #[inline]
    pub fn terminal_prob(&self, parent: usize, word: usize) -> f64 {
        self.rows[parent][self.categories * self.categories + word]
    }

    #[inline]
    pub fn root_prob(&self, cat: usize) -> f64 {
        self.root[cat]
    }

    /// Log probability of a single expansion, with index validation.
    pub fn expansion_logprob(
        &self,
        parent: usize,
        expansion: Expansion,
    ) -> Result<f64, GrammarError> {
        if parent >= self.categories {
            return Err(GrammarError::ParentOutOfRange { parent, categories: self.categories });
        }
        let prob = match expansion {
            Expansion::Binary { left, right } => {
                if left >= self.categories || right >= self.categories {
                    return Err(GrammarError::ExpansionOutOfRange(format!(
                        "{left} {right}"
                    )));
                }
                self.binary_prob(parent, left, right)
            }
            Expansion::Terminal { word } => {
                if word >= self.vocab {
                    return Err(GrammarError::ExpansionOutOfRange(format!("\"{word}\"")));
                }
                self.terminal_prob(parent, word)
            }
        };
        Ok(prob.ln())
    }

    /// Normalized Shannon entropy of each expansion row, in `[0, 1]`.
    ///
    /// Entropy is divided by `ln(C*C + V)` so rows of different widths are
    /// comparable; low values mean most mass sits on a few rules.
    pub fn sparsity_entropy(&self) -> SparsitySummary {
        let norm = (self.row_width() as f64).ln();
        let per_parent: Vec<f64> = self
            .rows
            .iter()
            .map(|row| {
                let h: f64 = row
                    .iter()
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * p.ln())
                    .sum();
                if norm > 0.0 {
                    (h / norm).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let mean = per_parent.iter().sum::<f64>() / per_parent.len() as f64;
        SparsitySummary { per_parent, mean }
    }

    /// Writes the text form:
    ///
    /// ```text
    /// C V beta
    /// parent -> left right : prob
    /// parent -> "token" : prob
    /// ROOT -> cat : prob
    /// ```
    ///
    /// Probabilities are printed with 17 significant digits, enough to
    /// reconstruct every `f64` bit-exactly. Zero-probability expansions are
    /// omitted.
    pub fn write_text<W: Write>(&self, vocab: &Vocabulary, out: &mut W) -> Result<(), GrammarError> {
        if vocab.len() != self.vocab {
            return Err(GrammarError::VocabSizeMismatch {
                vocab: vocab.len(),
                expected: self.vocab,
            });
        }
        writeln!(out, "{} {} {:.16e}", self.categories, self.vocab, self.beta)?;
        let c = self.categories;
        for (parent, row) in self.rows.iter().enumerate() {
            for left in 0..c {
                for right in 0..c {
                    let p = row[left * c + right];
                    if p > 0.0 {
                        writeln!(out, "{parent} -> {left} {right} : {p:.16e}")?;
                    }
                }
            }
            for word in 0..self.vocab {
                let p = row[c * c + word];
                if p > 0.0 {
                    writeln!(out, "{parent} -> \"{}\" : {p:.16e}", escape_quoted(vocab.token(word)))?;
                }
            }
        }
        for (cat, &p) in self.root.iter().enumerate() {
            if p > 0.0 {
                writeln!(out, "ROOT -> {cat} : {p:.16e}")?;
            }
        }
        Ok(())
    }

    /// Parses the text form back. Returns the grammar together with the token
    /// list in id order; every id below `V` must appear on some emission line.
    pub fn read_text<R: BufRead>(input: R) -> Result<(Grammar, Vec<String>), GrammarError> {
        let malformed = |line: usize, message: &str| GrammarError::Malformed {
            line,
            message: message.to_string(),
        };
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| malformed(1, "missing header"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(malformed(1, "header must be `C V beta`"));
        }
        let categories: usize =
            fields[0].parse().map_err(|_| malformed(1, "bad category count"))?;
        let vocab: usize = fields[1].parse().map_err(|_| malformed(1, "bad vocabulary size"))?;
        let beta: f64 = fields[2].parse().map_err(|_| malformed(1, "bad beta"))?;
        validate_dims(categories, vocab, beta)?;

        let width = categories * categories + vocab;
        let mut rows = vec![vec![0.0; width]; categories];
        let mut root = vec![0.0; categories];
        let mut tokens: Vec<String> = Vec::new();
        let mut token_ids: HashMap<String, usize> = HashMap::new();

        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rest) = line
                .split_once(" -> ")
                .ok_or_else(|| malformed(line_no, "expected `lhs -> rhs : prob`"))?;
            let (rhs, prob) = rest
                .rsplit_once(" : ")
                .ok_or_else(|| malformed(line_no, "expected `lhs -> rhs : prob`"))?;
            let prob: f64 = prob
                .trim()
                .parse()
                .map_err(|_| malformed(line_no, "bad probability"))?;
            if !prob.is_finite() || prob < 0.0 {
                return Err(malformed(line_no, "bad probability"));
            }
            let rhs = rhs.trim();
            if lhs.trim() == "ROOT" {
                let cat: usize =
                    rhs.parse().map_err(|_| malformed(line_no, "bad root category"))?;
                if cat >= categories {
                    return Err(malformed(line_no, "root category out of range"));
                }
                if root[cat] != 0.0 {
                    return Err(malformed(line_no, "duplicate root entry"));
                }
                root[cat] = prob;
                continue;
            }
            let parent: usize =
                lhs.trim().parse().map_err(|_| malformed(line_no, "bad parent category"))?;
            if parent >= categories {
                return Err(malformed(line_no, "parent category out of range"));
            }
            let slot = if let Some(quoted) = rhs.strip_prefix('"') {
                let token = unescape_quoted(quoted)
                    .ok_or_else(|| malformed(line_no, "unterminated token"))?;
                let next = tokens.len();
                let id = *token_ids.entry(token.clone()).or_insert_with(|| {
                    tokens.push(token);
                    next
                });
                if id >= vocab {
                    return Err(malformed(line_no, "more token types than the header allows"));
                }
                categories * categories + id
            } else {
                let (left, right) = rhs
                    .split_once(' ')
                    .ok_or_else(|| malformed(line_no, "binary expansion needs two categories"))?;
                let left: usize =
                    left.trim().parse().map_err(|_| malformed(line_no, "bad left category"))?;
                let right: usize =
                    right.trim().parse().map_err(|_| malformed(line_no, "bad right category"))?;
                if left >= categories || right >= categories {
                    return Err(malformed(line_no, "child category out of range"));
                }
                left * categories + right
            };
            if rows[parent][slot] != 0.0 {
                return Err(malformed(line_no, "duplicate rule"));
            }
            rows[parent][slot] = prob;
        }

        if tokens.len() != vocab {
            return Err(GrammarError::Malformed {
                line: 0,
                message: format!(
                    "grammar mentions {} token types but the header promises {vocab}",
                    tokens.len()
                ),
            });
        }
        let grammar = Grammar::from_parts(categories, vocab, beta, rows, root)?;
        Ok((grammar, tokens))
    }
}

fn escape_quoted(token: &str) -> String {
    token.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Reads the body of a quoted token up to the closing quote, undoing escapes.
/// Returns `None` when the quote never closes or trailing garbage follows.
fn unescape_quoted(body: &str) -> Option<String> {
    let mut out = String::new();
    let mut chars = body.chars();
    loop {
        match chars.next()? {
            '\\' => out.push(chars.next()?),
            '"' => break,
            c => out.push(c),
        }
    }
    chars.as_str().trim().is_empty().then_some(out)
}

fn validate_dims(categories: usize, vocab: usize, beta: f64) -> Result<(), GrammarError> {
    if categories == 0 || vocab == 0 || !beta.is_finite() || beta <= 0.0 {
        return Err(GrammarError::InvalidParameters { categories, vocab, beta });
    }
    Ok(())
}

fn check_row(row: &[f64], parent: &str) -> Result<(), GrammarError> {
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(GrammarError::BadProbability { parent: parent.to_string() });
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(GrammarError::NotNormalized { parent: parent.to_string(), sum });
    }
    Ok(())
}

/// Normalized row entropies from [`Grammar::sparsity_entropy`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparsitySummary {
    pub per_parent: Vec<f64>,
    pub mean: f64,
}

/// Log of a `Gamma(shape, 1)` draw, safe for arbitrarily small shapes.
///
/// For `shape < 1` the draw is built as `Gamma(shape + 1) * U^(1/shape)`,
/// taken in log space so that shapes like `1e-3` — where the linear value
/// underflows to zero almost surely — still give finite, correctly
/// distributed logs.
fn log_gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0 && shape.is_finite());
    if shape < 1.0 {
        let boosted = Gamma::new(shape + 1.0, 1.0).expect("valid gamma shape");
        let x: f64 = boosted.sample(rng);
        // 1 - U keeps the draw in (0, 1], so the log is finite.
        let u: f64 = 1.0 - rng.random::<f64>();
        x.ln() + u.ln() / shape
    } else {
        let gamma = Gamma::new(shape, 1.0).expect("valid gamma shape");
        let x: f64 = gamma.sample(rng);
        x.ln()
    }
}

/// Draws one Dirichlet row from per-cell shapes, normalizing in log space.
/// Cells that would underflow to zero are clamped to the smallest positive
/// `f64` before normalization, so every expansion keeps nonzero mass.
fn sample_simplex<I, R>(shapes: I, rng: &mut R) -> Vec<f64>
where
    I: Iterator<Item = f64>,
    R: Rng + ?Sized,
{
    let mut logs: Vec<f64> = shapes.map(|a| log_gamma_draw(a, rng)).collect();
    debug_assert!(!logs.is_empty());
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for v in &mut logs {
        *v = (*v - max).exp();
        if *v == 0.0 {
            *v = f64::MIN_POSITIVE;
        }
    }
    let total: f64 = logs.iter().sum();
    for v in &mut logs {
        *v /= total;
    }
    logs
}

/// Draws a grammar from the symmetric `Dirichlet(beta)` prior.
///
/// Each parent row and the root row get their own generator forked from
/// `rng`, so the result is identical for identical `rng` states no matter
/// how the row draws are scheduled across threads.
pub fn sample_prior<R: Rng + ?Sized>(
    categories: usize,
    vocab: usize,
    beta: f64,
    rng: &mut R,
) -> Result<Grammar, GrammarError> {
    validate_dims(categories, vocab, beta)?;
    let width = categories * categories + vocab;
    let mut row_rngs: Vec<ChaCha8Rng> = (0..categories)
        .map(|_| ChaCha8Rng::from_seed(rng.random()))
        .collect();
    let mut root_rng = ChaCha8Rng::from_seed(rng.random());
    let rows: Vec<Vec<f64>> = row_rngs
        .par_iter_mut()
        .map(|row_rng| sample_simplex((0..width).map(|_| beta), row_rng))
        .collect();
    let root = sample_simplex((0..categories).map(|_| beta), &mut root_rng);
    Ok(Grammar { categories, vocab, beta, rows, root })
}

/// Draws a grammar from the Dirichlet posterior given observed rule counts:
/// cell shape `beta + count`. With all-zero counts this is exactly the prior.
pub fn resample_posterior<R: Rng + ?Sized>(
    counts: &RuleCounts,
    beta: f64,
    rng: &mut R,
) -> Result<Grammar, GrammarError> {
    validate_dims(counts.categories, counts.vocab, beta)?;
    let mut row_rngs: Vec<ChaCha8Rng> = (0..counts.categories)
        .map(|_| ChaCha8Rng::from_seed(rng.random()))
        .collect();
    let mut root_rng = ChaCha8Rng::from_seed(rng.random());
    let rows: Vec<Vec<f64>> = row_rngs
        .par_iter_mut()
        .zip(&counts.rows)
        .map(|(row_rng, row)| {
            sample_simplex(row.iter().map(|&n| beta + n as f64), row_rng)
        })
        .collect();
    let root = sample_simplex(counts.root.iter().map(|&n| beta + n as f64), &mut root_rng);
    Ok(Grammar {
        categories: counts.categories,
        vocab: counts.vocab,
        beta,
        rows,
        root,
    })
}

/// Integer sufficient statistics for the posterior: how often each expansion
/// and each root category was used in a tree collection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleCounts {
    categories: usize,
    vocab: usize,
    rows: Vec<Vec<u64>>,
    root: Vec<u64>,
}

impl RuleCounts {
    pub fn new(categories: usize, vocab: usize) -> RuleCounts {
        let width = categories * categories + vocab;
        RuleCounts {
            categories,
            vocab,
            rows: vec![vec![0; width]; categories],
            root: vec![0; categories],
        }
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn row(&self, parent: usize) -> &[u64] {
        &self.rows[parent]
    }

    pub fn root_counts(&self) -> &[u64] {
        &self.root
    }

    /// Adds one tree's root choice and expansions. Category and word indices
    /// must lie inside this table's dimensions.
    pub fn observe(&mut self, tree: &BinaryTree) {
        self.root[tree.cat()] += 1;
        self.observe_node(tree);
    }

    fn observe_node(&mut self, tree: &BinaryTree) {
        match tree {
            BinaryTree::Preterminal { cat, word } => {
                self.rows[*cat][self.categories * self.categories + *word] += 1;
            }
            BinaryTree::Branch { cat, left, right } => {
                self.rows[*cat][left.cat() * self.categories + right.cat()] += 1;
                self.observe_node(left);
                self.observe_node(right);
            }
        }
    }

    /// Elementwise sum; panics if the dimensions differ.
    pub fn merge(&mut self, other: &RuleCounts) {
        assert_eq!(self.categories, other.categories, "category count mismatch");
        assert_eq!(self.vocab, other.vocab, "vocabulary size mismatch");
        for (mine, theirs) in self.rows.iter_mut().zip(&other.rows) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        for (m, t) in self.root.iter_mut().zip(&other.root) {
            *m += t;
        }
    }

    /// Total expansions recorded (excluding root choices).
    pub fn total(&self) -> u64 {
        self.rows.iter().flatten().sum()
    }
}

/// Counts the rules of rendered binary trees, validating labels against the
/// category and vocabulary ranges.
pub fn tree_rule_counts(
    trees: &[Tree],
    vocab: &Vocabulary,
    categories: usize,
) -> Result<RuleCounts, GrammarError> {
    let mut counts = RuleCounts::new(categories, vocab.len());
    for tree in trees {
        let binary = BinaryTree::from_tree(tree, vocab, categories)?;
        counts.observe(&binary);
    }
    Ok(counts)
}
