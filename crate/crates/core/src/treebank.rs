//! Bracketed constituency trees, tokenized corpora, and the normalizations
//! applied to trees before evaluation.
//!
//! Reference trees arrive in one-line bracketed form (`(S (NP (D a) (N dog))
//! (VP (V ran)))`). Induced trees use the same syntax with integer category
//! labels. Evaluation compares the two only after unary chains are collapsed
//! and punctuation is removed, so those normalizations live here next to the
//! tree type itself.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Half-open token span `[start, end)`.
pub type Span = (usize, usize);

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("line {0}: unbalanced parentheses")]
    Unbalanced(usize),
    #[error("line {0}: node with no children")]
    EmptyNode(usize),
    #[error("line {0}: expected a label after '('")]
    MissingLabel(usize),
    #[error("line {0}: trailing content after the tree")]
    TrailingContent(usize),
    #[error("line {0}: expected a bracketed tree")]
    ExpectedTree(usize),
    #[error("corpus contains no sentences")]
    EmptyCorpus,
    #[error("sentence {0} is empty")]
    EmptySentence(usize),
    #[error("corpus has {sentences} sentences but {trees} reference trees")]
    GoldCountMismatch { sentences: usize, trees: usize },
    #[error("sentence {0}: reference tree yield does not match the tokens")]
    GoldYieldMismatch(usize),
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("label {label:?} is not a category index below {categories}")]
    BadCategoryLabel { label: String, categories: usize },
    #[error("node {0:?} is neither a binary branch nor a preterminal")]
    NotBinary(String),
}

/// An ordered tree over string labels. Internal nodes may have any positive
/// number of children; leaves carry surface tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tree {
    Leaf(String),
    Node { label: String, children: Vec<Tree> },
}

impl Tree {
    pub fn leaf(token: impl Into<String>) -> Tree {
        Tree::Leaf(token.into())
    }

    /// Builds an internal node. Panics if `children` is empty, which no
    /// well-formed tree allows.
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        assert!(!children.is_empty(), "internal node needs at least one child");
        Tree::Node { label: label.into(), children }
    }

    /// The node label, or the token itself for a leaf.
    pub fn label(&self) -> &str {
        match self {
            Tree::Leaf(token) => token,
            Tree::Node { label, .. } => label,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf(_) => &[],
            Tree::Node { children, .. } => children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    /// An internal node whose single child is a leaf.
    pub fn is_preterminal(&self) -> bool {
        match self {
            Tree::Leaf(_) => false,
            Tree::Node { children, .. } => children.len() == 1 && children[0].is_leaf(),
        }
    }

    /// The terminal yield, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Tree::Leaf(token) => out.push(token),
            Tree::Node { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }

    pub fn yield_len(&self) -> usize {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { children, .. } => children.iter().map(Tree::yield_len).sum(),
        }
    }
}

fn escape_token(token: &str) -> Cow<'_, str> {
    if token.contains('(') || token.contains(')') {
        Cow::Owned(token.replace('(', "-LRB-").replace(')', "-RRB-"))
    } else {
        Cow::Borrowed(token)
    }
}

fn unescape_token(atom: &str) -> String {
    match atom {
        "-LRB-" => "(".to_string(),
        "-RRB-" => ")".to_string(),
        other => other.to_string(),
    }
}

/// Drops function tags and coindexation from a reference label: everything
/// from the first `-` or `=` on is removed (`NP-SBJ` becomes `NP`,
/// `S=2` becomes `S`). Labels that begin with `-` (`-LRB-`, `-NONE-`) are
/// punctuation-like tags in their own right and pass through unchanged.
fn normalize_label(raw: &str) -> String {
    if raw.starts_with('-') {
        return raw.to_string();
    }
    match raw.find(['-', '=']) {
        Some(split) => raw[..split].to_string(),
        None => raw.to_string(),
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(token) => f.write_str(&escape_token(token)),
            Tree::Node { label, children } => {
                write!(f, "({label}")?;
                for child in children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Renders a tree in one-line bracketed form; inverse of parsing up to label
/// normalization.
pub fn serialize(tree: &Tree) -> String {
    tree.to_string()
}

enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => {
                out.push(Token::Open);
                i += 1;
            }
            b')' => {
                out.push(Token::Close);
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                {
                    i += 1;
                }
                out.push(Token::Atom(&line[start..i]));
            }
        }
    }
    out
}

fn parse_line(line: &str, line_no: usize) -> Result<Tree, TreebankError> {
    let mut stack: Vec<(String, Vec<Tree>)> = Vec::new();
    let mut finished: Option<Tree> = None;
    let mut tokens = tokenize(line).into_iter();
    while let Some(token) = tokens.next() {
        if finished.is_some() {
            // A stray close paren is an imbalance; anything else is junk
            // after a complete tree.
            return Err(match token {
                Token::Close => TreebankError::Unbalanced(line_no),
                _ => TreebankError::TrailingContent(line_no),
            });
        }
        match token {
            Token::Open => match tokens.next() {
                Some(Token::Atom(atom)) => stack.push((normalize_label(atom), Vec::new())),
                _ => return Err(TreebankError::MissingLabel(line_no)),
            },
            Token::Close => {
                let (label, children) =
                    stack.pop().ok_or(TreebankError::Unbalanced(line_no))?;
                if children.is_empty() {
                    return Err(TreebankError::EmptyNode(line_no));
                }
                let node = Tree::Node { label, children };
                match stack.last_mut() {
                    Some((_, siblings)) => siblings.push(node),
                    None => finished = Some(node),
                }
            }
            Token::Atom(atom) => {
                let leaf = Tree::Leaf(unescape_token(atom));
                match stack.last_mut() {
                    Some((_, siblings)) => siblings.push(leaf),
                    None => return Err(TreebankError::ExpectedTree(line_no)),
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(TreebankError::Unbalanced(line_no));
    }
    finished.ok_or(TreebankError::ExpectedTree(line_no))
}

/// Parses one bracketed tree per non-blank line. Line numbers in errors are
/// 1-based.
pub fn parse_bracketed(text: &str) -> Result<Vec<Tree>, TreebankError> {
    let mut trees = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        trees.push(parse_line(line, idx + 1)?);
    }
    Ok(trees)
}

/// Collapses unary chains of internal nodes, keeping the topmost label of
/// each chain. Preterminals over a single token are left alone, so
/// `(S (VP (V run)))` becomes `(S run)`.
pub fn collapse_unaries(tree: &Tree) -> Tree {
    match tree {
        Tree::Leaf(token) => Tree::Leaf(token.clone()),
        Tree::Node { label, children } => {
            let mut current = children;
            while current.len() == 1 {
                if let Tree::Node { children: below, .. } = &current[0] {
                    current = below;
                } else {
                    break;
                }
            }
            Tree::Node {
                label: label.clone(),
                children: current.iter().map(collapse_unaries).collect(),
            }
        }
    }
}

/// How tokens are recognized as punctuation when trees are normalized for
/// evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PunctPolicy {
    /// A token is punctuation when every character is: ASCII punctuation for
    /// ASCII characters, else anything that is not alphanumeric, whitespace,
    /// or control.
    Chars,
    /// A token is punctuation when its preterminal label is in the set.
    Tags(BTreeSet<String>),
    /// Keep everything.
    None,
}

impl PunctPolicy {
    pub fn tags<I, S>(tags: I) -> PunctPolicy
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PunctPolicy::Tags(tags.into_iter().map(Into::into).collect())
    }

    fn is_punct(&self, token: &str, preterminal: Option<&str>) -> bool {
        match self {
            PunctPolicy::Chars => is_punct_token(token),
            PunctPolicy::Tags(tags) => preterminal.is_some_and(|tag| tags.contains(tag)),
            PunctPolicy::None => false,
        }
    }
}

impl fmt::Display for PunctPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PunctPolicy::Chars => f.write_str("chars"),
            PunctPolicy::Tags(tags) => write!(f, "tags({})", tags.len()),
            PunctPolicy::None => f.write_str("none"),
        }
    }
}

/// Character-class punctuation test used by [`PunctPolicy::Chars`].
pub fn is_punct_token(token: &str) -> bool {
    !token.is_empty()
        && token.chars().all(|c| {
            if c.is_ascii() {
                c.is_ascii_punctuation()
            } else {
                !c.is_alphanumeric() && !c.is_whitespace() && !c.is_control()
            }
        })
}

/// Yield positions whose token counts as punctuation under `policy`.
/// Tag-based policies look at the position's immediate parent label.
pub fn punct_positions(tree: &Tree, policy: &PunctPolicy) -> BTreeSet<usize> {
    fn walk(
        tree: &Tree,
        parent: Option<&str>,
        pos: &mut usize,
        policy: &PunctPolicy,
        out: &mut BTreeSet<usize>,
    ) {
        match tree {
            Tree::Leaf(token) => {
                if policy.is_punct(token, parent) {
                    out.insert(*pos);
                }
                *pos += 1;
            }
            Tree::Node { label, children } => {
                for child in children {
                    walk(child, Some(label), pos, policy, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(tree, None, &mut 0, policy, &mut out);
    out
}

/// Removes the leaves at the given yield positions, pruning any internal node
/// left without children. Returns `None` when nothing survives.
pub fn remove_leaves(tree: &Tree, remove: &BTreeSet<usize>) -> Option<Tree> {
    fn walk(tree: &Tree, pos: &mut usize, remove: &BTreeSet<usize>) -> Option<Tree> {
        match tree {
            Tree::Leaf(token) => {
                let keep = !remove.contains(pos);
                *pos += 1;
                keep.then(|| Tree::Leaf(token.clone()))
            }
            Tree::Node { label, children } => {
                let kept: Vec<Tree> =
                    children.iter().filter_map(|c| walk(c, pos, remove)).collect();
                (!kept.is_empty()).then(|| Tree::Node { label: label.clone(), children: kept })
            }
        }
    }
    walk(tree, &mut 0, remove)
}

/// Removes punctuation leaves under `policy` and collapses any unary chains
/// the removal exposes. Returns `None` when the whole yield was punctuation.
pub fn strip_punctuation(tree: &Tree, policy: &PunctPolicy) -> Option<Tree> {
    let remove = punct_positions(tree, policy);
    remove_leaves(tree, &remove).map(|t| collapse_unaries(&t))
}

/// Labeled spans of every internal node covering at least two tokens, root
/// included. Spans are half-open over yield positions; duplicates are kept,
/// so the result is a multiset.
pub fn gold_constituents(tree: &Tree) -> Vec<(Span, String)> {
    fn walk(tree: &Tree, start: usize, out: &mut Vec<(Span, String)>) -> usize {
        match tree {
            Tree::Leaf(_) => 1,
            Tree::Node { label, children } => {
                let mut pos = start;
                for child in children {
                    pos += walk(child, pos, out);
                }
                if pos - start >= 2 {
                    out.push(((start, pos), label.clone()));
                }
                pos - start
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, &mut out);
    out
}

/// Placeholder that stands for "any terminal" in rule signatures.
pub const TERMINAL_MARKER: &str = "<terminal>";

/// Summary statistics over the distinct labels and expansion rules of a
/// treebank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub sentences: usize,
    pub unique_categories: usize,
    pub unique_rules: usize,
    /// Rule signature (`"NP -> D N"`, `"N -> <terminal>"`) to occurrence
    /// count, ordered for stable output.
    pub rule_histogram: BTreeMap<String, usize>,
}

/// Counts categories and expansion rules across reference trees. Terminals
/// are collapsed to a single [`TERMINAL_MARKER`] symbol so that preterminal
/// rows are counted per tag, not per word.
pub fn corpus_stats(trees: &[Tree]) -> Result<CorpusStats, TreebankError> {
    if trees.is_empty() {
        return Err(TreebankError::EmptyCorpus);
    }
    let mut categories = BTreeSet::new();
    let mut histogram = BTreeMap::new();
    fn walk(
        tree: &Tree,
        categories: &mut BTreeSet<String>,
        histogram: &mut BTreeMap<String, usize>,
    ) {
        if let Tree::Node { label, children } = tree {
            categories.insert(label.clone());
            let mut signature = String::from(label.as_str());
            signature.push_str(" ->");
            for child in children {
                signature.push(' ');
                signature.push_str(match child {
                    Tree::Leaf(_) => TERMINAL_MARKER,
                    Tree::Node { label, .. } => label,
                });
            }
            *histogram.entry(signature).or_insert(0) += 1;
            for child in children {
                walk(child, categories, histogram);
            }
        }
    }
    for tree in trees {
        walk(tree, &mut categories, &mut histogram);
    }
    Ok(CorpusStats {
        sentences: trees.len(),
        unique_categories: categories.len(),
        unique_rules: histogram.len(),
        rule_histogram: histogram,
    })
}

/// Token-type table mapping surface forms to dense ids `0..len` in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_sentences<'a, I, S>(sentences: I) -> Vocabulary
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = &'a str>,
    {
        let mut vocab = Vocabulary { tokens: Vec::new(), index: HashMap::new() };
        for sentence in sentences {
            for token in sentence {
                vocab.intern(token);
            }
        }
        vocab
    }

    fn intern(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Panics if `id` is out of range.
    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A tokenized corpus with its vocabulary and, optionally, one reference tree
/// per sentence.
#[derive(Debug, Clone)]
pub struct Corpus {
    sentences: Vec<Vec<usize>>,
    vocab: Vocabulary,
    gold: Option<Vec<Tree>>,
}

impl Corpus {
    /// Builds a corpus from whitespace-tokenized sentences. Every sentence
    /// must be non-empty and there must be at least one.
    pub fn from_tokens(sentences: &[Vec<String>]) -> Result<Corpus, TreebankError> {
        if sentences.is_empty() {
            return Err(TreebankError::EmptyCorpus);
        }
        for (idx, sentence) in sentences.iter().enumerate() {
            if sentence.is_empty() {
                return Err(TreebankError::EmptySentence(idx));
            }
        }
        let vocab = Vocabulary::from_sentences(
            sentences.iter().map(|s| s.iter().map(String::as_str)),
        );
        let ids = sentences
            .iter()
            .map(|s| s.iter().map(|t| vocab.id(t).unwrap()).collect())
            .collect();
        Ok(Corpus { sentences: ids, vocab, gold: None })
    }

    /// Reads one sentence per non-blank line, splitting on whitespace.
    pub fn from_raw_text(text: &str) -> Result<Corpus, TreebankError> {
        let sentences: Vec<Vec<String>> = text
            .lines()
            .filter(|line| !line.trim().is_empty())
            .map(|line| line.split_whitespace().map(str::to_string).collect())
            .collect();
        Self::from_tokens(&sentences)
    }

    /// Attaches reference trees, checking that each tree's yield matches the
    /// corresponding sentence exactly.
    pub fn with_gold(mut self, gold: Vec<Tree>) -> Result<Corpus, TreebankError> {
        if gold.len() != self.sentences.len() {
            return Err(TreebankError::GoldCountMismatch {
                sentences: self.sentences.len(),
                trees: gold.len(),
            });
        }
        for (idx, (tree, sentence)) in gold.iter().zip(&self.sentences).enumerate() {
            let leaves = tree.leaves();
            if leaves.len() != sentence.len()
                || leaves
                    .iter()
                    .zip(sentence)
                    .any(|(leaf, &id)| *leaf != self.vocab.token(id))
            {
                return Err(TreebankError::GoldYieldMismatch(idx));
            }
        }
        self.gold = Some(gold);
        Ok(self)
    }

    pub fn sentences(&self) -> &[Vec<usize>] {
        &self.sentences
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn gold(&self) -> Option<&[Tree]> {
        self.gold.as_deref()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// A strictly binary tree over integer categories and token ids — the form
/// the sampler and parsers work with internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinaryTree {
    Branch { cat: usize, left: Box<BinaryTree>, right: Box<BinaryTree> },
    Preterminal { cat: usize, word: usize },
}

impl BinaryTree {
    pub fn cat(&self) -> usize {
        match self {
            BinaryTree::Branch { cat, .. } | BinaryTree::Preterminal { cat, .. } => *cat,
        }
    }

    pub fn yield_len(&self) -> usize {
        match self {
            BinaryTree::Preterminal { .. } => 1,
            BinaryTree::Branch { left, right, .. } => left.yield_len() + right.yield_len(),
        }
    }

    /// Renders the tree with stringified category labels and surface tokens,
    /// e.g. `(3 (0 the) (7 dog))`.
    pub fn to_tree(&self, vocab: &Vocabulary) -> Tree {
        match self {
            BinaryTree::Preterminal { cat, word } => Tree::Node {
                label: cat.to_string(),
                children: vec![Tree::Leaf(vocab.token(*word).to_string())],
            },
            BinaryTree::Branch { cat, left, right } => Tree::Node {
                label: cat.to_string(),
                children: vec![left.to_tree(vocab), right.to_tree(vocab)],
            },
        }
    }

    /// Parses a rendered binary tree back from its [`Tree`] form. Labels must
    /// be category indices below `categories` and every node must be a binary
    /// branch or a preterminal.
    pub fn from_tree(
        tree: &Tree,
        vocab: &Vocabulary,
        categories: usize,
    ) -> Result<BinaryTree, TreebankError> {
        let Tree::Node { label, children } = tree else {
            return Err(TreebankError::NotBinary(tree.label().to_string()));
        };
        let cat = label
            .parse::<usize>()
            .ok()
            .filter(|&c| c < categories)
            .ok_or_else(|| TreebankError::BadCategoryLabel {
                label: label.clone(),
                categories,
            })?;
        match children.as_slice() {
            [Tree::Leaf(token)] => {
                let word = vocab
                    .id(token)
                    .ok_or_else(|| TreebankError::UnknownToken(token.clone()))?;
                Ok(BinaryTree::Preterminal { cat, word })
            }
            [left @ Tree::Node { .. }, right @ Tree::Node { .. }] => Ok(BinaryTree::Branch {
                cat,
                left: Box::new(Self::from_tree(left, vocab, categories)?),
                right: Box::new(Self::from_tree(right, vocab, categories)?),
            }),
            _ => Err(TreebankError::NotBinary(label.clone())),
        }
    }
}
