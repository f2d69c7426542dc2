//! Center-embedding depth of binary trees.
//!
//! Depth tracks how many disconnected pieces a left-corner parse of the tree
//! must hold in memory at once. The root starts at depth 1 on the left side;
//! descending to a left child costs one level exactly when the parent hangs
//! on a right branch (that is where a new island opens), while right children
//! inherit their parent's depth. Fully right-branching and fully
//! left-branching trees therefore stay at depth 1, and n nested
//! center-embeddings (the `a^n b^n` shape) reach depth n.
//!
//! The functions here work on rendered binary trees ([`Tree`] values whose
//! internal nodes all have exactly two internal children or a single leaf).

use serde::Serialize;
use thiserror::Error;

use crate::treebank::Tree;

#[derive(Debug, Error)]
pub enum DepthError {
    #[error("node {0:?} is neither a binary branch nor a preterminal")]
    NotBinary(String),
    #[error("depth bound must be at least 1 (got {0})")]
    InvalidBound(usize),
}

/// Which side of its parent a node hangs on. The root counts as left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Depth and side of one node, in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeDepth {
    pub label: String,
    pub depth: usize,
    pub side: Side,
    /// True for binary branches; preterminals carry their assigned depth but
    /// never contribute to the tree's depth.
    pub branching: bool,
}

/// Per-node depth assignment for a whole tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthAnnotation {
    pub nodes: Vec<NodeDepth>,
}

impl DepthAnnotation {
    /// Largest depth among branching nodes; 1 for a lone preterminal.
    pub fn max_depth(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.branching)
            .map(|n| n.depth)
            .max()
            .unwrap_or(1)
    }
}

fn annotate_node(
    tree: &Tree,
    depth: usize,
    side: Side,
    out: &mut Vec<NodeDepth>,
) -> Result<(), DepthError> {
    let Tree::Node { label, children } = tree else {
        return Err(DepthError::NotBinary(tree.label().to_string()));
    };
    match children.as_slice() {
        [Tree::Leaf(_)] => {
            out.push(NodeDepth { label: label.clone(), depth, side, branching: false });
            Ok(())
        }
        [left @ Tree::Node { .. }, right @ Tree::Node { .. }] => {
            out.push(NodeDepth { label: label.clone(), depth, side, branching: true });
            let left_depth = match side {
                Side::Right => depth + 1,
                Side::Left => depth,
            };
            annotate_node(left, left_depth, Side::Left, out)?;
            annotate_node(right, depth, Side::Right, out)
        }
        _ => Err(DepthError::NotBinary(label.clone())),
    }
}

/// Assigns every node its depth and side, in preorder.
pub fn annotate_depths(tree: &Tree) -> Result<DepthAnnotation, DepthError> {
    let mut nodes = Vec::new();
    annotate_node(tree, 1, Side::Left, &mut nodes)?;
    Ok(DepthAnnotation { nodes })
}

/// Maximum depth over branching nodes, or 1 when the tree is a single
/// preterminal.
pub fn tree_depth(tree: &Tree) -> Result<usize, DepthError> {
    Ok(annotate_depths(tree)?.max_depth())
}

/// Whether the tree's depth stays within `bound`. Bounds below 1 admit no
/// tree at all and are rejected.
pub fn check_bound(tree: &Tree, bound: usize) -> Result<bool, DepthError> {
    if bound == 0 {
        return Err(DepthError::InvalidBound(0));
    }
    Ok(tree_depth(tree)? <= bound)
}
