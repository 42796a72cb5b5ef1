//! Satisfaction forests: one labelled tree per existential conjunct of a
//! normal form, recording universal branching over a domain and the
//! witnesses chosen for existential quantifiers.

mod build;
mod extract;
mod format;
mod verify;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::semantics::{CompatError, EvalError, PreStructure};

pub use build::build_model;
pub use extract::extract_forest;
pub use format::{parse_forest, render_forest};
pub use verify::{verify_forest, Condition, ConditionOutcome, Failure, ForestReport, Locator};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ForestError {
    #[error("no witness for conjunct {conjunct} after labels {labels:?}")]
    NoWitness { conjunct: usize, labels: Vec<usize> },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("forest does not verify:\n{0}")]
    Invalid(Box<ForestReport>),
    #[error("completion failed for elements {elements:?}: {source}")]
    Completion {
        elements: Vec<usize>,
        source: CompatError,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Universal,
    Existential,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// Distance from the root, starting at 1.
    pub level: usize,
    pub label: usize,
    pub children: Vec<usize>,
    /// Branch label; present on leaves only.
    pub pre: Option<PreStructure>,
}

/// A tree whose root carries the empty label; `roots` are the root's
/// children, and node ids index `nodes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatisfactionTree {
    /// Index of the existential conjunct, 0-based.
    pub conjunct: usize,
    pub nodes: Vec<Node>,
    pub roots: Vec<usize>,
}

impl SatisfactionTree {
    pub fn new(conjunct: usize) -> Self {
        SatisfactionTree {
            conjunct,
            nodes: Vec::new(),
            roots: Vec::new(),
        }
    }

    /// Adds a node under `parent` (`None` for the root) and returns its id.
    pub fn push(&mut self, parent: Option<usize>, kind: NodeKind, label: usize) -> usize {
        let level = parent.map_or(1, |p| self.nodes[p].level + 1);
        let id = self.nodes.len();
        self.nodes.push(Node {
            kind,
            level,
            label,
            children: Vec::new(),
            pre: None,
        });
        match parent {
            Some(p) => self.nodes[p].children.push(id),
            None => self.roots.push(id),
        }
        id
    }

    /// Every root-child-to-leaf node path, in depth-first order.
    pub fn branches(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        for &r in &self.roots {
            self.collect(r, &mut path, &mut out);
        }
        out
    }

    fn collect(&self, n: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        path.push(n);
        if self.nodes[n].children.is_empty() {
            out.push(path.clone());
        }
        for &c in &self.nodes[n].children {
            self.collect(c, path, out);
        }
        path.pop();
    }

    pub fn seq(&self, branch: &[usize]) -> Vec<usize> {
        branch.iter().map(|&n| self.nodes[n].label).collect()
    }

    pub fn set(&self, branch: &[usize]) -> BTreeSet<usize> {
        branch.iter().map(|&n| self.nodes[n].label).collect()
    }

    /// Labels of the branch without its leaf.
    pub fn set_minus(&self, branch: &[usize]) -> BTreeSet<usize> {
        let inner = &branch[..branch.len().saturating_sub(1)];
        inner.iter().map(|&n| self.nodes[n].label).collect()
    }

    /// The pre-structure labelling the branch, stored on its leaf.
    pub fn branch_label(&self, branch: &[usize]) -> Option<&PreStructure> {
        branch.last().and_then(|&n| self.nodes[n].pre.as_ref())
    }
}

/// Trees aligned with the existential conjuncts of a normal form, all over
/// the domain `0..domain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatisfactionForest {
    pub domain: usize,
    pub trees: Vec<SatisfactionTree>,
}

impl SatisfactionForest {
    /// `(tree index, branch)` pairs, trees in order and branches depth-first.
    pub fn branches(&self) -> Vec<(usize, Vec<usize>)> {
        self.trees
            .iter()
            .enumerate()
            .flat_map(|(t, tree)| tree.branches().into_iter().map(move |b| (t, b)))
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(|t| t.nodes.len()).sum()
    }
}
