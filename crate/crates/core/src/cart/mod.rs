//! Binary CART trees.
//!
//! Trees are grown greedily with either weighted Gini impurity or expected
//! misclassification cost as the split criterion, then optionally pruned to
//! the subtree minimizing `error + cp * n_leaves`. An instance goes to the
//! left child when its encoded value is `<= threshold`.

mod grow;
mod prune;
mod text;

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};
use crate::metrics::CostMatrix;

pub use grow::{best_split, grow, grow_cost_sensitive, grow_sample, weighted_gini, Presorted, Split};
pub use prune::{node_masses, prune, pruning_objective};

/// Split-selection criterion and leaf-labelling rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Weighted Gini; leaves predict the heavier class.
    Gini,
    /// Expected misclassification cost; leaves predict the cheaper label.
    Cost(CostMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowConfig {
    /// Minimum number of instances (not weight) in each child of a split.
    pub min_leaf: usize,
    pub cp: f64,
    pub criterion: Criterion,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            min_leaf: 1,
            cp: 0.0,
            criterion: Criterion::Gini,
        }
    }
}

impl GrowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if !(self.cp >= 0.0 && self.cp.is_finite()) {
            return Err(Error::Config(format!("cp must be non-negative, got {}", self.cp)));
        }
        Ok(())
    }
}

/// Class masses indexed by [`ClassLabel::index`]: `[positive, negative]`.
pub type Masses = [f64; 2];

impl Criterion {
    /// Label a leaf holding `mass` would predict. Exact ties go Negative.
    pub fn leaf_label(&self, mass: Masses) -> ClassLabel {
        let [pos, neg] = mass;
        match self {
            Criterion::Gini => {
                if pos > neg {
                    ClassLabel::Positive
                } else {
                    ClassLabel::Negative
                }
            }
            Criterion::Cost(c) => {
                let (as_pos, as_neg) = label_costs(c, mass);
                if as_pos < as_neg {
                    ClassLabel::Positive
                } else {
                    ClassLabel::Negative
                }
            }
        }
    }

    /// Loss of a leaf with this mass: misclassified mass under Gini, expected
    /// cost under a cost matrix.
    pub fn leaf_loss(&self, mass: Masses) -> f64 {
        let label = self.leaf_label(mass);
        match self {
            Criterion::Gini => mass[label.other().index()],
            Criterion::Cost(c) => {
                let (as_pos, as_neg) = label_costs(c, mass);
                if label.is_positive() {
                    as_pos
                } else {
                    as_neg
                }
            }
        }
    }

    /// Divisor that puts [`Criterion::leaf_loss`] on the unit-error scale.
    pub(crate) fn loss_scale(&self) -> f64 {
        match self {
            Criterion::Gini => 1.0,
            Criterion::Cost(c) => {
                let m = c.max_abs();
                if m > 0.0 {
                    m
                } else {
                    1.0
                }
            }
        }
    }
}

/// Total cost of labelling `mass` Positive and Negative respectively.
fn label_costs(c: &CostMatrix, [pos, neg]: Masses) -> (f64, f64) {
    (
        pos * c.true_pos + neg * c.false_pos,
        pos * c.false_neg + neg * c.true_neg,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        mass: Masses,
        label: ClassLabel,
    },
}

/// A fitted tree stored as a preorder arena; the root is node 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
    n_features: usize,
    config: GrowConfig,
}

impl Tree {
    pub(crate) fn from_nodes(nodes: Vec<Node>, n_features: usize, config: GrowConfig) -> Self {
        debug_assert!(!nodes.is_empty());
        Tree {
            nodes,
            n_features,
            config,
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn config(&self) -> &GrowConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Index of the leaf reached by `row`. The caller guarantees arity.
    pub(crate) fn leaf_index(&self, row: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn predict_row(&self, row: &[f64]) -> ClassLabel {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { label, .. } => label,
            Node::Internal { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<ClassLabel> {
        if row.len() != self.n_features {
            return Err(Error::Arity {
                expected: self.n_features,
                got: row.len(),
            });
        }
        Ok(self.predict_row(row))
    }

    pub fn to_text(&self) -> String {
        text::write_tree(self)
    }

    /// Parses the preorder text format. The format does not carry the grow
    /// configuration, so the caller supplies it with the feature count.
    pub fn from_text(text: &str, n_features: usize, config: GrowConfig) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let tree = text::read_tree(&mut lines, n_features, config)?;
        if let Some((line, _)) = lines.next() {
            return Err(Error::Format {
                line: line + 1,
                reason: "trailing content after tree".into(),
            });
        }
        Ok(tree)
    }

    pub(crate) fn read_from<'a, I>(lines: &mut I, n_features: usize, config: GrowConfig) -> Result<Self>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        text::read_tree(lines, n_features, config)
    }
}
