use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::{Masses, Node, Tree};

const TIE_EPS: f64 = 1e-12;

/// Weighted class mass reaching every node when `ds` is routed through `tree`.
pub fn node_masses(tree: &Tree, ds: &Dataset, weights: &[f64]) -> Result<Vec<Masses>> {
    if ds.n_features() != tree.n_features() {
        return Err(Error::Arity {
            expected: tree.n_features(),
            got: ds.n_features(),
        });
    }
    if weights.len() != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            got: weights.len(),
        });
    }
    let nodes = tree.nodes();
    let mut masses = vec![[0.0, 0.0]; nodes.len()];
    for (i, row) in ds.rows().enumerate() {
        let class = ds.label(i).index();
        let w = weights[i];
        let mut at = 0;
        loop {
            masses[at][class] += w;
            match nodes[at] {
                Node::Leaf { .. } => break,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }
    Ok(masses)
}

/// Normalized loss of each node treated as a leaf. Losses are divided by the
/// root mass and by the largest absolute cost, so they lie on the unit-error
/// scale used by `cp`.
fn node_risks(tree: &Tree, masses: &[Masses]) -> Vec<f64> {
    let criterion = tree.config().criterion;
    let root = masses[0][0] + masses[0][1];
    let denom = if root > 0.0 { root * criterion.loss_scale() } else { 1.0 };
    masses.iter().map(|&m| criterion.leaf_loss(m) / denom).collect()
}

/// `sum over leaves of normalized error + cp * n_leaves`, with errors
/// measured on `ds`.
pub fn pruning_objective(tree: &Tree, cp: f64, ds: &Dataset, weights: &[f64]) -> Result<f64> {
    let masses = node_masses(tree, ds, weights)?;
    let risks = node_risks(tree, &masses);
    Ok(tree
        .nodes()
        .iter()
        .zip(&risks)
        .filter(|(n, _)| matches!(n, Node::Leaf { .. }))
        .map(|(_, r)| r + cp)
        .sum())
}

/// Cost-complexity pruning: returns the subtree obtained by collapsing
/// internal nodes that minimizes `error + cp * n_leaves` on `(ds, weights)`,
/// preferring fewer leaves on ties.
///
/// Solved exactly by a bottom-up pass: a node collapses whenever its own
/// leaf objective is no worse than the best objective of its subtrees.
pub fn prune(tree: &Tree, cp: f64, ds: &Dataset, weights: &[f64]) -> Result<Tree> {
    if !(cp >= 0.0 && cp.is_finite()) {
        return Err(Error::Config(format!("cp must be non-negative, got {cp}")));
    }
    let masses = node_masses(tree, ds, weights)?;
    let risks = node_risks(tree, &masses);
    let nodes = tree.nodes();
    let n = nodes.len();
    let mut best = vec![0.0; n];
    let mut collapse = vec![false; n];
    // Children always follow their parent in the preorder arena.
    for v in (0..n).rev() {
        let as_leaf = risks[v] + cp;
        best[v] = match nodes[v] {
            Node::Leaf { .. } => as_leaf,
            Node::Internal { left, right, .. } => {
                let subtree = best[left] + best[right];
                if as_leaf <= subtree + TIE_EPS {
                    collapse[v] = true;
                    as_leaf
                } else {
                    subtree
                }
            }
        };
    }

    let criterion = tree.config().criterion;
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(0, None)];
    while let Some((v, parent)) = stack.pop() {
        let at = out.len();
        if let Some((pi, is_left)) = parent {
            if let Node::Internal { left, right, .. } = &mut out[pi] {
                if is_left {
                    *left = at;
                } else {
                    *right = at;
                }
            }
        }
        match nodes[v] {
            Node::Internal { .. } if collapse[v] => out.push(Node::Leaf {
                mass: masses[v],
                label: criterion.leaf_label(masses[v]),
            }),
            Node::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push(Node::Internal {
                    feature,
                    threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                });
                stack.push((right, Some((at, false))));
                stack.push((left, Some((at, true))));
            }
            Node::Leaf { .. } => out.push(nodes[v].clone()),
        }
    }
    let config = super::GrowConfig { cp, ..*tree.config() };
    Ok(Tree::from_nodes(out, tree.n_features(), config))
}
