//! Line-oriented preorder tree format:
//! `I <feature> <threshold>` for internal nodes and
//! `L <mass_pos> <mass_neg> <Y|N>` for leaves.

use std::fmt::Write;

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

use super::{GrowConfig, Node, Tree};

pub(super) fn write_tree(tree: &Tree) -> String {
    let mut out = String::new();
    fn walk(nodes: &[Node], at: usize, out: &mut String) {
        match &nodes[at] {
            Node::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                let _ = writeln!(out, "I {feature} {threshold:?}");
                walk(nodes, *left, out);
                walk(nodes, *right, out);
            }
            Node::Leaf { mass, label } => {
                let _ = writeln!(out, "L {:?} {:?} {}", mass[0], mass[1], label.token());
            }
        }
    }
    walk(tree.nodes(), 0, &mut out);
    out
}

fn bad(line: usize, reason: impl Into<String>) -> Error {
    Error::Format {
        line: line + 1,
        reason: reason.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(line, format!("missing or invalid {what}")))
}

pub(super) fn read_tree<'a, I>(lines: &mut I, n_features: usize, config: GrowConfig) -> Result<Tree>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut nodes: Vec<Node> = Vec::new();
    // Internal nodes whose children are still pending: (index, children seen).
    let mut open: Vec<(usize, u8)> = Vec::new();
    loop {
        let (line, text) = lines.next().ok_or_else(|| bad(0, "unexpected end of tree"))?;
        let mut toks = text.split_whitespace();
        let at = nodes.len();
        if let Some((parent, seen)) = open.last_mut() {
            if let Node::Internal { left, right, .. } = &mut nodes[*parent] {
                if *seen == 0 {
                    *left = at;
                } else {
                    *right = at;
                }
            }
            *seen += 1;
        }
        let is_internal = match toks.next() {
            Some("I") => {
                let feature: usize = num(toks.next(), line, "feature")?;
                if feature >= n_features {
                    return Err(bad(line, format!("feature {feature} out of range")));
                }
                let threshold: f64 = num(toks.next(), line, "threshold")?;
                nodes.push(Node::Internal {
                    feature,
                    threshold,
                    left: usize::MAX,
                    right: usize::MAX,
                });
                true
            }
            Some("L") => {
                let pos: f64 = num(toks.next(), line, "positive mass")?;
                let neg: f64 = num(toks.next(), line, "negative mass")?;
                let label = toks
                    .next()
                    .and_then(ClassLabel::from_token)
                    .ok_or_else(|| bad(line, "missing or invalid label"))?;
                nodes.push(Node::Leaf { mass: [pos, neg], label });
                false
            }
            _ => return Err(bad(line, "expected `I` or `L`")),
        };
        if toks.next().is_some() {
            return Err(bad(line, "trailing tokens"));
        }
        if is_internal {
            open.push((at, 0));
        } else {
            while let Some(&(_, 2)) = open.last() {
                open.pop();
            }
            if open.is_empty() {
                return Ok(Tree::from_nodes(nodes, n_features, config));
            }
        }
    }
}
