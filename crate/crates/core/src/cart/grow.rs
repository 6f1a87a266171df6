use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::CostMatrix;

use super::{Criterion, GrowConfig, Masses, Node, Tree};

/// Relative tolerance under which two split scores count as tied.
const TIE_EPS: f64 = 1e-10;

fn strictly_below(candidate: f64, incumbent: f64) -> bool {
    candidate < incumbent - TIE_EPS * incumbent.abs().max(1.0)
}

/// `1 - sum_c (m_c / total)^2`.
pub fn weighted_gini(masses: &[f64]) -> Result<f64> {
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidValue("gini of a node with zero mass".into()));
    }
    Ok(gini2_or(masses.iter().map(|m| (m / total).powi(2)).sum::<f64>()))
}

fn gini2_or(sum_sq: f64) -> f64 {
    (1.0 - sum_sq).max(0.0)
}

fn binary_gini([pos, neg]: Masses) -> f64 {
    let total = pos + neg;
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let n = neg / total;
    gini2_or(p * p + n * n)
}

/// Per-unit-mass score of a node, the quantity splits try to lower.
fn node_score(criterion: &Criterion, mass: Masses) -> f64 {
    match criterion {
        Criterion::Gini => binary_gini(mass),
        Criterion::Cost(_) => {
            let total = mass[0] + mass[1];
            if total <= 0.0 {
                0.0
            } else {
                criterion.leaf_loss(mass) / total
            }
        }
    }
}

/// Mass-weighted score of a candidate split, on the same per-unit scale.
fn split_score(criterion: &Criterion, left: Masses, right: Masses) -> f64 {
    let ml = left[0] + left[1];
    let mr = right[0] + right[1];
    let total = ml + mr;
    match criterion {
        Criterion::Gini => (ml * binary_gini(left) + mr * binary_gini(right)) / total,
        Criterion::Cost(_) => (criterion.leaf_loss(left) + criterion.leaf_loss(right)) / total,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Mass-weighted child Gini (or per-unit expected cost under a cost criterion).
    pub score: f64,
}

/// Row indices sorted by value for every feature, ties by row index.
#[derive(Debug, Clone)]
pub struct Presorted {
    order: Vec<Vec<u32>>,
}

impl Presorted {
    pub fn new(ds: &Dataset) -> Self {
        let n = ds.len();
        let width = ds.n_features();
        let values = ds.values();
        let order = (0..width)
            .map(|f| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| {
                    values[a as usize * width + f]
                        .total_cmp(&values[b as usize * width + f])
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        Presorted { order }
    }

    /// Sorted orders over a multiset of dataset rows, expressed as positions
    /// into `rows`.
    fn for_sample(&self, n_rows: usize, rows: &[usize]) -> Vec<Vec<u32>> {
        let mut start = vec![0usize; n_rows + 1];
        for &r in rows {
            start[r + 1] += 1;
        }
        for i in 0..n_rows {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut positions = vec![0u32; rows.len()];
        for (p, &r) in rows.iter().enumerate() {
            positions[fill[r]] = p as u32;
            fill[r] += 1;
        }
        self.order
            .iter()
            .map(|ord| {
                let mut out = Vec::with_capacity(rows.len());
                for &r in ord {
                    let r = r as usize;
                    out.extend_from_slice(&positions[start[r]..start[r + 1]]);
                }
                out
            })
            .collect()
    }
}

struct Grower<'a> {
    cfg: &'a GrowConfig,
    /// Feature-major values indexed by sample position.
    columns: Vec<Vec<f64>>,
    positive: Vec<bool>,
    weights: &'a [f64],
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
}

impl<'a> Grower<'a> {
    fn new(ds: &Dataset, rows: &[usize], weights: &'a [f64], cfg: &'a GrowConfig, order: Vec<Vec<u32>>) -> Self {
        let columns = (0..ds.n_features())
            .map(|f| rows.iter().map(|&r| ds.row(r)[f]).collect())
            .collect();
        Grower {
            cfg,
            columns,
            positive: rows.iter().map(|&r| ds.label(r).is_positive()).collect(),
            weights,
            order,
            goes_left: vec![false; rows.len()],
            scratch: Vec::with_capacity(rows.len()),
        }
    }

    fn masses(&self, segment: &[u32]) -> Masses {
        let mut m = [0.0, 0.0];
        for &p in segment {
            let p = p as usize;
            m[usize::from(!self.positive[p])] += self.weights[p];
        }
        m
    }

    /// Best improving split of `start..end`, scanning features in index order
    /// and thresholds in increasing order so that the first strict minimum
    /// wins ties.
    fn best_split(&self, start: usize, end: usize, total: Masses) -> Option<Split> {
        let n = end - start;
        let min_leaf = self.cfg.min_leaf;
        if n < 2 * min_leaf || n < 2 {
            return None;
        }
        let criterion = &self.cfg.criterion;
        let mut best: Option<Split> = None;
        let mut best_score = node_score(criterion, total);
        for (f, ord) in self.order.iter().enumerate() {
            let col = &self.columns[f];
            let seg = &ord[start..end];
            let mut left = [0.0, 0.0];
            for i in 0..n - 1 {
                let p = seg[i] as usize;
                left[usize::from(!self.positive[p])] += self.weights[p];
                let count_left = i + 1;
                if count_left < min_leaf {
                    continue;
                }
                if n - count_left < min_leaf {
                    break;
                }
                let here = col[p];
                let next = col[seg[i + 1] as usize];
                if next <= here {
                    continue;
                }
                let right = [(total[0] - left[0]).max(0.0), (total[1] - left[1]).max(0.0)];
                let score = split_score(criterion, left, right);
                if strictly_below(score, best_score) {
                    best_score = score;
                    best = Some(Split {
                        feature: f,
                        threshold: midpoint(here, next),
                        score,
                    });
                }
            }
        }
        best
    }

    /// Stable partition of every feature order on `start..end`; returns the split point.
    fn partition(&mut self, start: usize, end: usize, split: &Split) -> usize {
        let col = &self.columns[split.feature];
        let mut n_left = 0;
        for &p in &self.order[0][start..end] {
            let l = col[p as usize] <= split.threshold;
            self.goes_left[p as usize] = l;
            n_left += usize::from(l);
        }
        for ord in &mut self.order {
            self.scratch.clear();
            let seg = &mut ord[start..end];
            let mut w = 0;
            for i in 0..seg.len() {
                let p = seg[i];
                if self.goes_left[p as usize] {
                    seg[w] = p;
                    w += 1;
                } else {
                    self.scratch.push(p);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
        }
        start + n_left
    }

    fn grow(mut self, n_features: usize) -> Tree {
        let criterion = self.cfg.criterion;
        let mut nodes: Vec<Node> = Vec::new();
        // (start, end, parent index, is_left)
        let mut stack: Vec<(usize, usize, Option<(usize, bool)>)> = vec![(0, self.positive.len(), None)];
        while let Some((start, end, parent)) = stack.pop() {
            let at = nodes.len();
            if let Some((pi, is_left)) = parent {
                if let Node::Internal { left, right, .. } = &mut nodes[pi] {
                    if is_left {
                        *left = at;
                    } else {
                        *right = at;
                    }
                }
            }
            let mass = self.masses(&self.order[0][start..end]);
            let pure = mass[0] <= 0.0 || mass[1] <= 0.0;
            let split = if pure { None } else { self.best_split(start, end, mass) };
            match split {
                None => nodes.push(Node::Leaf {
                    mass,
                    label: criterion.leaf_label(mass),
                }),
                Some(split) => {
                    let mid = self.partition(start, end, &split);
                    nodes.push(Node::Internal {
                        feature: split.feature,
                        threshold: split.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    stack.push((mid, end, Some((at, false))));
                    stack.push((start, mid, Some((at, true))));
                }
            }
        }
        Tree::from_nodes(nodes, n_features, *self.cfg)
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}

fn check_weights(ds: &Dataset, weights: &[f64]) -> Result<()> {
    if weights.len() != ds.len() {
        return Err(Error::LengthMismatch {
            expected: ds.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidValue("instance weights must be positive".into()));
    }
    Ok(())
}

/// Best root split of `ds` under `cfg`, if any candidate improves on the root.
pub fn best_split(ds: &Dataset, weights: &[f64], cfg: &GrowConfig) -> Result<Option<Split>> {
    check_weights(ds, weights)?;
    cfg.validate()?;
    if ds.len() < 2 {
        return Ok(None);
    }
    let rows: Vec<usize> = (0..ds.len()).collect();
    let order = Presorted::new(ds).order;
    let g = Grower::new(ds, &rows, weights, cfg, order);
    let total = g.masses(&g.order[0]);
    if total[0] <= 0.0 || total[1] <= 0.0 {
        return Ok(None);
    }
    Ok(g.best_split(0, ds.len(), total))
}

/// Grows a full tree on `ds`. `cfg.cp` is not applied here; see [`super::prune`].
pub fn grow(ds: &Dataset, weights: &[f64], cfg: &GrowConfig) -> Result<Tree> {
    check_weights(ds, weights)?;
    let rows: Vec<usize> = (0..ds.len()).collect();
    grow_sample(ds, &Presorted::new(ds), &rows, weights, cfg)
}

/// Grows with expected misclassification cost as both split criterion and
/// leaf rule. Instance weights on `ds`, if any, scale the class masses.
pub fn grow_cost_sensitive(ds: &Dataset, costs: &CostMatrix, cfg: &GrowConfig) -> Result<Tree> {
    let cfg = GrowConfig {
        criterion: Criterion::Cost(*costs),
        ..*cfg
    };
    grow(ds, &ds.weights_or_unit(), &cfg)
}

/// Grows on the multiset of `ds` rows listed in `rows` (repeats allowed),
/// with one weight per listed row. `presorted` must come from `ds`.
pub fn grow_sample(
    ds: &Dataset,
    presorted: &Presorted,
    rows: &[usize],
    weights: &[f64],
    cfg: &GrowConfig,
) -> Result<Tree> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if weights.len() != rows.len() {
        return Err(Error::LengthMismatch {
            expected: rows.len(),
            got: weights.len(),
        });
    }
    let order = presorted.for_sample(ds.len(), rows);
    Ok(Grower::new(ds, rows, weights, cfg, order).grow(ds.n_features()))
}
