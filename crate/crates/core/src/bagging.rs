//! Bagged ensembles of unpruned CART trees with majority voting.

use std::fmt::Write;

use rand::Rng;

use crate::cart::{grow_sample, GrowConfig, Presorted, Tree};
use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::imbalance::class_weights;
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaggingConfig {
    pub trials: usize,
    pub seed: u64,
    /// Tree settings; `cp` is ignored because members are never pruned.
    /// A cost criterion here makes every member cost-sensitive.
    pub base: GrowConfig,
    /// Grow members on instance weights: the dataset's own weights when
    /// present, inverse class-frequency weights otherwise.
    pub use_case_weights: bool,
}

impl Default for BaggingConfig {
    fn default() -> Self {
        BaggingConfig {
            trials: 10,
            seed: 0,
            base: GrowConfig::default(),
            use_case_weights: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    trees: Vec<Tree>,
    config: BaggingConfig,
}

/// Row indices of bootstrap sample `tree` (with replacement, size `n`).
pub fn bootstrap_indices(n: usize, seed: u64, tree: usize) -> Vec<usize> {
    let mut r = rng::stream(seed, &[rng::label_hash("bootstrap"), tree as u64]);
    (0..n).map(|_| r.random_range(0..n)).collect()
}

/// Fits `cfg.trials` trees. A single trial uses the data as given; more
/// trials grow each tree on its own bootstrap sample drawn from a stream
/// keyed by `(seed, tree index)`, so the first `t` trees of a larger
/// ensemble equal an ensemble fitted with `trials = t` (for `t > 1`).
pub fn fit(ds: &Dataset, cfg: &BaggingConfig) -> Result<Ensemble> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let base = GrowConfig { cp: 0.0, ..cfg.base };
    base.validate()?;
    let weights = if cfg.use_case_weights {
        match ds.weights() {
            Some(w) => w.to_vec(),
            None => class_weights(ds)?,
        }
    } else {
        vec![1.0; ds.len()]
    };
    let presorted = Presorted::new(ds);
    let trees = if cfg.trials == 1 {
        let rows: Vec<usize> = (0..ds.len()).collect();
        vec![grow_sample(ds, &presorted, &rows, &weights, &base)?]
    } else {
        par::try_map_range(cfg.trials, |t| {
            let rows = bootstrap_indices(ds.len(), cfg.seed, t);
            let w: Vec<f64> = rows.iter().map(|&r| weights[r]).collect();
            grow_sample(ds, &presorted, &rows, &w, &base)
        })?
    };
    Ok(Ensemble { trees, config: *cfg })
}

impl Ensemble {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn config(&self) -> &BaggingConfig {
        &self.config
    }

    /// The ensemble made of the first `trials` members.
    pub fn truncated(&self, trials: usize) -> Result<Ensemble> {
        if trials == 0 || trials > self.trees.len() {
            return Err(Error::Config(format!(
                "cannot take {trials} of {} trees",
                self.trees.len()
            )));
        }
        Ok(Ensemble {
            trees: self.trees[..trials].to_vec(),
            config: BaggingConfig { trials, ..self.config },
        })
    }

    /// `(positive, negative)` vote counts.
    pub fn votes(&self, row: &[f64]) -> Result<(usize, usize)> {
        let n_features = self.trees[0].n_features();
        if row.len() != n_features {
            return Err(Error::Arity {
                expected: n_features,
                got: row.len(),
            });
        }
        Ok(self.votes_unchecked(row))
    }

    fn votes_unchecked(&self, row: &[f64]) -> (usize, usize) {
        let pos = self.trees.iter().filter(|t| t.predict_row(row).is_positive()).count();
        (pos, self.trees.len() - pos)
    }

    /// Majority vote; an exact tie goes to Positive.
    pub fn predict(&self, row: &[f64]) -> Result<ClassLabel> {
        let (pos, neg) = self.votes(row)?;
        Ok(vote(pos, neg))
    }

    pub(crate) fn predict_row(&self, row: &[f64]) -> ClassLabel {
        let (pos, neg) = self.votes_unchecked(row);
        vote(pos, neg)
    }

    /// Header line `<trials> <seed>` followed by each tree in preorder text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.config.trials, self.config.seed);
        for t in &self.trees {
            out.push_str(&t.to_text());
        }
        out
    }

    pub fn from_text(text: &str, n_features: usize, base: GrowConfig) -> Result<Ensemble> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Format {
            line: 1,
            reason: "missing header".into(),
        })?;
        let mut toks = header.split_whitespace();
        let parse = |t: Option<&str>| -> Result<u64> {
            t.and_then(|s| s.parse().ok()).ok_or(Error::Format {
                line: 1,
                reason: "header must be `<trials> <seed>`".into(),
            })
        };
        let trials = parse(toks.next())? as usize;
        let seed = parse(toks.next())?;
        let trees = (0..trials)
            .map(|_| Tree::read_from(&mut lines, n_features, base))
            .collect::<Result<Vec<_>>>()?;
        if trees.is_empty() {
            return Err(Error::Format {
                line: 1,
                reason: "ensemble without trees".into(),
            });
        }
        Ok(Ensemble {
            trees,
            config: BaggingConfig {
                trials,
                seed,
                base,
                use_case_weights: false,
            },
        })
    }
}

fn vote(pos: usize, neg: usize) -> ClassLabel {
    if pos >= neg {
        ClassLabel::Positive
    } else {
        ClassLabel::Negative
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::grow;
    use crate::dataset::{FeatureKind, FeatureSchema};
    use ClassLabel::{Negative as N, Positive as P};

    fn noisy(n: usize, seed: u64) -> Dataset {
        let mut r = rng::seeded(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![r.random_range(0.0..1.0), r.random_range(0..4) as f64])
            .collect();
        let labels = rows
            .iter()
            .map(|x| if r.random_bool(0.05 + 0.4 * x[0]) { P } else { N })
            .collect();
        let schema = vec![
            FeatureSchema::new("x", FeatureKind::Numeric),
            FeatureSchema::new("k", FeatureKind::ordinal(0, 3)),
        ];
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn single_trial_is_the_plain_tree() {
        let d = noisy(300, 1);
        let e = fit(&d, &BaggingConfig { trials: 1, ..Default::default() }).unwrap();
        let t = grow(&d, &vec![1.0; d.len()], &GrowConfig::default()).unwrap();
        assert_eq!(e.trees()[0], t);
        for row in d.rows() {
            assert_eq!(e.predict(row).unwrap(), t.predict(row).unwrap());
        }
    }

    #[test]
    fn trees_count_and_votes() {
        let d = noisy(200, 2);
        let e = fit(&d, &BaggingConfig { trials: 5, seed: 3, ..Default::default() }).unwrap();
        assert_eq!(e.trees().len(), 5);
        for row in d.rows().take(20) {
            let (p, n) = e.votes(row).unwrap();
            assert_eq!(p + n, 5);
        }
        assert!(e.predict(&[0.1]).is_err());
    }

    #[test]
    fn ties_go_positive() {
        assert_eq!(vote(2, 1), P);
        assert_eq!(vote(1, 1), P);
        assert_eq!(vote(0, 1), N);
    }

    #[test]
    fn prefixes_equal_smaller_ensembles() {
        let d = noisy(150, 4);
        let big = fit(&d, &BaggingConfig { trials: 10, seed: 8, ..Default::default() }).unwrap();
        let small = fit(&d, &BaggingConfig { trials: 5, seed: 8, ..Default::default() }).unwrap();
        assert_eq!(big.truncated(5).unwrap(), small);
    }

    #[test]
    fn deterministic_text() {
        let d = noisy(150, 5);
        let cfg = BaggingConfig { trials: 4, seed: 11, use_case_weights: true, ..Default::default() };
        let a = fit(&d, &cfg).unwrap();
        let b = fit(&d, &cfg).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let back = Ensemble::from_text(&a.to_text(), 2, GrowConfig::default()).unwrap();
        assert_eq!(back.trees(), a.trees());
        assert!(a.to_text().starts_with("4 11\n"));
    }

    #[test]
    fn bootstrap_covers_about_632_percent() {
        let n = 10_000;
        let mut total = 0.0;
        let reps = 20;
        for t in 0..reps {
            let mut seen = vec![false; n];
            for i in bootstrap_indices(n, 99, t) {
                seen[i] = true;
            }
            total += seen.iter().filter(|s| **s).count() as f64 / n as f64;
        }
        let mean = total / reps as f64;
        assert!((mean - (1.0 - (-1.0f64).exp())).abs() < 0.02, "{mean}");
    }
}
