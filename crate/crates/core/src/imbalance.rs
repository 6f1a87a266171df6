//! Class-imbalance preparations: random under/over-sampling, SMOTE, the
//! SMOTE + under-sampling hybrid, and inverse-frequency case weights.
//!
//! Every resampler reports where each output row came from, which lets the
//! cross-validation code prove that no validation row leaks into training.

use rand::seq::index;
use rand::Rng;

use crate::dataset::{class_counts, ClassLabel, Dataset, DatasetBuilder};
use crate::error::{Error, Result};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Input row kept as is.
    Original(usize),
    /// Extra copy of an input row.
    Duplicated(usize),
    /// Interpolated between two input rows.
    Synthetic { seed: usize, neighbor: usize },
}

impl Provenance {
    /// Input rows this output row was derived from.
    pub fn sources(&self) -> Vec<usize> {
        match *self {
            Provenance::Original(i) | Provenance::Duplicated(i) => vec![i],
            Provenance::Synthetic { seed, neighbor } => vec![seed, neighbor],
        }
    }

    pub fn is_synthetic(&self) -> bool {
        matches!(self, Provenance::Synthetic { .. })
    }

    fn remap(self, map: impl Fn(usize) -> usize) -> Self {
        match self {
            Provenance::Original(i) => Provenance::Original(map(i)),
            Provenance::Duplicated(i) => Provenance::Duplicated(map(i)),
            Provenance::Synthetic { seed, neighbor } => Provenance::Synthetic {
                seed: map(seed),
                neighbor: map(neighbor),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResampleOutcome {
    pub dataset: Dataset,
    pub provenance: Vec<Provenance>,
}

impl ResampleOutcome {
    pub fn identity(ds: &Dataset) -> Self {
        ResampleOutcome {
            dataset: ds.clone(),
            provenance: (0..ds.len()).map(Provenance::Original).collect(),
        }
    }

    /// Resolves provenance through a second resampling applied to this outcome.
    fn then(self, next: ResampleOutcome) -> ResampleOutcome {
        let provenance = next
            .provenance
            .iter()
            .map(|p| match *p {
                Provenance::Original(i) => self.provenance[i],
                Provenance::Duplicated(i) => match self.provenance[i] {
                    Provenance::Original(j) | Provenance::Duplicated(j) => Provenance::Duplicated(j),
                    synthetic => synthetic,
                },
                Provenance::Synthetic { .. } => p.remap(|i| self.provenance[i].sources()[0]),
            })
            .collect();
        ResampleOutcome {
            dataset: next.dataset,
            provenance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    /// Synthetic positives generated per existing positive.
    pub over_ratio: f64,
    pub seed: u64,
    /// Z-score columns before measuring neighbor distances.
    pub standardize: bool,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k_neighbors: 5,
            over_ratio: 1.0,
            seed: 0,
            standardize: false,
        }
    }
}

fn both_classes(ds: &Dataset) -> Result<()> {
    let c = class_counts(ds);
    if c.positive == 0 || c.negative == 0 {
        Err(Error::SingleClass)
    } else {
        Ok(())
    }
}

/// Shrinks the majority class, without replacement, to the minority size.
pub fn random_under_sample(ds: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    both_classes(ds)?;
    let counts = class_counts(ds);
    let minority = counts.minority();
    let majority_idx = ds.indices_of(minority.other());
    let target = counts.get(minority);

    let mut keep = vec![false; ds.len()];
    for i in ds.indices_of(minority) {
        keep[i] = true;
    }
    let mut r = rng::stream(seed, &[rng::label_hash("under_sample")]);
    for pick in index::sample(&mut r, majority_idx.len(), target) {
        keep[majority_idx[pick]] = true;
    }
    let rows: Vec<usize> = (0..ds.len()).filter(|&i| keep[i]).collect();
    Ok(ResampleOutcome {
        dataset: ds.subset(&rows),
        provenance: rows.into_iter().map(Provenance::Original).collect(),
    })
}

/// Grows the minority class, with replacement, to the majority size.
/// Originals keep their order; the copies are appended.
pub fn random_over_sample(ds: &Dataset, seed: u64) -> Result<ResampleOutcome> {
    both_classes(ds)?;
    let counts = class_counts(ds);
    let minority = counts.minority();
    let minority_idx = ds.indices_of(minority);
    let extra = counts.get(minority.other()) - counts.get(minority);

    let mut r = rng::stream(seed, &[rng::label_hash("over_sample")]);
    let copies: Vec<usize> = (0..extra)
        .map(|_| minority_idx[r.random_range(0..minority_idx.len())])
        .collect();
    let rows: Vec<usize> = (0..ds.len()).chain(copies.iter().copied()).collect();
    let provenance = (0..ds.len())
        .map(Provenance::Original)
        .chain(copies.into_iter().map(Provenance::Duplicated))
        .collect();
    Ok(ResampleOutcome {
        dataset: ds.subset(&rows),
        provenance,
    })
}

/// One SMOTE draw, kept before discrete coordinates are snapped to valid levels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDraw {
    pub seed: usize,
    pub neighbor: usize,
    pub gap: f64,
    pub raw: Vec<f64>,
}

/// `seed + gap * (neighbor - seed)`, coordinate-wise.
pub fn interpolate(seed: &[f64], neighbor: &[f64], gap: f64) -> Vec<f64> {
    seed.iter().zip(neighbor).map(|(s, n)| s + gap * (n - s)).collect()
}

fn column_scales(ds: &Dataset) -> Vec<f64> {
    let n = ds.len() as f64;
    (0..ds.n_features())
        .map(|j| {
            let mean = ds.rows().map(|r| r[j]).sum::<f64>() / n;
            let var = ds.rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                1.0 / var.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

/// The `k` nearest other positives of `positives[at]`, by (distance, row index).
fn nearest(ds: &Dataset, positives: &[usize], at: usize, k: usize, scales: Option<&[f64]>) -> Vec<usize> {
    let x = ds.row(positives[at]);
    let mut dist: Vec<(f64, usize)> = positives
        .iter()
        .filter(|&&j| j != positives[at])
        .map(|&j| {
            let d = ds
                .row(j)
                .iter()
                .zip(x)
                .enumerate()
                .map(|(c, (a, b))| {
                    let s = scales.map_or(1.0, |s| s[c]);
                    ((a - b) * s).powi(2)
                })
                .sum::<f64>();
            (d, j)
        })
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if dist.len() > k {
        dist.select_nth_unstable_by(k - 1, by_key);
        dist.truncate(k);
    }
    dist.sort_by(by_key);
    dist.into_iter().map(|(_, j)| j).collect()
}

/// Generates the synthetic positives without attaching them to a dataset.
///
/// Synthetic `j` is seeded by positive number `j mod n_pos`; its neighbor and
/// gap come from a stream keyed by the seed row's index and the repetition
/// number, so the draws are independent of evaluation order.
pub fn smote_draws(ds: &Dataset, cfg: &SmoteConfig) -> Result<Vec<SyntheticDraw>> {
    if !(cfg.over_ratio >= 0.0 && cfg.over_ratio.is_finite()) {
        return Err(Error::Config(format!("over_ratio must be non-negative, got {}", cfg.over_ratio)));
    }
    let positives = ds.indices_of(ClassLabel::Positive);
    let n_syn = (cfg.over_ratio * positives.len() as f64).floor() as usize;
    if n_syn == 0 {
        return Ok(Vec::new());
    }
    if cfg.k_neighbors == 0 || positives.len() <= cfg.k_neighbors {
        return Err(Error::MinorityTooSmall {
            minority: positives.len(),
            k: cfg.k_neighbors,
        });
    }
    let scales = cfg.standardize.then(|| column_scales(ds));
    let seeds_used = n_syn.min(positives.len());
    let per_seed = par::map_range(seeds_used, |s| {
        let neighbors = nearest(ds, &positives, s, cfg.k_neighbors, scales.as_deref());
        let seed_row = positives[s];
        let reps = n_syn / positives.len() + usize::from(s < n_syn % positives.len());
        (0..reps)
            .map(|rep| {
                let mut r = rng::stream(cfg.seed, &[rng::label_hash("smote"), seed_row as u64, rep as u64]);
                let neighbor = neighbors[r.random_range(0..neighbors.len())];
                let gap: f64 = r.random();
                SyntheticDraw {
                    seed: seed_row,
                    neighbor,
                    gap,
                    raw: interpolate(ds.row(seed_row), ds.row(neighbor), gap),
                }
            })
            .collect::<Vec<_>>()
    });
    // Interleave so that output order is seed-major within each repetition.
    let max_reps = per_seed.iter().map(Vec::len).max().unwrap_or(0);
    let mut draws = Vec::with_capacity(n_syn);
    for rep in 0..max_reps {
        for seed_draws in &per_seed {
            if let Some(d) = seed_draws.get(rep) {
                draws.push(d.clone());
            }
        }
    }
    Ok(draws)
}

/// Appends `floor(over_ratio * n_pos)` interpolated positives.
pub fn smote(ds: &Dataset, cfg: &SmoteConfig) -> Result<ResampleOutcome> {
    let draws = smote_draws(ds, cfg)?;
    let mut b = DatasetBuilder::new(ds.shared_schema(), ds.weights().is_some());
    let mut provenance = Vec::with_capacity(ds.len() + draws.len());
    for i in 0..ds.len() {
        b.push(ds.row(i), ds.label(i), ds.weight(i));
        provenance.push(Provenance::Original(i));
    }
    let mut snapped = vec![0.0; ds.n_features()];
    for d in &draws {
        for ((out, &v), f) in snapped.iter_mut().zip(&d.raw).zip(ds.schema()) {
            *out = f.kind.snap(v);
        }
        b.push(&snapped, ClassLabel::Positive, ds.weight(d.seed));
        provenance.push(Provenance::Synthetic {
            seed: d.seed,
            neighbor: d.neighbor,
        });
    }
    Ok(ResampleOutcome {
        dataset: b.finish()?,
        provenance,
    })
}

/// SMOTE on the positives followed by under-sampling to an exact balance.
pub fn hybrid_smote_under(ds: &Dataset, cfg: &SmoteConfig, seed: u64) -> Result<ResampleOutcome> {
    both_classes(ds)?;
    let augmented = smote(ds, cfg)?;
    let balanced = random_under_sample(&augmented.dataset, seed)?;
    Ok(augmented.then(balanced))
}

/// Inverse class-frequency weights `N / (2 n_c)`; they sum to `N`.
pub fn class_weights(ds: &Dataset) -> Result<Vec<f64>> {
    both_classes(ds)?;
    let counts = class_counts(ds);
    let n = ds.len() as f64;
    let w_pos = n / (2.0 * counts.positive as f64);
    let w_neg = n / (2.0 * counts.negative as f64);
    Ok(ds
        .labels()
        .iter()
        .map(|l| if l.is_positive() { w_pos } else { w_neg })
        .collect())
}

pub fn with_class_weights(ds: &Dataset) -> Result<Dataset> {
    let w = class_weights(ds)?;
    ds.clone().with_weights(w)
}
