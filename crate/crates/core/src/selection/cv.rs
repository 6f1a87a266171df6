use rand::seq::SliceRandom;

use crate::dataset::{class_counts, ClassCounts, ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{confusion, f_beta, F5_BETA};
use crate::{par, rng};

use super::fit::{fit_points, prepare_training};
use super::{ExperimentConfig, ModelSpec, ParamPoint};

/// Splits row indices into `k` folds with per-class fold sizes differing by
/// at most one. Positives are dealt round-robin first and negatives continue
/// from where they stopped, so fold totals stay balanced too.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    let counts = class_counts(ds);
    if counts.positive == 0 || counts.negative == 0 {
        return Err(Error::SingleClass);
    }
    let minority = counts.get(counts.minority());
    if k > minority {
        log::warn!("{k} folds but only {minority} minority instances; some folds get none");
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for label in ClassLabel::ALL {
        let mut idx = ds.indices_of(label);
        idx.shuffle(&mut rng::stream(seed, &[rng::label_hash("kfold"), label.index() as u64]));
        for (i, r) in idx.iter().enumerate() {
            folds[(offset + i) % k].push(*r);
        }
        offset += idx.len();
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// What one cross-validation iteration saw, for auditing the protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldTrace {
    pub fold: usize,
    /// Dataset indices of the held-out fold.
    pub validation: Vec<usize>,
    pub validation_counts: ClassCounts,
    /// Dataset indices of the training folds.
    pub training: Vec<usize>,
    /// Sorted dataset indices that any learner input row was derived from.
    pub learner_sources: Vec<usize>,
    pub learner_counts: ClassCounts,
    /// Whether the learner input carried instance weights.
    pub learner_weighted: bool,
    /// Validation F5 per grid point.
    pub f5: Vec<f64>,
}

pub(crate) fn fold_assignment(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<Vec<usize>>> {
    stratified_kfold(ds, cfg.folds, rng::derive(cfg.seed, &[rng::label_hash("folds")]))
}

/// Seed of the work on `spec` at `fold`; fold index `k` is the final refit.
pub(crate) fn task_seed(master: u64, spec: &ModelSpec, fold: usize) -> u64 {
    rng::derive(master, &[rng::label_hash(&spec.id), fold as u64])
}

/// F5 on a validation fold; a fold without positives scores 0.
pub(crate) fn fold_f5(labels: &[ClassLabel], predictions: &[ClassLabel], context: &str) -> Result<f64> {
    let cm = confusion(labels, predictions)?;
    if cm.actual_positives() == 0 {
        log::warn!("{context}: validation fold has no positives, F5 scored as 0");
        return Ok(0.0);
    }
    f_beta(&cm, F5_BETA)
}

fn run_fold(
    spec: &ModelSpec,
    points: &[ParamPoint],
    ds: &Dataset,
    folds: &[Vec<usize>],
    fold: usize,
    cfg: &ExperimentConfig,
) -> Result<FoldTrace> {
    let validation = folds[fold].clone();
    let mut training: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != fold)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    training.sort_unstable();
    let train_ds = ds.subset(&training);
    let seed = task_seed(cfg.seed, spec, fold);
    let prepared = prepare_training(spec.handler, &train_ds, rng::derive(seed, &[rng::label_hash("resample")]), cfg)?;
    let models = fit_points(
        spec,
        points,
        &prepared.dataset,
        rng::derive(seed, &[rng::label_hash("model")]),
        cfg,
    )?;
    let val_ds = ds.subset(&validation);
    let context = format!("{spec} fold {fold}");
    let f5 = models
        .iter()
        .map(|m| fold_f5(val_ds.labels(), &m.predict_dataset(&val_ds)?, &context))
        .collect::<Result<Vec<_>>>()?;
    let mut learner_sources: Vec<usize> = prepared
        .provenance
        .iter()
        .flat_map(|p| p.sources())
        .map(|i| training[i])
        .collect();
    learner_sources.sort_unstable();
    learner_sources.dedup();
    Ok(FoldTrace {
        fold,
        validation_counts: class_counts(&val_ds),
        validation,
        training,
        learner_sources,
        learner_counts: class_counts(&prepared.dataset),
        learner_weighted: prepared.dataset.weights().is_some(),
        f5,
    })
}

/// Runs every fold for `points` of `spec` and returns the per-fold traces.
pub fn cross_validate_traced(
    spec: &ModelSpec,
    points: &[ParamPoint],
    ds: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<Vec<FoldTrace>> {
    cfg.validate()?;
    let folds = fold_assignment(ds, cfg)?;
    par::try_map_range(folds.len(), |f| run_fold(spec, points, ds, &folds, f, cfg))
}

/// Mean validation F5 of `spec` at `point` over `cfg.folds` folds.
pub fn cross_validate(spec: &ModelSpec, point: &ParamPoint, ds: &Dataset, cfg: &ExperimentConfig) -> Result<f64> {
    let traces = cross_validate_traced(spec, std::slice::from_ref(point), ds, cfg)?;
    Ok(traces.iter().map(|t| t.f5[0]).sum::<f64>() / traces.len() as f64)
}

/// CV results for one spec over its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecTuning {
    pub spec: ModelSpec,
    pub points: Vec<ParamPoint>,
    pub mean_f5: Vec<f64>,
    /// Index of the first point attaining the maximum mean F5.
    pub selected: usize,
}

impl SpecTuning {
    pub fn selected_point(&self) -> ParamPoint {
        self.points[self.selected]
    }

    pub fn selected_f5(&self) -> f64 {
        self.mean_f5[self.selected]
    }
}

/// Tunes several specs on one shared fold assignment; (spec, fold) pairs run
/// as independent tasks.
pub(crate) fn tune_specs(specs: &[ModelSpec], ds: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<SpecTuning>> {
    cfg.validate()?;
    let folds = fold_assignment(ds, cfg)?;
    let k = folds.len();
    let grids: Vec<Vec<ParamPoint>> = specs.iter().map(|s| s.grid(&cfg.grids)).collect();
    let traces = par::try_map_range(specs.len() * k, |task| {
        let (s, f) = (task / k, task % k);
        run_fold(&specs[s], &grids[s], ds, &folds, f, cfg)
    })?;
    Ok(specs
        .iter()
        .zip(grids)
        .zip(traces.chunks(k))
        .map(|((spec, points), spec_traces)| {
            let mean_f5: Vec<f64> = (0..points.len())
                .map(|p| spec_traces.iter().map(|t| t.f5[p]).sum::<f64>() / k as f64)
                .collect();
            let mut selected = 0;
            for (i, f) in mean_f5.iter().enumerate() {
                if *f > mean_f5[selected] {
                    selected = i;
                }
            }
            SpecTuning {
                spec: spec.clone(),
                points,
                mean_f5,
                selected,
            }
        })
        .collect())
}

/// Cross-validates every grid point of `spec` and selects the best.
pub fn grid_search(spec: &ModelSpec, ds: &Dataset, cfg: &ExperimentConfig) -> Result<SpecTuning> {
    Ok(tune_specs(std::slice::from_ref(spec), ds, cfg)?.remove(0))
}
