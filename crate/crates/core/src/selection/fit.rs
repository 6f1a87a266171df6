use crate::bagging::{self, BaggingConfig, Ensemble};
use crate::cart::{grow, prune, Criterion, GrowConfig, Tree};
use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::imbalance::{
    hybrid_smote_under, random_over_sample, random_under_sample, with_class_weights, ResampleOutcome,
    SmoteConfig,
};
use crate::metrics::CostMatrix;
use crate::nn::{self, MLPConfig, MLPModel};
use crate::{par, rng};

use super::{ExperimentConfig, Family, ImbalanceHandler, ModelSpec, ParamPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tree(Tree),
    Bagging(Ensemble),
    Net(MLPModel),
}

impl FittedModel {
    fn n_features(&self) -> usize {
        match self {
            FittedModel::Tree(t) => t.n_features(),
            FittedModel::Bagging(e) => e.trees()[0].n_features(),
            FittedModel::Net(m) => m.inputs(),
        }
    }

    fn predict_row(&self, row: &[f64]) -> ClassLabel {
        match self {
            FittedModel::Tree(t) => t.predict_row(row),
            FittedModel::Bagging(e) => e.predict_row(row),
            FittedModel::Net(m) => nn::predict_row(m, row),
        }
    }

    pub fn predict(&self, row: &[f64]) -> Result<ClassLabel> {
        if row.len() != self.n_features() {
            return Err(Error::Arity {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(self.predict_row(row))
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<ClassLabel>> {
        if ds.n_features() != self.n_features() {
            return Err(Error::Arity {
                expected: self.n_features(),
                got: ds.n_features(),
            });
        }
        Ok(ds.rows().map(|r| self.predict_row(r)).collect())
    }

    pub fn to_text(&self) -> String {
        match self {
            FittedModel::Tree(t) => t.to_text(),
            FittedModel::Bagging(e) => e.to_text(),
            FittedModel::Net(m) => m.to_text(),
        }
    }
}

/// Applies `handler` to a training set. Resampling handlers return the
/// resampled rows, case weighting attaches class weights, and the remaining
/// handlers pass the data through.
pub fn prepare_training(
    handler: ImbalanceHandler,
    train: &Dataset,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<ResampleOutcome> {
    let sub = |label: &str| rng::derive(seed, &[rng::label_hash(label)]);
    match handler {
        ImbalanceHandler::None | ImbalanceHandler::CostSensitive => Ok(ResampleOutcome::identity(train)),
        ImbalanceHandler::Down => random_under_sample(train, sub("down")),
        ImbalanceHandler::Up => random_over_sample(train, sub("up")),
        ImbalanceHandler::Hybrid => {
            let smote = SmoteConfig {
                k_neighbors: cfg.smote_k,
                seed: sub("smote"),
                ..SmoteConfig::default()
            };
            hybrid_smote_under(train, &smote, sub("down"))
        }
        ImbalanceHandler::CaseWeights => {
            let mut out = ResampleOutcome::identity(train);
            out.dataset = with_class_weights(train)?;
            Ok(out)
        }
    }
}

fn criterion(c_fn: Option<f64>) -> Criterion {
    match c_fn {
        Some(c) => Criterion::Cost(CostMatrix::with_false_negative(c)),
        None => Criterion::Gini,
    }
}

fn check_point(spec: &ModelSpec, point: &ParamPoint) -> Result<()> {
    let ok = matches!(
        (spec.family, point),
        (Family::SingleTree, ParamPoint::Tree { .. })
            | (Family::BaggingTrees, ParamPoint::Bagging { .. })
            | (Family::NeuralNet, ParamPoint::Net { .. })
    ) && (point.c_fn().is_some() == (spec.handler == ImbalanceHandler::CostSensitive));
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("parameter point {point} does not belong to {spec}")))
    }
}

/// Fits one model per point on an already prepared training set.
///
/// Points sharing a false-negative cost share work: trees are grown once and
/// pruned at each cp, and bagging ensembles are fitted once at the largest
/// trial count and truncated.
pub(crate) fn fit_points(
    spec: &ModelSpec,
    points: &[ParamPoint],
    train: &Dataset,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<FittedModel>> {
    for p in points {
        check_point(spec, p)?;
    }
    let weights = train.weights_or_unit();
    let grow_cfg = |c_fn: Option<f64>| GrowConfig {
        min_leaf: cfg.min_leaf,
        cp: 0.0,
        criterion: criterion(c_fn),
    };
    let same = |a: Option<f64>, b: Option<f64>| a.map(f64::to_bits) == b.map(f64::to_bits);
    match spec.family {
        Family::SingleTree => {
            let mut grown: Vec<(Option<f64>, Tree)> = Vec::new();
            points
                .iter()
                .map(|p| {
                    let ParamPoint::Tree { cp, c_fn } = *p else { unreachable!() };
                    let at = match grown.iter().position(|(c, _)| same(*c, c_fn)) {
                        Some(at) => at,
                        None => {
                            grown.push((c_fn, grow(train, &weights, &grow_cfg(c_fn))?));
                            grown.len() - 1
                        }
                    };
                    Ok(FittedModel::Tree(prune(&grown[at].1, cp, train, &weights)?))
                })
                .collect()
        }
        Family::BaggingTrees => {
            let mut fitted: Vec<(Option<f64>, usize, Ensemble)> = Vec::new();
            let mut out = Vec::with_capacity(points.len());
            for p in points {
                let ParamPoint::Bagging { trials, c_fn } = *p else { unreachable!() };
                let target = if trials == 1 {
                    1
                } else {
                    points
                        .iter()
                        .filter_map(|q| match *q {
                            ParamPoint::Bagging { trials: t, c_fn: c } if t > 1 && same(c, c_fn) => Some(t),
                            _ => None,
                        })
                        .max()
                        .unwrap_or(trials)
                };
                if !fitted.iter().any(|(c, t, _)| same(*c, c_fn) && *t == target) {
                    let bag = BaggingConfig {
                        trials: target,
                        seed,
                        base: grow_cfg(c_fn),
                        use_case_weights: train.weights().is_some(),
                    };
                    fitted.push((c_fn, target, bagging::fit(train, &bag)?));
                }
                let (_, _, ens) = fitted
                    .iter()
                    .find(|(c, t, _)| same(*c, c_fn) && *t == target)
                    .expect("fitted above");
                out.push(FittedModel::Bagging(ens.truncated(trials)?));
            }
            Ok(out)
        }
        Family::NeuralNet => par::try_map_range(points.len(), |i| {
            let ParamPoint::Net { size, decay } = points[i] else { unreachable!() };
            let mlp = MLPConfig {
                hidden_units: size,
                decay,
                seed,
                ..cfg.mlp
            };
            nn::train(train, &weights, &mlp).map(FittedModel::Net)
        }),
    }
}

/// Applies `spec.handler` to `train` and fits the model at `point`.
pub fn fit_point(
    spec: &ModelSpec,
    point: &ParamPoint,
    train: &Dataset,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<FittedModel> {
    let prepared = prepare_training(spec.handler, train, rng::derive(seed, &[rng::label_hash("resample")]), cfg)?;
    let model_seed = rng::derive(seed, &[rng::label_hash("model")]);
    let mut models = fit_points(spec, std::slice::from_ref(point), &prepared.dataset, model_seed, cfg)?;
    Ok(models.remove(0))
}
