//! Cross-validated grid tuning of the 17 classifier x imbalance-handler
//! configurations, and the final train/test experiment.
//!
//! Resampling and weighting only ever touch the training folds; every
//! validation fold keeps the original class ratio.

mod cv;
mod experiment;
mod fit;

use std::fmt;

use crate::nn::MLPConfig;

pub use cv::{cross_validate, cross_validate_traced, grid_search, stratified_kfold, FoldTrace, SpecTuning};
pub use experiment::{run_experiment, TestResult, TuningReport};
pub use fit::{fit_point, prepare_training, FittedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImbalanceHandler {
    None,
    Down,
    Up,
    Hybrid,
    CaseWeights,
    /// Cost-sensitive trees; the false-negative cost comes from the grid.
    CostSensitive,
}

impl ImbalanceHandler {
    pub const ALL: [ImbalanceHandler; 6] = [
        ImbalanceHandler::None,
        ImbalanceHandler::Down,
        ImbalanceHandler::Up,
        ImbalanceHandler::Hybrid,
        ImbalanceHandler::CaseWeights,
        ImbalanceHandler::CostSensitive,
    ];

    /// Id suffix: `""`, `"_down"`, `"_up"`, `"_hybrid"`, `"_weights"`, `"_cost"`.
    pub fn suffix(self) -> &'static str {
        match self {
            ImbalanceHandler::None => "",
            ImbalanceHandler::Down => "_down",
            ImbalanceHandler::Up => "_up",
            ImbalanceHandler::Hybrid => "_hybrid",
            ImbalanceHandler::CaseWeights => "_weights",
            ImbalanceHandler::CostSensitive => "_cost",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    SingleTree,
    BaggingTrees,
    NeuralNet,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::SingleTree, Family::BaggingTrees, Family::NeuralNet];

    pub fn prefix(self) -> &'static str {
        match self {
            Family::SingleTree => "single_tree",
            Family::BaggingTrees => "bagging",
            Family::NeuralNet => "neural_net",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    pub family: Family,
    pub handler: ImbalanceHandler,
    pub id: String,
}

impl ModelSpec {
    pub fn new(family: Family, handler: ImbalanceHandler) -> crate::Result<Self> {
        if family == Family::NeuralNet && handler == ImbalanceHandler::CostSensitive {
            return Err(crate::Error::Config(
                "cost-sensitive learning applies to tree models only".into(),
            ));
        }
        Ok(ModelSpec {
            family,
            handler,
            id: format!("{}{}", family.prefix(), handler.suffix()),
        })
    }

    /// The 17 configurations: six tree and six bagging variants, five networks.
    pub fn all() -> Vec<ModelSpec> {
        Family::ALL
            .iter()
            .flat_map(|&f| ImbalanceHandler::ALL.iter().filter_map(move |&h| ModelSpec::new(f, h).ok()))
            .collect()
    }

    pub fn by_id(id: &str) -> Option<ModelSpec> {
        ModelSpec::all().into_iter().find(|s| s.id == id)
    }

    /// Grid points in preference order: on equal CV scores the earlier wins.
    pub fn grid(&self, grids: &Grids) -> Vec<ParamPoint> {
        let costs: Vec<Option<f64>> = if self.handler == ImbalanceHandler::CostSensitive {
            grids.c_fn.iter().map(|&c| Some(c)).collect()
        } else {
            vec![None]
        };
        let mut out = Vec::new();
        match self.family {
            Family::SingleTree => {
                for &cp in &grids.cp {
                    for &c_fn in &costs {
                        out.push(ParamPoint::Tree { cp, c_fn });
                    }
                }
            }
            Family::BaggingTrees => {
                for &trials in &grids.trials {
                    for &c_fn in &costs {
                        out.push(ParamPoint::Bagging { trials, c_fn });
                    }
                }
            }
            Family::NeuralNet => {
                for &size in &grids.size {
                    for &decay in grids.decay.iter().rev() {
                        out.push(ParamPoint::Net { size, decay });
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// One point of a family's parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamPoint {
    Tree { cp: f64, c_fn: Option<f64> },
    Bagging { trials: usize, c_fn: Option<f64> },
    Net { size: usize, decay: f64 },
}

impl ParamPoint {
    pub fn c_fn(&self) -> Option<f64> {
        match *self {
            ParamPoint::Tree { c_fn, .. } | ParamPoint::Bagging { c_fn, .. } => c_fn,
            ParamPoint::Net { .. } => None,
        }
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParamPoint::Tree { cp, c_fn } => {
                write!(f, "cp={cp}")?;
                if let Some(c) = c_fn {
                    write!(f, ";c_fn={c}")?;
                }
                Ok(())
            }
            ParamPoint::Bagging { trials, c_fn } => {
                write!(f, "trials={trials}")?;
                if let Some(c) = c_fn {
                    write!(f, ";c_fn={c}")?;
                }
                Ok(())
            }
            ParamPoint::Net { size, decay } => write!(f, "size={size};decay={decay}"),
        }
    }
}

/// Candidate values per tuning parameter, each listed simplest first.
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub cp: Vec<f64>,
    pub trials: Vec<usize>,
    pub size: Vec<usize>,
    /// Listed ascending; larger decay is preferred on ties.
    pub decay: Vec<f64>,
    pub c_fn: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            cp: vec![0.0, 0.0001, 0.0005, 0.001],
            trials: vec![1, 5, 10, 50],
            size: vec![1, 3, 5],
            decay: vec![0.0, 0.0001, 0.1],
            c_fn: vec![10.0, 100.0, 1000.0],
        }
    }
}

/// Everything a tuning run needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub seed: u64,
    pub grids: Grids,
    pub specs: Vec<ModelSpec>,
    /// Neighbors used by SMOTE in the hybrid handler.
    pub smote_k: usize,
    /// Minimum instances per leaf for single trees and bagged trees.
    pub min_leaf: usize,
    /// Optimizer settings for networks; size, decay and seed are overridden.
    pub mlp: MLPConfig,
}

/// Leaf size used by experiments; rpart's default `minbucket`.
pub const EXPERIMENT_MIN_LEAF: usize = 7;

/// Step size used by experiments. At the library default of 0.1 the
/// iteration budget ends with networks still near the base-rate solution.
pub const EXPERIMENT_LEARNING_RATE: f64 = 1.0;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 5,
            seed: 0,
            grids: Grids::default(),
            specs: ModelSpec::all(),
            smote_k: 5,
            min_leaf: EXPERIMENT_MIN_LEAF,
            mlp: MLPConfig {
                learning_rate: EXPERIMENT_LEARNING_RATE,
                ..MLPConfig::default()
            },
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error::Config;
        if self.folds < 2 {
            return Err(Config("at least 2 folds are required".into()));
        }
        if self.specs.is_empty() {
            return Err(Config("no model specs selected".into()));
        }
        for spec in &self.specs {
            if spec.grid(&self.grids).is_empty() {
                return Err(Config(format!("empty parameter grid for {spec}")));
            }
        }
        let g = &self.grids;
        if g.cp.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
            return Err(Config("cp values must be non-negative".into()));
        }
        if g.trials.contains(&0) || g.size.contains(&0) {
            return Err(Config("trials and size values must be positive".into()));
        }
        if g.decay.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Config("decay values must be non-negative".into()));
        }
        if g.c_fn.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Config("false-negative costs must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
