//! Imbalanced binary classification for rare-event prediction.
//!
//! The crate covers the full experiment pipeline: typed tabular data
//! ([`dataset`]), rare-class metrics ([`metrics`]), resampling and case
//! weighting ([`imbalance`]), CART trees with cost-complexity pruning and a
//! cost-sensitive variant ([`cart`]), bagged trees ([`bagging`]), a
//! single-hidden-layer sigmoid network ([`nn`]), cross-validated grid tuning
//! of the 17-model matrix ([`selection`]) and the student-record ETL with a
//! synthetic cohort generator ([`etl`]).

pub mod bagging;
pub mod cart;
pub mod dataset;
pub mod error;
pub mod etl;
pub mod imbalance;
pub mod metrics;
pub mod nn;
pub mod par;
pub mod rng;
pub mod selection;

pub use dataset::{ClassCounts, ClassLabel, Dataset, FeatureKind, FeatureSchema};
pub use error::{Error, Result};
pub use metrics::{ConfusionMatrix, CostMatrix, MetricsReport};
