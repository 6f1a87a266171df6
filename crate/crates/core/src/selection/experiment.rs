use std::io::Write;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::metrics::{CostMatrix, MetricsReport};
use crate::par;

use super::cv::{task_seed, tune_specs, SpecTuning};
use super::fit::fit_point;
use super::{ExperimentConfig, ParamPoint};

/// Test-set metrics of one spec refitted at its selected point.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub spec_id: String,
    pub point: ParamPoint,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningReport {
    /// One entry per spec, in configuration order.
    pub tuning: Vec<SpecTuning>,
    /// Sorted by test recall, highest first; ties keep configuration order.
    pub results: Vec<TestResult>,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv(e)
}

impl TuningReport {
    pub fn result(&self, spec_id: &str) -> Option<&TestResult> {
        self.results.iter().find(|r| r.spec_id == spec_id)
    }

    /// `spec_id,params,mean_cv_f5`, one row per grid point.
    pub fn write_tuning_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["spec_id", "params", "mean_cv_f5"]).map_err(csv_err)?;
        for t in &self.tuning {
            for (p, f) in t.points.iter().zip(&t.mean_f5) {
                out.write_record([t.spec.id.clone(), p.to_string(), format!("{f:.6}")])
                    .map_err(csv_err)?;
            }
        }
        out.flush().map_err(|e| Error::io("tuning.csv", e))
    }

    /// `spec_id,precision,recall,f5,accuracy`, sorted by recall.
    pub fn write_test_results_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["spec_id", "precision", "recall", "f5", "accuracy"])
            .map_err(csv_err)?;
        for r in &self.results {
            let m = &r.metrics;
            out.write_record([
                r.spec_id.clone(),
                format!("{:.6}", m.precision),
                format!("{:.6}", m.recall),
                format!("{:.6}", m.f_beta),
                format!("{:.6}", m.accuracy),
            ])
            .map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::io("test_results.csv", e))
    }

    /// Full confusion counts and the selected point per spec.
    pub fn write_test_metrics_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["params", "mean_cv_f5"];
        header.splice(0..0, MetricsReport::CSV_HEADER.iter().copied());
        out.write_record(&header).map_err(csv_err)?;
        for r in &self.results {
            let tuned = self
                .tuning
                .iter()
                .find(|t| t.spec.id == r.spec_id)
                .expect("every result has a tuning entry");
            let mut row = r.metrics.csv_row(&r.spec_id);
            row.push(r.point.to_string());
            row.push(format!("{:.6}", tuned.selected_f5()));
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::io("test_metrics.csv", e))
    }
}

/// Tunes every configured spec by cross-validation on `train`, refits each at
/// its selected point on all of `train` (handler applied), and scores it on
/// `test`.
pub fn run_experiment(train: &Dataset, test: &Dataset, cfg: &ExperimentConfig) -> Result<TuningReport> {
    cfg.validate()?;
    if train.schema() != test.schema() {
        return Err(Error::Schema("train and test schemas differ".into()));
    }
    let tuning = tune_specs(&cfg.specs, train, cfg)?;
    let mut results = par::try_map_slice(&tuning, |t| -> Result<TestResult> {
        let point = t.selected_point();
        let seed = task_seed(cfg.seed, &t.spec, cfg.folds);
        let model = fit_point(&t.spec, &point, train, seed, cfg)?;
        let predictions = model.predict_dataset(test)?;
        let costs = point
            .c_fn()
            .map(CostMatrix::with_false_negative)
            .unwrap_or_else(CostMatrix::unit);
        Ok(TestResult {
            spec_id: t.spec.id.clone(),
            point,
            metrics: MetricsReport::evaluate(test.labels(), &predictions, &costs)?,
        })
    })?;
    results.sort_by(|a, b| b.metrics.recall.total_cmp(&a.metrics.recall));
    Ok(TuningReport { tuning, results })
}
