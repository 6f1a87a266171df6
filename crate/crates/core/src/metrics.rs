//! Confusion and cost matrices and the rare-class evaluation measures.
//!
//! Every measure is taken with respect to [`ClassLabel::Positive`].

use crate::dataset::ClassLabel;
use crate::error::{Error, Result};

/// The beta used throughout model selection.
pub const F5_BETA: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_pos: u64,
    pub false_neg: u64,
    pub false_pos: u64,
    pub true_neg: u64,
}

impl ConfusionMatrix {
    pub fn new(true_pos: u64, false_neg: u64, false_pos: u64, true_neg: u64) -> Self {
        ConfusionMatrix {
            true_pos,
            false_neg,
            false_pos,
            true_neg,
        }
    }

    pub fn total(&self) -> u64 {
        self.true_pos + self.false_neg + self.false_pos + self.true_neg
    }

    pub fn actual_positives(&self) -> u64 {
        self.true_pos + self.false_neg
    }

    pub fn predicted_positives(&self) -> u64 {
        self.true_pos + self.false_pos
    }

    pub fn record(&mut self, actual: ClassLabel, predicted: ClassLabel) {
        match (actual, predicted) {
            (ClassLabel::Positive, ClassLabel::Positive) => self.true_pos += 1,
            (ClassLabel::Positive, ClassLabel::Negative) => self.false_neg += 1,
            (ClassLabel::Negative, ClassLabel::Positive) => self.false_pos += 1,
            (ClassLabel::Negative, ClassLabel::Negative) => self.true_neg += 1,
        }
    }

    /// True when no instance was predicted Positive, so precision is 0 by convention.
    pub fn precision_is_degenerate(&self) -> bool {
        self.predicted_positives() == 0
    }
}

/// Per-outcome costs; entries may be negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostMatrix {
    pub true_pos: f64,
    pub false_neg: f64,
    pub false_pos: f64,
    pub true_neg: f64,
}

impl CostMatrix {
    pub fn new(true_pos: f64, false_neg: f64, false_pos: f64, true_neg: f64) -> Result<Self> {
        let c = CostMatrix {
            true_pos,
            false_neg,
            false_pos,
            true_neg,
        };
        if [true_pos, false_neg, false_pos, true_neg].iter().all(|v| v.is_finite()) {
            Ok(c)
        } else {
            Err(Error::InvalidValue(format!("cost matrix entries must be finite: {c:?}")))
        }
    }

    /// Zero for correct predictions, one for either error.
    pub fn unit() -> Self {
        CostMatrix {
            true_pos: 0.0,
            false_neg: 1.0,
            false_pos: 1.0,
            true_neg: 0.0,
        }
    }

    /// `C_FN = false_neg`, `C_FP = 1`, zero for correct predictions.
    pub fn with_false_negative(false_neg: f64) -> Self {
        CostMatrix {
            false_neg,
            ..CostMatrix::unit()
        }
    }

    pub fn cost(&self, actual: ClassLabel, predicted: ClassLabel) -> f64 {
        match (actual, predicted) {
            (ClassLabel::Positive, ClassLabel::Positive) => self.true_pos,
            (ClassLabel::Positive, ClassLabel::Negative) => self.false_neg,
            (ClassLabel::Negative, ClassLabel::Positive) => self.false_pos,
            (ClassLabel::Negative, ClassLabel::Negative) => self.true_neg,
        }
    }

    pub fn max_abs(&self) -> f64 {
        [self.true_pos, self.false_neg, self.false_pos, self.true_neg]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

pub fn confusion(labels: &[ClassLabel], predictions: &[ClassLabel]) -> Result<ConfusionMatrix> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            got: predictions.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&a, &p) in labels.iter().zip(predictions) {
        cm.record(a, p);
    }
    Ok(cm)
}

/// `tp / (tp + fp)`, or 0 when nothing was predicted Positive.
pub fn precision(cm: &ConfusionMatrix) -> f64 {
    if cm.precision_is_degenerate() {
        0.0
    } else {
        cm.true_pos as f64 / cm.predicted_positives() as f64
    }
}

pub fn recall(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.actual_positives() {
        0 => Err(Error::NoPositives),
        n => Ok(cm.true_pos as f64 / n as f64),
    }
}

/// Weighted harmonic combination of precision and recall; 0 when both are 0.
pub fn f_beta(cm: &ConfusionMatrix, beta: f64) -> Result<f64> {
    let r = recall(cm)?;
    let p = precision(cm);
    Ok(f_beta_from(p, r, beta))
}

pub fn f_beta_from(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom == 0.0 {
        0.0
    } else {
        (1.0 + b2) * precision * recall / denom
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    match cm.total() {
        0 => Err(Error::EmptyConfusion),
        n => Ok((cm.true_pos + cm.true_neg) as f64 / n as f64),
    }
}

pub fn total_cost(cm: &ConfusionMatrix, costs: &CostMatrix) -> f64 {
    cm.true_pos as f64 * costs.true_pos
        + cm.false_neg as f64 * costs.false_neg
        + cm.false_pos as f64 * costs.false_pos
        + cm.true_neg as f64 * costs.true_neg
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub accuracy: f64,
    pub beta: f64,
    pub total_cost: f64,
    pub degenerate_precision: bool,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    pub const CSV_HEADER: [&'static str; 10] = [
        "model_id",
        "precision",
        "recall",
        "f5",
        "accuracy",
        "total_cost",
        "tp",
        "fn",
        "fp",
        "tn",
    ];

    pub fn from_confusion(cm: ConfusionMatrix, beta: f64, costs: &CostMatrix) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidValue(format!("beta must be positive, got {beta}")));
        }
        Ok(MetricsReport {
            precision: precision(&cm),
            recall: recall(&cm)?,
            f_beta: f_beta(&cm, beta)?,
            accuracy: accuracy(&cm)?,
            beta,
            total_cost: total_cost(&cm, costs),
            degenerate_precision: cm.precision_is_degenerate(),
            confusion: cm,
        })
    }

    pub fn evaluate(labels: &[ClassLabel], predictions: &[ClassLabel], costs: &CostMatrix) -> Result<Self> {
        MetricsReport::from_confusion(confusion(labels, predictions)?, F5_BETA, costs)
    }

    /// One CSV row in [`Self::CSV_HEADER`] order.
    pub fn csv_row(&self, model_id: &str) -> Vec<String> {
        let cm = self.confusion;
        vec![
            model_id.to_string(),
            format!("{:.6}", self.precision),
            format!("{:.6}", self.recall),
            format!("{:.6}", self.f_beta),
            format!("{:.6}", self.accuracy),
            format!("{}", self.total_cost),
            cm.true_pos.to_string(),
            cm.false_neg.to_string(),
            cm.false_pos.to_string(),
            cm.true_neg.to_string(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ClassLabel::{Negative as N, Positive as P};

    #[test]
    fn accuracy_pitfall() {
        let cm = confusion(
            &[vec![P; 14_895], vec![N; 351_911]].concat(),
            &vec![N; 366_806],
        )
        .unwrap();
        assert_eq!(cm, ConfusionMatrix::new(0, 14_895, 0, 351_911));
        assert_eq!(precision(&cm), 0.0);
        assert!(cm.precision_is_degenerate());
        assert_eq!(recall(&cm).unwrap(), 0.0);
        assert!((accuracy(&cm).unwrap() - 0.9594).abs() < 5e-5);
    }

    #[test]
    fn hand_counted_cases() {
        let cm = confusion(&[P, P, N, N], &[P, N, P, N]).unwrap();
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 1));
        assert_eq!(accuracy(&cm).unwrap(), 0.5);

        let perfect = confusion(&[P, N, N], &[P, N, N]).unwrap();
        assert_eq!((perfect.false_neg, perfect.false_pos), (0, 0));
        assert_eq!(accuracy(&perfect).unwrap(), 1.0);
        assert_eq!(recall(&perfect).unwrap(), 1.0);
        assert_eq!(precision(&perfect), 1.0);

        assert!(confusion(&[P], &[P, N]).is_err());
    }

    #[test]
    fn precision_and_recall_values() {
        assert_relative_eq!(precision(&ConfusionMatrix::new(90, 5, 10, 95)), 0.9);
        assert_relative_eq!(recall(&ConfusionMatrix::new(90, 10, 3, 97)).unwrap(), 0.9);
        assert!(matches!(recall(&ConfusionMatrix::new(0, 0, 3, 7)), Err(Error::NoPositives)));
        assert!(matches!(accuracy(&ConfusionMatrix::default()), Err(Error::EmptyConfusion)));
    }

    #[test]
    fn f_beta_values() {
        assert_relative_eq!(f_beta_from(0.6, 0.6, 1.0), 0.6, epsilon = 1e-15);
        assert_relative_eq!(f_beta_from(0.5, 0.9, 5.0), 26.0 * 0.45 / 13.4, epsilon = 1e-15);
        assert_relative_eq!(f_beta_from(0.5, 0.9, 5.0), 0.873_134_328_358_209, epsilon = 1e-12);
        assert_eq!(f_beta_from(0.0, 0.0, 5.0), 0.0);
        assert_eq!(f_beta(&ConfusionMatrix::new(0, 5, 0, 5), 5.0).unwrap(), 0.0);
    }

    #[test]
    fn eq1_cost() {
        let cm = ConfusionMatrix::new(5, 2, 3, 90);
        assert_eq!(total_cost(&cm, &CostMatrix::new(0.0, 10.0, 1.0, 0.0).unwrap()), 23.0);
        assert_eq!(total_cost(&cm, &CostMatrix::unit()), 5.0);
        assert_eq!(total_cost(&cm, &CostMatrix::new(0.0, 0.0, 0.0, 0.0).unwrap()), 0.0);
        assert!(CostMatrix::new(0.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn report_row() {
        let r = MetricsReport::from_confusion(ConfusionMatrix::new(5, 2, 3, 90), F5_BETA, &CostMatrix::with_false_negative(10.0))
            .unwrap();
        let row = r.csv_row("m");
        assert_eq!(row.len(), MetricsReport::CSV_HEADER.len());
        assert_eq!(row[5], "23");
        assert_eq!(&row[6..], &["5", "2", "3", "90"]);
    }
}
