//! Single-hidden-layer sigmoid network trained by full-batch gradient descent
//! on weighted binary cross-entropy with weight decay.

use std::collections::HashMap;
use std::fmt::Write;

use rand::Rng;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};
use crate::rng;

const CLAMP: f64 = 1e-12;
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLPConfig {
    pub hidden_units: usize,
    pub decay: f64,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Training stops once an accepted step lowers the loss by less than this.
    pub tolerance: f64,
    pub init_range: f64,
    pub seed: u64,
}

impl Default for MLPConfig {
    fn default() -> Self {
        MLPConfig {
            hidden_units: 3,
            decay: 0.0,
            learning_rate: 0.1,
            max_iterations: 2000,
            tolerance: 1e-8,
            init_range: 0.5,
            seed: 0,
        }
    }
}

impl MLPConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.hidden_units == 0 {
            return bad("hidden_units must be positive");
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return bad("decay must be non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative");
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return bad("init_range must be positive");
        }
        Ok(())
    }
}

/// Network weights plus the input standardization frozen at fit time.
///
/// `w1` is `hidden x (inputs + 1)` row-major with the bias in the last
/// column; `w2` has `hidden + 1` entries, bias last.
#[derive(Debug, Clone, PartialEq)]
pub struct MLPModel {
    inputs: usize,
    hidden: usize,
    w1: Vec<f64>,
    w2: Vec<f64>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MLPModel {
    /// All-zero weights and identity standardization.
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        MLPModel {
            inputs,
            hidden,
            w1: vec![0.0; hidden * (inputs + 1)],
            w2: vec![0.0; hidden + 1],
            mean: vec![0.0; inputs],
            std: vec![1.0; inputs],
        }
    }

    pub fn from_parts(w1: Vec<f64>, w2: Vec<f64>, mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        let inputs = mean.len();
        let hidden = w2.len().saturating_sub(1);
        if hidden == 0 {
            return Err(Error::Config("network needs at least one hidden unit".into()));
        }
        if std.len() != inputs {
            return Err(Error::LengthMismatch {
                expected: inputs,
                got: std.len(),
            });
        }
        if w1.len() != hidden * (inputs + 1) {
            return Err(Error::LengthMismatch {
                expected: hidden * (inputs + 1),
                got: w1.len(),
            });
        }
        if std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidValue("standard deviations must be positive".into()));
        }
        Ok(MLPModel {
            inputs,
            hidden,
            w1,
            w2,
            mean,
            std,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    /// Every weight and bias, `w1` then `w2`; the layout [`gradient`] uses.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.w1.clone();
        p.extend_from_slice(&self.w2);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let n1 = self.w1.len();
        if params.len() != n1 + self.w2.len() {
            return Err(Error::LengthMismatch {
                expected: n1 + self.w2.len(),
                got: params.len(),
            });
        }
        self.w1.copy_from_slice(&params[..n1]);
        self.w2.copy_from_slice(&params[n1..]);
        Ok(())
    }

    pub fn squared_norm(&self) -> f64 {
        self.w1.iter().chain(&self.w2).map(|t| t * t).sum()
    }

    fn check_arity(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.inputs {
            return Err(Error::Arity {
                expected: self.inputs,
                got: row.len(),
            });
        }
        Ok(())
    }

    fn forward_unchecked(&self, row: &[f64]) -> f64 {
        let stride = self.inputs + 1;
        let mut out = self.w2[self.hidden];
        for j in 0..self.hidden {
            let w = &self.w1[j * stride..(j + 1) * stride];
            let mut a = w[self.inputs];
            for k in 0..self.inputs {
                a += w[k] * (row[k] - self.mean[k]) / self.std[k];
            }
            out += self.w2[j] * sigmoid(a);
        }
        sigmoid(out)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.inputs, self.hidden);
        let _ = writeln!(s, "{}", join(self.mean.iter().chain(&self.std)));
        for row in self.w1.chunks(self.inputs + 1) {
            let _ = writeln!(s, "{}", join(row.iter()));
        }
        let _ = writeln!(s, "{}", join(self.w2.iter()));
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| -> Result<(usize, Vec<f64>)> {
            let (i, line) = lines.next().ok_or_else(|| Error::Format {
                line: 0,
                reason: format!("missing {what} line"),
            })?;
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format {
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            Ok((i + 1, nums))
        };
        let (line, dims) = next("dimensions")?;
        if dims.len() != 2 || dims.iter().any(|d| d.fract() != 0.0 || *d < 0.0) {
            return Err(Error::Format {
                line,
                reason: "expected `<inputs> <hidden>`".into(),
            });
        }
        let (inputs, hidden) = (dims[0] as usize, dims[1] as usize);
        let expect = |line: usize, got: &[f64], n: usize| {
            if got.len() == n {
                Ok(())
            } else {
                Err(Error::Format {
                    line,
                    reason: format!("expected {n} values, found {}", got.len()),
                })
            }
        };
        let (line, stdz) = next("standardization")?;
        expect(line, &stdz, 2 * inputs)?;
        let mut w1 = Vec::with_capacity(hidden * (inputs + 1));
        for _ in 0..hidden {
            let (line, row) = next("hidden weight")?;
            expect(line, &row, inputs + 1)?;
            w1.extend(row);
        }
        let (line, w2) = next("output weight")?;
        expect(line, &w2, hidden + 1)?;
        match next("") {
            Err(Error::Format { line: 0, .. }) => {}
            Ok((line, _)) | Err(Error::Format { line, .. }) => {
                return Err(Error::Format {
                    line,
                    reason: "trailing content after model".into(),
                })
            }
            Err(e) => return Err(e),
        }
        let (mean, std) = stdz.split_at(inputs);
        MLPModel::from_parts(w1, w2, mean.to_vec(), std.to_vec())
    }
}

fn join<'a>(xs: impl Iterator<Item = &'a f64>) -> String {
    xs.map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

/// Network output for one encoded row.
pub fn forward(model: &MLPModel, row: &[f64]) -> Result<f64> {
    model.check_arity(row)?;
    Ok(model.forward_unchecked(row))
}

/// Positive iff the output is at least 0.5.
pub fn predict_label(model: &MLPModel, row: &[f64]) -> Result<ClassLabel> {
    Ok(label_of(forward(model, row)?))
}

pub(crate) fn predict_row(model: &MLPModel, row: &[f64]) -> ClassLabel {
    label_of(model.forward_unchecked(row))
}

fn label_of(p: f64) -> ClassLabel {
    if p >= 0.5 {
        ClassLabel::Positive
    } else {
        ClassLabel::Negative
    }
}

/// Training data in standardized feature-major form.
struct Prepared {
    n: usize,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    /// Instance weights divided by their total.
    weight: Vec<f64>,
}

impl Prepared {
    fn new(model: &MLPModel, rows: &[&[f64]], labels: &[ClassLabel], weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        let columns = (0..model.inputs)
            .map(|k| rows.iter().map(|r| (r[k] - model.mean[k]) / model.std[k]).collect())
            .collect();
        Prepared {
            n: rows.len(),
            columns,
            target: labels.iter().map(|l| l.target()).collect(),
            weight: weights.iter().map(|w| w / total).collect(),
        }
    }

    fn from_dataset(model: &MLPModel, ds: &Dataset, weights: &[f64]) -> Self {
        let rows: Vec<&[f64]> = ds.rows().collect();
        Prepared::new(model, &rows, ds.labels(), weights)
    }
}

/// Fixed-order dot product with four running sums.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn sum(a: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l];
        }
    }
    let tail: f64 = a[4 * chunks..].iter().sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

struct Workspace {
    hidden_out: Vec<Vec<f64>>,
    delta: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    fn new(hidden: usize, n: usize) -> Self {
        Workspace {
            hidden_out: vec![vec![0.0; n]; hidden],
            delta: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }
}

/// Loss at `params`, and its gradient into `grad` when given.
fn evaluate(
    data: &Prepared,
    inputs: usize,
    hidden: usize,
    params: &[f64],
    decay: f64,
    ws: &mut Workspace,
    grad: Option<&mut [f64]>,
) -> f64 {
    let stride = inputs + 1;
    let (w1, w2) = params.split_at(hidden * stride);
    let n = data.n;
    let out = &mut ws.delta;
    out.fill(w2[hidden]);
    for j in 0..hidden {
        let w = &w1[j * stride..(j + 1) * stride];
        let h = &mut ws.hidden_out[j];
        h.fill(w[inputs]);
        for k in 0..inputs {
            let wk = w[k];
            for (hi, xi) in h.iter_mut().zip(&data.columns[k]) {
                *hi += wk * xi;
            }
        }
        let v = w2[j];
        for (hi, oi) in h.iter_mut().zip(out.iter_mut()) {
            *hi = sigmoid(*hi);
            *oi += v * *hi;
        }
    }
    // `out` now holds output pre-activations; turn them into dLoss/dz.
    let mut data_loss = 0.0;
    for i in 0..n {
        let p = sigmoid(out[i]);
        let y = data.target[i];
        let pc = p.clamp(CLAMP, 1.0 - CLAMP);
        data_loss -= data.weight[i] * (y * pc.ln() + (1.0 - y) * (1.0 - pc).ln());
        out[i] = if p == pc { data.weight[i] * (p - y) } else { 0.0 };
    }
    let penalty: f64 = params.iter().map(|t| t * t).sum();
    let loss = data_loss + decay * penalty;
    let Some(grad) = grad else {
        return loss;
    };
    let (g1, g2) = grad.split_at_mut(hidden * stride);
    let delta = &ws.delta;
    g2[hidden] = sum(delta);
    for j in 0..hidden {
        let h = &ws.hidden_out[j];
        g2[j] = dot(delta, h);
        let v = w2[j];
        let back = &mut ws.scratch;
        for ((b, d), hi) in back.iter_mut().zip(delta).zip(h) {
            *b = d * v * hi * (1.0 - hi);
        }
        let g = &mut g1[j * stride..(j + 1) * stride];
        for k in 0..inputs {
            g[k] = dot(back, &data.columns[k]);
        }
        g[inputs] = sum(back);
    }
    for (g, t) in grad.iter_mut().zip(params) {
        *g += 2.0 * decay * t;
    }
    loss
}

fn check_inputs(model: &MLPModel, ds: &Dataset, weights: &[f64]) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if ds.n_features() != model.inputs {
        return Err(Error::Arity {
            expected: model.inputs,
            got: ds.n_features(),
        });
    }
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

/// `sum_i w_i BCE(y_i, p_i) / sum_i w_i + decay * sum(theta^2)`, with every
/// weight and bias in the penalty and probabilities clamped to
/// `[1e-12, 1 - 1e-12]`.
pub fn loss(model: &MLPModel, ds: &Dataset, weights: &[f64], decay: f64) -> Result<f64> {
    check_inputs(model, ds, weights)?;
    let data = Prepared::from_dataset(model, ds, weights);
    let mut ws = Workspace::new(model.hidden, data.n);
    Ok(evaluate(&data, model.inputs, model.hidden, &model.params(), decay, &mut ws, None))
}

/// Analytic gradient of [`loss`] in the [`MLPModel::params`] layout. The
/// data term contributes nothing for instances whose probability is clamped.
pub fn gradient(model: &MLPModel, ds: &Dataset, weights: &[f64], decay: f64) -> Result<Vec<f64>> {
    check_inputs(model, ds, weights)?;
    let data = Prepared::from_dataset(model, ds, weights);
    let mut ws = Workspace::new(model.hidden, data.n);
    let params = model.params();
    let mut g = vec![0.0; params.len()];
    evaluate(&data, model.inputs, model.hidden, &params, decay, &mut ws, Some(&mut g));
    Ok(g)
}

/// Weighted per-feature mean and standard deviation; a constant feature
/// gets 1. Weighting makes a repeated row and its merged form agree.
fn standardization(rows: &[&[f64]], weights: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = weights.iter().sum();
    let mut mean = vec![0.0; d];
    for (row, w) in rows.iter().zip(weights) {
        for (m, x) in mean.iter_mut().zip(row.iter()) {
            *m += w * x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut var = vec![0.0; d];
    for (row, w) in rows.iter().zip(weights) {
        for k in 0..d {
            var[k] += w * (row[k] - mean[k]).powi(2);
        }
    }
    let std = var
        .iter()
        .map(|v| {
            let s = (v / total).sqrt();
            if s > 1e-12 {
                s
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

/// Rows with identical features and label collapse into one row carrying the
/// summed weight, which leaves the normalized loss unchanged.
fn merge_duplicates<'a>(ds: &'a Dataset, weights: &[f64]) -> (Vec<&'a [f64]>, Vec<ClassLabel>, Vec<f64>) {
    let mut index: HashMap<(Vec<u64>, ClassLabel), usize> = HashMap::with_capacity(ds.len());
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut merged = Vec::new();
    for (i, row) in ds.rows().enumerate() {
        let key = (row.iter().map(|x| x.to_bits()).collect(), ds.label(i));
        match index.get(&key) {
            Some(&at) => merged[at] += weights[i],
            None => {
                index.insert(key, rows.len());
                rows.push(row);
                labels.push(ds.label(i));
                merged.push(weights[i]);
            }
        }
    }
    (rows, labels, merged)
}

/// Trains a network and returns it with the loss after initialization and
/// after every accepted step.
pub fn train_traced(ds: &Dataset, weights: &[f64], cfg: &MLPConfig) -> Result<(MLPModel, Vec<f64>)> {
    cfg.validate()?;
    let mut model = MLPModel::zeros(ds.n_features(), cfg.hidden_units);
    check_inputs(&model, ds, weights)?;
    let counts = crate::dataset::class_counts(ds);
    if counts.positive == 0 || counts.negative == 0 {
        return Err(Error::SingleClass);
    }
    let (rows, labels, merged) = merge_duplicates(ds, weights);
    (model.mean, model.std) = standardization(&rows, &merged, model.inputs);
    let mut init = rng::stream(cfg.seed, &[rng::label_hash("mlp_init")]);
    let r = cfg.init_range;
    let mut params: Vec<f64> = (0..model.params().len()).map(|_| init.random_range(-r..=r)).collect();

    let data = Prepared::new(&model, &rows, &labels, &merged);
    let (inputs, hidden) = (model.inputs, model.hidden);
    let mut ws = Workspace::new(hidden, data.n);
    let mut grad = vec![0.0; params.len()];
    let mut current = evaluate(&data, inputs, hidden, &params, cfg.decay, &mut ws, Some(&mut grad));
    if !current.is_finite() {
        return Err(Error::NonFiniteLoss { iteration: 0 });
    }
    let mut history = vec![current];
    let mut candidate = params.clone();
    let mut cand_grad = grad.clone();
    for iteration in 1..=cfg.max_iterations {
        let mut step = cfg.learning_rate;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            for ((c, p), g) in candidate.iter_mut().zip(&params).zip(&grad) {
                *c = p - step * g;
            }
            let l = evaluate(&data, inputs, hidden, &candidate, cfg.decay, &mut ws, Some(&mut cand_grad));
            if !l.is_finite() {
                return Err(Error::NonFiniteLoss { iteration });
            }
            if l <= current {
                accepted = Some(l);
                break;
            }
            step /= 2.0;
        }
        let Some(l) = accepted else {
            break;
        };
        let decrease = current - l;
        std::mem::swap(&mut params, &mut candidate);
        std::mem::swap(&mut grad, &mut cand_grad);
        current = l;
        history.push(l);
        if decrease < cfg.tolerance {
            break;
        }
    }
    model.set_params(&params)?;
    Ok((model, history))
}

pub fn train(ds: &Dataset, weights: &[f64], cfg: &MLPConfig) -> Result<MLPModel> {
    train_traced(ds, weights, cfg).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureKind, FeatureSchema};
    use approx::assert_relative_eq;
    use ClassLabel::{Negative as N, Positive as P};

    fn numeric(rows: Vec<Vec<f64>>, labels: Vec<ClassLabel>) -> Dataset {
        let d = rows[0].len();
        let schema = (0..d)
            .map(|k| FeatureSchema::new(format!("x{k}"), FeatureKind::Numeric))
            .collect();
        Dataset::new(schema, rows, labels).unwrap()
    }

    fn xor() -> Dataset {
        numeric(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![N, P, P, N],
        )
    }

    #[test]
    fn zero_model_outputs_half_and_predicts_positive() {
        let m = MLPModel::zeros(3, 2);
        assert_eq!(forward(&m, &[1.0, -4.0, 9.0]).unwrap(), 0.5);
        assert_eq!(predict_label(&m, &[0.0, 0.0, 0.0]).unwrap(), P);
        assert!(forward(&m, &[1.0]).is_err());
    }

    #[test]
    fn hand_set_two_two_one() {
        // w1 rows: [1, -1 | 0.5], [2, 0.5 | -1]; w2 = [1.5, -2 | 0.25]
        let m = MLPModel::from_parts(
            vec![1.0, -1.0, 0.5, 2.0, 0.5, -1.0],
            vec![1.5, -2.0, 0.25],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let h1 = s(1.0 * 1.0 + 0.5);
        let h2 = s(2.0 * 1.0 - 1.0);
        let want = s(1.5 * h1 - 2.0 * h2 + 0.25);
        assert_relative_eq!(forward(&m, &[1.0, 0.0]).unwrap(), want, max_relative = 1e-15);
    }

    #[test]
    fn decay_term_is_additive() {
        let d = xor();
        let mut m = MLPModel::zeros(2, 2);
        m.set_params(&[0.3, -0.2, 0.1, 0.5, 0.4, -0.6, 0.7, -0.8, 0.05]).unwrap();
        let w = vec![1.0; 4];
        let l0 = loss(&m, &d, &w, 0.0).unwrap();
        let l1 = loss(&m, &d, &w, 0.1).unwrap();
        assert_relative_eq!(l1 - l0, 0.1 * m.squared_norm(), max_relative = 1e-12);
        let g0 = gradient(&m, &d, &w, 0.0).unwrap();
        let g1 = gradient(&m, &d, &w, 0.1).unwrap();
        for ((a, b), t) in g1.iter().zip(&g0).zip(m.params()) {
            assert_relative_eq!(a - b, 0.2 * t, epsilon = 1e-15);
        }
    }

    #[test]
    fn positive_weight_scales_contribution() {
        // One positive and two negatives; doubling the positive weight
        // doubles its share of the unnormalized loss.
        let d = numeric(vec![vec![0.0], vec![1.0], vec![2.0]], vec![P, N, N]);
        let mut m = MLPModel::zeros(1, 1);
        m.set_params(&[0.4, -0.3, 0.9, 0.1]).unwrap();
        let bce = |i: usize| {
            let p = forward(&m, d.row(i)).unwrap();
            if d.label(i).is_positive() {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        };
        let uniform = loss(&m, &d, &[1.0, 1.0, 1.0], 0.0).unwrap();
        let weighted = loss(&m, &d, &[2.0, 1.0, 1.0], 0.0).unwrap();
        assert_relative_eq!(uniform * 3.0, bce(0) + bce(1) + bce(2), max_relative = 1e-12);
        assert_relative_eq!(weighted * 4.0, 2.0 * bce(0) + bce(1) + bce(2), max_relative = 1e-12);
    }

    #[test]
    fn confident_predictions_have_tiny_loss_and_gradient() {
        let d = numeric(vec![vec![-1.0], vec![1.0]], vec![N, P]);
        let mut m = MLPModel::zeros(1, 1);
        m.set_params(&[60.0, 0.0, 80.0, -40.0]).unwrap();
        let l = loss(&m, &d, &[1.0, 1.0], 0.0).unwrap();
        assert!(l < 1e-11, "{l}");
        let g = gradient(&m, &d, &[1.0, 1.0], 0.0).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-11), "{g:?}");
    }

    #[test]
    fn xor_is_learnt_for_some_seed() {
        let d = xor();
        let w = vec![1.0; 4];
        let solved = (0..10).any(|seed| {
            let cfg = MLPConfig { hidden_units: 3, seed, ..Default::default() };
            let m = train(&d, &w, &cfg).unwrap();
            d.rows().enumerate().all(|(i, r)| predict_label(&m, r).unwrap() == d.label(i))
        });
        assert!(solved);
    }

    #[test]
    fn decay_shrinks_weights() {
        let d = xor();
        let w = vec![1.0; 4];
        let base = MLPConfig { hidden_units: 3, seed: 4, max_iterations: 500, ..Default::default() };
        let free = train(&d, &w, &base).unwrap();
        let held = train(&d, &w, &MLPConfig { decay: 0.1, ..base }).unwrap();
        assert!(held.squared_norm() < free.squared_norm());
    }

    #[test]
    fn training_is_deterministic_and_monotone() {
        let d = xor();
        let w = vec![1.0, 2.0, 1.0, 0.5];
        let cfg = MLPConfig { hidden_units: 2, seed: 9, max_iterations: 300, ..Default::default() };
        let (a, hist) = train_traced(&d, &w, &cfg).unwrap();
        let b = train(&d, &w, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(hist.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn duplicates_merge_without_changing_the_model_much() {
        let base = xor();
        let dup = base.subset(&[0, 1, 1, 2, 3, 3, 3]);
        let merged = numeric(
            base.rows().map(|r| r.to_vec()).collect(),
            base.labels().to_vec(),
        );
        let cfg = MLPConfig { hidden_units: 2, seed: 1, max_iterations: 50, ..Default::default() };
        let a = train(&dup, &vec![1.0; 7], &cfg).unwrap();
        let b = train(&merged, &[1.0, 2.0, 1.0, 3.0], &cfg).unwrap();
        for (x, y) in a.params().iter().zip(b.params()) {
            assert_relative_eq!(*x, y, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let d = numeric(vec![vec![0.0], vec![1.0]], vec![N, N]);
        assert!(matches!(train(&d, &[1.0, 1.0], &MLPConfig::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn text_round_trip() {
        let d = xor();
        let m = train(&d, &[1.0; 4], &MLPConfig { max_iterations: 20, ..Default::default() }).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("2 3\n"));
        assert_eq!(MLPModel::from_text(&text).unwrap(), m);
        assert!(MLPModel::from_text("2 3\n0 0 1 1\n").is_err());
    }
}
