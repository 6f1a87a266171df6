//! Typed tabular datasets with binary labels.
//!
//! A [`Dataset`] stores its predictors already encoded as `f64` (binary
//! features as 0/1, ordinal features as their integer level, numeric
//! features unchanged), row-major, alongside the labels and optional
//! per-instance weights. Values are validated against the schema whenever a
//! dataset is constructed, so every learner can read the matrix directly.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Numeric,
    /// Integer levels in `min..=max`.
    Ordinal { min: i64, max: i64 },
    /// Two literal tokens; `one` encodes to 1.0 and `zero` to 0.0.
    Binary { one: String, zero: String },
}

impl FeatureKind {
    pub fn yes_no() -> Self {
        FeatureKind::Binary {
            one: "Y".into(),
            zero: "N".into(),
        }
    }

    pub fn ordinal(min: i64, max: i64) -> Self {
        FeatureKind::Ordinal { min, max }
    }

    pub fn parse(&self, token: &str) -> std::result::Result<f64, String> {
        let token = token.trim();
        if token.is_empty() {
            return Err("missing value".into());
        }
        match self {
            FeatureKind::Numeric => match token.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err("expected a finite number".into()),
            },
            FeatureKind::Ordinal { min, max } => match token.parse::<i64>() {
                Ok(v) if (*min..=*max).contains(&v) => Ok(v as f64),
                Ok(v) => Err(format!("level {v} outside {min}..={max}")),
                Err(_) => Err("expected an integer level".into()),
            },
            FeatureKind::Binary { one, zero } => {
                if token == one {
                    Ok(1.0)
                } else if token == zero {
                    Ok(0.0)
                } else {
                    Err(format!("expected `{one}` or `{zero}`"))
                }
            }
        }
    }

    pub fn format(&self, value: f64) -> String {
        match self {
            FeatureKind::Numeric => format!("{value}"),
            FeatureKind::Ordinal { .. } => format!("{}", value as i64),
            FeatureKind::Binary { one, zero } => {
                if value >= 0.5 {
                    one.clone()
                } else {
                    zero.clone()
                }
            }
        }
    }

    pub fn conforms(&self, value: f64) -> bool {
        match self {
            FeatureKind::Numeric => value.is_finite(),
            FeatureKind::Ordinal { min, max } => {
                value.fract() == 0.0 && value >= *min as f64 && value <= *max as f64
            }
            FeatureKind::Binary { .. } => value == 0.0 || value == 1.0,
        }
    }

    /// Nearest valid level for an interpolated value. Numeric values pass through.
    pub fn snap(&self, value: f64) -> f64 {
        match self {
            FeatureKind::Numeric => value,
            FeatureKind::Ordinal { min, max } => value.round().clamp(*min as f64, *max as f64),
            FeatureKind::Binary { .. } => value.round().clamp(0.0, 1.0),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureKind::Numeric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSchema {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        FeatureSchema {
            name: name.into(),
            kind,
        }
    }
}

fn check_schema(schema: &[FeatureSchema]) -> Result<()> {
    let mut seen = HashSet::new();
    for f in schema {
        if !seen.insert(f.name.as_str()) {
            return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
        }
        if let FeatureKind::Ordinal { min, max } = f.kind {
            if min > max {
                return Err(Error::Schema(format!("`{}` has empty level range", f.name)));
            }
        }
    }
    Ok(())
}

/// Binary target. `Positive` is always the rare class of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    Positive,
    Negative,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 2] = [ClassLabel::Positive, ClassLabel::Negative];

    pub fn from_token(token: &str) -> Option<Self> {
        match token.trim() {
            "Y" => Some(ClassLabel::Positive),
            "N" => Some(ClassLabel::Negative),
            _ => None,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            ClassLabel::Positive => "Y",
            ClassLabel::Negative => "N",
        }
    }

    pub fn is_positive(self) -> bool {
        self == ClassLabel::Positive
    }

    /// 1.0 for Positive, 0.0 for Negative.
    pub fn target(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Positive => 0,
            ClassLabel::Negative => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            ClassLabel::Positive => ClassLabel::Negative,
            ClassLabel::Negative => ClassLabel::Positive,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Positive => f.write_str("Positive"),
            ClassLabel::Negative => f.write_str("Negative"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub positive: usize,
    pub negative: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.positive + self.negative
    }

    pub fn get(&self, label: ClassLabel) -> usize {
        match label {
            ClassLabel::Positive => self.positive,
            ClassLabel::Negative => self.negative,
        }
    }

    /// The smaller class; Positive on equal counts.
    pub fn minority(&self) -> ClassLabel {
        if self.negative < self.positive {
            ClassLabel::Negative
        } else {
            ClassLabel::Positive
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Arc<[FeatureSchema]>,
    values: Vec<f64>,
    labels: Vec<ClassLabel>,
    weights: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from per-row value vectors, validating every cell.
    pub fn new(
        schema: Vec<FeatureSchema>,
        rows: Vec<Vec<f64>>,
        labels: Vec<ClassLabel>,
    ) -> Result<Self> {
        let width = schema.len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in &rows {
            if row.len() != width {
                return Err(Error::LengthMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Dataset::from_parts(schema.into(), values, labels, None)
    }

    pub fn from_parts(
        schema: Arc<[FeatureSchema]>,
        values: Vec<f64>,
        labels: Vec<ClassLabel>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_schema(&schema)?;
        let width = schema.len();
        if values.len() != labels.len() * width {
            return Err(Error::LengthMismatch {
                expected: labels.len() * width,
                got: values.len(),
            });
        }
        if width > 0 {
            for (r, row) in values.chunks(width).enumerate() {
                for (f, &v) in schema.iter().zip(row) {
                    if !f.kind.conforms(v) {
                        return Err(Error::InvalidValue(format!(
                            "row {r}: {v} does not conform to `{}`",
                            f.name
                        )));
                    }
                }
            }
        }
        if let Some(w) = &weights {
            check_weights(w, labels.len())?;
        }
        Ok(Dataset {
            schema,
            values,
            labels,
            weights,
        })
    }

    pub fn empty(schema: Arc<[FeatureSchema]>) -> Self {
        Dataset {
            schema,
            values: Vec::new(),
            labels: Vec::new(),
            weights: None,
        }
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn shared_schema(&self) -> Arc<[FeatureSchema]> {
        Arc::clone(&self.schema)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_features();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    /// Row-major encoded values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self, i: usize) -> ClassLabel {
        self.labels[i]
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    /// Instance weights, or all ones when none are attached.
    pub fn weights_or_unit(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![1.0; self.len()],
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, self.len())?;
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    /// Rows at `indices` (repeats allowed), in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let w = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset {
            schema: Arc::clone(&self.schema),
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            weights: self
                .weights
                .as_ref()
                .map(|ws| indices.iter().map(|&i| ws[i]).collect()),
        }
    }

    pub fn indices_of(&self, label: ClassLabel) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == label).collect()
    }
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(Error::InvalidValue(format!(
            "weights must be finite and strictly positive, found {w}"
        )));
    }
    Ok(())
}

/// Assembles a dataset row by row without per-row validation overhead.
#[derive(Debug)]
pub(crate) struct DatasetBuilder {
    schema: Arc<[FeatureSchema]>,
    values: Vec<f64>,
    labels: Vec<ClassLabel>,
    weights: Vec<f64>,
    weighted: bool,
}

impl DatasetBuilder {
    pub(crate) fn new(schema: Arc<[FeatureSchema]>, weighted: bool) -> Self {
        DatasetBuilder {
            schema,
            values: Vec::new(),
            labels: Vec::new(),
            weights: Vec::new(),
            weighted,
        }
    }

    pub(crate) fn push(&mut self, row: &[f64], label: ClassLabel, weight: f64) {
        self.values.extend_from_slice(row);
        self.labels.push(label);
        if self.weighted {
            self.weights.push(weight);
        }
    }

    pub(crate) fn finish(self) -> Result<Dataset> {
        let weights = self.weighted.then_some(self.weights);
        Dataset::from_parts(self.schema, self.values, self.labels, weights)
    }
}

/// Predictor matrix in learner-ready form, with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub values: Vec<f64>,
    pub n_rows: usize,
    pub n_cols: usize,
    pub columns: Vec<String>,
}

impl EncodedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }
}

pub fn encode(ds: &Dataset) -> EncodedMatrix {
    EncodedMatrix {
        values: ds.values.clone(),
        n_rows: ds.len(),
        n_cols: ds.n_features(),
        columns: ds.schema.iter().map(|f| f.name.clone()).collect(),
    }
}

pub fn class_counts(ds: &Dataset) -> ClassCounts {
    count_labels(ds.labels())
}

pub fn count_labels(labels: &[ClassLabel]) -> ClassCounts {
    let positive = labels.iter().filter(|l| l.is_positive()).count();
    ClassCounts {
        positive,
        negative: labels.len() - positive,
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &[FeatureSchema], label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema, label_column).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.to_path_buf()),
        other => other,
    })
}

/// Parses canonical CSV. Reported row numbers are 1-based data rows.
pub fn read_csv<R: Read>(reader: R, schema: &[FeatureSchema], label_column: &str) -> Result<Dataset> {
    check_schema(schema)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyFile(Default::default()));
    }
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let columns = schema
        .iter()
        .map(|f| position(&f.name))
        .collect::<Result<Vec<_>>>()?;
    let label_at = position(label_column)?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        for (f, &c) in schema.iter().zip(&columns) {
            let token = record.get(c).unwrap_or("");
            let v = f.kind.parse(token).map_err(|reason| Error::Parse {
                row: row_no,
                column: f.name.clone(),
                value: token.to_string(),
                reason,
            })?;
            values.push(v);
        }
        let token = record.get(label_at).unwrap_or("");
        let label = ClassLabel::from_token(token).ok_or_else(|| Error::Parse {
            row: row_no,
            column: label_column.to_string(),
            value: token.to_string(),
            reason: "expected `Y` or `N`".into(),
        })?;
        labels.push(label);
    }
    Dataset::from_parts(schema.to_vec().into(), values, labels, None)
}

pub fn write_csv<W: Write>(ds: &Dataset, writer: W, label_column: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.schema.iter().map(|f| f.name.as_str()).collect();
    header.push(label_column);
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, row) in ds.rows().enumerate() {
        record.clear();
        record.extend(ds.schema.iter().zip(row).map(|(f, &v)| f.kind.format(v)));
        record.push(ds.label(i).token().to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, std::io::BufWriter::new(file), label_column)
}

/// Number of rows of a class of size `count` that go to the training side.
/// Rounds half up; the small offset absorbs binary representation error in
/// products such as `0.7 * 14895`.
pub fn train_share(count: usize, fraction: f64) -> usize {
    ((fraction * count as f64) + 0.5 + 1e-9).floor() as usize
}

/// Stratified split returning (train, test) row indices in ascending order.
pub fn stratified_split_indices(
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in ClassLabel::ALL {
        let mut idx = ds.indices_of(label);
        if idx.is_empty() {
            return Err(Error::DegenerateSplit {
                class: label.to_string(),
                side: "input",
            });
        }
        let n_train = train_share(idx.len(), train_fraction).min(idx.len());
        if n_train == 0 {
            return Err(Error::DegenerateSplit {
                class: label.to_string(),
                side: "train",
            });
        }
        if n_train == idx.len() {
            return Err(Error::DegenerateSplit {
                class: label.to_string(),
                side: "test",
            });
        }
        let mut rng = rng::stream(seed, &[rng::label_hash("stratified_split"), label.index() as u64]);
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(ds: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = stratified_split_indices(ds, train_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

/// Column layout of the all-time student dataset.
pub mod student_table {
    use super::{FeatureKind, FeatureSchema};

    pub const LAST_GRADE: &str = "Last Grade";
    pub const LAST_AGE: &str = "Last Age";
    pub const SEX_CD: &str = "Sex Cd";
    pub const ETHNIC_CD: &str = "Ethnic Cd";
    pub const FAIL_FLAG: &str = "Fail Flag";
    pub const MOVE_AHEAD_FLAG: &str = "Move Ahead Flag";
    pub const ON_TRACK_FLAG: &str = "On Track Flag";
    pub const FAILED_MORE_THAN_2: &str = "Failed More than 2";
    pub const AVG_DAYS_ENRL: &str = "Avg Aggr Days Enrl Cnt";
    pub const AVG_DAYS_ABS: &str = "Avg Aggr Days Abs Cnt";
    pub const AVG_SCHOOL_CHANGES: &str = "Avg School Changes";
    pub const AVG_DISTRICT_CHANGES: &str = "Avg District Changes";
    pub const EVER_HOMELESS: &str = "Ever Homeless";
    pub const EVER_TRUANCY: &str = "Ever Truancy Flag";
    pub const EVER_FREE_LUNCH: &str = "Ever Free Lunch";
    pub const EVER_SUSPENSION: &str = "Ever Suspension";
    pub const EVER_EXPULSION: &str = "Ever Expulsion";
    pub const LABEL: &str = "Last Dropout Flag";

    /// All 18 columns in canonical order; the label is last.
    pub const COLUMNS: [&str; 18] = [
        LAST_GRADE,
        LAST_AGE,
        SEX_CD,
        ETHNIC_CD,
        FAIL_FLAG,
        MOVE_AHEAD_FLAG,
        ON_TRACK_FLAG,
        FAILED_MORE_THAN_2,
        AVG_DAYS_ENRL,
        AVG_DAYS_ABS,
        AVG_SCHOOL_CHANGES,
        AVG_DISTRICT_CHANGES,
        EVER_HOMELESS,
        EVER_TRUANCY,
        EVER_FREE_LUNCH,
        EVER_SUSPENSION,
        EVER_EXPULSION,
        LABEL,
    ];

    /// The 17 predictors.
    pub fn schema() -> Vec<FeatureSchema> {
        let yn = FeatureKind::yes_no;
        vec![
            FeatureSchema::new(LAST_GRADE, FeatureKind::ordinal(-1, 12)),
            FeatureSchema::new(LAST_AGE, FeatureKind::Numeric),
            FeatureSchema::new(
                SEX_CD,
                FeatureKind::Binary {
                    one: "M".into(),
                    zero: "F".into(),
                },
            ),
            FeatureSchema::new(ETHNIC_CD, FeatureKind::ordinal(1, 6)),
            FeatureSchema::new(FAIL_FLAG, yn()),
            FeatureSchema::new(MOVE_AHEAD_FLAG, yn()),
            FeatureSchema::new(ON_TRACK_FLAG, yn()),
            FeatureSchema::new(FAILED_MORE_THAN_2, yn()),
            FeatureSchema::new(AVG_DAYS_ENRL, FeatureKind::Numeric),
            FeatureSchema::new(AVG_DAYS_ABS, FeatureKind::Numeric),
            FeatureSchema::new(AVG_SCHOOL_CHANGES, FeatureKind::Numeric),
            FeatureSchema::new(AVG_DISTRICT_CHANGES, FeatureKind::Numeric),
            FeatureSchema::new(EVER_HOMELESS, yn()),
            FeatureSchema::new(EVER_TRUANCY, yn()),
            FeatureSchema::new(EVER_FREE_LUNCH, yn()),
            FeatureSchema::new(EVER_SUSPENSION, yn()),
            FeatureSchema::new(EVER_EXPULSION, yn()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_schema() -> Vec<FeatureSchema> {
        vec![
            FeatureSchema::new("a", FeatureKind::yes_no()),
            FeatureSchema::new("b", FeatureKind::yes_no()),
            FeatureSchema::new("grade", FeatureKind::ordinal(-1, 12)),
        ]
    }

    fn imbalanced(n: usize, positives: usize) -> Dataset {
        let rows = (0..n).map(|i| vec![(i % 2) as f64, 0.0, (i % 13) as f64 - 1.0]).collect();
        let labels = (0..n)
            .map(|i| if i < positives { ClassLabel::Positive } else { ClassLabel::Negative })
            .collect();
        Dataset::new(toy_schema(), rows, labels).unwrap()
    }

    #[test]
    fn encodes_binary_and_ordinal() {
        let ds = Dataset::new(toy_schema(), vec![vec![1.0, 0.0, 9.0]], vec![ClassLabel::Negative]).unwrap();
        let csv = "a,b,grade,y\nY,N,9,N\n";
        let loaded = read_csv(csv.as_bytes(), &toy_schema(), "y").unwrap();
        assert_eq!(loaded, ds);
        let m = encode(&loaded);
        assert_eq!(m.row(0), &[1.0, 0.0, 9.0]);
        assert_eq!(m.columns, vec!["a", "b", "grade"]);
    }

    #[test]
    fn empty_dataset_encodes_to_zero_rows() {
        let ds = Dataset::empty(toy_schema().into());
        let m = encode(&ds);
        assert_eq!(m.n_rows, 0);
        assert_eq!(m.n_cols, 3);
        assert_eq!(class_counts(&ds), ClassCounts::default());
    }

    #[test]
    fn rejects_bad_tokens_with_row_number() {
        let csv = "a,b,grade,y\nY,N,9,N\nY,M,3,Y\n";
        match read_csv(csv.as_bytes(), &toy_schema(), "y") {
            Err(Error::Parse { row, column, value, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "b");
                assert_eq!(value, "M");
            }
            other => panic!("unexpected {other:?}"),
        }
        let missing = "a,grade,y\nY,9,N\n";
        assert!(matches!(
            read_csv(missing.as_bytes(), &toy_schema(), "y"),
            Err(Error::MissingColumn(c)) if c == "b"
        ));
        let blank = "a,b,grade,y\nY,,9,N\n";
        assert!(matches!(read_csv(blank.as_bytes(), &toy_schema(), "y"), Err(Error::Parse { .. })));
        let out_of_range = "a,b,grade,y\nY,N,13,N\n";
        assert!(matches!(read_csv(out_of_range.as_bytes(), &toy_schema(), "y"), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("empty.csv");
        std::fs::write(&p, "").unwrap();
        assert!(matches!(load_csv(&p, &toy_schema(), "y"), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn student_table_values_parse_as_levels() {
        let schema = student_table::schema();
        assert_eq!(schema.len(), 17);
        assert_eq!(schema[0].kind.parse("12").unwrap(), 12.0);
        assert_eq!(schema[3].kind.parse("3").unwrap(), 3.0);
        assert_eq!(schema[1].kind.parse("17.5").unwrap(), 17.5);
        assert!(schema[2].kind.parse("Y").is_err());
    }

    #[test]
    fn counts() {
        let ds = imbalanced(100, 4);
        assert_eq!(class_counts(&ds), ClassCounts { positive: 4, negative: 96 });
    }

    #[test]
    fn split_rounds_each_class_half_up() {
        assert_eq!(train_share(14_895, 0.7), 10_427);
        assert_eq!(train_share(351_911, 0.7), 246_338);
        assert_eq!(train_share(14_895, 0.7) + train_share(351_911, 0.7), 256_765);

        let ds = imbalanced(100, 4);
        let (train, test) = stratified_split(&ds, 0.5, 1).unwrap();
        assert_eq!(class_counts(&train), ClassCounts { positive: 2, negative: 48 });
        assert_eq!(class_counts(&test), ClassCounts { positive: 2, negative: 48 });
    }

    #[test]
    fn split_rejects_single_instance_class() {
        let ds = imbalanced(50, 1);
        assert!(matches!(
            stratified_split(&ds, 0.99, 3),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(matches!(stratified_split(&ds, 0.3, 3), Err(Error::DegenerateSplit { .. })));
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let ds = imbalanced(2000, 80);
        let a = stratified_split_indices(&ds, 0.7, 11).unwrap();
        let b = stratified_split_indices(&ds, 0.7, 11).unwrap();
        let c = stratified_split_indices(&ds, 0.7, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn weights_must_be_positive() {
        let ds = imbalanced(4, 1);
        assert!(ds.clone().with_weights(vec![1.0, 2.0, 0.0, 1.0]).is_err());
        assert!(ds.clone().with_weights(vec![1.0; 3]).is_err());
        let w = ds.with_weights(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(w.subset(&[3, 1]).weights(), Some(&[4.0, 2.0][..]));
    }

    #[test]
    fn duplicate_feature_names_rejected() {
        let schema = vec![
            FeatureSchema::new("a", FeatureKind::Numeric),
            FeatureSchema::new("a", FeatureKind::Numeric),
        ];
        assert!(matches!(Dataset::new(schema, vec![], vec![]), Err(Error::Schema(_))));
    }
}
