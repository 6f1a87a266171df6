mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dropout_core::dataset::{self, student_table};
use dropout_core::etl::{self, SynthConfig};
use dropout_core::imbalance::{self, SmoteConfig};
use dropout_core::metrics::{self, ConfusionMatrix, CostMatrix, MetricsReport};
use dropout_core::rng;
use dropout_core::selection::{
    run_experiment, ExperimentConfig, Grids, ModelSpec, EXPERIMENT_LEARNING_RATE, EXPERIMENT_MIN_LEAF,
};
use dropout_core::ClassLabel;

use manifest::{join, Manifest};

#[derive(Parser)]
#[command(name = "dropout", version, about = "Imbalanced dropout prediction pipeline")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort as yearly enrollment and discipline CSVs.
    GenData {
        #[arg(long, default_value_t = 20_000)]
        students: usize,
        #[arg(long, default_value_t = 0.04)]
        dropout_rate: f64,
        #[arg(long, default_value_t = 13)]
        years: usize,
        #[arg(long, default_value_t = 1999)]
        first_year: i32,
        #[arg(long, default_value_t = 0.0)]
        conflict_rate: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge yearly files into alltime.csv and conflicts.csv.
    Etl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebalance an all-time CSV.
    Resample {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        over_ratio: f64,
    },
    /// Tune, refit and test the model matrix on an all-time CSV.
    Experiment(ExperimentArgs),
    /// Score predictions, given either a CSV or the four confusion counts.
    Metrics {
        /// CSV with `actual` and `predicted` columns of Y/N.
        #[arg(long, conflicts_with = "counts")]
        input: Option<PathBuf>,
        /// TP FN FP TN
        #[arg(long, num_args = 4, value_names = ["TP", "FN", "FP", "TN"])]
        counts: Option<Vec<u64>>,
        #[arg(long, default_value = "model")]
        model_id: String,
        /// False-negative cost; false positives cost 1.
        #[arg(long, default_value_t = 1.0)]
        c_fn: f64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Comma-separated spec ids; all 17 when omitted.
    #[arg(long, value_delimiter = ',')]
    specs: Option<Vec<String>>,
    #[arg(long, default_value_t = EXPERIMENT_MIN_LEAF)]
    min_leaf: usize,
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    /// Override the cp grid.
    #[arg(long, value_delimiter = ',')]
    cp: Option<Vec<f64>>,
    /// Override the bagging trials grid.
    #[arg(long, value_delimiter = ',')]
    trials: Option<Vec<usize>>,
    /// Override the hidden-unit grid.
    #[arg(long, value_delimiter = ',')]
    size: Option<Vec<usize>>,
    /// Override the weight-decay grid.
    #[arg(long, value_delimiter = ',')]
    decay: Option<Vec<f64>>,
    /// Override the false-negative cost grid.
    #[arg(long, value_delimiter = ',')]
    c_fn: Option<Vec<f64>>,
    #[arg(long, default_value_t = EXPERIMENT_LEARNING_RATE)]
    learning_rate: f64,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Down,
    Up,
    Smote,
    Hybrid,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Down => "down",
            Method::Up => "up",
            Method::Smote => "smote",
            Method::Hybrid => "hybrid",
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn gen_data(
    students: usize,
    dropout_rate: f64,
    years: usize,
    first_year: i32,
    conflict_rate: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let cfg = SynthConfig {
        students,
        dropout_rate,
        years,
        first_year,
        seed,
        conflict_rate,
        ..SynthConfig::default()
    };
    let cohort = etl::generate_synthetic(&cfg)?;
    etl::write_year_dir(out, &cohort.years)?;
    let mut m = Manifest::new("gen-data", Some(seed));
    m.path("out", out);
    m.set("students", students);
    m.set("dropout_rate", dropout_rate);
    m.set("years", years);
    m.set("first_year", first_year);
    m.set("conflict_rate", conflict_rate);
    m.set("dropouts", cohort.dropouts);
    m.set("injected_conflicts", cohort.injected_conflicts.len());
    m.set("risk_intercept", cohort.intercept);
    m.write(out)
}

fn run_etl(input: &Path, out: &Path) -> Result<()> {
    let years = etl::read_year_dir(input)?;
    let build = etl::build_all_time(&years)?;
    etl::write_all_time(out, &build)?;
    let positives = build.records.iter().filter(|(_, r)| r.last_dropout.is_positive()).count();
    let mut m = Manifest::new("etl", None);
    m.path("input", input);
    m.path("out", out);
    m.set("years", join(&years.iter().map(|y| y.year).collect::<Vec<_>>()));
    m.set("students", build.records.len());
    m.set("positives", positives);
    m.set("conflicts", build.conflicts.len());
    m.write(out)
}

fn load_alltime(path: &Path) -> Result<dataset::Dataset> {
    Ok(dataset::load_csv(path, &student_table::schema(), student_table::LABEL)?)
}

fn resample(input: &Path, out: &Path, method: Method, seed: u64, k: usize, over_ratio: f64) -> Result<()> {
    let ds = load_alltime(input)?;
    let smote_cfg = SmoteConfig {
        k_neighbors: k,
        over_ratio,
        seed,
        ..SmoteConfig::default()
    };
    let outcome = match method {
        Method::Down => imbalance::random_under_sample(&ds, seed)?,
        Method::Up => imbalance::random_over_sample(&ds, seed)?,
        Method::Smote => imbalance::smote(&ds, &smote_cfg)?,
        Method::Hybrid => imbalance::hybrid_smote_under(&ds, &smote_cfg, seed)?,
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    dataset::write_csv(&outcome.dataset, create(out)?, student_table::LABEL)?;
    let counts = dataset::class_counts(&outcome.dataset);
    let mut m = Manifest::new("resample", Some(seed));
    m.path("input", input);
    m.path("out", out);
    m.set("method", method.name());
    m.set("k", k);
    m.set("over_ratio", over_ratio);
    m.set("input_rows", ds.len());
    m.set("output_positive", counts.positive);
    m.set("output_negative", counts.negative);
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    m.write_to(&out.with_file_name(format!("{stem}.manifest.txt")))
}

/// Seed of the train/test split, kept apart from the tuning streams.
fn split_seed(seed: u64) -> u64 {
    rng::derive(seed, &[rng::label_hash("train_test_split")])
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let ExperimentArgs {
        input,
        out,
        seed,
        train_fraction,
        folds,
        specs,
        min_leaf,
        smote_k,
        cp,
        trials,
        size,
        decay,
        c_fn,
        learning_rate,
        max_iterations,
    } = args;
    let (input, out) = (input.as_path(), out.as_path());
    let ds = load_alltime(input)?;
    if dataset::class_counts(&ds).positive == 0 {
        return Err(dropout_core::Error::NoPositives.into());
    }
    let specs = match specs {
        None => ModelSpec::all(),
        Some(ids) => ids
            .iter()
            .map(|id| ModelSpec::by_id(id.trim()).with_context(|| format!("unknown spec `{id}`")))
            .collect::<Result<Vec<_>>>()?,
    };
    let d = Grids::default();
    let grids = Grids {
        cp: cp.unwrap_or(d.cp),
        trials: trials.unwrap_or(d.trials),
        size: size.unwrap_or(d.size),
        decay: decay.unwrap_or(d.decay),
        c_fn: c_fn.unwrap_or(d.c_fn),
    };
    let mut cfg = ExperimentConfig {
        folds,
        seed,
        grids,
        specs,
        smote_k,
        min_leaf,
        ..ExperimentConfig::default()
    };
    cfg.mlp.learning_rate = learning_rate;
    if let Some(n) = max_iterations {
        cfg.mlp.max_iterations = n;
    }
    let (train, test) = dataset::stratified_split(&ds, train_fraction, split_seed(seed))?;
    let report = run_experiment(&train, &test, &cfg)?;
    create_dir(out)?;
    report.write_tuning_csv(create(&out.join("tuning.csv"))?)?;
    report.write_test_results_csv(create(&out.join("test_results.csv"))?)?;
    report.write_test_metrics_csv(create(&out.join("test_metrics.csv"))?)?;

    let mut m = Manifest::new("experiment", Some(seed));
    m.path("input", input);
    m.path("out", out);
    m.set("train_fraction", train_fraction);
    m.set("train_rows", train.len());
    m.set("test_rows", test.len());
    m.set("split", format!("{}/{}", train.len(), test.len()));
    m.set("folds", folds);
    m.set("specs", join(&cfg.specs.iter().map(|s| s.id.as_str()).collect::<Vec<_>>()));
    m.set("grid_cp", join(&cfg.grids.cp));
    m.set("grid_trials", join(&cfg.grids.trials));
    m.set("grid_size", join(&cfg.grids.size));
    m.set("grid_decay", join(&cfg.grids.decay));
    m.set("grid_c_fn", join(&cfg.grids.c_fn));
    m.set("smote_k", smote_k);
    m.set("min_leaf", min_leaf);
    m.set("mlp_learning_rate", cfg.mlp.learning_rate);
    m.set("mlp_max_iterations", cfg.mlp.max_iterations);
    m.set("mlp_tolerance", cfg.mlp.tolerance);
    m.set("workers", dropout_core::par::workers());
    m.write(out)
}

fn read_predictions(path: &Path) -> Result<(Vec<ClassLabel>, Vec<ClassLabel>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("missing column `{name}`"))
    };
    let (a, p) = (col("actual")?, col("predicted")?);
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |j: usize| {
            ClassLabel::from_token(&rec[j]).with_context(|| format!("row {}: `{}` is not Y or N", i + 1, &rec[j]))
        };
        actual.push(parse(a)?);
        predicted.push(parse(p)?);
    }
    Ok((actual, predicted))
}

fn score(
    input: Option<PathBuf>,
    counts: Option<Vec<u64>>,
    model_id: &str,
    c_fn: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let cm = match (input, counts) {
        (Some(path), _) => {
            let (actual, predicted) = read_predictions(&path)?;
            metrics::confusion(&actual, &predicted)?
        }
        (None, Some(c)) => ConfusionMatrix::new(c[0], c[1], c[2], c[3]),
        (None, None) => bail!("one of --input or --counts is required"),
    };
    let costs = CostMatrix::new(0.0, c_fn, 1.0, 0.0)?;
    let report = MetricsReport::from_confusion(cm, 5.0, &costs)?;
    if report.degenerate_precision {
        log::warn!("no positive predictions: precision reported as 0");
    }
    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(MetricsReport::CSV_HEADER)?;
    w.write_record(report.csv_row(model_id))?;
    w.flush()?;
    Ok(())
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenData {
            students,
            dropout_rate,
            years,
            first_year,
            conflict_rate,
            seed,
            out,
        } => gen_data(students, dropout_rate, years, first_year, conflict_rate, seed, &out),
        Command::Etl { input, out } => run_etl(&input, &out),
        Command::Resample {
            input,
            out,
            method,
            seed,
            k,
            over_ratio,
        } => resample(&input, &out, method, seed, k, over_ratio),
        Command::Experiment(args) => experiment(args),
        Command::Metrics {
            input,
            counts,
            model_id,
            c_fn,
            out,
        } => score(input, counts, &model_id, c_fn, out),
    }
}

#[cfg(feature = "parallel")]
fn run_with_jobs(jobs: Option<usize>, command: Command) -> Result<()> {
    match jobs {
        None => dispatch(command),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(|| dispatch(command)),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_jobs(jobs: Option<usize>, command: Command) -> Result<()> {
    if jobs.is_some_and(|n| n > 1) {
        log::warn!("built without the parallel feature; --jobs is ignored");
    }
    dispatch(command)
}

fn error_kind(e: &anyhow::Error) -> &'static str {
    if let Some(core) = e.downcast_ref::<dropout_core::Error>() {
        return core.kind();
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return "io";
    }
    if e.downcast_ref::<csv::Error>().is_some() {
        return "csv";
    }
    "usage"
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default().trim_start_matches("error: ");
            eprintln!("error: kind=usage msg={}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run_with_jobs(cli.jobs, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: kind={} msg={}", error_kind(&e), one_line(&format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
