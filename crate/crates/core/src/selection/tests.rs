use rand::Rng;

use super::*;
use crate::dataset::{class_counts, ClassLabel, Dataset, FeatureKind, FeatureSchema};
use crate::rng;

fn toy(n: usize, positives: usize, seed: u64) -> Dataset {
    let mut r = rng::seeded(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let pos = i % (n / positives) == 0 && i / (n / positives) < positives;
        let shift = if pos { 1.5 } else { 0.0 };
        rows.push(vec![
            r.random_range(0.0..3.0) + shift,
            r.random_range(0..3) as f64,
            f64::from(u8::from(r.random_bool(if pos { 0.7 } else { 0.2 }))),
        ]);
        labels.push(if pos { ClassLabel::Positive } else { ClassLabel::Negative });
    }
    let schema = vec![
        FeatureSchema::new("x", FeatureKind::Numeric),
        FeatureSchema::new("g", FeatureKind::ordinal(0, 2)),
        FeatureSchema::new("f", FeatureKind::yes_no()),
    ];
    Dataset::new(schema, rows, labels).unwrap()
}

fn small_cfg() -> ExperimentConfig {
    ExperimentConfig {
        grids: Grids {
            cp: vec![0.0, 0.01],
            trials: vec![1, 3],
            size: vec![2],
            decay: vec![0.0, 0.1],
            c_fn: vec![10.0, 100.0],
        },
        mlp: MLPConfig {
            max_iterations: 60,
            ..MLPConfig::default()
        },
        seed: 3,
        ..ExperimentConfig::default()
    }
}

#[test]
fn seventeen_specs() {
    let specs = ModelSpec::all();
    assert_eq!(specs.len(), 17);
    let count = |f: Family| specs.iter().filter(|s| s.family == f).count();
    assert_eq!(count(Family::SingleTree), 6);
    assert_eq!(count(Family::BaggingTrees), 6);
    assert_eq!(count(Family::NeuralNet), 5);
    assert!(ModelSpec::new(Family::NeuralNet, ImbalanceHandler::CostSensitive).is_err());
    assert_eq!(specs[0].id, "single_tree");
    assert_eq!(ModelSpec::by_id("bagging_hybrid").unwrap().handler, ImbalanceHandler::Hybrid);
    assert_eq!(ModelSpec::by_id("neural_net_cost"), None);
    let mut ids: Vec<_> = specs.iter().map(|s| s.id.clone()).collect();
    ids.dedup();
    assert_eq!(ids.len(), 17);
}

#[test]
fn default_grid_sizes_and_order() {
    let g = Grids::default();
    let tree = ModelSpec::new(Family::SingleTree, ImbalanceHandler::None).unwrap();
    assert_eq!(tree.grid(&g).len(), 4);
    let cost = ModelSpec::new(Family::SingleTree, ImbalanceHandler::CostSensitive).unwrap();
    let points = cost.grid(&g);
    assert_eq!(points.len(), 12);
    assert_eq!(points[0], ParamPoint::Tree { cp: 0.0, c_fn: Some(10.0) });
    assert_eq!(points[1], ParamPoint::Tree { cp: 0.0, c_fn: Some(100.0) });
    let bag = ModelSpec::new(Family::BaggingTrees, ImbalanceHandler::Up).unwrap();
    assert_eq!(bag.grid(&g).len(), 4);
    let net = ModelSpec::new(Family::NeuralNet, ImbalanceHandler::Down).unwrap();
    let points = net.grid(&g);
    assert_eq!(points.len(), 9);
    assert_eq!(points[0], ParamPoint::Net { size: 1, decay: 0.1 });
    assert_eq!(points[8], ParamPoint::Net { size: 5, decay: 0.0 });
    assert_eq!(points[0].to_string(), "size=1;decay=0.1");
    assert_eq!(ParamPoint::Tree { cp: 0.0005, c_fn: Some(100.0) }.to_string(), "cp=0.0005;c_fn=100");
}

#[test]
fn kfold_pigeonholes_four_positives() {
    let d = toy(100, 4, 1);
    let folds = stratified_kfold(&d, 5, 9).unwrap();
    let mut pos: Vec<usize> = folds
        .iter()
        .map(|f| f.iter().filter(|&&i| d.label(i).is_positive()).count())
        .collect();
    pos.sort_unstable();
    assert_eq!(pos, vec![0, 1, 1, 1, 1]);
    let mut all: Vec<usize> = folds.concat();
    all.sort_unstable();
    assert_eq!(all, (0..100).collect::<Vec<_>>());
    assert!(folds.iter().all(|f| f.len() == 20));
}

#[test]
fn kfold_on_balanced_ten() {
    let rows = (0..10).map(|i| vec![i as f64]).collect();
    let labels = (0..10)
        .map(|i| if i < 5 { ClassLabel::Positive } else { ClassLabel::Negative })
        .collect();
    let d = Dataset::new(vec![FeatureSchema::new("x", FeatureKind::Numeric)], rows, labels).unwrap();
    let folds = stratified_kfold(&d, 2, 0).unwrap();
    assert_eq!(folds[0].len(), 5);
    assert_eq!(folds[1].len(), 5);
    for f in &folds {
        let p = f.iter().filter(|&&i| d.label(i).is_positive()).count();
        assert!(p == 2 || p == 3);
    }
    assert!(stratified_kfold(&d, 1, 0).is_err());
}

#[test]
fn handlers_shape_the_learner_input() {
    let d = toy(400, 40, 2);
    let cfg = small_cfg();
    let point = ParamPoint::Tree { cp: 0.0, c_fn: None };
    for handler in [ImbalanceHandler::Down, ImbalanceHandler::Up, ImbalanceHandler::Hybrid] {
        let spec = ModelSpec::new(Family::SingleTree, handler).unwrap();
        for t in cross_validate_traced(&spec, &[point], &d, &cfg).unwrap() {
            assert_eq!(t.learner_counts.positive, t.learner_counts.negative, "{handler:?}");
        }
    }
    let spec = ModelSpec::new(Family::SingleTree, ImbalanceHandler::CaseWeights).unwrap();
    for t in cross_validate_traced(&spec, &[point], &d, &cfg).unwrap() {
        assert_eq!(t.learner_counts.total(), t.training.len());
        assert!(t.learner_weighted);
    }
}

#[test]
fn validation_never_feeds_training() {
    let d = toy(300, 30, 3);
    let cfg = small_cfg();
    for spec in ModelSpec::all().into_iter().filter(|s| s.family == Family::SingleTree) {
        let points = spec.grid(&cfg.grids);
        for t in cross_validate_traced(&spec, &points, &d, &cfg).unwrap() {
            assert!(t.learner_sources.iter().all(|i| t.validation.binary_search(i).is_err()));
            assert_eq!(t.validation_counts, class_counts(&d.subset(&t.validation)));
        }
    }
}

#[test]
fn grid_search_selects_first_maximum() {
    let d = toy(300, 30, 4);
    let cfg = small_cfg();
    let spec = ModelSpec::new(Family::BaggingTrees, ImbalanceHandler::CostSensitive).unwrap();
    let t = grid_search(&spec, &d, &cfg).unwrap();
    assert_eq!(t.points.len(), 4);
    let best = t.mean_f5.iter().cloned().fold(f64::MIN, f64::max);
    assert_eq!(t.selected_f5(), best);
    assert!(t.mean_f5[..t.selected].iter().all(|f| *f < best));
}

#[test]
fn cross_validate_matches_grid_means() {
    let d = toy(300, 30, 5);
    let cfg = small_cfg();
    let spec = ModelSpec::new(Family::SingleTree, ImbalanceHandler::Up).unwrap();
    let t = grid_search(&spec, &d, &cfg).unwrap();
    for (p, f) in t.points.iter().zip(&t.mean_f5) {
        assert_eq!(cross_validate(&spec, p, &d, &cfg).unwrap(), *f);
    }
}

#[test]
fn mismatched_point_is_rejected() {
    let d = toy(100, 10, 6);
    let spec = ModelSpec::new(Family::SingleTree, ImbalanceHandler::None).unwrap();
    let bad = ParamPoint::Net { size: 1, decay: 0.0 };
    assert!(fit_point(&spec, &bad, &d, 0, &small_cfg()).is_err());
    let cost = ParamPoint::Tree { cp: 0.0, c_fn: Some(10.0) };
    assert!(fit_point(&spec, &cost, &d, 0, &small_cfg()).is_err());
}

#[test]
fn experiment_reports_every_spec_sorted_by_recall() {
    let d = toy(600, 60, 7);
    let (train, test) = crate::dataset::stratified_split(&d, 0.8, 1).unwrap();
    let cfg = small_cfg();
    let a = run_experiment(&train, &test, &cfg).unwrap();
    assert_eq!(a.tuning.len(), 17);
    assert_eq!(a.results.len(), 17);
    assert!(a.results.windows(2).all(|w| w[0].metrics.recall >= w[1].metrics.recall));
    let b = run_experiment(&train, &test, &cfg).unwrap();
    let csv = |r: &TuningReport| {
        let mut t = Vec::new();
        let mut s = Vec::new();
        r.write_tuning_csv(&mut t).unwrap();
        r.write_test_results_csv(&mut s).unwrap();
        (t, s)
    };
    assert_eq!(csv(&a), csv(&b));
    let (tuning, _) = csv(&a);
    let text = String::from_utf8(tuning).unwrap();
    assert!(text.starts_with("spec_id,params,mean_cv_f5\n"));
}

#[test]
fn all_negative_baseline_accuracy() {
    // A tree pruned to its root predicts the majority class everywhere.
    let d = toy(1000, 40, 8);
    let spec = ModelSpec::new(Family::SingleTree, ImbalanceHandler::None).unwrap();
    let m = fit_point(&spec, &ParamPoint::Tree { cp: 1.0, c_fn: None }, &d, 0, &small_cfg()).unwrap();
    let preds = m.predict_dataset(&d).unwrap();
    assert!(preds.iter().all(|p| *p == ClassLabel::Negative));
    let acc = preds.iter().zip(d.labels()).filter(|(p, l)| p == l).count() as f64 / 1000.0;
    assert!((acc - 0.96).abs() < 1e-12);
}
