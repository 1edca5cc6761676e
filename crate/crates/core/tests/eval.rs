use std::collections::BTreeSet;

use ndarray::Array2;
use newsbench_core::corpus::{Class, Group};
use newsbench_core::eval::*;
use newsbench_core::learn::{FeatureMatrix, FeatureSignature, ForestParams, SvmParams};
use newsbench_core::rng::seeded;
use newsbench_core::Error;
use proptest::prelude::*;
use rand::Rng;

/// `per_group` sources of US, UK and UR; vectors shifted by class.
fn dataset(seed: u64, per_group: usize, per_source: usize, d: usize) -> LabeledDataset {
    let mut rng = seeded(seed);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for (g, class, prefix) in [(Group::Us, Class::Reliable, "us"), (Group::Uk, Class::Reliable, "uk"), (Group::None, Class::Unreliable, "ur")] {
        for s in 0..per_group {
            let source = format!("{prefix}-{s}");
            for a in 0..per_source {
                rows.push(Row {
                    article_id: format!("{source}-{a}"),
                    class,
                    source: source.clone(),
                    group: g,
                });
                let shift = if class == Class::Unreliable { 1.5 } else { 0.0 };
                for j in 0..d {
                    values.push(rng.random::<f64>() + if j == 0 { shift } else { 0.0 });
                }
            }
        }
    }
    let m = Array2::from_shape_vec((rows.len(), d), values).unwrap();
    LabeledDataset::new(rows, FeatureInput::Vectors(FeatureMatrix::new(m, FeatureSignature::raw("toy")))).unwrap()
}

fn forest(n_trees: usize, scaled: bool) -> ExperimentSpec {
    ExperimentSpec {
        model: ModelSpec::Forest(ForestParams {
            n_trees,
            ..ForestParams::random_forest(0)
        }),
        scaled,
        seed: 9,
    }
}

#[test]
fn article_split_sizes_and_union() {
    let hundred = dataset(2, 2, 25, 2).filter(|r| r.group != Group::Uk);
    assert_eq!(hundred.len(), 100);
    let plan = article_split_plan(&hundred, &SplitConfig::default()).unwrap();
    assert_eq!(plan.folds.len(), 20);
    for f in &plan.folds {
        assert_eq!((f.test.len(), f.train.len()), (20, 80));
        let all: BTreeSet<usize> = f.train.iter().chain(&f.test).copied().collect();
        assert_eq!(all.len(), 100);
    }
    plan.check(&hundred).unwrap();
    let one = SplitConfig { folds: 1, ..SplitConfig::default() };
    assert_eq!(article_split_plan(&hundred, &one).unwrap(), article_split_plan(&hundred, &one).unwrap());
    assert_ne!(plan.folds[0], plan.folds[1]);
}

#[test]
fn article_split_rejects_tiny_and_bad_config() {
    let ds = dataset(3, 2, 1, 2).subset(&[0, 1, 2, 3]);
    assert!(article_split_plan(&ds, &SplitConfig::default()).is_err());
    let ds = dataset(3, 2, 5, 2);
    for cfg in [
        SplitConfig { test_fraction: 0.0, ..SplitConfig::default() },
        SplitConfig { test_fraction: 1.0, ..SplitConfig::default() },
        SplitConfig { folds: 0, ..SplitConfig::default() },
    ] {
        assert!(article_split_plan(&ds, &cfg).is_err());
    }
}

#[test]
fn source_split_holds_out_two_of_ten() {
    let ds = dataset(4, 5, 6, 2).filter(|r| r.group != Group::Uk);
    let plan = source_split_plan(&ds, &SplitConfig::default()).unwrap();
    for (f, held) in plan.folds.iter().zip(&plan.held_out_sources) {
        assert_eq!(held.len(), 2);
        let test_sources: BTreeSet<&str> = f.test.iter().map(|&i| ds.rows()[i].source.as_str()).collect();
        let train_sources: BTreeSet<&str> = f.train.iter().map(|&i| ds.rows()[i].source.as_str()).collect();
        assert!(test_sources.is_disjoint(&train_sources));
        assert_eq!(f.test.len(), 12, "all articles of both held-out sources");
        let classes: BTreeSet<Class> = f.test.iter().map(|&i| ds.rows()[i].class).collect();
        assert_eq!(classes.len(), 2, "stratified");
    }
}

#[test]
fn source_split_needs_two_sources_per_class() {
    let ds = dataset(5, 1, 6, 2).filter(|r| r.group != Group::Uk);
    assert!(matches!(source_split_plan(&ds, &SplitConfig::default()), Err(Error::Split(_))));
}

#[test]
fn country_split_contents() {
    let ds = dataset(6, 3, 4, 2);
    let plan = country_split_plan(&ds, Group::Us).unwrap();
    assert_eq!(plan.folds.len(), 1);
    let f = &plan.folds[0];
    assert!(f.test.iter().all(|&i| ds.rows()[i].group == Group::Uk && ds.rows()[i].class == Class::Reliable));
    assert!(f.train.iter().all(|&i| ds.rows()[i].group != Group::Uk));
    assert_eq!(f.test.len(), 12);
    assert_eq!(f.train.len(), 24);
    assert!(country_split_plan(&ds.filter(|r| r.group != Group::Uk), Group::Us).is_err());
    assert!(country_split_plan(&ds, Group::None).is_err());
}

#[test]
fn dataset_invariants() {
    let ds = dataset(7, 1, 2, 2);
    let mut rows = ds.rows().to_vec();
    rows[0].group = Group::None;
    let FeatureInput::Vectors(m) = ds.input() else { unreachable!() };
    assert!(LabeledDataset::new(rows, FeatureInput::Vectors(m.clone())).is_err());
    let mut rows = ds.rows().to_vec();
    rows[1].article_id = rows[0].article_id.clone();
    assert!(LabeledDataset::new(rows, FeatureInput::Vectors(m.clone())).is_err());
    let scaled = FeatureMatrix::new(m.data.clone(), FeatureSignature::scaled("toy"));
    assert!(LabeledDataset::new(ds.rows().to_vec(), FeatureInput::Vectors(scaled)).is_err());
}

#[test]
fn mean_and_population_std() {
    let (m, s) = mean_std(&[0.9, 0.91]);
    assert!((m - 0.905).abs() < 1e-15);
    assert!((s - 0.005).abs() < 1e-12);
}

#[test]
fn experiment_aggregates_consistently() {
    let ds = dataset(8, 3, 20, 4).filter(|r| r.group != Group::Uk);
    let plan = article_split_plan(&ds, &SplitConfig { folds: 5, ..SplitConfig::default() }).unwrap();
    let r = run_experiment(&ds, &plan, &forest(10, false)).unwrap();
    assert_eq!(r.fold_accuracies.len(), 5);
    assert!(r.mean > 0.9, "{}", r.mean);
    let (m, s) = mean_std(&r.fold_accuracies);
    assert_eq!((r.mean, r.std), (m, s));
    for f in &r.folds {
        let c = &f.confusion;
        assert_eq!(f.accuracy, (c.counts[0][0] + c.counts[1][1]) as f64 / f.n_test as f64);
        for (row, absent) in c.matrix.iter().zip(c.absent) {
            let sum = row[0] + row[1];
            assert!(if absent { sum == 0.0 } else { (sum - 1.0).abs() < 1e-9 });
        }
    }
    assert_eq!(r.mean_confusion, mean_confusion(&r.folds.iter().map(|f| f.confusion.clone()).collect::<Vec<_>>()));
    let imp = r.importance.as_ref().unwrap();
    assert!((imp.mean.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(imp.mean[0] > imp.mean[1], "shifted feature dominates");
}

#[test]
fn experiment_is_deterministic_across_threads() {
    let ds = dataset(9, 3, 10, 3).filter(|r| r.group != Group::Uk);
    let plan = source_split_plan(&ds, &SplitConfig { folds: 4, ..SplitConfig::default() }).unwrap();
    let spec = forest(5, true);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| run_experiment(&ds, &plan, &spec).unwrap());
    let parallel = run_experiment(&ds, &plan, &spec).unwrap();
    assert_eq!(serial.to_json(), parallel.to_json());
    let other = run_experiment(&ds, &plan, &ExperimentSpec { seed: 10, ..spec }).unwrap();
    assert_ne!(other.manifest_hash, serial.manifest_hash);
}

#[test]
fn svm_requires_scaling_before_training() {
    let ds = dataset(10, 2, 5, 2).filter(|r| r.group != Group::Uk);
    let plan = article_split_plan(&ds, &SplitConfig { folds: 2, ..SplitConfig::default() }).unwrap();
    let spec = ExperimentSpec {
        model: ModelSpec::Svm(SvmParams::default()),
        scaled: false,
        seed: 0,
    };
    let err = run_experiment(&ds, &plan, &spec).unwrap_err();
    assert!(err.to_string().contains("SVM requires scaled features"), "{err}");
    let r = run_experiment(&ds, &plan, &ExperimentSpec { scaled: true, ..spec }).unwrap();
    assert!(r.importance.is_none());
    assert!(r.mean > 0.8);
}

#[test]
fn failing_fold_reports_its_index() {
    let ds = dataset(11, 2, 5, 2).filter(|r| r.group != Group::Uk);
    let mut plan = article_split_plan(&ds, &SplitConfig { folds: 3, ..SplitConfig::default() }).unwrap();
    // Fold 1 trains on reliable rows only.
    let reliable: Vec<usize> = (0..ds.len()).filter(|&i| ds.rows()[i].class == Class::Reliable).collect();
    let rest: Vec<usize> = (0..ds.len()).filter(|i| !reliable.contains(i)).collect();
    plan.folds[1] = Fold { train: reliable, test: rest };
    match run_experiment(&ds, &plan, &forest(3, false)) {
        Err(Error::Fold { fold, .. }) => assert_eq!(fold, 1),
        other => panic!("expected fold error, got {other:?}"),
    }
}

#[test]
fn scaler_sees_only_training_rows() {
    let ds = dataset(12, 3, 10, 3).filter(|r| r.group != Group::Uk);
    let plan = source_split_plan(&ds, &SplitConfig { folds: 5, ..SplitConfig::default() }).unwrap();
    let spec = forest(3, true);
    for (k, f) in plan.folds.iter().enumerate() {
        let p = prepare_fold(&ds, f, k, &spec).unwrap();
        let s = p.scaler.unwrap();
        let on_train = newsbench_core::learn::fit_scaler(p.train.view(), "x").unwrap();
        let on_test = newsbench_core::learn::fit_scaler(p.test.view(), "x").unwrap();
        assert_eq!((&s.means, &s.stds), (&on_train.means, &on_train.stds));
        assert_ne!(s.means, on_test.means);
        assert_eq!(s.fitted_on, format!("fold-{k}"));
    }
}

#[test]
fn country_accuracy_is_held_out_recall() {
    let ds = dataset(13, 3, 20, 3);
    let plan = country_split_plan(&ds, Group::Uk).unwrap();
    let r = run_experiment(&ds, &plan, &forest(10, false)).unwrap();
    assert_eq!(r.fold_accuracies.len(), 1);
    assert_eq!(r.std, 0.0);
    assert_eq!(r.folds[0].confusion.absent, [false, true]);
    assert_eq!(r.mean, r.folds[0].confusion.matrix[0][0]);
    assert_eq!(r.manifest.test_group, Some(Group::Us));
}

#[test]
fn documents_input_trains_embedding_per_fold() {
    use newsbench_core::embed::EmbeddingConfig;
    let mut rows = Vec::new();
    let mut tokens = Vec::new();
    let vocab_r = ["council", "budget", "minister", "report", "policy", "vote"];
    let vocab_u = ["shocking", "secret", "truth", "exposed", "hoax", "wake"];
    let mut rng = seeded(3);
    for (class, group, words) in [(Class::Reliable, Group::Us, vocab_r), (Class::Unreliable, Group::None, vocab_u)] {
        for s in 0..2 {
            for a in 0..10 {
                let source = format!("{class}-{s}");
                rows.push(Row {
                    article_id: format!("{source}-{a}"),
                    class,
                    source,
                    group,
                });
                tokens.push((0..30).map(|_| words[rng.random_range(0..words.len())].to_string()).collect());
            }
        }
    }
    let cfg = EmbeddingConfig {
        dimension: 8,
        epochs: 10,
        min_count: 1,
        ..EmbeddingConfig::default()
    };
    let ds = LabeledDataset::new(rows, FeatureInput::Documents { tokens, config: cfg, infer_steps: 20 }).unwrap();
    let plan = article_split_plan(&ds, &SplitConfig { folds: 3, ..SplitConfig::default() }).unwrap();
    let r = run_experiment(&ds, &plan, &forest(10, true)).unwrap();
    assert!(r.manifest.feature_source.starts_with("d2v:"));
    assert!(r.folds.iter().all(|f| f.feature_signature.starts_with("d2v-") && f.feature_signature.ends_with("+zscore-l2")));
    assert!(r.mean >= 0.75, "{}", r.mean);
}

#[test]
fn results_table_cells_and_pivot() {
    let ds = dataset(14, 3, 8, 2);
    let sub = ds.filter(|r| r.group != Group::Uk);
    let spec = forest(3, false);
    let a = run_experiment(&sub, &article_split_plan(&sub, &SplitConfig { folds: 2, ..SplitConfig::default() }).unwrap(), &spec).unwrap();
    let c = run_experiment(&ds, &country_split_plan(&ds, Group::Us).unwrap(), &spec).unwrap();
    let key = |scheme| ResultKey {
        algorithm: "random_forest".into(),
        feature: "nela".into(),
        trained: "US vs. UR".into(),
        scheme,
    };
    let t = aggregate_results(&[(key(Scheme::Article), &a), (key(Scheme::Country), &c)]).unwrap();
    assert_eq!(t.rows.len(), 2);
    assert_eq!(t.rows[1].std, None);
    assert_eq!(t.rows[1].cell, format!("{:.3}", c.mean));
    let wide = t.wide();
    assert_eq!(wide.len(), 1);
    assert!(wide[0].source.is_none() && wide[0].country.is_some());
    assert!(t.wide_text().contains(" -"));
    assert!(t.to_csv().unwrap().starts_with("algorithm,feature,trained,scheme"));
    assert!(aggregate_results(&[(key(Scheme::Article), &a), (key(Scheme::Article), &a)]).is_err());
    assert!(aggregate_results(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn plans_never_leak(seed in any::<u64>(), per_group in 2usize..6, per_source in 1usize..6) {
        let ds = dataset(seed, per_group, per_source, 1);
        let cfg = SplitConfig { seed, ..SplitConfig::default() };
        let sub = ds.filter(|r| r.group != Group::Uk);
        source_split_plan(&sub, &cfg).unwrap().check(&sub).unwrap();
        source_split_plan(&ds, &cfg).unwrap().check(&ds).unwrap();
        for g in [Group::Us, Group::Uk] {
            country_split_plan(&ds, g).unwrap().check(&ds).unwrap();
        }
        if ds.len() >= 5 {
            article_split_plan(&ds, &cfg).unwrap().check(&ds).unwrap();
        }
    }
}
