use std::path::Path;

use newsbench::config::{parse_config, parse_config_str, CorpusSource, FeatureSpec, ModelChoice, Trained};
use newsbench_core::eval::Scheme;

fn violations(text: &str) -> Vec<String> {
    parse_config_str(text, Path::new(".")).unwrap_err().violations
}

#[test]
fn svm_with_only_unscaled_features_is_rejected() {
    let v = violations("[synthetic]\n[experiment]\nfeatures = nela\nmodels = svm\n");
    assert!(v.iter().any(|m| m.contains("SVM requires scaled features")), "{v:?}");
}

#[test]
fn combined_training_with_only_country_scheme_is_rejected() {
    let v = violations("[synthetic]\n[experiment]\ntrained = us+uk-vs-ur\nschemes = country\n");
    assert!(v.iter().any(|m| m.contains("us+uk-vs-ur")), "{v:?}");
}

#[test]
fn unknown_keys_and_sections_are_rejected() {
    let v = violations("[synthetic]\ncolour = 3\n[nonsense]\nx = 1\n[experiment]\nseeds = 4\n");
    assert_eq!(v.len(), 3, "{v:?}");
    assert!(v[0].starts_with("line 2: unknown key `colour`"));
    assert!(v[1].contains("unknown section `[nonsense]`"));
    assert!(v[2].contains("unknown key `seeds`"));
}

#[test]
fn every_violation_is_reported() {
    let v = violations(
        "[synthetic]\nsources_per_class = 0\n[experiment]\nfeatures = nela\nmodels = svm\nseed = x\n[split]\ntest_fraction = 1.5\n",
    );
    assert!(v.len() >= 4, "{v:?}");
    assert!(v.iter().any(|m| m.contains("seed")));
    assert!(v.iter().any(|m| m.contains("test_fraction")));
    assert!(v.iter().any(|m| m.contains("sources_per_class")));
    assert!(v.iter().any(|m| m.contains("SVM requires scaled features")));
}

#[test]
fn corpus_section_is_required_once() {
    assert!(violations("[experiment]\nseed = 1\n")[0].contains("missing corpus"));
    assert!(violations("[synthetic]\n[corpus]\npath = a\nroster = b\n")
        .iter()
        .any(|m| m.contains("not both")));
    let v = violations("[corpus]\npath = a.jsonl\n");
    assert!(v.iter().any(|m| m.contains("corpus.roster is required")));
}

#[test]
fn malformed_lines_and_duplicates() {
    let v = violations("[synthetic]\njust words\nsources_per_class = 2\nsources_per_class = 3\n");
    assert!(v[0].contains("expected `key = value`"));
    assert!(v[1].contains("duplicate key"));
}

#[test]
fn full_grid_has_the_table_layout() {
    let cfg = parse_config_str(
        "[synthetic]\n[experiment]\nfeatures = nela, d2v, nela-scaled, d2v-scaled\nmodels = forest, svm\n\
         trained = us-vs-ur, uk-vs-ur, us+uk-vs-ur\nschemes = article, source, country\n",
        Path::new("."),
    )
    .unwrap();
    let cells = cfg.cells();
    // forest x 4 features + svm x 2 scaled features = 6 lines per trained model
    let lines: std::collections::BTreeSet<_> = cells.iter().map(|c| (c.model, c.feature, c.trained)).collect();
    assert_eq!(lines.len(), 18);
    assert_eq!(cells.len(), 6 * (3 + 3 + 2));
    assert!(!cells
        .iter()
        .any(|c| (c.model == ModelChoice::Svm && !c.feature.scaled())
            || (c.trained == Trained::UsUkVsUr && c.scheme == Scheme::Country)));
}

#[test]
fn regime_and_model_settings_are_read() {
    let cfg = parse_config_str(
        "[synthetic]\nur.exclamation = 0.2\nunreliable_jitter = 0.9\n[forest]\nn_trees = 7\nmax_depth = 4\nmtry = none\n\
         [svm]\nc = 0.5\n[embedding]\ndimension = 16\ninfer_steps = 9\n[sampling]\nper_source_n = 50\nallow_short = yes\n\
         [experiment]\nfeatures = d2v-scaled\nmodels = extra_trees\n",
        Path::new("."),
    )
    .unwrap();
    let CorpusSource::Synthetic(s) = &cfg.corpus else { panic!() };
    assert_eq!(s.ur.exclamation, 0.2);
    assert_eq!(s.unreliable_jitter, 0.9);
    assert_eq!((cfg.forest.n_trees, cfg.forest.max_depth, cfg.forest.mtry), (7, Some(4), None));
    assert_eq!(cfg.svm.c, 0.5);
    assert_eq!((cfg.embedding.dimension, cfg.infer_steps), (16, 9));
    let s = cfg.sampling.unwrap();
    assert_eq!((s.per_source_n, s.allow_short), (50, true));
    assert_eq!(cfg.features, vec![FeatureSpec::D2vScaled]);
}

#[test]
fn parse_config_reads_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.ini");
    std::fs::write(&path, "# comment\n; other comment\n[synthetic]\n[experiment]\noutput = results\n").unwrap();
    let cfg = parse_config(&path).unwrap();
    assert_eq!(cfg.output, dir.path().join("results"));
    assert!(parse_config(&dir.path().join("missing.ini")).is_err());
    std::fs::write(&path, "[experiment]\nmodels = svm\nfeatures = nela\n").unwrap();
    let err = parse_config(&path).unwrap_err();
    assert!(err.downcast_ref::<newsbench::ConfigError>().is_some());
}
