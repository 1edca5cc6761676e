//! Experiment configuration: a line-oriented `key = value` format with
//! `[section]` headers.
//!
//! ```text
//! [synthetic]
//! sources_per_class = 5
//! articles_per_source = 200
//!
//! [experiment]
//! features = nela, nela-scaled
//! models = forest, svm
//! trained = us-vs-ur, uk-vs-ur
//! schemes = article, source, country
//! seed = 7
//! ```
//!
//! Lines starting with `#` or `;` are comments. Relative paths are resolved
//! against the directory of the config file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use newsbench_core::corpus::{CorpusFormat, SamplingConfig};
use newsbench_core::embed::EmbeddingConfig;
use newsbench_core::eval::Scheme;
use newsbench_core::learn::{ForestParams, SvmParams};
use serde::{Deserialize, Serialize};

use crate::synth::{Regime, SyntheticSpec};

/// Every problem found in a config file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem", self.violations.len())?;
        if self.violations.len() != 1 {
            f.write_str("s")?;
        }
        f.write_str(")")?;
        for v in &self.violations {
            write!(f, "\n  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureSpec {
    #[serde(rename = "nela")]
    Nela,
    #[serde(rename = "nela-scaled")]
    NelaScaled,
    #[serde(rename = "d2v")]
    D2v,
    #[serde(rename = "d2v-scaled")]
    D2vScaled,
}

impl FeatureSpec {
    pub const ALL: [FeatureSpec; 4] = [FeatureSpec::Nela, FeatureSpec::NelaScaled, FeatureSpec::D2v, FeatureSpec::D2vScaled];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSpec::Nela => "nela",
            FeatureSpec::NelaScaled => "nela-scaled",
            FeatureSpec::D2v => "d2v",
            FeatureSpec::D2vScaled => "d2v-scaled",
        }
    }

    pub fn scaled(self) -> bool {
        matches!(self, FeatureSpec::NelaScaled | FeatureSpec::D2vScaled)
    }

    pub fn is_embedding(self) -> bool {
        matches!(self, FeatureSpec::D2v | FeatureSpec::D2vScaled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Forest,
    ExtraTrees,
    Svm,
}

impl ModelChoice {
    pub const ALL: [ModelChoice; 3] = [ModelChoice::Forest, ModelChoice::ExtraTrees, ModelChoice::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelChoice::Forest => "forest",
            ModelChoice::ExtraTrees => "extra_trees",
            ModelChoice::Svm => "svm",
        }
    }
}

/// Which reliable sources the classifier is trained against the unreliable
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Trained {
    #[serde(rename = "us-vs-ur")]
    UsVsUr,
    #[serde(rename = "uk-vs-ur")]
    UkVsUr,
    #[serde(rename = "us+uk-vs-ur")]
    UsUkVsUr,
}

impl Trained {
    pub const ALL: [Trained; 3] = [Trained::UsVsUr, Trained::UkVsUr, Trained::UsUkVsUr];

    pub fn as_str(self) -> &'static str {
        match self {
            Trained::UsVsUr => "us-vs-ur",
            Trained::UkVsUr => "uk-vs-ur",
            Trained::UsUkVsUr => "us+uk-vs-ur",
        }
    }
}

macro_rules! parse_by_name {
    ($t:ty, $what:literal) => {
        impl FromStr for $t {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                let s = s.trim().to_ascii_lowercase();
                <$t>::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| {
                    let names: Vec<&str> = <$t>::ALL.iter().map(|v| v.as_str()).collect();
                    format!("unknown {} `{s}` (expected one of {})", $what, names.join(", "))
                })
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

parse_by_name!(FeatureSpec, "feature spec");
parse_by_name!(ModelChoice, "model");
parse_by_name!(Trained, "trained model");

/// One cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub model: ModelChoice,
    pub feature: FeatureSpec,
    pub trained: Trained,
    pub scheme: Scheme,
}

impl Cell {
    pub fn key(&self) -> String {
        format!("{}/{}/{}/{}", self.model, self.feature, self.trained, self.scheme)
    }

    /// Directory name under `cells/`.
    pub fn slug(&self) -> String {
        format!("{}_{}_{}_{}", self.model, self.feature, self.trained, self.scheme)
    }

    /// Why this combination cannot be run, if it cannot.
    pub fn forbidden(&self) -> Option<&'static str> {
        if self.model == ModelChoice::Svm && !self.feature.scaled() {
            return Some("SVM requires scaled features");
        }
        if self.trained == Trained::UsUkVsUr && self.scheme == Scheme::Country {
            return Some("us+uk-vs-ur has no held-out country for the country scheme");
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusSource {
    Files {
        path: PathBuf,
        format: CorpusFormat,
        roster: PathBuf,
    },
    Synthetic(SyntheticSpec),
}

/// Fold settings; the seed comes from the master seed per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSettings {
    pub test_fraction: f64,
    pub folds: usize,
    pub stratify: bool,
}

impl Default for SplitSettings {
    fn default() -> Self {
        SplitSettings {
            test_fraction: 0.2,
            folds: 20,
            stratify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub corpus: CorpusSource,
    /// Per-source balanced sampling; the whole corpus is used when absent.
    pub sampling: Option<SamplingConfig>,
    pub features: Vec<FeatureSpec>,
    pub models: Vec<ModelChoice>,
    pub trained: Vec<Trained>,
    pub schemes: Vec<Scheme>,
    pub split: SplitSettings,
    pub forest: ForestParams,
    pub svm: SvmParams,
    pub embedding: EmbeddingConfig,
    pub infer_steps: usize,
    pub seed: u64,
    /// Not part of the config hash: moving the output or changing the worker
    /// count does not change any result.
    #[serde(skip)]
    pub output: PathBuf,
    /// 0 means one worker per available core.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    /// Defaults around the given corpus source.
    pub fn new(corpus: CorpusSource) -> Self {
        ExperimentConfig {
            corpus,
            sampling: None,
            features: vec![FeatureSpec::Nela],
            models: vec![ModelChoice::Forest],
            trained: vec![Trained::UsVsUr],
            schemes: Scheme::ALL.to_vec(),
            split: SplitSettings::default(),
            forest: ForestParams::random_forest(0),
            svm: SvmParams::default(),
            embedding: EmbeddingConfig::default(),
            infer_steps: 50,
            seed: 0,
            output: PathBuf::from("out"),
            workers: 0,
        }
    }

    /// Grid cells allowed by the pairing constraints, model-major.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &model in &self.models {
            for &feature in &self.features {
                for &trained in &self.trained {
                    for &scheme in &self.schemes {
                        let c = Cell {
                            model,
                            feature,
                            trained,
                            scheme,
                        };
                        if c.forbidden().is_none() {
                            out.push(c);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn hash(&self) -> String {
        newsbench_core::rng::sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    /// Every constraint violation, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, empty) in [
            ("features", self.features.is_empty()),
            ("models", self.models.is_empty()),
            ("trained", self.trained.is_empty()),
            ("schemes", self.schemes.is_empty()),
        ] {
            if empty {
                v.push(format!("experiment.{name} must list at least one value"));
            }
        }

        let scaled: Vec<&str> = self.features.iter().filter(|f| f.scaled()).map(|f| f.as_str()).collect();
        if self.models.contains(&ModelChoice::Svm) && scaled.is_empty() {
            v.push(format!(
                "SVM requires scaled features: linear margins depend on feature scale, \
                 but experiment.features only lists unscaled specs ({})",
                join(&self.features)
            ));
        }
        for f in self.features.iter().filter(|f| !f.scaled()) {
            if !self.models.is_empty() && self.models.iter().all(|&m| m == ModelChoice::Svm) {
                v.push(format!(
                    "SVM requires scaled features: `{f}` is unscaled and no other model is configured"
                ));
            }
        }
        let countries = self.trained.iter().any(|&t| t != Trained::UsUkVsUr);
        if self.schemes.contains(&Scheme::Country) && !self.trained.is_empty() && !countries {
            v.push(
                "us+uk-vs-ur cannot be paired with the country scheme: no country is left to test on".to_string(),
            );
        }
        if self.trained.contains(&Trained::UsUkVsUr) && !self.schemes.is_empty() && self.schemes.iter().all(|&s| s == Scheme::Country) {
            v.push("us+uk-vs-ur is configured but the only scheme is country, which it cannot be paired with".to_string());
        }

        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            v.push(format!("split.test_fraction must lie in (0, 1), got {}", self.split.test_fraction));
        }
        if self.split.folds == 0 {
            v.push("split.folds must be at least 1".into());
        }
        if self.forest.n_trees == 0 {
            v.push("forest.n_trees must be at least 1".into());
        }
        if self.forest.min_leaf == 0 {
            v.push("forest.min_leaf must be at least 1".into());
        }
        if self.forest.max_depth == Some(0) {
            v.push("forest.max_depth must be at least 1".into());
        }
        if self.forest.mtry == Some(0) {
            v.push("forest.mtry must be at least 1".into());
        }
        if !(self.svm.c > 0.0 && self.svm.c.is_finite()) {
            v.push(format!("svm.c must be positive, got {}", self.svm.c));
        }
        if self.svm.epochs == 0 {
            v.push("svm.epochs must be at least 1".into());
        }
        if self.features.iter().any(|f| f.is_embedding()) {
            if let Err(e) = self.embedding.validate() {
                v.push(e.to_string());
            }
            if self.infer_steps == 0 {
                v.push("embedding.infer_steps must be at least 1".into());
            }
        }
        if let Some(s) = &self.sampling {
            if s.per_source_n == 0 {
                v.push("sampling.per_source_n must be at least 1".into());
            }
        }
        if let CorpusSource::Synthetic(s) = &self.corpus {
            v.extend(s.validate());
        }
        v
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")
}

const SECTIONS: [&str; 8] = ["corpus", "synthetic", "sampling", "experiment", "split", "forest", "svm", "embedding"];
const REGIME_KNOBS: [&str; 8] = [
    "exclamation",
    "question",
    "allcaps",
    "sentence_length",
    "hedge",
    "quote",
    "loaded",
    "spelling",
];

fn known_key(section: &str, key: &str) -> bool {
    let plain: &[&str] = match section {
        "corpus" => &["path", "format", "roster"],
        "synthetic" => &[
            "sources_per_class",
            "articles_per_source",
            "sentences_min",
            "sentences_max",
            "reliable_jitter",
            "unreliable_jitter",
        ],
        "sampling" => &["per_source_n", "allow_short"],
        "experiment" => &["features", "models", "trained", "schemes", "seed", "output", "workers"],
        "split" => &["test_fraction", "folds", "stratify"],
        "forest" => &["n_trees", "max_depth", "mtry", "min_leaf"],
        "svm" => &["c", "epochs", "tolerance"],
        "embedding" => &[
            "dimension",
            "negative_k",
            "epochs",
            "learning_rate",
            "final_learning_rate",
            "min_count",
            "infer_steps",
        ],
        _ => &[],
    };
    if plain.contains(&key) {
        return true;
    }
    section == "synthetic"
        && key
            .split_once('.')
            .is_some_and(|(r, k)| ["us", "uk", "ur"].contains(&r) && REGIME_KNOBS.contains(&k))
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn read_sections(text: &str, violations: &mut Vec<String>) -> Sections {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    // Keys under an unknown section were already reported with the section.
    let mut skipping = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                violations.push(format!("line {line_no}: unknown section `[{name}]`"));
                current = None;
                skipping = true;
            } else {
                skipping = false;
                if sections.contains_key(&name) {
                    violations.push(format!("line {line_no}: section `[{name}]` appears twice"));
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            violations.push(format!("line {line_no}: expected `key = value`, got `{line}`"));
            continue;
        };
        let key = key.trim().to_string();
        let Some(section) = current.clone() else {
            if skipping {
                continue;
            }
            violations.push(format!("line {line_no}: key `{key}` outside a known section"));
            continue;
        };
        if !known_key(&section, &key) {
            violations.push(format!("line {line_no}: unknown key `{key}` in [{section}]"));
            continue;
        }
        let entries = sections.get_mut(&section).expect("section registered");
        if entries.contains_key(&key) {
            violations.push(format!("line {line_no}: duplicate key `{key}` in [{section}]"));
            continue;
        }
        entries.insert(
            key,
            Entry {
                line: line_no,
                value: value.trim().to_string(),
            },
        );
    }
    sections
}

/// Typed access to one section that records parse failures instead of
/// stopping at them.
struct Reader<'a> {
    section: &'a str,
    entries: Option<&'a BTreeMap<String, Entry>>,
    violations: &'a mut Vec<String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.entries.and_then(|e| e.get(key))
    }

    fn parse<T: FromStr>(&mut self, key: &str, slot: &mut T)
    where
        T::Err: fmt::Display,
    {
        if let Some(e) = self.raw(key).cloned() {
            match e.value.parse::<T>() {
                Ok(v) => *slot = v,
                Err(err) => self
                    .violations
                    .push(format!("line {}: {}.{key}: cannot parse `{}`: {err}", e.line, self.section, e.value)),
            }
        }
    }

    /// Empty value or `none` clears the option.
    fn optional<T: FromStr>(&mut self, key: &str, slot: &mut Option<T>)
    where
        T::Err: fmt::Display,
    {
        if let Some(e) = self.raw(key).cloned() {
            if e.value.is_empty() || e.value.eq_ignore_ascii_case("none") {
                *slot = None;
                return;
            }
            match e.value.parse::<T>() {
                Ok(x) => *slot = Some(x),
                Err(err) => self
                    .violations
                    .push(format!("line {}: {}.{key}: cannot parse `{}`: {err}", e.line, self.section, e.value)),
            }
        }
    }

    fn list<T: FromStr>(&mut self, key: &str, slot: &mut Vec<T>)
    where
        T::Err: fmt::Display,
        T: PartialEq,
    {
        let Some(e) = self.raw(key).cloned() else { return };
        let mut out = Vec::new();
        for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.parse::<T>() {
                Ok(v) if out.contains(&v) => self
                    .violations
                    .push(format!("line {}: {}.{key}: `{item}` listed twice", e.line, self.section)),
                Ok(v) => out.push(v),
                Err(err) => self.violations.push(format!("line {}: {}.{key}: {err}", e.line, self.section)),
            }
        }
        *slot = out;
    }

    fn path(&mut self, key: &str, base: &Path) -> Option<PathBuf> {
        self.raw(key).map(|e| base.join(&e.value))
    }
}

struct Bool(bool);

impl FromStr for Bool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Ok(Bool(true)),
            "false" | "no" | "0" => Ok(Bool(false)),
            other => Err(format!("expected true or false, got `{other}`")),
        }
    }
}

fn read_regime(r: &mut Reader<'_>, prefix: &str, regime: &mut Regime) {
    r.parse(&format!("{prefix}.exclamation"), &mut regime.exclamation);
    r.parse(&format!("{prefix}.question"), &mut regime.question);
    r.parse(&format!("{prefix}.allcaps"), &mut regime.allcaps);
    r.parse(&format!("{prefix}.sentence_length"), &mut regime.sentence_length);
    r.parse(&format!("{prefix}.hedge"), &mut regime.hedge);
    r.parse(&format!("{prefix}.quote"), &mut regime.quote);
    r.parse(&format!("{prefix}.loaded"), &mut regime.loaded);
    r.parse(&format!("{prefix}.spelling"), &mut regime.spelling);
}

/// Parses config text; relative paths are joined onto `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut violations = Vec::new();
    let sections = read_sections(text, &mut violations);
    let corpus = match (sections.contains_key("corpus"), sections.contains_key("synthetic")) {
        (true, true) => {
            violations.push("configure either [corpus] or [synthetic], not both".into());
            None
        }
        (false, false) => {
            violations.push("missing corpus: add a [corpus] or a [synthetic] section".into());
            None
        }
        (true, false) => {
            let mut r = Reader {
                section: "corpus",
                entries: sections.get("corpus"),
                violations: &mut violations,
            };
            let path = r.path("path", base_dir);
            let roster = r.path("roster", base_dir);
            let mut format = CorpusFormat::Jsonl;
            r.parse("format", &mut format);
            match (path, roster) {
                (Some(path), Some(roster)) => Some(CorpusSource::Files { path, format, roster }),
                (path, roster) => {
                    if path.is_none() {
                        violations.push("corpus.path is required".into());
                    }
                    if roster.is_none() {
                        violations.push("corpus.roster is required".into());
                    }
                    None
                }
            }
        }
        (false, true) => {
            let mut r = Reader {
                section: "synthetic",
                entries: sections.get("synthetic"),
                violations: &mut violations,
            };
            let mut s = SyntheticSpec::default();
            r.parse("sources_per_class", &mut s.sources_per_class);
            r.parse("articles_per_source", &mut s.articles_per_source);
            r.parse("sentences_min", &mut s.sentences_min);
            r.parse("sentences_max", &mut s.sentences_max);
            r.parse("reliable_jitter", &mut s.reliable_jitter);
            r.parse("unreliable_jitter", &mut s.unreliable_jitter);
            read_regime(&mut r, "us", &mut s.us);
            read_regime(&mut r, "uk", &mut s.uk);
            read_regime(&mut r, "ur", &mut s.ur);
            Some(CorpusSource::Synthetic(s))
        }
    };

    let mut cfg = ExperimentConfig::new(corpus.clone().unwrap_or(CorpusSource::Synthetic(SyntheticSpec::default())));

    if let Some(entries) = sections.get("sampling") {
        let mut r = Reader {
            section: "sampling",
            entries: Some(entries),
            violations: &mut violations,
        };
        let mut s = SamplingConfig::default();
        r.parse("per_source_n", &mut s.per_source_n);
        let mut short = Bool(s.allow_short);
        r.parse("allow_short", &mut short);
        s.allow_short = short.0;
        cfg.sampling = Some(s);
    }

    {
        let mut r = Reader {
            section: "experiment",
            entries: sections.get("experiment"),
            violations: &mut violations,
        };
        r.list("features", &mut cfg.features);
        r.list("models", &mut cfg.models);
        r.list("trained", &mut cfg.trained);
        r.list("schemes", &mut cfg.schemes);
        r.parse("seed", &mut cfg.seed);
        r.parse("workers", &mut cfg.workers);
        if let Some(p) = r.path("output", base_dir) {
            cfg.output = p;
        }
    }
    {
        let mut r = Reader {
            section: "split",
            entries: sections.get("split"),
            violations: &mut violations,
        };
        r.parse("test_fraction", &mut cfg.split.test_fraction);
        r.parse("folds", &mut cfg.split.folds);
        let mut strat = Bool(cfg.split.stratify);
        r.parse("stratify", &mut strat);
        cfg.split.stratify = strat.0;
    }
    {
        let mut r = Reader {
            section: "forest",
            entries: sections.get("forest"),
            violations: &mut violations,
        };
        r.parse("n_trees", &mut cfg.forest.n_trees);
        r.optional("max_depth", &mut cfg.forest.max_depth);
        r.optional("mtry", &mut cfg.forest.mtry);
        r.parse("min_leaf", &mut cfg.forest.min_leaf);
    }
    {
        let mut r = Reader {
            section: "svm",
            entries: sections.get("svm"),
            violations: &mut violations,
        };
        r.parse("c", &mut cfg.svm.c);
        r.parse("epochs", &mut cfg.svm.epochs);
        r.parse("tolerance", &mut cfg.svm.tolerance);
    }
    {
        let mut r = Reader {
            section: "embedding",
            entries: sections.get("embedding"),
            violations: &mut violations,
        };
        r.parse("dimension", &mut cfg.embedding.dimension);
        r.parse("negative_k", &mut cfg.embedding.negative_k);
        r.parse("epochs", &mut cfg.embedding.epochs);
        r.parse("learning_rate", &mut cfg.embedding.learning_rate);
        r.parse("final_learning_rate", &mut cfg.embedding.final_learning_rate);
        r.parse("min_count", &mut cfg.embedding.min_count);
        r.parse("infer_steps", &mut cfg.infer_steps);
    }

    if corpus.is_some() || !violations.is_empty() {
        violations.extend(cfg.validate());
    }
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { violations })
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    Ok(parse_config_str(&text, base)?)
}
