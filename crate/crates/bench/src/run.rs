//! Loading, feature preparation and the experiment grid.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use newsbench_core::corpus::{balanced_sample, load_corpus, write_jsonl, Class, Corpus, Group};
use newsbench_core::eval::{
    aggregate_results, article_split_plan, country_split_plan, run_experiment, source_split_plan, ExperimentResult,
    ExperimentSpec, FeatureInput, LabeledDataset, ModelSpec, ResultKey, ResultsTable, Scheme, SplitConfig, SplitPlan,
};
use newsbench_core::learn::{FeatureMatrix, FeatureSignature, ForestParams, SplitRule};
use newsbench_core::rng::{derive_seed_str, sha256_hex};
use newsbench_core::textfeat::{extract_features, is_word, tokenize, FeatureCatalog, LexiconSet, ABBREVIATIONS_VERSION};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Cell, CorpusSource, ExperimentConfig, ModelChoice, Trained};
use crate::heatmap::emit_heatmap;
use crate::synth::generate_synthetic_corpus;

pub const RUN_MANIFEST_SCHEMA: &str = "run-manifest-v1";

/// Loads the configured corpus (or generates the synthetic one) and applies
/// balanced sampling when configured. Returns the corpus and any warnings.
pub fn load_input(cfg: &ExperimentConfig) -> anyhow::Result<(Corpus, Vec<String>)> {
    let mut notes = Vec::new();
    let corpus = match &cfg.corpus {
        CorpusSource::Files { path, format, roster } => {
            let out = load_corpus(path, *format, roster)?;
            for s in &out.skipped {
                notes.push(format!("skipped record {}: {}", s.record, s.reason));
            }
            out.corpus
        }
        CorpusSource::Synthetic(spec) => generate_synthetic_corpus(spec, derive_seed_str(cfg.seed, "corpus"))?,
    };
    match &cfg.sampling {
        Some(s) => {
            let s = newsbench_core::corpus::SamplingConfig {
                seed: derive_seed_str(cfg.seed, "sampling"),
                ..s.clone()
            };
            let sampled = balanced_sample(&corpus, &s)?;
            notes.extend(sampled.warnings);
            Ok((sampled.corpus, notes))
        }
        None => Ok((corpus, notes)),
    }
}

/// Catalog features for every article, in corpus order.
pub fn nela_matrix(corpus: &Corpus) -> anyhow::Result<FeatureMatrix> {
    let catalog = FeatureCatalog::nela_open_v1();
    let lex = LexiconSet::starter();
    let rows = corpus
        .articles
        .par_iter()
        .map(|a| extract_features(a, &catalog, &lex).map(|v| v.values))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix::from_rows(&rows, FeatureSignature::raw(catalog.version))?)
}

/// Lowercased word tokens of title and body, the input of the paragraph
/// vector model.
pub fn doc_tokens(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| is_word(t))
        .map(|t| t.to_lowercase())
        .collect()
}

pub fn corpus_fingerprint(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_jsonl(corpus, &mut buf).expect("writing to memory cannot fail");
    sha256_hex(&buf)
}

/// Rows the cell's classifier sees before splitting. Country cells keep
/// both countries; the plan decides which side each row lands on.
fn cell_dataset(base: &LabeledDataset, cell: &Cell) -> LabeledDataset {
    let only = |g: Group| base.filter(move |r| r.class == Class::Unreliable || r.group == g);
    match (cell.trained, cell.scheme) {
        (_, Scheme::Country) | (Trained::UsUkVsUr, _) => base.clone(),
        (Trained::UsVsUr, _) => only(Group::Us),
        (Trained::UkVsUr, _) => only(Group::Uk),
    }
}

/// Folds are seeded by (trained model, scheme) only, so every model and
/// feature spec in a run is scored on the same folds.
pub fn split_seed(cfg: &ExperimentConfig, cell: &Cell) -> u64 {
    derive_seed_str(cfg.seed, &format!("plan/{}/{}", cell.trained, cell.scheme))
}

pub fn cell_seed(cfg: &ExperimentConfig, cell: &Cell) -> u64 {
    derive_seed_str(cfg.seed, &cell.key())
}

pub fn cell_plan(cfg: &ExperimentConfig, cell: &Cell, ds: &LabeledDataset) -> anyhow::Result<SplitPlan> {
    let split = SplitConfig {
        test_fraction: cfg.split.test_fraction,
        folds: cfg.split.folds,
        seed: split_seed(cfg, cell),
        stratify: cfg.split.stratify,
    };
    Ok(match cell.scheme {
        Scheme::Article => article_split_plan(ds, &split)?,
        Scheme::Source => source_split_plan(ds, &split)?,
        Scheme::Country => {
            let group = match cell.trained {
                Trained::UsVsUr => Group::Us,
                Trained::UkVsUr => Group::Uk,
                Trained::UsUkVsUr => bail!("us+uk-vs-ur cannot be evaluated with the country scheme"),
            };
            country_split_plan(ds, group)?
        }
    })
}

pub fn cell_spec(cfg: &ExperimentConfig, cell: &Cell) -> ExperimentSpec {
    let seed = cell_seed(cfg, cell);
    let model = match cell.model {
        ModelChoice::Forest => ModelSpec::Forest(ForestParams {
            bootstrap: true,
            split_rule: SplitRule::BestGini,
            seed,
            ..cfg.forest.clone()
        }),
        ModelChoice::ExtraTrees => ModelSpec::Forest(ForestParams {
            bootstrap: false,
            split_rule: SplitRule::RandomThreshold,
            seed,
            ..cfg.forest.clone()
        }),
        ModelChoice::Svm => ModelSpec::Svm(newsbench_core::learn::SvmParams {
            seed,
            ..cfg.svm.clone()
        }),
    };
    ExperimentSpec {
        model,
        scaled: cell.feature.scaled(),
        seed,
    }
}

/// Corpus-level inputs shared by every cell.
pub struct Inputs {
    pub corpus: Corpus,
    pub notes: Vec<String>,
    pub nela: Option<LabeledDataset>,
    pub d2v: Option<LabeledDataset>,
}

pub fn prepare_inputs(cfg: &ExperimentConfig) -> anyhow::Result<Inputs> {
    let (corpus, notes) = load_input(cfg)?;
    let rows = LabeledDataset::rows_from_corpus(&corpus)?;
    let nela = if cfg.features.iter().any(|f| !f.is_embedding()) {
        Some(LabeledDataset::new(rows.clone(), FeatureInput::Vectors(nela_matrix(&corpus)?))?)
    } else {
        None
    };
    let d2v = if cfg.features.iter().any(|f| f.is_embedding()) {
        let tokens = corpus.articles.par_iter().map(|a| doc_tokens(&a.text())).collect();
        let input = FeatureInput::Documents {
            tokens,
            config: cfg.embedding.clone(),
            infer_steps: cfg.infer_steps,
        };
        Some(LabeledDataset::new(rows, input)?)
    } else {
        None
    };
    Ok(Inputs {
        corpus,
        notes,
        nela,
        d2v,
    })
}

pub fn run_cell(cfg: &ExperimentConfig, inputs: &Inputs, cell: &Cell) -> anyhow::Result<ExperimentResult> {
    if let Some(why) = cell.forbidden() {
        bail!("cell {} is not allowed: {why}", cell.key());
    }
    let base = if cell.feature.is_embedding() { &inputs.d2v } else { &inputs.nela };
    let base = base.as_ref().context("feature input was not prepared")?;
    let ds = cell_dataset(base, cell);
    let plan = cell_plan(cfg, cell, &ds)?;
    Ok(run_experiment(&ds, &plan, &cell_spec(cfg, cell))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub cell: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub key: String,
    pub seed: u64,
    pub split_seed: u64,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifacts: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub config: newsbench_core::embed::EmbeddingConfig,
    pub infer_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub articles: usize,
    pub sources: usize,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifestFile {
    pub schema: String,
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_version: Option<String>,
    pub abbreviations_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingRecord>,
    pub corpus: CorpusRecord,
    pub notes: Vec<String>,
    pub cells: Vec<CellRecord>,
}

pub struct RunSummary {
    pub out_dir: PathBuf,
    pub results: Vec<(Cell, ExperimentResult)>,
    pub table: Option<ResultsTable>,
    pub failures: Vec<Failure>,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pool(workers: usize) -> anyhow::Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().context("building worker pool")
}

pub fn results_table(results: &[(Cell, ExperimentResult)]) -> anyhow::Result<ResultsTable> {
    let keyed: Vec<(ResultKey, &ExperimentResult)> = results
        .iter()
        .map(|(c, r)| {
            (
                ResultKey {
                    algorithm: c.model.to_string(),
                    feature: c.feature.to_string(),
                    trained: c.trained.to_string(),
                    scheme: c.scheme,
                },
                r,
            )
        })
        .collect();
    Ok(aggregate_results(&keyed)?)
}

/// Runs every allowed cell and writes all artifacts under `cfg.output`:
///
/// * `cells/<cell>/result.json` and `cells/<cell>/confusion.svg`
/// * `results.csv`, `results.txt`, `results.json`
/// * `failures.json`, empty when every cell succeeded
/// * `manifest.json`
///
/// Cell failures are recorded, not raised; check [`RunSummary::ok`].
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<RunSummary> {
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(crate::config::ConfigError { violations: problems }.into());
    }
    let pool = pool(cfg.workers)?;
    let cells = cfg.cells();
    let (inputs, outcomes) = pool.install(|| -> anyhow::Result<_> {
        let inputs = prepare_inputs(cfg)?;
        let outcomes: Vec<anyhow::Result<ExperimentResult>> =
            cells.par_iter().map(|c| run_cell(cfg, &inputs, c)).collect();
        Ok((inputs, outcomes))
    })?;

    let out = cfg.output.clone();
    let cells_dir = out.join("cells");
    if cells_dir.exists() {
        fs::remove_dir_all(&cells_dir).with_context(|| format!("clearing {}", cells_dir.display()))?;
    }
    fs::create_dir_all(&cells_dir).with_context(|| format!("creating {}", cells_dir.display()))?;

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut records = Vec::new();
    for (cell, outcome) in cells.iter().zip(outcomes) {
        let mut record = CellRecord {
            key: cell.key(),
            seed: cell_seed(cfg, cell),
            split_seed: split_seed(cfg, cell),
            status: "ok".into(),
            manifest_hash: None,
            artifacts: None,
        };
        match outcome {
            Ok(r) => {
                let dir = cells_dir.join(cell.slug());
                fs::create_dir_all(&dir)?;
                write(&dir.join("result.json"), &(r.to_json() + "\n"))?;
                let m: Vec<Vec<f64>> = r.mean_confusion.iter().map(|row| row.to_vec()).collect();
                let labels = [Class::Reliable.as_str(), Class::Unreliable.as_str()];
                write(&dir.join("confusion.svg"), &emit_heatmap(&m, &labels, &cell.key())?)?;
                record.manifest_hash = Some(r.manifest_hash.clone());
                record.artifacts = Some(format!("cells/{}", cell.slug()));
                results.push((*cell, r));
            }
            Err(e) => {
                record.status = "failed".into();
                failures.push(Failure {
                    cell: cell.key(),
                    error: format!("{e:#}"),
                });
            }
        }
        records.push(record);
    }

    let table = if results.is_empty() {
        None
    } else {
        Some(results_table(&results)?)
    };
    if let Some(t) = &table {
        write(&out.join("results.csv"), &t.to_csv()?)?;
        write(&out.join("results.txt"), &format!("{}\n{}", t.to_text(), t.wide_text()))?;
        write(&out.join("results.json"), &(serde_json::to_string_pretty(t)? + "\n"))?;
    }
    write(&out.join("failures.json"), &(serde_json::to_string_pretty(&failures)? + "\n"))?;

    let manifest = RunManifestFile {
        schema: RUN_MANIFEST_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        catalog_version: inputs.nela.as_ref().map(|_| FeatureCatalog::nela_open_v1().version),
        abbreviations_version: ABBREVIATIONS_VERSION.to_string(),
        embedding: inputs.d2v.as_ref().map(|_| EmbeddingRecord {
            config: cfg.embedding.clone(),
            infer_steps: cfg.infer_steps,
        }),
        corpus: CorpusRecord {
            articles: inputs.corpus.len(),
            sources: inputs.corpus.roster.len(),
            fingerprint: corpus_fingerprint(&inputs.corpus),
        },
        notes: inputs.notes,
        cells: records,
    };
    write(&out.join("manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;

    Ok(RunSummary {
        out_dir: out,
        results,
        table,
        failures,
    })
}
