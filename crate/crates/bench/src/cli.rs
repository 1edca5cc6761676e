//! Command-line front end. Exit codes: 0 success, 1 invalid configuration
//! or usage, 2 runtime failure.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use newsbench_core::corpus::{corpus_stats, validate_corpus, write_jsonl, write_roster, Corpus, SamplingConfig};
use newsbench_core::embed;
use newsbench_core::eval::ResultsTable;
use newsbench_core::rng::derive_seed_str;
use newsbench_core::textfeat::{extract_features, write_feature_matrix, FeatureCatalog, LexiconSet};
use serde::Serialize;

use crate::config::{parse_config, ConfigError, CorpusSource, ExperimentConfig};
use crate::run::{doc_tokens, load_input, run};
use crate::synth::{generate_synthetic_corpus, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "newsbench", version, about = "News veracity generalization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; overrides `experiment.seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory; overrides `experiment.output`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Output format for tables printed to stdout.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate the configured corpus, write it back normalized.
    Ingest,
    /// Draw the balanced per-source sample.
    Sample,
    /// Extract catalog features for every (sampled) article.
    Features,
    /// Train a paragraph-vector model on every (sampled) article.
    TrainEmbed,
    /// Run the experiment grid.
    Run,
    /// Write a synthetic corpus and roster.
    Synth,
    /// Print the results table of a finished run.
    Report,
}

/// Usage problems that are not config-file violations.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<ConfigError>().is_some() || e.downcast_ref::<Usage>().is_some() {
        EXIT_INVALID
    } else {
        EXIT_RUNTIME
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Usage("this command needs --config PATH".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output = o.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn create(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_corpus(dir: &Path, name: &str, corpus: &Corpus) -> anyhow::Result<()> {
    create(dir)?;
    let mut articles = Vec::new();
    write_jsonl(corpus, &mut articles)?;
    fs::write(dir.join(name), articles)?;
    let mut roster = Vec::new();
    write_roster(corpus, &mut roster)?;
    fs::write(dir.join("roster.csv"), roster)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn print_table(t: &ResultsTable, format: Format) -> anyhow::Result<()> {
    match format {
        Format::Csv => print!("{}", t.to_csv()?),
        Format::Json => println!("{}", serde_json::to_string_pretty(t)?),
        Format::Text => print!("{}", t.wide_text()),
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Ingest => {
            let mut cfg = load_config(cli)?;
            cfg.sampling = None;
            let (corpus, notes) = load_input(&cfg)?;
            let report = validate_corpus(&corpus);
            let stats = corpus_stats(&corpus);
            write_corpus(&cfg.output, "corpus.jsonl", &corpus)?;
            #[derive(Serialize)]
            struct Ingest<'a> {
                notes: &'a [String],
                validation: &'a newsbench_core::corpus::ValidationReport,
                stats: &'a newsbench_core::corpus::CorpusStats,
            }
            write_json(
                &cfg.output.join("ingest.json"),
                &Ingest {
                    notes: &notes,
                    validation: &report,
                    stats: &stats,
                },
            )?;
            println!(
                "{} articles from {} sources; {} skipped records; validation {}",
                stats.total,
                stats.per_source.len(),
                notes.len(),
                if report.is_clean() { "clean" } else { "found problems (see ingest.json)" }
            );
            Ok(EXIT_OK)
        }
        Command::Sample => {
            let mut cfg = load_config(cli)?;
            cfg.sampling.get_or_insert_with(SamplingConfig::default);
            let (corpus, notes) = load_input(&cfg)?;
            write_corpus(&cfg.output, "sample.jsonl", &corpus)?;
            write_json(&cfg.output.join("sample.json"), &corpus_stats(&corpus))?;
            for n in &notes {
                eprintln!("warning: {n}");
            }
            println!("sampled {} articles from {} sources", corpus.len(), corpus.roster.len());
            Ok(EXIT_OK)
        }
        Command::Features => {
            let cfg = load_config(cli)?;
            let (corpus, _) = load_input(&cfg)?;
            let catalog = FeatureCatalog::nela_open_v1();
            let lex = LexiconSet::starter();
            let rows = corpus
                .articles
                .iter()
                .map(|a| Ok((a.id.clone(), extract_features(a, &catalog, &lex)?)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            create(&cfg.output)?;
            let mut buf = Vec::new();
            let sidecar = write_feature_matrix(&mut buf, &catalog, &rows)?;
            fs::write(cfg.output.join("features.csv"), buf)?;
            write_json(&cfg.output.join("features.json"), &sidecar)?;
            println!("{} rows x {} features ({})", sidecar.rows, sidecar.dimension, sidecar.catalog_version);
            Ok(EXIT_OK)
        }
        Command::TrainEmbed => {
            let cfg = load_config(cli)?;
            let (corpus, _) = load_input(&cfg)?;
            let docs: Vec<Vec<String>> = corpus.articles.iter().map(|a| doc_tokens(&a.text())).collect();
            let ecfg = embed::EmbeddingConfig {
                seed: derive_seed_str(cfg.seed, "embedding"),
                ..cfg.embedding.clone()
            };
            let model = embed::train(&docs, &ecfg)?;
            let dir = cfg.output.join("embedding");
            create(&dir)?;
            model.save(&dir)?;
            println!("trained {} on {} documents, vocabulary {}", model.tag(), model.n_docs(), model.vocab().len());
            Ok(EXIT_OK)
        }
        Command::Run => {
            let cfg = load_config(cli)?;
            let summary = run(&cfg)?;
            if let Some(t) = &summary.table {
                print_table(t, cli.format)?;
            }
            for f in &summary.failures {
                eprintln!("cell {} failed: {}", f.cell, f.error);
            }
            Ok(if summary.ok() { EXIT_OK } else { EXIT_RUNTIME })
        }
        Command::Synth => {
            let spec = match &cli.config {
                Some(_) => match load_config(cli)?.corpus {
                    CorpusSource::Synthetic(s) => s,
                    CorpusSource::Files { .. } => {
                        return Err(Usage("synth needs a config with a [synthetic] section".into()).into())
                    }
                },
                None => SyntheticSpec::default(),
            };
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            let corpus = generate_synthetic_corpus(&spec, cli.seed.unwrap_or(0))?;
            write_corpus(&out, "corpus.jsonl", &corpus)?;
            println!("wrote {} articles from {} sources to {}", corpus.len(), corpus.roster.len(), out.display());
            Ok(EXIT_OK)
        }
        Command::Report => {
            let dir = match (&cli.out, &cli.config) {
                (Some(o), _) => o.clone(),
                (None, Some(_)) => load_config(cli)?.output,
                (None, None) => return Err(Usage("report needs --out DIR or --config PATH".into()).into()),
            };
            let path = dir.join("results.json");
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let table: ResultsTable = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            print_table(&table, cli.format)?;
            Ok(EXIT_OK)
        }
    }
}
