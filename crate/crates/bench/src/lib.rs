//! Experiment configuration, synthetic corpora, grid orchestration and
//! report emission on top of `newsbench_core`.

pub mod cli;
pub mod config;
pub mod heatmap;
pub mod run;
pub mod synth;

pub use config::{parse_config, parse_config_str, Cell, ConfigError, ExperimentConfig, FeatureSpec, ModelChoice, Trained};
pub use heatmap::emit_heatmap;
pub use run::{run, RunSummary};
pub use synth::{generate_synthetic_corpus, Regime, SyntheticSpec};
