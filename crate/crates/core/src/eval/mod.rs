//! Split schemes, the per-fold train/test loop and result aggregation.
//!
//! Folds are independent: fold `k` draws every random number from
//! `derive_seed(seed, k)`, so running them on any number of threads gives
//! the same result.

mod confusion;
mod experiment;
mod split;
mod table;

use std::collections::BTreeSet;

pub use confusion::{confusion_matrix, mean_confusion, mean_matrix, Confusion};
pub use experiment::{
    mean_std, prepare_fold, run_experiment, ExperimentResult, ExperimentSpec, FoldResult, ImportanceSummary, ModelSpec,
    PreparedFold, RunManifest, EXPERIMENT_SCHEMA,
};
pub use split::{
    article_split_plan, country_split_plan, source_split_plan, Fold, Scheme, SplitConfig, SplitPlan,
    MAX_SOURCE_RESAMPLES,
};
pub use table::{aggregate_results, format_cell, ResultKey, ResultsTable, TableRow, WideRow};

use crate::corpus::{Class, Corpus, Group};
use crate::embed::EmbeddingConfig;
use crate::learn::FeatureMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub article_id: String,
    pub class: Class,
    pub source: String,
    pub group: Group,
}

/// Where a fold's feature vectors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureInput {
    /// Precomputed unscaled vectors, one row per dataset row.
    Vectors(FeatureMatrix),
    /// Token lists for a paragraph-vector model that each fold trains on its
    /// own training rows; test rows are inferred against the frozen model.
    Documents {
        tokens: Vec<Vec<String>>,
        config: EmbeddingConfig,
        infer_steps: usize,
    },
}

impl FeatureInput {
    fn len(&self) -> usize {
        match self {
            FeatureInput::Vectors(m) => m.n_rows(),
            FeatureInput::Documents { tokens, .. } => tokens.len(),
        }
    }

    fn select(&self, idx: &[usize]) -> FeatureInput {
        match self {
            FeatureInput::Vectors(m) => FeatureInput::Vectors(m.select_rows(idx)),
            FeatureInput::Documents {
                tokens,
                config,
                infer_steps,
            } => FeatureInput::Documents {
                tokens: idx.iter().map(|&i| tokens[i].clone()).collect(),
                config: config.clone(),
                infer_steps: *infer_steps,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    rows: Vec<Row>,
    input: FeatureInput,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Row>, input: FeatureInput) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                actual: input.len(),
            });
        }
        if let FeatureInput::Vectors(m) = &input {
            if m.signature.scaled {
                return Err(Error::InvalidParam(
                    "dataset vectors must be unscaled; scaling is fitted per fold".into(),
                ));
            }
        }
        let mut seen = BTreeSet::new();
        for r in &rows {
            if !seen.insert(r.article_id.as_str()) {
                return Err(Error::TrainingData(format!("duplicate article id `{}`", r.article_id)));
            }
            if r.class == Class::Reliable && r.group == Group::None {
                return Err(Error::TrainingData(format!(
                    "reliable article `{}` from `{}` has no country group",
                    r.article_id, r.source
                )));
            }
        }
        Ok(LabeledDataset { rows, input })
    }

    /// Rows for every corpus article, in corpus order, labelled from the
    /// roster.
    pub fn rows_from_corpus(c: &Corpus) -> Result<Vec<Row>> {
        c.articles
            .iter()
            .map(|a| {
                let s = c.source(&a.source_name).ok_or_else(|| {
                    Error::TrainingData(format!("article `{}` cites unknown source `{}`", a.id, a.source_name))
                })?;
                Ok(Row {
                    article_id: a.id.clone(),
                    class: s.class(),
                    source: a.source_name.clone(),
                    group: s.group(),
                })
            })
            .collect()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn input(&self) -> &FeatureInput {
        &self.input
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            input: self.input.select(idx),
        }
    }

    pub fn filter(&self, keep: impl Fn(&Row) -> bool) -> LabeledDataset {
        let idx: Vec<usize> = (0..self.rows.len()).filter(|&i| keep(&self.rows[i])).collect();
        self.subset(&idx)
    }
}
