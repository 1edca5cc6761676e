use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{ExperimentResult, Scheme};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResultKey {
    pub algorithm: String,
    pub feature: String,
    pub trained: String,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub algorithm: String,
    pub feature: String,
    pub trained: String,
    pub scheme: Scheme,
    pub n_folds: usize,
    pub mean: f64,
    /// Absent for the single-fold country scheme.
    pub std: Option<f64>,
    pub cell: String,
    pub manifest_hash: String,
}

/// One line of the pivoted table: a cell per scheme, `None` where the
/// combination was not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WideRow {
    pub algorithm: String,
    pub feature: String,
    pub trained: String,
    pub article: Option<String>,
    pub source: Option<String>,
    pub country: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<TableRow>,
}

/// `0.904 (+/- 0.01)`, or just `0.488` without a std.
pub fn format_cell(mean: f64, std: Option<f64>) -> String {
    match std {
        Some(s) => format!("{mean:.3} (+/- {s:.2})"),
        None => format!("{mean:.3}"),
    }
}

pub fn aggregate_results(results: &[(ResultKey, &ExperimentResult)]) -> Result<ResultsTable> {
    if results.is_empty() {
        return Err(Error::InvalidParam("no results to aggregate".into()));
    }
    let mut seen = BTreeSet::new();
    let mut rows = Vec::with_capacity(results.len());
    for (key, r) in results {
        if !seen.insert(key) {
            return Err(Error::InvalidParam(format!(
                "duplicate result row {} / {} / {} / {}",
                key.algorithm, key.feature, key.trained, key.scheme
            )));
        }
        let std = (key.scheme != Scheme::Country).then_some(r.std);
        rows.push(TableRow {
            algorithm: key.algorithm.clone(),
            feature: key.feature.clone(),
            trained: key.trained.clone(),
            scheme: key.scheme,
            n_folds: r.fold_accuracies.len(),
            mean: r.mean,
            std,
            cell: format_cell(r.mean, std),
            manifest_hash: r.manifest_hash.clone(),
        });
    }
    Ok(ResultsTable { rows })
}

fn aligned(header: &[&str], body: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &mut dyn Iterator<Item = &str>| -> String {
        let s: Vec<String> = cells.zip(&width).map(|(c, &w)| format!("{c:<w$}")).collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&mut header.iter().copied());
    out.push_str(&line(&mut width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str)));
    for r in body {
        out.push_str(&line(&mut r.iter().map(String::as_str)));
    }
    out
}

impl ResultsTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["algorithm", "feature", "trained", "scheme", "n_folds", "mean", "std", "cell", "manifest_hash"])?;
        for r in &self.rows {
            w.write_record([
                r.algorithm.clone(),
                r.feature.clone(),
                r.trained.clone(),
                r.scheme.to_string(),
                r.n_folds.to_string(),
                r.mean.to_string(),
                r.std.map(|s| s.to_string()).unwrap_or_default(),
                r.cell.clone(),
                r.manifest_hash.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("results csv", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| vec![r.algorithm.clone(), r.feature.clone(), r.trained.clone(), r.scheme.to_string(), r.cell.clone()])
            .collect();
        aligned(&["algorithm", "feature", "trained", "scheme", "accuracy"], &body)
    }

    /// Pivot to one row per (algorithm, feature, trained model), in order of
    /// first appearance.
    pub fn wide(&self) -> Vec<WideRow> {
        let mut out: Vec<WideRow> = Vec::new();
        for r in &self.rows {
            let pos = out
                .iter()
                .position(|w| w.algorithm == r.algorithm && w.feature == r.feature && w.trained == r.trained);
            let w = match pos {
                Some(p) => &mut out[p],
                None => {
                    out.push(WideRow {
                        algorithm: r.algorithm.clone(),
                        feature: r.feature.clone(),
                        trained: r.trained.clone(),
                        article: None,
                        source: None,
                        country: None,
                    });
                    out.last_mut().expect("just pushed")
                }
            };
            let slot = match r.scheme {
                Scheme::Article => &mut w.article,
                Scheme::Source => &mut w.source,
                Scheme::Country => &mut w.country,
            };
            *slot = Some(r.cell.clone());
        }
        out
    }

    pub fn wide_text(&self) -> String {
        let dash = |c: &Option<String>| c.clone().unwrap_or_else(|| "-".into());
        let body: Vec<Vec<String>> = self
            .wide()
            .iter()
            .map(|w| {
                vec![
                    w.algorithm.clone(),
                    w.feature.clone(),
                    w.trained.clone(),
                    dash(&w.article),
                    dash(&w.source),
                    dash(&w.country),
                ]
            })
            .collect();
        aligned(&["algorithm", "feature", "trained", "article split", "source split", "country split"], &body)
    }
}
