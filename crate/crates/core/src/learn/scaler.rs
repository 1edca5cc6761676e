use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, FeatureSignature};
use crate::{Error, Result};

/// Per-feature z-scoring followed by per-row L2 normalization.
///
/// Statistics are population mean and standard deviation of the rows the
/// scaler was fitted on. A zero standard deviation maps the whole column
/// to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub fitted_on: String,
}

pub fn fit_scaler(x: ArrayView2<'_, f64>, fitted_on: impl Into<String>) -> Result<Scaler> {
    if x.nrows() == 0 {
        return Err(Error::InvalidParam("cannot fit a scaler on zero rows".into()));
    }
    let n = x.nrows() as f64;
    let mut means = Vec::with_capacity(x.ncols());
    let mut stds = Vec::with_capacity(x.ncols());
    for col in x.axis_iter(Axis(1)) {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means.push(mean);
        stds.push(var.sqrt());
    }
    Ok(Scaler {
        means,
        stds,
        fitted_on: fitted_on.into(),
    })
}

pub fn apply_scaler(s: &Scaler, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.n_features() != s.means.len() {
        return Err(Error::DimensionMismatch {
            expected: s.means.len(),
            actual: x.n_features(),
        });
    }
    if x.signature.scaled {
        return Err(Error::InvalidParam(format!("input `{}` is already scaled", x.signature)));
    }
    let mut data = x.data.clone();
    for mut row in data.axis_iter_mut(Axis(0)) {
        for ((v, &mu), &sd) in row.iter_mut().zip(&s.means).zip(&s.stds) {
            *v = if sd > 0.0 { (*v - mu) / sd } else { 0.0 };
        }
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    Ok(FeatureMatrix {
        data,
        signature: FeatureSignature::scaled(x.signature.source.clone()),
    })
}
