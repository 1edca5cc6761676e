use serde::{Deserialize, Serialize};

use super::{Fitted, TrainedModel};
use crate::{Error, Result};

/// How evenly importance mass is spread over features. Uniform vectors
/// give `gini_coefficient = 0`, `normalized_entropy = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub gini_coefficient: f64,
    pub normalized_entropy: f64,
}

/// Mean decrease in Gini impurity per feature, normalized to sum to one.
pub fn feature_importance(m: &TrainedModel) -> Result<Vec<f64>> {
    match m.fitted() {
        Fitted::Forest(f) => Ok(f.importance()),
        Fitted::Svm(_) => Err(Error::InvalidParam("feature importance is only defined for forest models".into())),
    }
}

pub fn importance_concentration(v: &[f64]) -> Result<Concentration> {
    if v.is_empty() {
        return Err(Error::InvalidParam("importance vector is empty".into()));
    }
    if let Some(bad) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParam(format!("importance entries must be finite and non-negative, got {bad}")));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidParam(format!("importance must sum to 1, got {total}")));
    }
    let n = v.len() as f64;
    let mean = total / n;
    let pairwise: f64 = v.iter().map(|a| v.iter().map(|b| (a - b).abs()).sum::<f64>()).sum();
    let gini = pairwise / (2.0 * n * n * mean);
    let entropy = if v.len() == 1 {
        1.0
    } else {
        let h: f64 = v.iter().filter(|&&x| x > 0.0).map(|&x| x * x.recip().ln()).sum();
        (h / n.ln()).clamp(0.0, 1.0)
    };
    Ok(Concentration {
        gini_coefficient: gini,
        normalized_entropy: entropy,
    })
}
