use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rows are the true class, columns the predicted class, both in the order
/// of the `classes` argument given to [`confusion_matrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub counts: [[u64; 2]; 2],
    /// Row-normalized when requested, raw counts as reals otherwise.
    pub matrix: [[f64; 2]; 2],
    /// True class absent from `y_true`; its normalized row is all zero.
    pub absent: [bool; 2],
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        (self.counts[0][0] + self.counts[1][1]) as f64 / self.total() as f64
    }
}

pub fn confusion_matrix<T: PartialEq + std::fmt::Debug>(
    y_true: &[T],
    y_pred: &[T],
    classes: [&T; 2],
    normalize: bool,
) -> Result<Confusion> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidParam("confusion matrix of zero predictions".into()));
    }
    let index = |v: &T| {
        classes
            .iter()
            .position(|c| *c == v)
            .ok_or_else(|| Error::InvalidParam(format!("label {v:?} is not one of {classes:?}")))
    };
    let mut counts = [[0u64; 2]; 2];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[index(t)?][index(p)?] += 1;
    }
    let mut matrix = [[0.0; 2]; 2];
    let mut absent = [false; 2];
    for r in 0..2 {
        let n = counts[r][0] + counts[r][1];
        absent[r] = n == 0;
        for c in 0..2 {
            matrix[r][c] = match (normalize, n) {
                (false, _) => counts[r][c] as f64,
                (true, 0) => 0.0,
                (true, n) => counts[r][c] as f64 / n as f64,
            };
        }
    }
    Ok(Confusion { counts, matrix, absent })
}

/// Element-wise mean of 2x2 matrices.
pub fn mean_matrix(ms: &[[[f64; 2]; 2]]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    if ms.is_empty() {
        return out;
    }
    for m in ms {
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] += m[r][c];
            }
        }
    }
    let k = ms.len() as f64;
    out.map(|row| row.map(|v| v / k))
}

/// Mean of row-normalized fold matrices where each row is averaged only over
/// the folds in which that true class was present. A class absent from
/// every fold keeps an all-zero row.
pub fn mean_confusion(cs: &[Confusion]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        let present: Vec<&Confusion> = cs.iter().filter(|c| !c.absent[r]).collect();
        if present.is_empty() {
            continue;
        }
        for c in 0..2 {
            out[r][c] = present.iter().map(|m| m.matrix[r][c]).sum::<f64>() / present.len() as f64;
        }
    }
    out
}
