//! Preprocessing and classifiers, all written against [`FeatureMatrix`].
//!
//! A matrix carries a [`FeatureSignature`]: the catalog version or
//! embedding tag that produced its columns and whether it has been scaled.
//! Fitted models remember the signature they were trained on and refuse
//! anything else at prediction time.

mod forest;
mod importance;
mod scaler;
mod svm;

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

pub use forest::{gini_impurity, predict_forest, train_forest, Forest, ForestParams, ForestPrediction, SplitRule, Tree};
pub use importance::{feature_importance, importance_concentration, Concentration};
pub use scaler::{apply_scaler, fit_scaler, Scaler};
pub use svm::{dual_objective, predict_svm, primal_objective, train_svm, LinearSvm, SvmParams, SvmReport};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSignature {
    /// Catalog version (`nela-open-v1`) or embedding tag (`d2v-…`).
    pub source: String,
    pub scaled: bool,
}

impl FeatureSignature {
    pub fn raw(source: impl Into<String>) -> Self {
        FeatureSignature {
            source: source.into(),
            scaled: false,
        }
    }

    pub fn scaled(source: impl Into<String>) -> Self {
        FeatureSignature {
            source: source.into(),
            scaled: true,
        }
    }
}

impl fmt::Display for FeatureSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scaled {
            write!(f, "{}+zscore-l2", self.source)
        } else {
            f.write_str(&self.source)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub data: Array2<f64>,
    pub signature: FeatureSignature,
}

impl FeatureMatrix {
    pub fn new(data: Array2<f64>, signature: FeatureSignature) -> Self {
        FeatureMatrix { data, signature }
    }

    pub fn from_rows(rows: &[Vec<f64>], signature: FeatureSignature) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Array2::zeros((rows.len(), d));
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: r.len(),
                });
            }
            data.row_mut(i).assign(&ndarray::ArrayView1::from(r.as_slice()));
        }
        Ok(FeatureMatrix { data, signature })
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.data.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.select(Axis(0), rows),
            signature: self.signature.clone(),
        }
    }
}

/// Two class names kept in lexicographic order; index 0 is the lower name
/// and wins every prediction tie.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPair([String; 2]);

impl ClassPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(ClassPair([a, b])),
            std::cmp::Ordering::Greater => Ok(ClassPair([b, a])),
            std::cmp::Ordering::Equal => Err(Error::InvalidParam(format!("class names must differ, got `{a}` twice"))),
        }
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Forest,
    Svm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Forest(Forest),
    Svm(LinearSvm),
}

/// A fitted classifier, the scaler fitted on its training rows (if any) and
/// the signature of the inputs it accepts.
///
/// With a scaler attached, inputs carry the raw signature and are scaled
/// inside [`TrainedModel::prepare`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    fitted: Fitted,
    scaler: Option<Scaler>,
    signature: FeatureSignature,
}

impl TrainedModel {
    pub fn new(fitted: Fitted, signature: FeatureSignature) -> Self {
        TrainedModel {
            fitted,
            scaler: None,
            signature,
        }
    }

    /// Attaches the scaler that produced the training matrix. The model then
    /// accepts raw inputs with the scaler's source signature.
    pub fn with_scaler(mut self, scaler: Scaler) -> Result<Self> {
        if !self.signature.scaled {
            return Err(Error::InvalidParam("a scaler can only be attached to a model trained on scaled features".into()));
        }
        self.signature = FeatureSignature::raw(self.signature.source.clone());
        self.scaler = Some(scaler);
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind {
        match self.fitted {
            Fitted::Forest(_) => ModelKind::Forest,
            Fitted::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn fitted(&self) -> &Fitted {
        &self.fitted
    }

    pub fn scaler(&self) -> Option<&Scaler> {
        self.scaler.as_ref()
    }

    pub fn signature(&self) -> &FeatureSignature {
        &self.signature
    }

    /// Checks the signature and applies the attached scaler, yielding the
    /// matrix the fitted classifier expects.
    pub fn prepare(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.signature != self.signature {
            return Err(Error::SignatureMismatch {
                expected: self.signature.to_string(),
                actual: x.signature.to_string(),
            });
        }
        match &self.scaler {
            Some(s) => apply_scaler(s, x),
            None => Ok(x.clone()),
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let header = ModelFile {
            kind: self.kind(),
            signature: self.signature.clone(),
            scaler: self.scaler.clone(),
            svm: match &self.fitted {
                Fitted::Svm(s) => Some(s.clone()),
                Fitted::Forest(_) => None,
            },
        };
        let path = dir.join("model.json");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &header)?;
        if let Fitted::Forest(f) = &self.fitted {
            let path = dir.join("trees.txt");
            std::fs::write(&path, f.to_dump()).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("model.json");
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let header: ModelFile = serde_json::from_reader(BufReader::new(file))?;
        let fitted = match header.kind {
            ModelKind::Svm => Fitted::Svm(
                header
                    .svm
                    .ok_or_else(|| Error::Parse("svm model file lacks weights".into()))?,
            ),
            ModelKind::Forest => {
                let path = dir.join("trees.txt");
                let dump = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                Fitted::Forest(Forest::from_dump(&dump)?)
            }
        };
        Ok(TrainedModel {
            fitted,
            scaler: header.scaler,
            signature: header.signature,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    kind: ModelKind,
    signature: FeatureSignature,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scaler: Option<Scaler>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    svm: Option<LinearSvm>,
}
