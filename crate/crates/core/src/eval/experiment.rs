use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{confusion_matrix, mean_confusion, Confusion, FeatureInput, Fold, LabeledDataset, Scheme, SplitPlan};
use crate::corpus::{Class, Group};
use crate::embed::{self, infer_vector};
use crate::learn::{
    apply_scaler, feature_importance, fit_scaler, importance_concentration, predict_forest, predict_svm,
    train_forest, train_svm, ClassPair, Concentration, FeatureMatrix, FeatureSignature, ForestParams, Scaler,
    SplitRule, SvmParams, TrainedModel,
};
use crate::rng::{derive_seed, derive_seed_str, sha256_hex};
use crate::{Error, Result};

pub const EXPERIMENT_SCHEMA: &str = "experiment-result-v1";

const MODEL_STREAM: u64 = 1;
const EMBED_STREAM: u64 = 2;

const CLASS_ORDER: [Class; 2] = [Class::Reliable, Class::Unreliable];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Forest(ForestParams),
    Svm(SvmParams),
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Forest(p) if p.split_rule == SplitRule::RandomThreshold => "extra_trees",
            ModelSpec::Forest(_) => "random_forest",
            ModelSpec::Svm(_) => "svm",
        }
    }
}

/// Model, whether features are scaled inside each fold, and the run seed.
/// Seeds inside `model` are replaced per fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelSpec,
    pub scaled: bool,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.model, ModelSpec::Svm(_)) && !self.scaled {
            return Err(Error::InvalidParam(
                "SVM requires scaled features: linear margins are not invariant to feature scale".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// Row-normalized, class order `[reliable, unreliable]`.
    pub confusion: Confusion,
    pub feature_signature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<Concentration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSummary {
    /// Fold mean of the normalized importance vectors.
    pub mean: Vec<f64>,
    pub concentration: Concentration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub scheme: Scheme,
    pub model: ModelSpec,
    pub scaled: bool,
    pub seed: u64,
    /// Catalog version, or `d2v:` plus a hash of the embedding config.
    pub feature_source: String,
    pub n_rows: usize,
    pub fold_seeds: Vec<u64>,
    pub plan_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_group: Option<Group>,
}

impl RunManifest {
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("manifest serializes"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema: String,
    pub class_order: [Class; 2],
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
    pub mean_confusion: [[f64; 2]; 2],
    pub folds: Vec<FoldResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<ImportanceSummary>,
    pub manifest: RunManifest,
    pub manifest_hash: String,
}

impl ExperimentResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// Train and test matrices of one fold, plus the scaler fitted on the
/// training rows when the spec asks for scaling.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    pub scaler: Option<Scaler>,
}

fn fold_seed(spec: &ExperimentSpec, k: usize) -> u64 {
    derive_seed(spec.seed, k as u64)
}

/// Raw train/test matrices for fold `k` and, if scaled, the scaler fitted
/// on the train matrix. Matrices are returned unscaled.
pub fn prepare_fold(ds: &LabeledDataset, fold: &Fold, k: usize, spec: &ExperimentSpec) -> Result<PreparedFold> {
    let seed = fold_seed(spec, k);
    let (train, test) = match ds.input() {
        FeatureInput::Vectors(m) => (m.select_rows(&fold.train), m.select_rows(&fold.test)),
        FeatureInput::Documents {
            tokens,
            config,
            infer_steps,
        } => {
            let cfg = embed::EmbeddingConfig {
                seed: derive_seed(seed, EMBED_STREAM),
                ..config.clone()
            };
            let docs: Vec<&[String]> = fold.train.iter().map(|&i| tokens[i].as_slice()).collect();
            let model = embed::train(&docs, &cfg)?;
            let sig = FeatureSignature::raw(model.tag());
            let train_rows: Vec<Vec<f64>> = (0..docs.len()).map(|i| model.doc_vector(i).to_vec()).collect();
            let test_rows: Vec<Vec<f64>> = fold
                .test
                .iter()
                .map(|&i| infer_vector(&model, &tokens[i], *infer_steps, derive_seed_str(seed, &ds.rows()[i].article_id)).vector)
                .collect();
            (FeatureMatrix::from_rows(&train_rows, sig.clone())?, FeatureMatrix::from_rows(&test_rows, sig)?)
        }
    };
    let scaler = if spec.scaled {
        Some(fit_scaler(train.view(), format!("fold-{k}"))?)
    } else {
        None
    };
    Ok(PreparedFold { train, test, scaler })
}

fn run_fold(ds: &LabeledDataset, fold: &Fold, k: usize, spec: &ExperimentSpec) -> Result<(FoldResult, Option<Vec<f64>>)> {
    let seed = fold_seed(spec, k);
    let prepared = prepare_fold(ds, fold, k, spec)?;
    let x_train = match &prepared.scaler {
        Some(s) => apply_scaler(s, &prepared.train)?,
        None => prepared.train.clone(),
    };
    let truth: Vec<Class> = fold.test.iter().map(|&i| ds.rows()[i].class).collect();
    let train_classes: Vec<Class> = fold.train.iter().map(|&i| ds.rows()[i].class).collect();
    let model_seed = derive_seed(seed, MODEL_STREAM);

    let attach = |m: TrainedModel| match &prepared.scaler {
        Some(s) => m.with_scaler(s.clone()),
        None => Ok(m),
    };
    let (pred, importance): (Vec<Class>, Option<Vec<f64>>) = match &spec.model {
        ModelSpec::Forest(p) => {
            let classes = ClassPair::new(Class::Reliable.as_str(), Class::Unreliable.as_str())?;
            let y: Vec<usize> = train_classes.iter().map(|&c| usize::from(c == Class::Unreliable)).collect();
            let params = ForestParams { seed: model_seed, ..p.clone() };
            let model = attach(train_forest(&x_train, &y, &classes, &params)?)?;
            let labels = predict_forest(&model, &prepared.test)?.labels;
            (labels.into_iter().map(|l| CLASS_ORDER[l]).collect(), Some(feature_importance(&model)?))
        }
        ModelSpec::Svm(p) => {
            let y: Vec<i8> = train_classes.iter().map(|&c| if c == Class::Reliable { 1 } else { -1 }).collect();
            let params = SvmParams { seed: model_seed, ..p.clone() };
            let model = attach(train_svm(&x_train, &y, &params)?)?;
            let labels = predict_svm(&model, &prepared.test)?;
            (labels.into_iter().map(|l| if l > 0 { Class::Reliable } else { Class::Unreliable }).collect(), None)
        }
    };
    let confusion = confusion_matrix(&truth, &pred, [&CLASS_ORDER[0], &CLASS_ORDER[1]], true)?;
    let concentration = importance.as_deref().map(importance_concentration).transpose()?;
    let result = FoldResult {
        fold: k,
        seed,
        n_train: fold.train.len(),
        n_test: fold.test.len(),
        accuracy: confusion.accuracy(),
        confusion,
        feature_signature: x_train.signature.to_string(),
        concentration,
    };
    Ok((result, importance))
}

/// Mean and population standard deviation; `(NaN, NaN)` for no values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn feature_source(ds: &LabeledDataset) -> String {
    match ds.input() {
        FeatureInput::Vectors(m) => m.signature.source.clone(),
        FeatureInput::Documents { config, infer_steps, .. } => {
            let json = serde_json::to_vec(&(config, infer_steps)).expect("config serializes");
            format!("d2v:{}", &sha256_hex(&json)[..16])
        }
    }
}

/// Runs every fold of `plan` (in parallel on the current rayon pool) and
/// aggregates the results. The first failing fold, by index, aborts the run.
pub fn run_experiment(ds: &LabeledDataset, plan: &SplitPlan, spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    plan.check(ds)?;
    if plan.folds.is_empty() {
        return Err(Error::Split("plan has no folds".into()));
    }

    let outcomes: Vec<Result<(FoldResult, Option<Vec<f64>>)>> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(k, f)| run_fold(ds, f, k, spec))
        .collect();
    let mut folds = Vec::with_capacity(outcomes.len());
    let mut importances = Vec::new();
    for (k, o) in outcomes.into_iter().enumerate() {
        let (r, imp) = o.map_err(|e| Error::Fold { fold: k, source: Box::new(e) })?;
        folds.push(r);
        importances.extend(imp);
    }

    let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
    let (mean, std) = mean_std(&acc);
    let mean_confusion = mean_confusion(&folds.iter().map(|f| f.confusion.clone()).collect::<Vec<_>>());

    let importance = if importances.is_empty() {
        None
    } else {
        let d = importances[0].len();
        let mut m = vec![0.0; d];
        for v in &importances {
            for (a, b) in m.iter_mut().zip(v) {
                *a += b;
            }
        }
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= total);
        Some(ImportanceSummary {
            concentration: importance_concentration(&m)?,
            mean: m,
        })
    };

    let manifest = RunManifest {
        scheme: plan.scheme,
        model: spec.model.clone(),
        scaled: spec.scaled,
        seed: spec.seed,
        feature_source: feature_source(ds),
        n_rows: ds.len(),
        fold_seeds: folds.iter().map(|f| f.seed).collect(),
        plan_hash: sha256_hex(&serde_json::to_vec(&plan.folds).expect("plan serializes")),
        train_group: plan.train_group,
        test_group: plan.test_group,
    };
    Ok(ExperimentResult {
        schema: EXPERIMENT_SCHEMA.to_string(),
        class_order: CLASS_ORDER,
        fold_accuracies: acc,
        mean,
        std,
        mean_confusion,
        folds,
        importance,
        manifest_hash: manifest.hash(),
        manifest,
    })
}
