use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, Fitted, TrainedModel};
use crate::rng::{derive_seed, partial_shuffle_indices, seeded};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub epochs: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            epochs: 1000,
            tolerance: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmReport {
    pub epochs_run: usize,
    pub converged: bool,
    /// Largest projected-gradient magnitude seen in the last epoch.
    pub max_violation: f64,
    /// Dual objective after each epoch.
    pub dual_objectives: Vec<f64>,
}

/// `sign(w.x + b)`. The bias is the weight of a constant 1 feature appended
/// during training, so it is regularized together with `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub report: SvmReport,
}

impl LinearSvm {
    pub fn decision(&self, row: ArrayView1<'_, f64>) -> f64 {
        row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>() + self.bias
    }

    /// Label of one row; a zero score maps to +1.
    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> i8 {
        if self.decision(row) >= 0.0 {
            1
        } else {
            -1
        }
    }
}

fn check_labels(y: &[i8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: y.len() });
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
        return Err(Error::TrainingData(format!("svm labels must be -1 or +1, got {bad}")));
    }
    for c in [-1i8, 1] {
        if !y.contains(&c) {
            return Err(Error::TrainingData(format!("class {c:+} is missing from the training labels")));
        }
    }
    Ok(())
}

/// `sum(alpha) - 0.5 |w~|^2` with `w~ = sum alpha_i y_i (x_i, 1)`.
pub fn dual_objective(x: ArrayView2<'_, f64>, y: &[i8], alpha: &[f64]) -> f64 {
    let mut w = vec![0.0; x.ncols() + 1];
    for ((row, &yi), &a) in x.rows().into_iter().zip(y).zip(alpha) {
        let s = a * f64::from(yi);
        for (wj, xj) in w.iter_mut().zip(row.iter().chain(std::iter::once(&1.0))) {
            *wj += s * xj;
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

/// `0.5 |w~|^2 + C sum max(0, 1 - y_i (w.x_i + b))`.
pub fn primal_objective(svm: &LinearSvm, x: ArrayView2<'_, f64>, y: &[i8], c: f64) -> f64 {
    let reg = 0.5 * (svm.weights.iter().map(|v| v * v).sum::<f64>() + svm.bias * svm.bias);
    let hinge: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, &yi)| (1.0 - f64::from(yi) * svm.decision(row)).max(0.0))
        .sum();
    reg + c * hinge
}

/// Dual coordinate descent for the L2-regularized hinge-loss SVM. Refuses
/// matrices that have not been through the scaler.
pub fn train_svm(x: &FeatureMatrix, y: &[i8], p: &SvmParams) -> Result<TrainedModel> {
    if !x.signature.scaled {
        return Err(Error::InvalidParam(format!(
            "svm requires scaled and normalized features, got unscaled `{}`",
            x.signature
        )));
    }
    if !(p.c > 0.0 && p.c.is_finite()) {
        return Err(Error::InvalidParam(format!("svm C must be positive, got {}", p.c)));
    }
    if !(p.tolerance > 0.0) {
        return Err(Error::InvalidParam(format!("svm tolerance must be positive, got {}", p.tolerance)));
    }
    let (n, d) = (x.n_rows(), x.n_features());
    check_labels(y, n)?;

    let xs = &x.data;
    let qd: Vec<f64> = xs.rows().into_iter().map(|r| r.dot(&r) + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut alpha_sum = 0.0;
    let mut report = SvmReport {
        epochs_run: 0,
        converged: false,
        max_violation: f64::INFINITY,
        dual_objectives: Vec::new(),
    };

    for epoch in 0..p.epochs {
        let mut rng = seeded(derive_seed(p.seed, epoch as u64));
        let order = partial_shuffle_indices(&mut rng, n, n);
        let mut max_pg: f64 = 0.0;
        for i in order {
            let row = xs.row(i);
            let yi = f64::from(y[i]);
            let g = yi * (row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == p.c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg == 0.0 {
                continue;
            }
            let old = alpha[i];
            alpha[i] = (old - g / qd[i]).clamp(0.0, p.c);
            let delta = (alpha[i] - old) * yi;
            if delta != 0.0 {
                for (wj, xj) in w.iter_mut().zip(row) {
                    *wj += delta * xj;
                }
                b += delta;
                alpha_sum += alpha[i] - old;
            }
        }
        let norm2 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        report.dual_objectives.push(alpha_sum - 0.5 * norm2);
        report.epochs_run = epoch + 1;
        report.max_violation = max_pg;
        if max_pg < p.tolerance {
            report.converged = true;
            break;
        }
    }

    let svm = LinearSvm {
        weights: w,
        bias: b,
        report,
    };
    Ok(TrainedModel::new(Fitted::Svm(svm), x.signature.clone()))
}

pub fn predict_svm(m: &TrainedModel, x: &FeatureMatrix) -> Result<Vec<i8>> {
    let Fitted::Svm(svm) = m.fitted() else {
        return Err(Error::InvalidParam("predict_svm needs an svm model".into()));
    };
    let x = m.prepare(x)?;
    if x.n_features() != svm.weights.len() {
        return Err(Error::DimensionMismatch {
            expected: svm.weights.len(),
            actual: x.n_features(),
        });
    }
    Ok(x.data.rows().into_iter().map(|r| svm.predict_row(r)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::FeatureSignature;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::Rng;

    fn scaled(data: Array2<f64>) -> FeatureMatrix {
        FeatureMatrix::new(data, FeatureSignature::scaled("toy"))
    }

    fn svm_of(m: &TrainedModel) -> &LinearSvm {
        match m.fitted() {
            Fitted::Svm(s) => s,
            Fitted::Forest(_) => unreachable!(),
        }
    }

    #[test]
    fn symmetric_pair_has_unit_weight() {
        let x = scaled(array![[-1.0], [1.0]]);
        let p = SvmParams {
            tolerance: 1e-12,
            ..SvmParams::default()
        };
        let m = train_svm(&x, &[-1, 1], &p).unwrap();
        let s = svm_of(&m);
        assert!((s.weights[0] - 1.0).abs() < 1e-9, "{:?}", s.weights);
        assert!(s.bias.abs() < 1e-9);
        for (row, y) in x.data.rows().into_iter().zip([-1.0, 1.0]) {
            assert!((y * s.decision(row) - 1.0).abs() < 1e-9);
        }
        assert!(s.report.converged);
    }

    #[test]
    fn tie_rule_and_signs() {
        let s = LinearSvm {
            weights: vec![1.0],
            bias: 0.0,
            report: SvmReport {
                epochs_run: 0,
                converged: true,
                max_violation: 0.0,
                dual_objectives: vec![],
            },
        };
        let m = TrainedModel::new(Fitted::Svm(s), FeatureSignature::scaled("toy"));
        assert_eq!(predict_svm(&m, &scaled(array![[2.0], [-2.0], [0.0]])).unwrap(), vec![1, -1, 1]);
        let raw = FeatureMatrix::new(array![[1.0]], FeatureSignature::raw("toy"));
        assert!(matches!(predict_svm(&m, &raw), Err(Error::SignatureMismatch { .. })));
    }

    #[test]
    fn refuses_unscaled_and_single_class() {
        let raw = FeatureMatrix::new(array![[0.0], [1.0]], FeatureSignature::raw("nela-open-v1"));
        let err = train_svm(&raw, &[-1, 1], &SvmParams::default()).unwrap_err();
        assert!(err.to_string().contains("scaled"), "{err}");
        assert!(train_svm(&scaled(array![[0.0], [1.0]]), &[1, 1], &SvmParams::default()).is_err());
        assert!(train_svm(&scaled(array![[0.0], [1.0]]), &[0, 1], &SvmParams::default()).is_err());
        let bad_c = SvmParams { c: 0.0, ..SvmParams::default() };
        assert!(train_svm(&scaled(array![[0.0], [1.0]]), &[-1, 1], &bad_c).is_err());
    }

    #[test]
    fn separable_2d_fits_exactly() {
        let x = scaled(array![[0.9, 0.1], [0.8, 0.3], [0.7, -0.2], [-0.6, 0.4], [-0.9, -0.1], [-0.5, -0.5]]);
        let y = [1, 1, 1, -1, -1, -1];
        let m = train_svm(&x, &y, &SvmParams::default()).unwrap();
        assert_eq!(predict_svm(&m, &x).unwrap(), y.to_vec());
    }

    #[test]
    fn dual_objective_matches_free_function() {
        let x = scaled(array![[-1.0], [1.0]]);
        assert_eq!(dual_objective(x.view(), &[-1, 1], &[0.5, 0.5]), 0.5);
        assert_eq!(dual_objective(x.view(), &[-1, 1], &[0.0, 0.0]), 0.0);
    }

    fn separable_instance(seed: u64, n: usize) -> (FeatureMatrix, Vec<i8>) {
        let mut rng = seeded(seed);
        let dir = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        while rows.len() < n {
            let r: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let s: f64 = r.iter().zip(&dir).map(|(a, b)| a * b).sum();
            if s.abs() < 0.05 {
                continue;
            }
            let label = if s > 0.0 { 1 } else { -1 };
            if rows.len() == n - 1 && !y.contains(&-label) {
                continue;
            }
            rows.push(r);
            y.push(label);
        }
        (FeatureMatrix::from_rows(&rows, FeatureSignature::scaled("toy")).unwrap(), y)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dual_is_monotone(seed in any::<u64>(), c in 0.1f64..10.0) {
            let (x, y) = separable_instance(seed, 20);
            let m = train_svm(&x, &y, &SvmParams { c, tolerance: 1e-9, seed, ..SvmParams::default() }).unwrap();
            let d = &svm_of(&m).report.dual_objectives;
            for w in d.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-10, "{} -> {}", w[0], w[1]);
            }
        }

        #[test]
        fn duality_gap_closes(seed in any::<u64>()) {
            let (x, y) = separable_instance(seed, 10);
            let p = SvmParams { tolerance: 1e-10, epochs: 100_000, seed, ..SvmParams::default() };
            let m = train_svm(&x, &y, &p).unwrap();
            let s = svm_of(&m);
            let primal = primal_objective(s, x.view(), &y, p.c);
            let dual = *s.report.dual_objectives.last().unwrap();
            prop_assert!(primal - dual >= -1e-9);
            prop_assert!(primal - dual <= 1e-6, "gap {}", primal - dual);
        }

        #[test]
        fn training_is_deterministic(seed in any::<u64>()) {
            let (x, y) = separable_instance(seed, 12);
            let p = SvmParams { seed, ..SvmParams::default() };
            prop_assert_eq!(train_svm(&x, &y, &p).unwrap(), train_svm(&x, &y, &p).unwrap());
        }
    }
}
