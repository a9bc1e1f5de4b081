//! Agreement between surrogate and oracle labels.

use serde::{Deserialize, Serialize};

use super::dataset::{Split, TrainingDataset};
use super::features::encode;
use super::model::{predict_mode, SurrogateModel};
use super::mlp::MlpError;
use crate::dynamics::ModeId;

/// Mean of the per-class recalls; classes absent from `truth` are skipped.
pub fn balanced_accuracy(truth: &[bool], predicted: &[bool]) -> f64 {
    let recall = |class: bool| {
        let (hit, total) = truth
            .iter()
            .zip(predicted)
            .filter(|(t, _)| **t == class)
            .fold((0usize, 0usize), |(h, n), (_, p)| (h + usize::from(*p == class), n + 1));
        (total > 0).then(|| hit as f64 / total as f64)
    };
    let recalls: Vec<f64> = [true, false].into_iter().filter_map(recall).collect();
    if recalls.is_empty() {
        f64::NAN
    } else {
        recalls.iter().sum::<f64>() / recalls.len() as f64
    }
}

/// Coefficient of determination of `predicted` against `truth`.
pub fn r_squared(truth: &[f64], predicted: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mean = truth.iter().sum::<f64>() / n;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = truth.iter().zip(predicted).map(|(t, p)| (t - p).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

pub fn mean_absolute_error(truth: &[f64], predicted: &[f64]) -> f64 {
    truth.iter().zip(predicted).map(|(t, p)| (t - p).abs()).sum::<f64>() / truth.len() as f64
}

/// Scores of one mode pipeline, or of all four pooled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub rows: usize,
    pub excited_rows: usize,
    /// Balanced accuracy of the gated excited flag.
    pub excited_balanced_accuracy: f64,
    /// Fraction of rows whose gated excited flag matches the oracle.
    pub excited_agreement: f64,
    /// Balanced accuracy of the stable classifier on oracle-excited rows.
    pub stable_balanced_accuracy: f64,
    pub wsr_r2: f64,
    pub wsr_mae: f64,
    pub logdec_r2: f64,
    pub logdec_mae: f64,
    /// R² of `asinh(log_dec)`, which damps the few extreme decrements.
    pub logdec_asinh_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateMetrics {
    pub split: Split,
    pub pooled: TaskMetrics,
    pub per_mode: Vec<(ModeId, TaskMetrics)>,
}

fn asinh(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.asinh()).collect()
}

#[derive(Default)]
struct Collected {
    excited: (Vec<bool>, Vec<bool>),
    stable: (Vec<bool>, Vec<bool>),
    wsr: (Vec<f64>, Vec<f64>),
    logdec: (Vec<f64>, Vec<f64>),
}

impl Collected {
    fn extend(&mut self, other: &Collected) {
        self.excited.0.extend(&other.excited.0);
        self.excited.1.extend(&other.excited.1);
        self.stable.0.extend(&other.stable.0);
        self.stable.1.extend(&other.stable.1);
        self.wsr.0.extend(&other.wsr.0);
        self.wsr.1.extend(&other.wsr.1);
        self.logdec.0.extend(&other.logdec.0);
        self.logdec.1.extend(&other.logdec.1);
    }

    fn metrics(&self) -> TaskMetrics {
        let (et, ep) = &self.excited;
        TaskMetrics {
            rows: et.len(),
            excited_rows: self.wsr.0.len(),
            excited_balanced_accuracy: balanced_accuracy(et, ep),
            excited_agreement: et.iter().zip(ep).filter(|(a, b)| a == b).count() as f64 / et.len() as f64,
            stable_balanced_accuracy: balanced_accuracy(&self.stable.0, &self.stable.1),
            wsr_r2: r_squared(&self.wsr.0, &self.wsr.1),
            wsr_mae: mean_absolute_error(&self.wsr.0, &self.wsr.1),
            logdec_r2: r_squared(&self.logdec.0, &self.logdec.1),
            logdec_mae: mean_absolute_error(&self.logdec.0, &self.logdec.1),
            logdec_asinh_r2: r_squared(&asinh(&self.logdec.0), &asinh(&self.logdec.1)),
        }
    }
}

/// Score `model` on one split. The excited flag goes through the gate; the
/// stable classifier and both regressors are scored on the rows the oracle
/// labels as excited.
pub fn evaluate(model: &SurrogateModel, dataset: &TrainingDataset, split: Split) -> Result<SurrogateMetrics, MlpError> {
    let mut per_mode = Vec::with_capacity(4);
    let mut pooled = Collected::default();
    for (pipeline, mode) in model.pipelines.iter().zip(ModeId::ALL) {
        let mut c = Collected::default();
        for s in dataset.split(split) {
            let x = encode(&s.features);
            let truth = &s.modes[mode.index()];
            let gated = predict_mode(pipeline, mode, &model.metadata.thresholds, &x)?;
            c.excited.0.push(truth.excited);
            c.excited.1.push(gated.result.excited);
            if let (Some(stable), Some(wsr), Some(logdec)) = (truth.stable, truth.whirl_speed_ratio, truth.log_dec) {
                c.stable.0.push(stable);
                c.stable.1.push(pipeline.stable.predict(&x)?.0 >= model.metadata.thresholds.stable);
                c.wsr.0.push(wsr);
                c.wsr.1.push(pipeline.wsr.predict(&x)?.0);
                c.logdec.0.push(logdec);
                c.logdec.1.push(pipeline.logdec.predict(&x)?.0);
            }
        }
        per_mode.push((mode, c.metrics()));
        pooled.extend(&c);
    }
    Ok(SurrogateMetrics { split, pooled: pooled.metrics(), per_mode })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_accuracy_cases() {
        assert_eq!(balanced_accuracy(&[true, true, false, false], &[true, false, false, false]), 0.75);
        assert_eq!(balanced_accuracy(&[true, true], &[true, false]), 0.5);
    }

    #[test]
    fn r_squared_cases() {
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]), 0.0);
    }
}
