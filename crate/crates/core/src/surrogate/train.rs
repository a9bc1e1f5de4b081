//! Input normalisation and mini-batch Adam training of a single network.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mlp::{Loss, Mlp, MlpError, MlpSpec, Workspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("no training rows")]
    NoData,
    #[error(transparent)]
    Network(#[from] MlpError),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], std: vec![1.0; dim] }
    }

    /// Statistics of `rows`; constant columns get unit scale.
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..dim)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s));
    }
}

/// Mean and spread used to z-score a regression target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaling {
    pub const IDENTITY: Self = Self { mean: 0.0, std: 1.0 };

    pub fn fit(y: &[f64]) -> Self {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: if var > 0.0 { var.sqrt() } else { 1.0 } }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        self.mean + self.std * z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self { learning_rate: 3e-3, batch_size: 32, max_epochs: 400, patience: 40 }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), TrainError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidHyperparameters("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(TrainError::InvalidHyperparameters("batch size and epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Normalised inputs, targets and per-sample loss weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl TrainingSet {
    pub fn unweighted(x: Vec<Vec<f64>>, y: Vec<f64>) -> Self {
        let w = vec![1.0; y.len()];
        Self { x, y, w }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn loss(&self, net: &Mlp, loss: Loss) -> Result<f64, MlpError> {
        let xs: Vec<&[f64]> = self.x.iter().map(Vec::as_slice).collect();
        net.loss(&xs, &self.y, &self.w, loss)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub initial_val_loss: f64,
    pub best_val_loss: f64,
    /// Epoch of the kept weights; 0 means the initial weights.
    pub best_epoch: usize,
    pub epochs_run: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Train a freshly initialised network with early stopping on `val`; the
/// weights with the lowest validation loss (initial weights included) are kept.
pub fn train_network<R: Rng>(
    spec: &MlpSpec,
    train: &TrainingSet,
    val: &TrainingSet,
    loss: Loss,
    hyper: &Hyperparameters,
    rng: &mut R,
) -> Result<(Mlp, TrainReport), TrainError> {
    hyper.validate()?;
    if train.is_empty() {
        return Err(TrainError::NoData);
    }
    let monitor = if val.is_empty() { train } else { val };
    let mut net = Mlp::random(spec.clone(), rng)?;
    let initial = monitor.loss(&net, loss)?;
    if !initial.is_finite() {
        return Err(TrainError::Divergence { epoch: 0, loss: initial });
    }
    let mut best = (net.clone(), initial, 0);
    let mut adam = Adam::new(net.parameters().len());
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = vec![0.0; net.parameters().len()];
    let mut ws = Workspace::default();
    let mut epochs_run = 0;

    for epoch in 1..=hyper.max_epochs {
        epochs_run = epoch;
        order.shuffle(rng);
        for batch in order.chunks(hyper.batch_size) {
            let total: f64 = batch.iter().map(|&i| train.w[i]).sum();
            grad.iter_mut().for_each(|g| *g = 0.0);
            for &i in batch {
                net.accumulate_gradient(&train.x[i], train.y[i], train.w[i] / total, loss, &mut grad, &mut ws);
            }
            adam.step(net.parameters_mut(), &grad, hyper.learning_rate);
        }
        let current = monitor.loss(&net, loss)?;
        if !current.is_finite() {
            return Err(TrainError::Divergence { epoch, loss: current });
        }
        if current < best.1 {
            best = (net.clone(), current, epoch);
        } else if epoch - best.2 >= hyper.patience {
            break;
        }
    }
    let (net, best_val_loss, best_epoch) = best;
    Ok((net, TrainReport { initial_val_loss: initial, best_val_loss, best_epoch, epochs_run }))
}
