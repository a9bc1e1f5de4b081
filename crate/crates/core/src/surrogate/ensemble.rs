//! Ensembles of six identically shaped networks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Head, Loss, Mlp, MlpError, MlpSpec, Workspace};
use super::train::{train_network, Hyperparameters, Normalizer, TargetScaling, TrainError, TrainReport, TrainingSet};

pub const ENSEMBLE_SIZE: usize = 6;

/// What a block predicts for its excitation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    ExcitedClf,
    StableClf,
    WsrReg,
    LogdecReg,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::ExcitedClf, Task::StableClf, Task::WsrReg, Task::LogdecReg];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    /// Training-scale transform of a regression target: log-dec is heavy-tailed
    /// and is learned as `asinh`.
    pub fn warp(self, y: f64) -> f64 {
        if self == Self::LogdecReg { y.asinh() } else { y }
    }

    pub fn unwarp(self, z: f64) -> f64 {
        if self == Self::LogdecReg { z.sinh() } else { z }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ExcitedClf => "excited-clf",
            Self::StableClf => "stable-clf",
            Self::WsrReg => "wsr-reg",
            Self::LogdecReg => "logdec-reg",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn is_classifier(self) -> bool {
        matches!(self, Self::ExcitedClf | Self::StableClf)
    }

    pub fn head(self) -> Head {
        if self.is_classifier() {
            Head::Logistic
        } else {
            Head::Identity
        }
    }

    pub fn loss(self) -> Loss {
        if self.is_classifier() {
            Loss::CrossEntropy
        } else {
            Loss::MeanSquared
        }
    }
}

/// Mean and population standard deviation.
pub fn ensemble_stats(values: &[f64]) -> (f64, f64) {
    if let Some(&first) = values.first().filter(|&&f| values.iter().all(|&v| v == f)) {
        return (first, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleBlock {
    task: Task,
    normalizer: Normalizer,
    target: TargetScaling,
    members: Vec<Mlp>,
}

impl EnsembleBlock {
    pub fn new(task: Task, normalizer: Normalizer, target: TargetScaling, members: Vec<Mlp>) -> Result<Self, MlpError> {
        if members.len() != ENSEMBLE_SIZE {
            return Err(MlpError::InvalidSpec(format!("{ENSEMBLE_SIZE} members required, got {}", members.len())));
        }
        let spec = members[0].spec();
        if members.iter().any(|m| m.spec() != spec) {
            return Err(MlpError::InvalidSpec("all members must share one spec".into()));
        }
        if spec.head != task.head() {
            return Err(MlpError::InvalidSpec(format!("{} needs a {:?} head", task.name(), task.head())));
        }
        let dim = spec.inputs();
        if normalizer.mean.len() != dim || normalizer.std.len() != dim {
            return Err(MlpError::DimensionMismatch { expected: dim, got: normalizer.mean.len() });
        }
        Ok(Self { task, normalizer, target, members })
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn spec(&self) -> &MlpSpec {
        self.members[0].spec()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn target(&self) -> TargetScaling {
        self.target
    }

    pub fn members(&self) -> &[Mlp] {
        &self.members
    }

    /// Member outputs in physical units (probabilities for classifiers).
    pub fn member_outputs(&self, x: &[f64]) -> Result<[f64; ENSEMBLE_SIZE], MlpError> {
        self.member_outputs_with(x, &mut Workspace::default())
    }

    fn member_outputs_with(&self, x: &[f64], ws: &mut Workspace) -> Result<[f64; ENSEMBLE_SIZE], MlpError> {
        let mut z = std::mem::take(ws.input_buffer());
        self.normalizer.apply_into(x, &mut z);
        let mut out = [0.0; ENSEMBLE_SIZE];
        let mut result = Ok(());
        for (o, m) in out.iter_mut().zip(&self.members) {
            match m.forward_with(&z, ws) {
                Ok(y) => *o = self.task.unwarp(self.target.inverse(y)),
                Err(e) => {
                    result = Err(e);
                    break;
                }
            }
        }
        *ws.input_buffer() = z;
        result.map(|()| out)
    }

    /// Ensemble mean and spread at unnormalised input `x`.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, f64), MlpError> {
        self.predict_with(x, &mut Workspace::default())
    }

    /// As [`EnsembleBlock::predict`], reusing scratch space.
    pub fn predict_with(&self, x: &[f64], ws: &mut Workspace) -> Result<(f64, f64), MlpError> {
        Ok(ensemble_stats(&self.member_outputs_with(x, ws)?))
    }
}

/// Unnormalised inputs with targets and loss weights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

impl BlockData {
    fn prepared(&self, task: Task, normalizer: &Normalizer, target: &TargetScaling) -> TrainingSet {
        TrainingSet {
            x: self.x.iter().map(|x| normalizer.apply(x)).collect(),
            y: self.y.iter().map(|&y| target.forward(task.warp(y))).collect(),
            w: self.w.clone(),
        }
    }
}

/// Fit the block normaliser (and target scaling for regressors) on `train`,
/// then train six members whose random streams differ only by member index.
pub fn train_block(
    task: Task,
    spec: &MlpSpec,
    train: &BlockData,
    val: &BlockData,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<(EnsembleBlock, Vec<TrainReport>), TrainError> {
    if train.y.is_empty() {
        return Err(TrainError::NoData);
    }
    if spec.head != task.head() {
        return Err(MlpError::InvalidSpec(format!("{} needs a {:?} head", task.name(), task.head())).into());
    }
    let normalizer = Normalizer::fit(&train.x);
    let target = if task.is_classifier() {
        TargetScaling::IDENTITY
    } else {
        TargetScaling::fit(&train.y.iter().map(|&y| task.warp(y)).collect::<Vec<_>>())
    };
    let train_set = train.prepared(task, &normalizer, &target);
    let val_set = val.prepared(task, &normalizer, &target);
    let mut members = Vec::with_capacity(ENSEMBLE_SIZE);
    let mut reports = Vec::with_capacity(ENSEMBLE_SIZE);
    for k in 0..ENSEMBLE_SIZE {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let (net, report) = train_network(spec, &train_set, &val_set, task.loss(), hyper, &mut rng)?;
        members.push(net);
        reports.push(report);
    }
    Ok((EnsembleBlock::new(task, normalizer, target, members)?, reports))
}
