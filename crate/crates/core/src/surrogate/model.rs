//! The sixteen-block surrogate: one pipeline of four blocks per excitation mode.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::dataset::{Sample, Split, TrainingDataset};
use super::ensemble::{train_block, BlockData, EnsembleBlock, Task};
use super::features::{encode, FeatureRanges, FeatureVector, FEATURE_COUNT};
use super::mlp::{Activation, MlpError, MlpSpec, Workspace};
use super::train::{Hyperparameters, TrainError, TrainReport};
use crate::dynamics::{ModeId, ModeStabilityResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("block {mode}/{task}: {source}")]
    Training {
        mode: &'static str,
        task: &'static str,
        #[source]
        source: TrainError,
    },
    #[error(transparent)]
    Network(#[from] MlpError),
}

/// Decision thresholds of the two classifier gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub excited: f64,
    pub stable: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { excited: 0.5, stable: 0.5 }
    }
}

/// Network shape and optimiser settings shared by a family of blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub hyper: Hyperparameters,
}

impl BlockConfig {
    pub fn spec(&self, task: Task) -> MlpSpec {
        MlpSpec::new(FEATURE_COUNT, &self.hidden, self.activation, task.head())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub classifier: BlockConfig,
    pub regressor: BlockConfig,
    /// Weight classifier samples inversely to their class frequency.
    pub class_balanced: bool,
    pub thresholds: Thresholds,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let block = BlockConfig { hidden: vec![24, 24], activation: Activation::Tanh, hyper: Hyperparameters::default() };
        Self { classifier: block.clone(), regressor: block, class_balanced: true, thresholds: Thresholds::default() }
    }
}

impl TrainingConfig {
    pub fn block(&self, task: Task) -> &BlockConfig {
        if task.is_classifier() {
            &self.classifier
        } else {
            &self.regressor
        }
    }

    /// SHA-256 of the JSON encoding, hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("config serialises")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub training_config_digest: String,
    pub dataset_digest: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
    pub ranges: FeatureRanges,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModePipeline {
    pub excited: EnsembleBlock,
    pub stable: EnsembleBlock,
    pub wsr: EnsembleBlock,
    pub logdec: EnsembleBlock,
}

impl ModePipeline {
    pub fn block(&self, task: Task) -> &EnsembleBlock {
        match task {
            Task::ExcitedClf => &self.excited,
            Task::StableClf => &self.stable,
            Task::WsrReg => &self.wsr,
            Task::LogdecReg => &self.logdec,
        }
    }
}

/// Ensemble mean and spread of one output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub spread: f64,
}

impl From<(f64, f64)> for Estimate {
    fn from((mean, spread): (f64, f64)) -> Self {
        Self { mean, spread }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePrediction {
    pub result: ModeStabilityResult,
    pub excited_probability: Estimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_probability: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whirl_speed_ratio: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_dec: Option<Estimate>,
}

/// Gated prediction of one mode at encoded input `x`: downstream blocks run
/// only when the mean excited probability reaches the threshold.
pub fn predict_mode(
    pipeline: &ModePipeline,
    mode: ModeId,
    thresholds: &Thresholds,
    x: &[f64],
) -> Result<ModePrediction, MlpError> {
    predict_mode_with(pipeline, mode, thresholds, x, &mut Workspace::default())
}

fn predict_mode_with(
    pipeline: &ModePipeline,
    mode: ModeId,
    thresholds: &Thresholds,
    x: &[f64],
    ws: &mut Workspace,
) -> Result<ModePrediction, MlpError> {
    let excited = Estimate::from(pipeline.excited.predict_with(x, ws)?);
    if excited.mean < thresholds.excited {
        return Ok(ModePrediction {
            result: ModeStabilityResult::not_excited(mode),
            excited_probability: excited,
            stable_probability: None,
            whirl_speed_ratio: None,
            log_dec: None,
        });
    }
    let stable = Estimate::from(pipeline.stable.predict_with(x, ws)?);
    let wsr = Estimate::from(pipeline.wsr.predict_with(x, ws)?);
    let logdec = Estimate::from(pipeline.logdec.predict_with(x, ws)?);
    Ok(ModePrediction {
        result: ModeStabilityResult {
            mode,
            excited: true,
            stable: Some(stable.mean >= thresholds.stable),
            whirl_speed_ratio: Some(wsr.mean),
            log_dec: Some(logdec.mean),
        },
        excited_probability: excited,
        stable_probability: Some(stable),
        whirl_speed_ratio: Some(wsr),
        log_dec: Some(logdec),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogatePrediction {
    pub modes: [ModePrediction; 4],
    /// Features outside the training ranges.
    pub out_of_range: Vec<String>,
}

impl SurrogatePrediction {
    pub fn results(&self) -> [ModeStabilityResult; 4] {
        self.modes.map(|m| m.result)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    pub metadata: ModelMetadata,
    /// Indexed in [`ModeId::ALL`] order.
    pub pipelines: [ModePipeline; 4],
}

impl SurrogateModel {
    pub fn predict(&self, x: &FeatureVector) -> Result<SurrogatePrediction, MlpError> {
        let input = encode(x);
        let mut ws = Workspace::default();
        let mut modes = Vec::with_capacity(4);
        for (pipeline, mode) in self.pipelines.iter().zip(ModeId::ALL) {
            modes.push(predict_mode_with(pipeline, mode, &self.metadata.thresholds, &input, &mut ws)?);
        }
        let out_of_range = self.metadata.ranges.out_of_range(x).into_iter().map(str::to_string).collect();
        Ok(SurrogatePrediction { modes: modes.try_into().expect("four modes"), out_of_range })
    }

    pub fn blocks(&self) -> impl Iterator<Item = (ModeId, &EnsembleBlock)> {
        self.pipelines
            .iter()
            .zip(ModeId::ALL)
            .flat_map(|(p, mode)| Task::ALL.into_iter().map(move |t| (mode, p.block(t))))
    }
}

/// Rows of `split` for one block: all rows for the excited classifier,
/// oracle-excited rows otherwise.
pub fn block_data(samples: &[&Sample], mode: ModeId, task: Task, class_balanced: bool) -> BlockData {
    let k = mode.index();
    let mut data = BlockData::default();
    for s in samples {
        let m = &s.modes[k];
        let y = match task {
            Task::ExcitedClf => Some(if m.excited { 1.0 } else { 0.0 }),
            Task::StableClf => m.stable.map(|b| if b { 1.0 } else { 0.0 }),
            Task::WsrReg => m.whirl_speed_ratio,
            Task::LogdecReg => m.log_dec,
        };
        if let Some(y) = y {
            data.x.push(encode(&s.features).to_vec());
            data.y.push(y);
        }
    }
    data.w = if task.is_classifier() && class_balanced { balanced_weights(&data.y) } else { vec![1.0; data.y.len()] };
    data
}

/// `n / (2 n_c)` per sample of class `c`; unit weights if a class is absent.
fn balanced_weights(y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    let positives = y.iter().filter(|&&v| v > 0.5).count() as f64;
    let negatives = n - positives;
    if positives == 0.0 || negatives == 0.0 {
        return vec![1.0; y.len()];
    }
    y.iter().map(|&v| if v > 0.5 { n / (2.0 * positives) } else { n / (2.0 * negatives) }).collect()
}

/// Per-block training outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub mode: ModeId,
    pub task: Task,
    pub train_rows: usize,
    pub val_rows: usize,
    pub members: Vec<TrainReport>,
}

fn block_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index as u64 + 1))
}

/// Train all sixteen blocks on the train split with early stopping on the
/// validation split. Blocks train in parallel; each has a fixed seed derived
/// from `seed` and its position, so the result does not depend on scheduling.
pub fn train_surrogate(
    dataset: &TrainingDataset,
    config: &TrainingConfig,
    ranges: &FeatureRanges,
    seed: u64,
) -> Result<(SurrogateModel, Vec<BlockReport>), SurrogateError> {
    let train: Vec<&Sample> = dataset.split(Split::Train).collect();
    let val: Vec<&Sample> = dataset.split(Split::Val).collect();
    let jobs: Vec<(ModeId, Task)> = ModeId::ALL.iter().flat_map(|&m| Task::ALL.map(|t| (m, t))).collect();
    let trained: Vec<Result<(EnsembleBlock, BlockReport), SurrogateError>> = jobs
        .par_iter()
        .enumerate()
        .map(|(index, &(mode, task))| {
            let block = config.block(task);
            let tr = block_data(&train, mode, task, config.class_balanced);
            let va = block_data(&val, mode, task, config.class_balanced);
            let (ensemble, members) = train_block(task, &block.spec(task), &tr, &va, &block.hyper, block_seed(seed, index))
                .map_err(|source| SurrogateError::Training { mode: mode.name(), task: task.name(), source })?;
            Ok((ensemble, BlockReport { mode, task, train_rows: tr.y.len(), val_rows: va.y.len(), members }))
        })
        .collect();
    let mut blocks = Vec::with_capacity(16);
    let mut reports = Vec::with_capacity(16);
    for r in trained {
        let (b, rep) = r?;
        blocks.push(b);
        reports.push(rep);
    }
    let mut it = blocks.into_iter();
    let pipelines = std::array::from_fn(|_| {
        let mut next = || it.next().expect("sixteen blocks");
        ModePipeline { excited: next(), stable: next(), wsr: next(), logdec: next() }
    });
    let metadata = ModelMetadata {
        training_config_digest: config.digest(),
        dataset_digest: dataset.digest(),
        seed,
        created_unix: 0,
        ranges: *ranges,
        thresholds: config.thresholds,
    };
    Ok((SurrogateModel { metadata, pipelines }, reports))
}
