//! Ensemble neural-network surrogate of the oracle stability pipeline.

pub mod dataset;
pub mod ensemble;
pub mod features;
pub mod ga;
pub mod metrics;
pub mod mlp;
pub mod model;
pub mod model_file;
pub mod sampling;
pub mod train;

pub use dataset::{generate_dataset, generate_dataset_with, DatasetError, Sample, Split, TrainingDataset};
pub use ensemble::{ensemble_stats, train_block, BlockData, EnsembleBlock, Task, ENSEMBLE_SIZE};
pub use features::{
    encode, featureize, featureize_with, CanonicalDesign, FeatureRange, FeatureRanges, FeatureVector, Scale,
    FEATURE_COUNT, FEATURE_NAMES,
};
pub use ga::{ga_search, surrogate_fitness, Evaluation, GaError, GaResult, GaSettings, Genome, SearchSpace};
pub use metrics::{balanced_accuracy, evaluate, r_squared, SurrogateMetrics, TaskMetrics};
pub use mlp::{Activation, Head, Loss, Mlp, MlpError, MlpSpec};
pub use model::{
    predict_mode, train_surrogate, BlockConfig, Estimate, ModePipeline, ModePrediction, ModelMetadata,
    SurrogateError, SurrogateModel, SurrogatePrediction, Thresholds, TrainingConfig,
};
pub use model_file::{load_model, model_to_bytes, model_from_bytes, save_model, ModelFileError};
pub use sampling::{ks_uniform, latin_hypercube};
pub use train::{train_network, Hyperparameters, Normalizer, TargetScaling, TrainError, TrainReport, TrainingSet};
