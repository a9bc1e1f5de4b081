//! Oracle-labelled training data.
//!
//! CSV layout, one row per sample:
//!
//! ```text
//! split,alpha,beta_over_pi,gamma,depth_ratio,length_ratio,lambda,mass_ratio,
//! inertia_ratio,polar_ratio,z1_bar,z2_bar,
//! m1_excited,m1_stable,m1_wsr,m1_logdec, ... ,m4_excited,m4_stable,m4_wsr,m4_logdec
//! ```
//!
//! `split` is `train`, `val` or `test`; mode `k` follows the order
//! cylindrical-forward, cylindrical-backward, conical-forward, conical-backward.
//! Flags are `0`/`1`; `stable`, `wsr` and `logdec` are empty when the mode is
//! not excited. Floats are written in shortest round-trip form.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::features::{FeatureRanges, FeatureVector, FEATURE_COUNT, FEATURE_NAMES, SAMPLED_COUNT};
use super::sampling::latin_hypercube;
use crate::design::OracleSettings;
use crate::dynamics::{ModeId, ModeStabilityResult};

pub const MIN_SAMPLES: usize = 100;

/// Train/validation/test proportions.
pub const SPLIT_FRACTIONS: (f64, f64) = (0.6, 0.2);

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("need at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid feature ranges: {0}")]
    InvalidRanges(String),
    #[error("dataset I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("dataset row {row}: {message}")]
    Row { row: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Val => "val",
            Self::Test => "test",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Self::Train),
            "val" => Some(Self::Val),
            "test" => Some(Self::Test),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub modes: [ModeStabilityResult; 4],
    pub split: Split,
}

/// A sample the oracle could not label.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedSample {
    pub index: usize,
    pub features: FeatureVector,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    pub samples: Vec<Sample>,
    pub excluded: Vec<ExcludedSample>,
}

/// Latin-hypercube samples over `ranges`, labelled by the oracle. Deterministic
/// in `seed` whatever the thread count.
pub fn generate_dataset(
    ranges: &FeatureRanges,
    n_samples: usize,
    seed: u64,
    settings: &OracleSettings,
) -> Result<TrainingDataset, DatasetError> {
    generate_dataset_with(ranges, n_samples, seed, |x| x.oracle_modes(settings).map_err(|e| e.to_string()))
}

/// As [`generate_dataset`] with a custom labeller.
pub fn generate_dataset_with<F>(
    ranges: &FeatureRanges,
    n_samples: usize,
    seed: u64,
    label: F,
) -> Result<TrainingDataset, DatasetError>
where
    F: Fn(&FeatureVector) -> Result<[ModeStabilityResult; 4], String> + Sync,
{
    if n_samples < MIN_SAMPLES {
        return Err(DatasetError::TooFewSamples(n_samples));
    }
    ranges.validate().map_err(DatasetError::InvalidRanges)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<FeatureVector> =
        latin_hypercube::<SAMPLED_COUNT, _>(n_samples, &mut rng).iter().map(|u| ranges.at(u)).collect();
    let labels: Vec<_> = points.par_iter().map(&label).collect();

    let mut labelled = Vec::with_capacity(n_samples);
    let mut excluded = Vec::new();
    for (index, (features, label)) in points.into_iter().zip(labels).enumerate() {
        match label {
            Ok(modes) => labelled.push((features, modes)),
            Err(error) => excluded.push(ExcludedSample { index, features, error }),
        }
    }
    let splits = assign_splits(labelled.len(), &mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5911_7000_0001));
    let samples = labelled
        .into_iter()
        .zip(splits)
        .map(|((features, modes), split)| Sample { features, modes, split })
        .collect();
    Ok(TrainingDataset { samples, excluded })
}

fn assign_splits(n: usize, rng: &mut ChaCha8Rng) -> Vec<Split> {
    let n_train = (SPLIT_FRACTIONS.0 * n as f64).round() as usize;
    let n_val = (SPLIT_FRACTIONS.1 * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut splits = vec![Split::Test; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_train {
            splits[i] = Split::Train;
        } else if rank < n_train + n_val {
            splits[i] = Split::Val;
        }
    }
    splits
}

fn header() -> Vec<String> {
    let mut h = vec!["split".to_string()];
    h.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    for m in ModeId::ALL {
        let k = m.number();
        h.extend(["excited", "stable", "wsr", "logdec"].iter().map(|c| format!("m{k}_{c}")));
    }
    h
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl TrainingDataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn count(&self, split: Split) -> usize {
        self.split(split).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(header())?;
        for s in &self.samples {
            let mut row = vec![s.split.name().to_string()];
            row.extend(s.features.to_array().iter().map(f64::to_string));
            for m in &s.modes {
                row.push(if m.excited { "1" } else { "0" }.to_string());
                row.push(m.stable.map(|b| if b { "1" } else { "0" }.to_string()).unwrap_or_default());
                row.push(opt(m.whirl_speed_ratio));
                row.push(opt(m.log_dec));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_csv(&mut out).expect("writing to memory cannot fail");
        out
    }

    /// SHA-256 of the CSV encoding, hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv_bytes()))
    }

    /// Parse a dataset CSV. Excluded samples are not stored in the file.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, DatasetError> {
        let mut r = csv::Reader::from_reader(reader);
        let expected = header();
        let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if got != expected {
            return Err(DatasetError::Row { row: 0, message: "unexpected header".into() });
        }
        let mut samples = Vec::new();
        for (i, record) in r.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let bad = |message: String| DatasetError::Row { row, message };
            let num = |col: usize| -> Result<f64, DatasetError> {
                record[col].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", expected[col])))
            };
            let split = Split::parse(&record[0]).ok_or_else(|| bad(format!("unknown split {:?}", &record[0])))?;
            let mut f = [0.0; FEATURE_COUNT];
            for (k, v) in f.iter_mut().enumerate() {
                *v = num(1 + k)?;
            }
            let mut modes = ModeId::ALL.map(ModeStabilityResult::not_excited);
            for (k, mode) in modes.iter_mut().enumerate() {
                let base = 1 + FEATURE_COUNT + 4 * k;
                let present = [1, 2, 3].map(|o| !record[base + o].is_empty());
                match &record[base] {
                    "0" if present.iter().all(|p| !p) => {}
                    "1" if present.iter().all(|p| *p) => {
                        let stable = match &record[base + 1] {
                            "0" => false,
                            "1" => true,
                            other => return Err(bad(format!("stable flag {other:?}"))),
                        };
                        *mode = ModeStabilityResult {
                            stable: Some(stable),
                            ..ModeStabilityResult::excited(mode.mode, num(base + 2)?, num(base + 3)?)
                        };
                    }
                    _ => return Err(bad(format!("mode {} labels must be present iff excited", k + 1))),
                }
            }
            samples.push(Sample { features: FeatureVector::from_array(f), modes, split });
        }
        Ok(Self { samples, excluded: Vec::new() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes() {
        let s = assign_splits(2000, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(s.iter().filter(|&&x| x == Split::Train).count(), 1200);
        assert_eq!(s.iter().filter(|&&x| x == Split::Val).count(), 400);
        assert_eq!(s.iter().filter(|&&x| x == Split::Test).count(), 400);
    }

    #[test]
    fn header_layout() {
        let h = header();
        assert_eq!(h.len(), 1 + 11 + 16);
        assert_eq!(h[12], "m1_excited");
        assert_eq!(h[27], "m4_logdec");
    }
}
