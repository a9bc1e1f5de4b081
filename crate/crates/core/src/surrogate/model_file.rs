//! Versioned binary container for a trained surrogate.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! magic "GRSM" | u16 version | u64 payload length | [u8; 32] SHA-256 of the payload | payload
//! payload := u32 len, metadata JSON | u32 block count | block*
//! block   := u8 mode number, u8 task id, u32 len, spec JSON,
//!            u32 dim, f64 mean[dim], f64 std[dim], f64 target mean, f64 target std,
//!            u32 members, (u32 count, f64 params[count])*
//! ```
//!
//! Blocks are written in mode order, then task order.

use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::ensemble::{EnsembleBlock, Task};
use super::mlp::{Mlp, MlpError, MlpSpec};
use super::model::{ModePipeline, ModelMetadata, SurrogateModel};
use super::train::{Normalizer, TargetScaling};
use crate::dynamics::ModeId;

pub const MAGIC: [u8; 4] = *b"GRSM";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8 + 32;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a surrogate model file")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("payload digest does not match the header")]
    DigestMismatch,
    #[error("file is truncated")]
    Truncated,
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Network(#[from] MlpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&u32::try_from(v).expect("length fits u32").to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        vs.iter().for_each(|&v| self.f64(v));
    }
    fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len());
        self.0.extend_from_slice(b);
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        if self.0.len() < n {
            return Err(ModelFileError::Truncated);
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }
    fn u8(&mut self) -> Result<u8, ModelFileError> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize, ModelFileError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn f64(&mut self) -> Result<f64, ModelFileError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, ModelFileError> {
        if self.0.len() < n.saturating_mul(8) {
            return Err(ModelFileError::Truncated);
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn bytes(&mut self) -> Result<&'a [u8], ModelFileError> {
        let n = self.u32()?;
        self.take(n)
    }
}

pub fn model_to_bytes(model: &SurrogateModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.bytes(&serde_json::to_vec(&model.metadata).expect("metadata serialises"));
    w.u32(16);
    for (mode, block) in model.blocks() {
        w.u8(mode.number());
        w.u8(block.task().id());
        w.bytes(&serde_json::to_vec(block.spec()).expect("spec serialises"));
        let n = block.normalizer();
        w.u32(n.mean.len());
        w.f64s(&n.mean);
        w.f64s(&n.std);
        w.f64(block.target().mean);
        w.f64(block.target().std);
        w.u32(block.members().len());
        for m in block.members() {
            w.u32(m.parameters().len());
            w.f64s(m.parameters());
        }
    }
    let payload = w.0;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend_from_slice(&payload);
    out
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<SurrogateModel, ModelFileError> {
    let mut r = Reader(bytes);
    if r.take(4).map_err(|_| ModelFileError::BadMagic)? != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let found = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if found != FORMAT_VERSION {
        return Err(ModelFileError::VersionMismatch { found, expected: FORMAT_VERSION });
    }
    let length = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
    let digest = r.take(32)?;
    if (r.0.len() as u64) < length {
        return Err(ModelFileError::Truncated);
    }
    if r.0.len() as u64 != length || Sha256::digest(r.0).as_slice() != digest {
        return Err(ModelFileError::DigestMismatch);
    }
    let metadata: ModelMetadata = serde_json::from_slice(r.bytes()?)?;
    let count = r.u32()?;
    if count != 16 {
        return Err(ModelFileError::Malformed(format!("expected 16 blocks, found {count}")));
    }
    let mut blocks: Vec<EnsembleBlock> = Vec::with_capacity(16);
    for (mode, task) in ModeId::ALL.into_iter().flat_map(|m| Task::ALL.map(|t| (m, t))) {
        let (number, id) = (r.u8()?, r.u8()?);
        if number != mode.number() || id != task.id() {
            return Err(ModelFileError::Malformed(format!(
                "block out of order: mode {number} task {id}, expected mode {} task {}",
                mode.number(),
                task.id()
            )));
        }
        let spec: MlpSpec = serde_json::from_slice(r.bytes()?)?;
        let dim = r.u32()?;
        let mean = r.f64s(dim)?;
        let std = r.f64s(dim)?;
        let target = TargetScaling { mean: r.f64()?, std: r.f64()? };
        let member_count = r.u32()?;
        let members = (0..member_count)
            .map(|_| {
                let n = r.u32()?;
                Ok(Mlp::from_parameters(spec.clone(), r.f64s(n)?)?)
            })
            .collect::<Result<Vec<_>, ModelFileError>>()?;
        blocks.push(EnsembleBlock::new(task, Normalizer { mean, std }, target, members)?);
    }
    if !r.0.is_empty() {
        return Err(ModelFileError::Malformed(format!("{} trailing bytes", r.0.len())));
    }
    let mut it = blocks.into_iter();
    let mut next_pipeline = || -> ModePipeline {
        let mut next = || it.next().expect("sixteen blocks");
        ModePipeline { excited: next(), stable: next(), wsr: next(), logdec: next() }
    };
    let pipelines = [next_pipeline(), next_pipeline(), next_pipeline(), next_pipeline()];
    Ok(SurrogateModel { metadata, pipelines })
}

pub fn save_model(model: &SurrogateModel, path: &Path) -> Result<(), ModelFileError> {
    std::fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<SurrogateModel, ModelFileError> {
    model_from_bytes(&std::fs::read(path)?)
}
