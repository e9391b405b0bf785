//! Checkpoint persistence for trained models.
//!
//! One JSON document holds the trained initial value and the model tensors
//! with their shape header. Floats are written in shortest round-trip
//! decimal form, so save → load reproduces every parameter bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpModel;
use crate::quantum::VqcModel;
use crate::solver::TrainableHead;

pub const CHECKPOINT_FORMAT: &str = "qbsde-checkpoint/1";

/// Serialized model tensors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelRecord {
    Mlp {
        dims: Vec<usize>,
        params: Vec<f64>,
    },
    Vqc {
        state_dim: usize,
        num_qubits: usize,
        num_layers: usize,
        thetas: Vec<f64>,
        encoder: Vec<f64>,
        decoder: Vec<f64>,
        angle_seed: u64,
        adapter_seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Checkpoint {
    pub format: String,
    pub y0: f64,
    pub model: ModelRecord,
}

impl Checkpoint {
    pub fn new(head: &TrainableHead, model: ModelRecord) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            y0: head.y0,
            model,
        }
    }
}

pub fn mlp_record(model: &MlpModel) -> ModelRecord {
    use crate::approximator::Approximator;
    ModelRecord::Mlp {
        dims: model.dims().to_vec(),
        params: model.params().to_vec(),
    }
}

pub fn vqc_record(model: &VqcModel) -> ModelRecord {
    use crate::approximator::Approximator;
    ModelRecord::Vqc {
        state_dim: model.state_dim(),
        num_qubits: model.num_qubits(),
        num_layers: model.num_layers(),
        thetas: model.thetas().to_vec(),
        encoder: model.encoder().to_vec(),
        decoder: model.decoder().to_vec(),
        angle_seed: model.angle_seed(),
        adapter_seed: model.adapter_seed(),
    }
}

pub fn restore_mlp(record: &ModelRecord) -> Result<MlpModel> {
    match record {
        ModelRecord::Mlp { dims, params } => {
            let mut model = MlpModel::new(dims, 0)?;
            model.set_params(params)?;
            Ok(model)
        }
        _ => Err(Error::Format("checkpoint does not hold a dense model".into())),
    }
}

pub fn restore_vqc(record: &ModelRecord) -> Result<VqcModel> {
    match record {
        ModelRecord::Vqc {
            state_dim,
            num_qubits,
            num_layers,
            thetas,
            encoder,
            decoder,
            angle_seed,
            adapter_seed,
        } => VqcModel::from_parts(
            *state_dim,
            *num_qubits,
            *num_layers,
            thetas.clone(),
            encoder.clone(),
            decoder.clone(),
            *angle_seed,
            *adapter_seed,
        ),
        _ => Err(Error::Format(
            "checkpoint does not hold a variational-circuit model".into(),
        )),
    }
}

pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let json = serde_json::to_string_pretty(checkpoint)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path)?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)?;
    if checkpoint.format != CHECKPOINT_FORMAT {
        return Err(Error::Format(format!(
            "unsupported checkpoint format '{}'",
            checkpoint.format
        )));
    }
    Ok(checkpoint)
}
