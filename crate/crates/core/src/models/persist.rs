use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AdditiveModel, LinearPipeline, ModelError, Task};
use crate::features::{fingerprint, Standardizer, Target};

pub const MODEL_FILE_VERSION: u64 = 1;

/// A trained predictor of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Linear(LinearPipeline),
    Additive(AdditiveModel),
}

impl TrainedModel {
    pub fn task(&self) -> Task {
        match self {
            TrainedModel::Linear(p) => p.model.task,
            TrainedModel::Additive(m) => m.task,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Linear(p) => &p.feature_names,
            TrainedModel::Additive(m) => &m.feature_names,
        }
    }

    pub fn standardizer(&self) -> &Standardizer {
        match self {
            TrainedModel::Linear(p) => &p.standardizer,
            TrainedModel::Additive(m) => &m.standardizer,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Linear(_) => "linear",
            TrainedModel::Additive(_) => "nam",
        }
    }

    pub fn predict(&self, raw: &[f64]) -> Result<f64, ModelError> {
        match self {
            TrainedModel::Linear(p) => p.predict(raw),
            TrainedModel::Additive(m) => m.predict(raw),
        }
    }
}

/// A model plus the ball-flight target it was trained for, if known.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub target: Option<Target>,
    pub model: TrainedModel,
}

/// On-disk envelope.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u64,
    pub task: Task,
    pub schema_fingerprint: String,
    pub standardization: Standardizer,
    pub model_kind: String,
    pub parameters: Value,
}

#[derive(Serialize, Deserialize)]
struct LinearParams {
    feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct AdditiveParams {
    feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<Target>,
    subnets: Vec<super::ShapeNet>,
    centers: Vec<f64>,
    bias: f64,
}

fn corrupt(e: impl std::fmt::Display) -> ModelError {
    ModelError::CorruptFile(e.to_string())
}

pub fn model_to_json(saved: &SavedModel) -> String {
    let model = &saved.model;
    let parameters = match model {
        TrainedModel::Linear(p) => serde_json::to_value(LinearParams {
            feature_names: p.feature_names.clone(),
            target: saved.target,
            weights: p.model.weights.clone(),
            bias: p.model.bias,
        }),
        TrainedModel::Additive(m) => serde_json::to_value(AdditiveParams {
            feature_names: m.feature_names.clone(),
            target: saved.target,
            subnets: m.subnets.clone(),
            centers: m.centers.clone(),
            bias: m.bias,
        }),
    }
    .expect("model parameters serialize");
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        task: model.task(),
        schema_fingerprint: fingerprint(model.feature_names()),
        standardization: model.standardizer().clone(),
        model_kind: model.kind().to_string(),
        parameters,
    };
    serde_json::to_string_pretty(&file).expect("model file serializes")
}

pub fn model_from_json(text: &str) -> Result<SavedModel, ModelError> {
    let value: Value = serde_json::from_str(text).map_err(corrupt)?;
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("missing version tag"))?;
    if version != MODEL_FILE_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version,
            expected: MODEL_FILE_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value).map_err(corrupt)?;
    let (target, model) = match file.model_kind.as_str() {
        "linear" => {
            let p: LinearParams = serde_json::from_value(file.parameters).map_err(corrupt)?;
            let pipeline = LinearPipeline {
                model: super::LinearModel {
                    weights: p.weights,
                    bias: p.bias,
                    task: file.task,
                },
                standardizer: file.standardization,
                feature_names: p.feature_names,
            };
            (p.target, TrainedModel::Linear(pipeline))
        }
        "nam" => {
            let p: AdditiveParams = serde_json::from_value(file.parameters).map_err(corrupt)?;
            let model = AdditiveModel {
                task: file.task,
                subnets: p.subnets,
                centers: p.centers,
                bias: p.bias,
                standardizer: file.standardization,
                feature_names: p.feature_names,
            };
            (p.target, TrainedModel::Additive(model))
        }
        other => return Err(corrupt(format!("unknown model_kind {other:?}"))),
    };
    validate(&model)?;
    if fingerprint(model.feature_names()) != file.schema_fingerprint {
        return Err(corrupt("schema fingerprint does not match feature names"));
    }
    Ok(SavedModel { target, model })
}

fn validate(model: &TrainedModel) -> Result<(), ModelError> {
    let d = model.feature_names().len();
    let std = model.standardizer();
    if std.dim() != d || std.std.len() != d || std.constant.len() != d {
        return Err(corrupt("standardization width does not match feature count"));
    }
    match model {
        TrainedModel::Linear(p) => {
            if p.model.weights.len() != d {
                return Err(corrupt("weight count does not match feature count"));
            }
        }
        TrainedModel::Additive(m) => {
            if m.subnets.len() != d || m.centers.len() != d {
                return Err(corrupt("subnet count does not match feature count"));
            }
            for net in &m.subnets {
                let layers = &net.layers;
                if layers.is_empty() || layers[0].inputs != 1 || layers[layers.len() - 1].outputs != 1 {
                    return Err(corrupt("subnet must map one input to one output"));
                }
                for (i, l) in layers.iter().enumerate() {
                    if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                        return Err(corrupt("layer shape mismatch"));
                    }
                    if i > 0 && layers[i - 1].outputs != l.inputs {
                        return Err(corrupt("layer widths do not chain"));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn save_model(saved: &SavedModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, model_to_json(saved))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel, ModelError> {
    model_from_json(&fs::read_to_string(path)?)
}
