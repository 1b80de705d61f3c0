//! Interpretable predictors: ridge/logistic regression and the neural
//! additive model `y = f_1(x_1) + ... + f_K(x_K) + β`.

mod linalg;
mod linear;
mod nam;
mod persist;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linear::{train_linear, LinearModel, LinearPipeline};
pub use nam::{
    train_nam, train_nam_standardized, AdditiveModel, AdditiveNet, Dense, ShapeNet,
};
pub use persist::{load_model, model_from_json, model_to_json, save_model, ModelFile, SavedModel, TrainedModel, MODEL_FILE_VERSION};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyDataset,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("normal equations are singular (rank-deficient design with no ridge penalty)")]
    SingularSystem,
    #[error("loss became non-finite at epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("feature index {index} out of range for {len} features")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("unsupported model file version {found} (this build reads {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// `ln(1 + e^z)`, a smooth ramp.
    Softplus,
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub(crate) fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Softplus => softplus(z),
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative from the pre-activation `z` and the activation `a`.
    #[inline]
    pub(crate) fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Softplus => sigmoid(z),
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Plain gradient descent.
    Sgd,
    /// Adam with β1 = 0.9, β2 = 0.999, ε = 1e-8.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2_penalty: f64,
    /// Weight of the mean squared subnet output.
    pub output_penalty: f64,
    pub seed: u64,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub optimizer: Optimizer,
}

impl TrainingConfig {
    /// Defaults for the additive model: 1 → 64 → 32 → 1 softplus subnets trained with Adam.
    pub fn nam() -> Self {
        Self {
            learning_rate: 0.005,
            epochs: 100,
            batch_size: 64,
            l2_penalty: 1e-6,
            output_penalty: 1e-3,
            seed: 42,
            hidden_sizes: vec![64, 32],
            activation: Activation::Softplus,
            optimizer: Optimizer::Adam,
        }
    }

    /// Defaults for full-batch logistic regression. Regression fits ignore
    /// everything except `l2_penalty`.
    pub fn linear() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 500,
            batch_size: usize::MAX,
            l2_penalty: 1e-4,
            output_penalty: 0.0,
            seed: 42,
            hidden_sizes: Vec::new(),
            activation: Activation::Softplus,
            optimizer: Optimizer::Sgd,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.l2_penalty >= 0.0) || !(self.output_penalty >= 0.0) {
            return bad("penalties must be non-negative");
        }
        if self.hidden_sizes.contains(&0) {
            return bad("hidden layer sizes must be positive");
        }
        Ok(())
    }
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self::nam()
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

pub(crate) fn check_rows(x: &[Vec<f64>], y: &[f64]) -> Result<usize, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    if x.len() != y.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(ModelError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    Ok(d)
}
