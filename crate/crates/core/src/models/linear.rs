use serde::{Deserialize, Serialize};

use super::linalg::solve;
use super::{check_rows, sigmoid, ModelError, Task, TrainingConfig};
use crate::features::Standardizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub task: Task,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> Result<f64, ModelError> {
        if x.len() != self.weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// Regression output, or the positive-class probability for binary models.
    pub fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        let s = self.decision(x)?;
        Ok(match self.task {
            Task::Regression => s,
            Task::Binary => sigmoid(s),
        })
    }
}

/// Ridge regression via centred normal equations, or logistic regression by
/// full-batch gradient descent from zero weights. Both are deterministic.
///
/// Binary targets are `0.0`/`1.0`.
pub fn train_linear(
    x: &[Vec<f64>],
    y: &[f64],
    task: Task,
    config: &TrainingConfig,
) -> Result<LinearModel, ModelError> {
    let d = check_rows(x, y)?;
    match task {
        Task::Regression => fit_ridge(x, y, d, config.l2_penalty),
        Task::Binary => {
            config.validate()?;
            fit_logistic(x, y, d, config)
        }
    }
}

// minimizes mean((y - w·x - b)^2) + l2 * |w|^2
fn fit_ridge(x: &[Vec<f64>], y: &[f64], d: usize, l2: f64) -> Result<LinearModel, ModelError> {
    let n = x.len() as f64;
    let mut mean_x = vec![0.0; d];
    for row in x {
        for (m, v) in mean_x.iter_mut().zip(row) {
            *m += v / n;
        }
    }
    let mean_y = y.iter().sum::<f64>() / n;
    let mut gram = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    let mut centred = vec![0.0; d];
    for (row, &t) in x.iter().zip(y) {
        for (c, (v, m)) in centred.iter_mut().zip(row.iter().zip(&mean_x)) {
            *c = v - m;
        }
        let ty = t - mean_y;
        for i in 0..d {
            rhs[i] += centred[i] * ty / n;
            for j in i..d {
                gram[i][j] += centred[i] * centred[j] / n;
            }
        }
    }
    for i in 0..d {
        gram[i][i] += l2;
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }
    let weights = if d == 0 {
        Vec::new()
    } else {
        solve(gram, rhs).ok_or(ModelError::SingularSystem)?
    };
    let bias = mean_y - weights.iter().zip(&mean_x).map(|(w, m)| w * m).sum::<f64>();
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(ModelError::NonFinite { epoch: 0 });
    }
    Ok(LinearModel {
        weights,
        bias,
        task: Task::Regression,
    })
}

fn fit_logistic(
    x: &[Vec<f64>],
    y: &[f64],
    d: usize,
    config: &TrainingConfig,
) -> Result<LinearModel, ModelError> {
    let n = x.len() as f64;
    let mut model = LinearModel {
        weights: vec![0.0; d],
        bias: 0.0,
        task: Task::Binary,
    };
    let mut grad_w = vec![0.0; d];
    for epoch in 0..config.epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        let mut loss = 0.0;
        for (row, &t) in x.iter().zip(y) {
            let s = model.decision(row)?;
            let p = sigmoid(s);
            // log(1 + e^s) - t·s
            loss += super::softplus(s) - t * s;
            let r = (p - t) / n;
            grad_b += r;
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += r * v;
            }
        }
        loss = loss / n + config.l2_penalty * model.weights.iter().map(|w| w * w).sum::<f64>();
        if !loss.is_finite() {
            return Err(ModelError::NonFinite { epoch });
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= config.learning_rate * (g + 2.0 * config.l2_penalty * *w);
        }
        model.bias -= config.learning_rate * grad_b;
    }
    Ok(model)
}

/// A linear model together with the input standardization it was fitted under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPipeline {
    pub model: LinearModel,
    pub standardizer: Standardizer,
    pub feature_names: Vec<String>,
}

impl LinearPipeline {
    pub fn fit(
        raw: &[Vec<f64>],
        y: &[f64],
        task: Task,
        feature_names: Vec<String>,
        config: &TrainingConfig,
    ) -> Result<Self, ModelError> {
        check_rows(raw, y)?;
        let standardizer = Standardizer::fit(raw).map_err(|_| ModelError::EmptyDataset)?;
        let model = train_linear(&standardizer.transform_all(raw), y, task, config)?;
        Ok(Self {
            model,
            standardizer,
            feature_names,
        })
    }

    pub fn predict(&self, raw: &[f64]) -> Result<f64, ModelError> {
        if raw.len() != self.standardizer.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.standardizer.dim(),
                got: raw.len(),
            });
        }
        self.model.predict(&self.standardizer.transform(raw))
    }
}
