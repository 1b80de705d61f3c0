//! Scoring, the train/test benchmark harness, correlation analysis and
//! synthetic data generators.

mod benchmark;
mod swings;
mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{pearson, FeatureError, FeatureMatrix, Target};
use crate::metrics::MetricError;
use crate::models::ModelError;
use crate::pose::{BallRecord, PoseError};

pub use benchmark::{
    benchmark, dataset_from_shots, fit_target, join_features, BenchmarkConfig, BenchmarkOutcome, LabeledDataset,
    ModelFamily, SkippedRun, DEFAULT_TRAIN_FRACTION,
};
pub use swings::{generate_swings, SwingSynthConfig, SyntheticSwings};
pub use synthetic::{generate_synthetic, GroundTruth, SyntheticData, SyntheticSpec, SyntheticTerm};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} rows, got {got}")]
    EmptyDataset { needed: usize, got: usize },
    #[error("labels contain a single class")]
    DegenerateLabels,
    #[error("feature `{0}` not found")]
    UnknownFeature(String),
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_lengths(a: usize, b: usize) -> Result<(), EvaluationError> {
    if a != b {
        return Err(EvaluationError::LengthMismatch(a, b));
    }
    if a == 0 {
        return Err(EvaluationError::EmptyDataset { needed: 1, got: 0 });
    }
    Ok(())
}

/// Fraction of predictions on the right side of 0.5. A probability of
/// exactly 0.5 predicts the positive class. Labels are `0.0`/`1.0`.
pub fn accuracy(probabilities: &[f64], labels: &[f64]) -> Result<f64, EvaluationError> {
    check_lengths(probabilities.len(), labels.len())?;
    let correct = probabilities
        .iter()
        .zip(labels)
        .filter(|(&p, &y)| (p >= 0.5) == (y >= 0.5))
        .count();
    Ok(correct as f64 / labels.len() as f64)
}

/// Area under the ROC curve as the Mann–Whitney statistic: the probability a
/// random positive outscores a random negative, ties counting one half.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64, EvaluationError> {
    check_lengths(scores.len(), labels.len())?;
    let n_pos = labels.iter().filter(|&&y| y >= 0.5).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvaluationError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the midrank sum keeps every quantity an integer
    let mut rank2_pos: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid2 = (i + 1 + j + 1) as u64;
        let pos_in_tie = order[i..=j].iter().filter(|&&k| labels[k] >= 0.5).count() as u64;
        rank2_pos += mid2 * pos_in_tie;
        i = j + 1;
    }
    let (p, q) = (n_pos as u64, n_neg as u64);
    let u2 = rank2_pos - p * (p + 1);
    Ok(u2 as f64 / (2 * p * q) as f64)
}

pub fn mse(predictions: &[f64], targets: &[f64]) -> Result<f64, EvaluationError> {
    check_lengths(predictions.len(), targets.len())?;
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / targets.len() as f64)
}

/// Held-out scores of one model on one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Target,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

/// Ball-record columns usable as correlation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallField {
    Distance,
    Carry,
    LrDistanceOut,
    DirectionAngle,
    SpinAxis,
    BallSpeed,
}

impl BallField {
    pub fn get(self, ball: &BallRecord) -> f64 {
        match self {
            BallField::Distance => ball.distance,
            BallField::Carry => ball.carry,
            BallField::LrDistanceOut => ball.lr_distance_out,
            BallField::DirectionAngle => ball.direction_angle,
            BallField::SpinAxis => ball.spin_axis,
            BallField::BallSpeed => ball.ball_speed,
        }
    }
}

/// Pearson r of every feature column against `outcome`. Constant columns
/// give `None`.
pub fn correlation_table(
    matrix: &FeatureMatrix,
    outcome: &[f64],
) -> Result<Vec<(String, Option<f64>)>, EvaluationError> {
    if matrix.rows.len() < 2 {
        return Err(EvaluationError::EmptyDataset {
            needed: 2,
            got: matrix.rows.len(),
        });
    }
    if outcome.len() != matrix.rows.len() {
        return Err(EvaluationError::LengthMismatch(matrix.rows.len(), outcome.len()));
    }
    matrix
        .names
        .iter()
        .enumerate()
        .map(|(i, name)| match pearson(&matrix.column(i), outcome) {
            Ok(r) => Ok((name.clone(), Some(r))),
            Err(FeatureError::ZeroVariance) => Ok((name.clone(), None)),
            Err(e) => Err(e.into()),
        })
        .collect()
}
