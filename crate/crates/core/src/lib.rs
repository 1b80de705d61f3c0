//! Golf swing analysis from 2D pose keypoints: swing metrics, phase-indexed
//! features, interpretable ball-flight models and per-feature feedback.

pub mod evaluation;
pub mod features;
pub mod feedback;
pub mod geometry;
pub mod metrics;
pub mod models;
pub mod pose;

use thiserror::Error;

use evaluation::EvaluationError;
use features::{FeatureError, FeatureSchema, FeatureVector};
use feedback::FeedbackError;
use metrics::{MetricError, MetricValue};
use models::ModelError;
use pose::{PoseError, SwingSequence};

/// Any failure of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pose(#[from] PoseError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    Numeric,
}

impl ErrorKind {
    /// Process exit status: 1 I/O, 2 validation, 3 numeric failure.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Validation => 2,
            ErrorKind::Numeric => 3,
        }
    }
}

fn model_kind(e: &ModelError) -> ErrorKind {
    match e {
        ModelError::NonFinite { .. } | ModelError::SingularSystem => ErrorKind::Numeric,
        ModelError::Io(_) => ErrorKind::Io,
        _ => ErrorKind::Validation,
    }
}

fn feature_kind(e: &FeatureError) -> ErrorKind {
    match e {
        FeatureError::Io(_) => ErrorKind::Io,
        _ => ErrorKind::Validation,
    }
}

fn pose_kind(e: &PoseError) -> ErrorKind {
    match e {
        PoseError::Io { .. } => ErrorKind::Io,
        _ => ErrorKind::Validation,
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Pose(e) => pose_kind(e),
            Error::Metric(_) | Error::Invalid(_) => ErrorKind::Validation,
            Error::Feature(e) => feature_kind(e),
            Error::Model(e) => model_kind(e),
            Error::Evaluation(e) => match e {
                EvaluationError::Pose(e) => pose_kind(e),
                EvaluationError::Feature(e) => feature_kind(e),
                EvaluationError::Model(e) => model_kind(e),
                _ => ErrorKind::Validation,
            },
            Error::Feedback(e) => match e {
                FeedbackError::Io(_) => ErrorKind::Io,
                FeedbackError::Model(e) => model_kind(e),
                _ => ErrorKind::Validation,
            },
            Error::Io(_) => ErrorKind::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }
}

/// Normalizes a raw sequence, computes all of its view's metrics and selects
/// the schema's features.
pub fn extract_features(
    sequence: &SwingSequence,
    schema: &FeatureSchema,
) -> Result<(Vec<MetricValue>, FeatureVector), Error> {
    if sequence.view != schema.view() {
        return Err(Error::Invalid(format!(
            "swing `{}` is {} but the schema is for {}",
            sequence.swing_id,
            sequence.view.as_str(),
            schema.view().as_str()
        )));
    }
    let normalized = pose::normalize_sequence(sequence)?;
    let values = metrics::compute_all(&normalized)?;
    let fv = features::assemble(&normalized.swing_id, &values, schema)?;
    Ok((values, fv))
}
