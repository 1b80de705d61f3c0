//! Shape-curve extraction, optimal-value search, ranked swing feedback and
//! before/after session comparison.

mod curves;
mod render;
mod report;

use thiserror::Error;

use crate::models::ModelError;

pub use curves::{
    default_density_floor, extract_curve, extract_curves, optimal_point, optimal_value, DensityHistogram, Objective,
    ShapeCurve, DEFAULT_BINS, DEFAULT_GRID_SIZE,
};
pub use render::{export_curves_csv, render_curve_svg, svg_file_name, write_curves_csv, CURVE_CSV_HEADER};
pub use report::{compare_sessions, generate_feedback, FeatureShift, FeedbackItem, FeedbackReport, SessionComparison};

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("need at least {needed} rows, got {got}")]
    EmptyDataset { needed: usize, got: usize },
    #[error("grid size must be at least 2 (got {0})")]
    InvalidGrid(usize),
    #[error("no grid point of `{feature}` lies in a bin with at least {floor} training samples")]
    NoFeasibleRegion { feature: String, floor: usize },
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
