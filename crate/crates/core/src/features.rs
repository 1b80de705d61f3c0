//! Phase-indexed feature vectors, outcome labels and feature standardization.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metrics::{MetricId, MetricValue};
use crate::models::Task;
use crate::pose::{BallRecord, SwingEvent, View};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("no value for {metric} at {event}")]
    MissingMetric { metric: MetricId, event: SwingEvent },
    #[error("schema lists {metric} at {event} twice")]
    DuplicateEntry { metric: MetricId, event: SwingEvent },
    #[error("metric `{name}` does not exist for the {view} view")]
    UnknownMetric { name: String, view: View },
    #[error("event index {0} is outside 0..=7")]
    UnknownEvent(usize),
    #[error("feature value {name} is not finite")]
    NonFinite { name: String },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} rows, got {got}")]
    EmptyDataset { needed: usize, got: usize },
    #[error("feature file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    view: View,
    entries: Vec<(MetricId, SwingEvent)>,
}

impl FeatureSchema {
    pub fn new(view: View, entries: Vec<(MetricId, SwingEvent)>) -> Result<Self, FeatureError> {
        let mut seen = HashSet::new();
        for &(metric, event) in &entries {
            if metric.view() != view {
                return Err(FeatureError::UnknownMetric {
                    name: metric.ident().to_string(),
                    view,
                });
            }
            if !seen.insert((metric, event)) {
                return Err(FeatureError::DuplicateEntry { metric, event });
            }
        }
        Ok(Self { view, entries })
    }

    pub fn view(&self) -> View {
        self.view
    }

    pub fn entries(&self) -> &[(MetricId, SwingEvent)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|&(m, e)| feature_name(m, e))
            .collect()
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.names())
    }

    /// Reads a schema config: a JSON array of `{"metric": str, "event": 0-7}`.
    pub fn from_json(text: &str, view: View) -> Result<Self, FeatureError> {
        #[derive(Deserialize)]
        struct Entry {
            metric: String,
            event: usize,
        }
        let raw: Vec<Entry> =
            serde_json::from_str(text).map_err(|e| FeatureError::Format(e.to_string()))?;
        let entries = raw
            .into_iter()
            .map(|e| {
                let metric = MetricId::parse(&e.metric, view).ok_or_else(|| {
                    FeatureError::UnknownMetric {
                        name: e.metric.clone(),
                        view,
                    }
                })?;
                let event = SwingEvent::from_index(e.event).ok_or(FeatureError::UnknownEvent(e.event))?;
                Ok((metric, event))
            })
            .collect::<Result<Vec<_>, FeatureError>>()?;
        Self::new(view, entries)
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|&(m, e)| serde_json::json!({"metric": m.ident(), "event": e.index()}))
            .collect();
        serde_json::to_string_pretty(&raw).expect("schema serializes")
    }
}

/// `"<event index>-<METRIC-LABEL>"`, e.g. `2-HEAD-LOC`.
pub fn feature_name(metric: MetricId, event: SwingEvent) -> String {
    format!("{}-{}", event.index(), metric.label())
}

/// Short stable hash of an ordered feature-name list.
pub fn fingerprint(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update([0u8]);
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// The default phase assignment. Face-on has 40 entries, DTL 32.
pub fn default_schema(view: View) -> FeatureSchema {
    use MetricId::*;
    use SwingEvent::*;
    let entries: Vec<(MetricId, SwingEvent)> = match view {
        View::FaceOn => vec![
            (StanceRatio, Address),
            (UpperTilt, Address),
            (ShoulderAngle, Address),
            (LeftArmAngle, Address),
            (RightLegAngle, Address),
            (HeadLoc, Takeaway),
            (ShoulderAngle, Takeaway),
            (HipRotation, Takeaway),
            (HipShifted, Takeaway),
            (LeftArmAngle, Takeaway),
            (HeadLoc, Backswing),
            (ShoulderLoc, Backswing),
            (ShoulderAngle, Backswing),
            (HipRotation, Backswing),
            (HipShifted, Backswing),
            (RightLegAngle, Backswing),
            (HeadLoc, Top),
            (ShoulderAngle, Top),
            (HipRotation, Top),
            (HipShifted, Top),
            (LeftArmAngle, Top),
            (RightArmAngle, Top),
            (RightLegAngle, Top),
            (RightArmpitAngle, Top),
            (HeadLoc, Downswing),
            (HipRotation, Downswing),
            (HipShifted, Downswing),
            (ShoulderHangingBack, Downswing),
            (RightArmpitAngle, Downswing),
            (HeadLoc, Impact),
            (ShoulderAngle, Impact),
            (HipRotation, Impact),
            (HipShifted, Impact),
            (ShoulderHangingBack, Impact),
            (HipHangingBack, Impact),
            (LeftArmAngle, Impact),
            (WeightShift, Impact),
            (WeightShift, FollowThrough),
            (HipHangingBack, FollowThrough),
            (FinishAngle, Finish),
        ],
        View::Dtl => vec![
            (SpineAngle, Address),
            (LowerAngle, Address),
            (DtlShoulderAngle, Address),
            (LeftLegAngle, Address),
            (SpineAngle, Takeaway),
            (HipLine, Takeaway),
            (HipAngle, Takeaway),
            (DtlLeftArmAngle, Takeaway),
            (SpineAngle, Backswing),
            (HipLine, Backswing),
            (HipAngle, Backswing),
            (RightDistance, Backswing),
            (SpineAngle, Top),
            (HipLine, Top),
            (HipAngle, Top),
            (DtlRightArmAngle, Top),
            (RightDistance, Top),
            (DtlShoulderAngle, Top),
            (HipLine, Downswing),
            (HipAngle, Downswing),
            (RightDistance, Downswing),
            (LowerAngle, Downswing),
            (SpineAngle, Impact),
            (HipLine, Impact),
            (HipAngle, Impact),
            (LeftLegAngle, Impact),
            (DtlLeftArmAngle, Impact),
            (DtlShoulderAngle, Impact),
            (LeftLegAngle, FollowThrough),
            (SpineAngle, FollowThrough),
            (SpineAngle, Finish),
            (LeftLegAngle, Finish),
        ],
    };
    FeatureSchema::new(view, entries).expect("default schemas are duplicate-free")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub swing_id: String,
    pub values: Vec<f64>,
}

/// Selects the schema's `(metric, event)` values in schema order.
pub fn assemble(
    swing_id: &str,
    metric_values: &[MetricValue],
    schema: &FeatureSchema,
) -> Result<FeatureVector, FeatureError> {
    let lookup: HashMap<(MetricId, SwingEvent), f64> = metric_values
        .iter()
        .map(|v| ((v.metric, v.event), v.value))
        .collect();
    let values = schema
        .entries()
        .iter()
        .map(|&(metric, event)| {
            let v = *lookup
                .get(&(metric, event))
                .ok_or(FeatureError::MissingMetric { metric, event })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(FeatureError::NonFinite {
                    name: feature_name(metric, event),
                })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureVector {
        swing_id: swing_id.to_string(),
        values,
    })
}

/// A table of feature vectors sharing one column naming.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn column(&self, index: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.values[index]).collect()
    }

    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["swing_id".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.swing_id.clone()];
            rec.extend(row.values.iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(reader: impl Read) -> Result<Self, FeatureError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr.headers().map_err(csv_err)?.clone();
        if header.get(0) != Some("swing_id") {
            return Err(FeatureError::Format("first column must be `swing_id`".into()));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let values = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| FeatureError::Format(format!("row {}: bad value `{s}`", i + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FeatureVector {
                swing_id: rec[0].to_string(),
                values,
            });
        }
        Ok(Self { names, rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn csv_err(e: csv::Error) -> FeatureError {
    FeatureError::Format(e.to_string())
}

/// Straightness thresholds in degrees. `|value| <= threshold` is straight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelPolicy {
    pub direction_threshold: f64,
    pub spin_threshold: f64,
}

impl Default for LabelPolicy {
    fn default() -> Self {
        Self {
            direction_threshold: 6.0,
            spin_threshold: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Straightness {
    Straight,
    NonStraight,
}

impl Straightness {
    pub fn is_straight(self) -> bool {
        self == Straightness::Straight
    }
}

fn within(value: f64, threshold: f64) -> Straightness {
    if value.abs() <= threshold {
        Straightness::Straight
    } else {
        Straightness::NonStraight
    }
}

pub fn label_direction(angle: f64, policy: &LabelPolicy) -> Straightness {
    within(angle, policy.direction_threshold)
}

pub fn label_spin(axis: f64, policy: &LabelPolicy) -> Straightness {
    within(axis, policy.spin_threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartLine {
    Pull,
    Straight,
    Push,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    Hook,
    Straight,
    Slice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotShape {
    pub start: StartLine,
    pub curve: Curvature,
}

impl fmt::Display for ShotShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let start = match self.start {
            StartLine::Pull => "pull",
            StartLine::Straight => "straight",
            StartLine::Push => "push",
        };
        let curve = match self.curve {
            Curvature::Hook => "hook",
            Curvature::Straight => "straight",
            Curvature::Slice => "slice",
        };
        write!(f, "{start} {curve}")
    }
}

/// Negative direction starts left (pull); negative spin axis curves left (hook).
pub fn shot_shape(direction_angle: f64, spin_axis: f64, policy: &LabelPolicy) -> ShotShape {
    let start = if direction_angle < -policy.direction_threshold {
        StartLine::Pull
    } else if direction_angle > policy.direction_threshold {
        StartLine::Push
    } else {
        StartLine::Straight
    };
    let curve = if spin_axis < -policy.spin_threshold {
        Curvature::Hook
    } else if spin_axis > policy.spin_threshold {
        Curvature::Slice
    } else {
        Curvature::Straight
    };
    ShotShape { start, curve }
}

pub fn ball_shot_shape(ball: &BallRecord, policy: &LabelPolicy) -> ShotShape {
    shot_shape(ball.direction_angle, ball.spin_axis, policy)
}

/// Ball-flight outcome a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Direction,
    Spin,
    Speed,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Direction, Target::Spin, Target::Speed];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Direction => "direction",
            Target::Spin => "spin",
            Target::Speed => "speed",
        }
    }

    pub fn task(self) -> Task {
        match self {
            Target::Speed => Task::Regression,
            _ => Task::Binary,
        }
    }

    /// Training target: `1.0` for straight and `0.0` otherwise on the
    /// binary targets, ball speed for the regression target.
    pub fn value(self, ball: &BallRecord, policy: &LabelPolicy) -> f64 {
        let straight = |s: Straightness| if s.is_straight() { 1.0 } else { 0.0 };
        match self {
            Target::Direction => straight(label_direction(ball.direction_angle, policy)),
            Target::Spin => straight(label_spin(ball.spin_axis, policy)),
            Target::Speed => ball.ball_speed,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "direction" | "direction_angle" => Ok(Target::Direction),
            "spin" | "spin_axis" => Ok(Target::Spin),
            "speed" | "ball_speed" => Ok(Target::Speed),
            _ => Err(format!("unknown target `{s}` (expected direction, spin or speed)")),
        }
    }
}

/// Per-column z-scoring fitted on training rows with the population (1/N)
/// standard deviation. Zero-variance columns pass through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, FeatureError> {
        if rows.len() < 2 {
            return Err(FeatureError::EmptyDataset {
                needed: 2,
                got: rows.len(),
            });
        }
        let d = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(FeatureError::LengthMismatch(d, bad.len()));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        let constant = std
            .iter()
            .zip(&mean)
            .map(|(s, m)| *s <= 1e-12 * (1.0 + m.abs()))
            .collect();
        Ok(Self { mean, std, constant })
    }

    /// No-op transform for `dim` columns.
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
            constant: vec![true; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_value(&self, index: usize, raw: f64) -> f64 {
        if self.constant[index] {
            raw
        } else {
            (raw - self.mean[index]) / self.std[index]
        }
    }

    pub fn inverse_value(&self, index: usize, standardized: f64) -> f64 {
        if self.constant[index] {
            standardized
        } else {
            standardized * self.std[index] + self.mean[index]
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(i, &v)| self.transform_value(i, v))
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, FeatureError> {
    if xs.len() != ys.len() {
        return Err(FeatureError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(FeatureError::EmptyDataset {
            needed: 2,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let tiny = |s: f64, m: f64| s <= 1e-24 * n * (1.0 + m * m);
    if tiny(sxx, mx) || tiny(syy, my) {
        return Err(FeatureError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
