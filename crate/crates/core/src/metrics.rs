//! Per-event swing metrics computed from normalized joint positions.
//!
//! Face-on sequences produce 15 metrics per event, down-the-line sequences 9.
//! Positional ratios are expressed in units of the Address stride length
//! (horizontal ankle separation), with `+x` pointing toward the target for a
//! right-handed golfer.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    angle_from_horizontal, angle_from_vertical, distance, midpoint, vertex_angle, GeometryError,
    Point2,
};
use crate::pose::{JointName, JointSet, SwingEvent, SwingSequence, View};

use JointName::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Degree,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MetricId {
    ShoulderAngle,
    UpperTilt,
    StanceRatio,
    HeadLoc,
    ShoulderLoc,
    LeftArmAngle,
    RightArmAngle,
    HipRotation,
    HipShifted,
    RightLegAngle,
    ShoulderHangingBack,
    HipHangingBack,
    RightArmpitAngle,
    WeightShift,
    FinishAngle,
    SpineAngle,
    LowerAngle,
    DtlShoulderAngle,
    DtlLeftArmAngle,
    DtlRightArmAngle,
    HipLine,
    HipAngle,
    RightDistance,
    LeftLegAngle,
}

impl MetricId {
    pub const FACE_ON: [MetricId; 15] = [
        MetricId::ShoulderAngle,
        MetricId::UpperTilt,
        MetricId::StanceRatio,
        MetricId::HeadLoc,
        MetricId::ShoulderLoc,
        MetricId::LeftArmAngle,
        MetricId::RightArmAngle,
        MetricId::HipRotation,
        MetricId::HipShifted,
        MetricId::RightLegAngle,
        MetricId::ShoulderHangingBack,
        MetricId::HipHangingBack,
        MetricId::RightArmpitAngle,
        MetricId::WeightShift,
        MetricId::FinishAngle,
    ];

    pub const DTL: [MetricId; 9] = [
        MetricId::SpineAngle,
        MetricId::LowerAngle,
        MetricId::DtlShoulderAngle,
        MetricId::DtlLeftArmAngle,
        MetricId::DtlRightArmAngle,
        MetricId::HipLine,
        MetricId::HipAngle,
        MetricId::RightDistance,
        MetricId::LeftLegAngle,
    ];

    pub fn for_view(view: View) -> &'static [MetricId] {
        match view {
            View::FaceOn => &Self::FACE_ON,
            View::Dtl => &Self::DTL,
        }
    }

    pub fn view(self) -> View {
        if Self::FACE_ON.contains(&self) {
            View::FaceOn
        } else {
            View::Dtl
        }
    }

    pub fn unit(self) -> Unit {
        use MetricId::*;
        match self {
            UpperTilt | StanceRatio | HeadLoc | ShoulderLoc | HipShifted | ShoulderHangingBack
            | HipHangingBack | HipLine | RightDistance => Unit::Ratio,
            _ => Unit::Degree,
        }
    }

    /// Whether the metric changes sign when the image is reflected left to
    /// right with joint labels kept (`true`) or is unchanged (`false`).
    pub fn is_odd_under_reflection(self) -> bool {
        use MetricId::*;
        matches!(
            self,
            ShoulderAngle
                | DtlShoulderAngle
                | HeadLoc
                | ShoulderLoc
                | HipShifted
                | HipLine
                | ShoulderHangingBack
                | HipHangingBack
                | WeightShift
                | FinishAngle
                | SpineAngle
        )
    }

    /// Metrics measured as a change from the Address pose; they are zero at Address.
    pub fn is_relative_to_address(self) -> bool {
        use MetricId::*;
        matches!(self, HeadLoc | HipShifted | HipLine | HipRotation | HipAngle)
    }

    /// Identifier used in metric dumps and schema files, e.g. `HEAD_LOC`.
    pub fn ident(self) -> &'static str {
        use MetricId::*;
        match self {
            ShoulderAngle => "SHOULDER_ANGLE",
            UpperTilt => "UPPER_TILT",
            StanceRatio => "STANCE_RATIO",
            HeadLoc => "HEAD_LOC",
            ShoulderLoc => "SHOULDER_LOC",
            LeftArmAngle => "LEFT_ARM_ANGLE",
            RightArmAngle => "RIGHT_ARM_ANGLE",
            HipRotation => "HIP_ROTATION",
            HipShifted => "HIP_SHIFTED",
            RightLegAngle => "RIGHT_LEG_ANGLE",
            ShoulderHangingBack => "SHOULDER_HANGING_BACK",
            HipHangingBack => "HIP_HANGING_BACK",
            RightArmpitAngle => "RIGHT_ARMPIT_ANGLE",
            WeightShift => "WEIGHT_SHIFT",
            FinishAngle => "FINISH_ANGLE",
            SpineAngle => "SPINE_ANGLE",
            LowerAngle => "LOWER_ANGLE",
            DtlShoulderAngle => "DTL_SHOULDER_ANGLE",
            DtlLeftArmAngle => "DTL_LEFT_ARM_ANGLE",
            DtlRightArmAngle => "DTL_RIGHT_ARM_ANGLE",
            HipLine => "HIP_LINE",
            HipAngle => "HIP_ANGLE",
            RightDistance => "RIGHT_DISTANCE",
            LeftLegAngle => "LEFT_LEG_ANGLE",
        }
    }

    /// Display label used in feature names, e.g. `HEAD-LOC`. The DTL
    /// shoulder and arm metrics share labels with their face-on namesakes.
    pub fn label(self) -> String {
        self.ident().trim_start_matches("DTL_").replace('_', "-")
    }

    /// Resolves an identifier or label within one view's metric set.
    pub fn parse(name: &str, view: View) -> Option<MetricId> {
        let wanted = name.trim().to_ascii_uppercase().replace('-', "_");
        Self::for_view(view)
            .iter()
            .copied()
            .find(|m| m.ident() == wanted || m.label().replace('-', "_") == wanted)
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: MetricId,
    pub event: SwingEvent,
    pub value: f64,
}

impl MetricValue {
    pub fn unit(&self) -> Unit {
        self.metric.unit()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("ankles coincide horizontally at Address; stride length is zero")]
    DegenerateStride,
    #[error("zero-length reference for {0}")]
    DegenerateReference(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("swing `{swing_id}`, {metric} at {event}: {source}")]
    InSwing {
        swing_id: String,
        metric: MetricId,
        event: SwingEvent,
        #[source]
        source: Box<MetricError>,
    },
}

fn mid(set: &JointSet, a: JointName, b: JointName) -> Point2 {
    midpoint(set.point(a), set.point(b))
}

fn span_x(set: &JointSet, a: JointName, b: JointName) -> f64 {
    (set.point(a).x - set.point(b).x).abs()
}

fn nonzero(value: f64, what: &'static str) -> Result<f64, MetricError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(MetricError::DegenerateReference(what))
    }
}

fn stride_at_address(address: &JointSet) -> Result<f64, MetricError> {
    let s = span_x(address, LAnkle, RAnkle);
    if s > 0.0 {
        Ok(s)
    } else {
        Err(MetricError::DegenerateStride)
    }
}

fn apparent_rotation(now: &JointSet, address: &JointSet) -> Result<f64, MetricError> {
    let reference = nonzero(span_x(address, LHip, RHip), "hip width at Address")?;
    let ratio = (span_x(now, LHip, RHip) / reference).clamp(0.0, 1.0);
    Ok(ratio.acos().to_degrees())
}

/// Evaluates one metric for the pose `now`, using `address` as the reference
/// pose for relative metrics and ratio denominators.
pub fn compute_metric(
    metric: MetricId,
    now: &JointSet,
    address: &JointSet,
) -> Result<f64, MetricError> {
    use MetricId::*;
    let p = |j: JointName| now.point(j);
    let value = match metric {
        ShoulderAngle | DtlShoulderAngle => angle_from_horizontal(p(LShoulder), p(RShoulder))?,
        UpperTilt => {
            let hips = mid(now, LHip, RHip);
            let upper = nonzero(distance(mid(now, LShoulder, RShoulder), hips), "upper body")?;
            distance(hips, mid(now, LAnkle, RAnkle)) / upper
        }
        StanceRatio => {
            let shoulders = nonzero(span_x(now, LShoulder, RShoulder), "shoulder width")?;
            span_x(now, LAnkle, RAnkle) / shoulders
        }
        HeadLoc => {
            let stride = stride_at_address(address)?;
            (mid(now, LEar, REar).x - mid(address, LEar, REar).x) / stride
        }
        ShoulderLoc => {
            let stride = stride_at_address(address)?;
            (p(LShoulder).x - address.point(LAnkle).x) / stride
        }
        LeftArmAngle | DtlLeftArmAngle => vertex_angle(p(LShoulder), p(LElbow), p(LWrist))?,
        RightArmAngle | DtlRightArmAngle => vertex_angle(p(RShoulder), p(RElbow), p(RWrist))?,
        HipRotation | HipAngle => apparent_rotation(now, address)?,
        HipShifted | HipLine => {
            let stride = stride_at_address(address)?;
            (mid(now, LHip, RHip).x - mid(address, LHip, RHip).x) / stride
        }
        RightLegAngle | LowerAngle => vertex_angle(p(RHip), p(RKnee), p(RAnkle))?,
        ShoulderHangingBack => {
            let stride = stride_at_address(address)?;
            (p(LShoulder).x - p(LAnkle).x) / stride
        }
        HipHangingBack => {
            let stride = stride_at_address(address)?;
            (p(LHip).x - p(LAnkle).x) / stride
        }
        RightArmpitAngle => vertex_angle(p(RElbow), p(RShoulder), p(RHip))?,
        WeightShift => angle_from_vertical(p(LHip), p(LAnkle))?,
        FinishAngle => angle_from_vertical(p(RHip), p(LAnkle))?,
        SpineAngle => angle_from_horizontal(mid(now, LShoulder, RShoulder), mid(now, LHip, RHip))?,
        RightDistance => {
            let stride = stride_at_address(address)?;
            distance(p(RElbow), mid(now, LHip, RHip)) / stride
        }
        LeftLegAngle => vertex_angle(p(LHip), p(LKnee), p(LAnkle))?,
    };
    Ok(value)
}

/// Every metric of the sequence's view at every event, event-major.
/// The sequence is expected to be normalized already.
pub fn compute_all(seq: &SwingSequence) -> Result<Vec<MetricValue>, MetricError> {
    let metrics = MetricId::for_view(seq.view);
    let address = seq.event(SwingEvent::Address);
    let mut out = Vec::with_capacity(metrics.len() * SwingEvent::ALL.len());
    for event in SwingEvent::ALL {
        let now = seq.event(event);
        for &metric in metrics {
            let value = compute_metric(metric, now, address).map_err(|e| MetricError::InSwing {
                swing_id: seq.swing_id.clone(),
                metric,
                event,
                source: Box::new(e),
            })?;
            out.push(MetricValue {
                metric,
                event,
                value,
            });
        }
    }
    Ok(out)
}

pub const METRIC_DUMP_HEADER: [&str; 5] = ["swing_id", "view", "event_index", "metric", "value"];

/// Writes `swing_id,view,event_index,metric,value` rows, one per value.
pub fn write_metric_dump<'a>(
    rows: impl IntoIterator<Item = (&'a SwingSequence, &'a [MetricValue])>,
    writer: impl Write,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRIC_DUMP_HEADER)?;
    for (seq, values) in rows {
        for v in values {
            w.write_record([
                seq.swing_id.as_str(),
                seq.view.as_str(),
                &v.event.index().to_string(),
                v.metric.ident(),
                &v.value.to_string(),
            ])?;
        }
    }
    w.flush()
}
