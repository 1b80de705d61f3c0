//! Browser bindings: a pose explorer, an in-page shape-function trainer and
//! a shot-shape classifier. Every export returns a JSON string or an error
//! message, so the page needs no generated type glue beyond strings.

use std::fmt::Write as _;

use serde_json::json;
use wasm_bindgen::prelude::*;

use swinglens::evaluation::{generate_swings, generate_synthetic, SwingSynthConfig, SyntheticSpec};
use swinglens::features::{label_direction, label_spin, pearson, shot_shape, LabelPolicy};
use swinglens::feedback::extract_curve;
use swinglens::geometry::Point2;
use swinglens::metrics::compute_all;
use swinglens::models::{train_nam, Task, TrainingConfig};
use swinglens::pose::{normalize_sequence, JointName, JointSet, SwingEvent, SwingSequence};

const HEAD: [JointName; 5] = [
    JointName::Nose,
    JointName::LEye,
    JointName::REye,
    JointName::LEar,
    JointName::REar,
];

const BONES: [(JointName, JointName); 14] = [
    (JointName::LShoulder, JointName::RShoulder),
    (JointName::LShoulder, JointName::LElbow),
    (JointName::LElbow, JointName::LWrist),
    (JointName::RShoulder, JointName::RElbow),
    (JointName::RElbow, JointName::RWrist),
    (JointName::LShoulder, JointName::LHip),
    (JointName::RShoulder, JointName::RHip),
    (JointName::LHip, JointName::RHip),
    (JointName::LHip, JointName::LKnee),
    (JointName::LKnee, JointName::LAnkle),
    (JointName::RHip, JointName::RKnee),
    (JointName::RKnee, JointName::RAnkle),
    (JointName::LEar, JointName::REar),
    (JointName::Nose, JointName::LEye),
];

fn event_at(index: usize) -> Result<SwingEvent, String> {
    SwingEvent::from_index(index).ok_or_else(|| format!("event index {index} is outside 0-7"))
}

/// Moves the head and hip joints sideways by the given fractions of the
/// bounding-box width at every event after Address.
fn displaced(seq: &SwingSequence, head_shift: f64, hip_shift: f64) -> SwingSequence {
    let w = seq.bbox.width;
    let mut out = seq.clone();
    for set in out.events.iter_mut().skip(1) {
        let mut triples = set.triples();
        for name in HEAD {
            triples[name.index()][0] += head_shift * w;
        }
        for name in [JointName::LHip, JointName::RHip] {
            triples[name.index()][0] += hip_shift * w;
        }
        *set = JointSet::from_triples(&triples);
    }
    out
}

fn stick_figure(seq: &SwingSequence, event: SwingEvent) -> String {
    let set = seq.event(event);
    let (w, h) = (240.0, 360.0);
    let scale = (w / seq.bbox.width).min(h / seq.bbox.height) * 0.9;
    let map = |p: Point2| {
        (
            w / 2.0 + (p.x - (seq.bbox.x + seq.bbox.width / 2.0)) * scale,
            h / 2.0 + (p.y - (seq.bbox.y + seq.bbox.height / 2.0)) * scale,
        )
    };
    let mut s = String::new();
    let _ = write!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}"><rect width="{w}" height="{h}" fill="white"/>"#
    );
    for (a, b) in BONES {
        let (x1, y1) = map(set.point(a));
        let (x2, y2) = map(set.point(b));
        let _ = write!(
            s,
            r##"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="#1f4e9c" stroke-width="3" stroke-linecap="round"/>"##
        );
    }
    for name in JointName::ALL {
        let (x, y) = map(set.point(name));
        let fill = if name.as_str().starts_with('L') { "#c0392b" } else { "#333" };
        let _ = write!(s, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3.5" fill="{fill}"/>"#);
    }
    let _ = write!(s, r#"<text x="8" y="18" font-family="sans-serif" font-size="13">{event}</text></svg>"#);
    s
}

/// Stick figure and metric values of one event of a synthetic swing after
/// sideways head and hip displacement.
#[wasm_bindgen]
pub fn pose_metrics(seed: u32, event_index: usize, head_shift: f64, hip_shift: f64) -> Result<String, String> {
    if !(head_shift.is_finite() && hip_shift.is_finite()) {
        return Err("shifts must be finite".into());
    }
    let event = event_at(event_index)?;
    let swings = generate_swings(&SwingSynthConfig {
        n_swings: 1,
        n_golfers: 1,
        seed: u64::from(seed),
        jitter: 0.0,
        ..Default::default()
    });
    let seq = displaced(&swings.sequences[0], head_shift, hip_shift);
    let normalized = normalize_sequence(&seq).map_err(|e| e.to_string())?;
    let values = compute_all(&normalized).map_err(|e| e.to_string())?;
    let metrics: Vec<_> = values
        .iter()
        .filter(|v| v.event == event)
        .map(|v| json!({"metric": v.metric.label(), "unit": format!("{:?}", v.unit()).to_lowercase(), "value": v.value}))
        .collect();
    Ok(json!({"event": event.to_string(), "svg": stick_figure(&seq, event), "metrics": metrics}).to_string())
}

fn overlay_svg(title: &str, xs: &[f64], model: &[f64], truth: &[f64]) -> String {
    let (w, h, left, top, pw, ph) = (300.0, 200.0, 36.0, 24.0, 252.0, 150.0);
    let (lo, hi) = model
        .iter()
        .chain(truth)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let (lo, hi) = if hi - lo < 1e-9 { (lo - 1.0, hi + 1.0) } else { (lo, hi) };
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let pts = |ys: &[f64]| {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| format!("{:.1},{:.1}", left + (x - x0) / (x1 - x0) * pw, top + (hi - y) / (hi - lo) * ph))
            .collect::<Vec<_>>()
            .join(" ")
    };
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
            r#"<rect width="{w}" height="{h}" fill="white"/>"#,
            r#"<text x="{cx}" y="15" text-anchor="middle">{title}</text>"#,
            r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#,
            r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#,
            r##"<polyline class="truth" fill="none" stroke="#999" stroke-width="2" stroke-dasharray="5 4" points="{truth}"/>"##,
            r##"<polyline class="model" fill="none" stroke="#1f4e9c" stroke-width="2" points="{model}"/>"##,
            "</svg>"
        ),
        w = w,
        h = h,
        cx = w / 2.0,
        title = title,
        left = left,
        top = top,
        right = left + pw,
        bottom = top + ph,
        truth = pts(truth),
        model = pts(model),
    )
}

/// Trains an additive model on planted shape functions and returns each
/// learned curve against the centred ground truth.
#[wasm_bindgen]
pub fn train_shapes(seed: u32, samples: usize, epochs: usize) -> Result<String, String> {
    if !(50..=5000).contains(&samples) {
        return Err("samples must be between 50 and 5000".into());
    }
    if !(1..=200).contains(&epochs) {
        return Err("epochs must be between 1 and 200".into());
    }
    let spec = SyntheticSpec::shape_recovery();
    let data = generate_synthetic(u64::from(seed), samples, &spec).map_err(|e| e.to_string())?;
    let config = TrainingConfig {
        epochs,
        hidden_sizes: vec![32, 16],
        seed: u64::from(seed),
        ..TrainingConfig::nam()
    };
    let model = train_nam(&data.x, &data.y, Task::Regression, spec.names(), &config).map_err(|e| e.to_string())?;
    let mut terms = Vec::new();
    for (i, term) in spec.terms.iter().enumerate() {
        let column: Vec<f64> = data.x.iter().map(|r| r[i]).collect();
        let curve = extract_curve(&model, i, &column, 60, 20).map_err(|e| e.to_string())?;
        let truth: Vec<f64> = curve.xs.iter().map(|&x| term.truth.eval(x)).collect();
        let mean = truth.iter().sum::<f64>() / truth.len() as f64;
        let truth: Vec<f64> = truth.iter().map(|t| t - mean).collect();
        let r = if term.truth.is_zero() { None } else { pearson(&curve.ys, &truth).ok() };
        let max_abs = curve.ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        terms.push(json!({
            "name": term.name,
            "truth": format!("{:?}", term.truth),
            "pearson": r,
            "max_abs": max_abs,
            "svg": overlay_svg(&term.name, &curve.xs, &curve.ys, &truth),
        }));
    }
    Ok(json!({"samples": samples, "epochs": epochs, "terms": terms}).to_string())
}

/// Straightness labels and shot shape of one launch-monitor reading.
#[wasm_bindgen]
pub fn classify_shot(
    direction_angle: f64,
    spin_axis: f64,
    direction_threshold: f64,
    spin_threshold: f64,
) -> Result<String, String> {
    for v in [direction_angle, spin_axis, direction_threshold, spin_threshold] {
        if !v.is_finite() {
            return Err("all inputs must be finite numbers".into());
        }
    }
    if direction_threshold < 0.0 || spin_threshold < 0.0 {
        return Err("thresholds must be non-negative".into());
    }
    let policy = LabelPolicy {
        direction_threshold,
        spin_threshold,
    };
    let shape = shot_shape(direction_angle, spin_axis, &policy);
    Ok(json!({
        "shape": shape.to_string(),
        "start": shape.start,
        "curve": shape.curve,
        "direction_straight": label_direction(direction_angle, &policy).is_straight(),
        "spin_straight": label_spin(spin_axis, &policy).is_straight(),
    })
    .to_string())
}
