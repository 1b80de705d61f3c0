//! Keypoint sequences, launch-monitor records and the dataset plumbing around them.
//!
//! A keypoint file is a JSON array of swings. Each swing carries one bounding
//! box and eight event poses of 17 `[x, y, confidence]` triples listed in
//! [`JointName::ALL`] order:
//!
//! ```json
//! [{"swing_id": "s1", "golfer_id": "g1", "view": "FACEON",
//!   "bbox": [x, y, w, h],
//!   "events": {"address": [[x, y, c], ...], ..., "finish": [...]}}]
//! ```
//!
//! Ball records come from a CSV with the exact header [`BALL_CSV_HEADER`].

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::Point2;

pub const JOINT_COUNT: usize = 17;
pub const EVENT_COUNT: usize = 8;

pub const BALL_CSV_HEADER: [&str; 8] = [
    "swing_id",
    "club_type",
    "distance",
    "carry",
    "lr_distance_out",
    "direction_angle",
    "spin_axis",
    "ball_speed",
];

#[derive(Debug, Error)]
pub enum PoseError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed file at line {line}, column {column}: {message}")]
    MalformedFile {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation in swing #{index} ({swing_id}) at `{field}`: {message}")]
    SchemaViolation {
        index: usize,
        swing_id: String,
        field: String,
        message: String,
    },
    #[error("duplicate swing_id `{0}`")]
    DuplicateSwingId(String),
    #[error("row {row}: unknown club type `{value}`")]
    UnknownClubType { row: usize, value: String },
    #[error("row {row}: {message}")]
    InvariantViolation { row: usize, message: String },
    #[error("swing `{swing_id}`: bounding box width must be positive (got {width})")]
    DegenerateBBox { swing_id: String, width: f64 },
    #[error("swing `{swing_id}`: {joint} at {event} has confidence {confidence} below {minimum}")]
    LowConfidence {
        swing_id: String,
        event: SwingEvent,
        joint: JointName,
        confidence: f64,
        minimum: f64,
    },
    #[error("train fraction must lie strictly between 0 and 1 (got {0})")]
    InvalidFraction(f64),
    #[error("dataset is empty")]
    EmptyDataset,
}

pub type Result<T> = std::result::Result<T, PoseError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum JointName {
    Nose,
    LEye,
    REye,
    LEar,
    REar,
    LShoulder,
    RShoulder,
    LElbow,
    RElbow,
    LWrist,
    RWrist,
    LHip,
    RHip,
    LKnee,
    RKnee,
    LAnkle,
    RAnkle,
}

impl JointName {
    pub const ALL: [JointName; JOINT_COUNT] = [
        JointName::Nose,
        JointName::LEye,
        JointName::REye,
        JointName::LEar,
        JointName::REar,
        JointName::LShoulder,
        JointName::RShoulder,
        JointName::LElbow,
        JointName::RElbow,
        JointName::LWrist,
        JointName::RWrist,
        JointName::LHip,
        JointName::RHip,
        JointName::LKnee,
        JointName::RKnee,
        JointName::LAnkle,
        JointName::RAnkle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JointName::Nose => "Nose",
            JointName::LEye => "L_Eye",
            JointName::REye => "R_Eye",
            JointName::LEar => "L_Ear",
            JointName::REar => "R_Ear",
            JointName::LShoulder => "L_Shoulder",
            JointName::RShoulder => "R_Shoulder",
            JointName::LElbow => "L_Elbow",
            JointName::RElbow => "R_Elbow",
            JointName::LWrist => "L_Wrist",
            JointName::RWrist => "R_Wrist",
            JointName::LHip => "L_Hip",
            JointName::RHip => "R_Hip",
            JointName::LKnee => "L_Knee",
            JointName::RKnee => "R_Knee",
            JointName::LAnkle => "L_Ankle",
            JointName::RAnkle => "R_Ankle",
        }
    }

    /// The same joint on the other side of the body.
    pub fn opposite(self) -> JointName {
        use JointName::*;
        match self {
            Nose => Nose,
            LEye => REye,
            REye => LEye,
            LEar => REar,
            REar => LEar,
            LShoulder => RShoulder,
            RShoulder => LShoulder,
            LElbow => RElbow,
            RElbow => LElbow,
            LWrist => RWrist,
            RWrist => LWrist,
            LHip => RHip,
            RHip => LHip,
            LKnee => RKnee,
            RKnee => LKnee,
            LAnkle => RAnkle,
            RAnkle => LAnkle,
        }
    }
}

impl fmt::Display for JointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum SwingEvent {
    Address,
    Takeaway,
    Backswing,
    Top,
    Downswing,
    Impact,
    FollowThrough,
    Finish,
}

impl SwingEvent {
    pub const ALL: [SwingEvent; EVENT_COUNT] = [
        SwingEvent::Address,
        SwingEvent::Takeaway,
        SwingEvent::Backswing,
        SwingEvent::Top,
        SwingEvent::Downswing,
        SwingEvent::Impact,
        SwingEvent::FollowThrough,
        SwingEvent::Finish,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<SwingEvent> {
        Self::ALL.get(index).copied()
    }

    /// Key used for this event inside the keypoint JSON `events` object.
    pub fn key(self) -> &'static str {
        match self {
            SwingEvent::Address => "address",
            SwingEvent::Takeaway => "takeaway",
            SwingEvent::Backswing => "backswing",
            SwingEvent::Top => "top",
            SwingEvent::Downswing => "downswing",
            SwingEvent::Impact => "impact",
            SwingEvent::FollowThrough => "follow_through",
            SwingEvent::Finish => "finish",
        }
    }

    pub fn from_key(key: &str) -> Option<SwingEvent> {
        Self::ALL.into_iter().find(|e| e.key() == key)
    }
}

impl fmt::Display for SwingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum View {
    #[serde(rename = "FACEON")]
    FaceOn,
    #[serde(rename = "DTL")]
    Dtl,
}

impl View {
    pub fn as_str(self) -> &'static str {
        match self {
            View::FaceOn => "FACEON",
            View::Dtl => "DTL",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for View {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "FACEON" => Ok(View::FaceOn),
            "DTL" => Ok(View::Dtl),
            other => Err(format!("unknown view `{other}` (expected FACEON or DTL)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub name: JointName,
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Joint {
    pub fn point(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// All 17 joints of one pose, stored in [`JointName::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSet {
    joints: [Joint; JOINT_COUNT],
}

impl JointSet {
    /// Builds a set from `(x, y, confidence)` triples in canonical joint order.
    pub fn from_triples(triples: &[[f64; 3]; JOINT_COUNT]) -> Self {
        let joints = std::array::from_fn(|i| Joint {
            name: JointName::ALL[i],
            x: triples[i][0],
            y: triples[i][1],
            confidence: triples[i][2],
        });
        Self { joints }
    }

    pub fn from_points(points: &[Point2; JOINT_COUNT]) -> Self {
        let triples = std::array::from_fn(|i| [points[i].x, points[i].y, 1.0]);
        Self::from_triples(&triples)
    }

    pub fn get(&self, name: JointName) -> &Joint {
        &self.joints[name.index()]
    }

    pub fn point(&self, name: JointName) -> Point2 {
        self.get(name).point()
    }

    pub fn joints(&self) -> &[Joint; JOINT_COUNT] {
        &self.joints
    }

    pub fn triples(&self) -> [[f64; 3]; JOINT_COUNT] {
        std::array::from_fn(|i| {
            let j = &self.joints[i];
            [j.x, j.y, j.confidence]
        })
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Self {
        let mut out = *self;
        for j in out.joints.iter_mut() {
            let p = f(j.point());
            j.x = p.x;
            j.y = p.y;
        }
        out
    }

    /// Exchanges every left joint with its right counterpart.
    pub fn swap_sides(&self) -> Self {
        let mut out = *self;
        for name in JointName::ALL {
            let src = self.get(name.opposite());
            out.joints[name.index()] = Joint { name, ..*src };
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwingSequence {
    pub swing_id: String,
    pub golfer_id: String,
    pub view: View,
    pub bbox: BBox,
    pub events: [JointSet; EVENT_COUNT],
}

impl SwingSequence {
    pub fn event(&self, event: SwingEvent) -> &JointSet {
        &self.events[event.index()]
    }

    /// Reflects every joint across the vertical centre line of the bounding
    /// box. Joint labels are kept, so a left wrist stays labelled left.
    pub fn reflected(&self) -> Self {
        let axis = 2.0 * self.bbox.x + self.bbox.width;
        let mut out = self.clone();
        for set in out.events.iter_mut() {
            *set = set.map_points(|p| Point2::new(axis - p.x, p.y));
        }
        out
    }

    /// Converts a left-handed swing into right-handed form: reflection plus
    /// a left/right label swap.
    pub fn mirrored_handedness(&self) -> Self {
        let mut out = self.reflected();
        for set in out.events.iter_mut() {
            *set = set.swap_sides();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClubType {
    W1,
    W3,
    I4,
    I5,
    I6,
    I7,
    I8,
    I9,
}

impl ClubType {
    pub const ALL: [ClubType; 8] = [
        ClubType::W1,
        ClubType::W3,
        ClubType::I4,
        ClubType::I5,
        ClubType::I6,
        ClubType::I7,
        ClubType::I8,
        ClubType::I9,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClubType::W1 => "W1",
            ClubType::W3 => "W3",
            ClubType::I4 => "I4",
            ClubType::I5 => "I5",
            ClubType::I6 => "I6",
            ClubType::I7 => "I7",
            ClubType::I8 => "I8",
            ClubType::I9 => "I9",
        }
    }
}

impl FromStr for ClubType {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or(())
    }
}

/// One launch-monitor reading. Distances are in yards; negative lateral
/// values and angles mean left of target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub swing_id: String,
    pub club_type: ClubType,
    pub distance: f64,
    pub carry: f64,
    pub lr_distance_out: f64,
    pub direction_angle: f64,
    pub spin_axis: f64,
    pub ball_speed: f64,
}

impl BallRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        let finite = [
            ("distance", self.distance),
            ("carry", self.carry),
            ("lr_distance_out", self.lr_distance_out),
            ("direction_angle", self.direction_angle),
            ("spin_axis", self.spin_axis),
            ("ball_speed", self.ball_speed),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("{name} is not finite"));
        }
        if self.distance < 0.0 || self.carry < 0.0 {
            return Err("distance and carry must be non-negative".into());
        }
        if self.carry > self.distance {
            return Err(format!(
                "carry {} exceeds distance {}",
                self.carry, self.distance
            ));
        }
        if self.ball_speed <= 0.0 {
            return Err(format!("ball_speed must be positive (got {})", self.ball_speed));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairedShot {
    pub sequence: SwingSequence,
    pub ball: BallRecord,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IngestOptions {
    /// Reject swings holding any joint below this confidence. `0.0` disables the gate.
    pub min_confidence: f64,
    /// Convert left-handed input to right-handed form on load.
    pub mirror: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            min_confidence: 0.0,
            mirror: false,
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| PoseError::Io {
            path: path.display().to_string(),
            source,
        })?;
    Ok(s)
}

pub fn parse_keypoint_file(path: impl AsRef<Path>) -> Result<Vec<SwingSequence>> {
    parse_keypoint_file_with(path, &IngestOptions::default())
}

pub fn parse_keypoint_file_with(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<Vec<SwingSequence>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    parse_keypoint_str(&text, &path.display().to_string(), options)
}

/// Parses keypoint JSON held in memory. `origin` only labels error messages.
pub fn parse_keypoint_str(
    text: &str,
    origin: &str,
    options: &IngestOptions,
) -> Result<Vec<SwingSequence>> {
    let root: Value = serde_json::from_str(text).map_err(|e| PoseError::MalformedFile {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Array(items) = root else {
        return Err(violation(0, "?", "$", "top level must be an array of swings"));
    };
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(items.len());
    for (index, item) in items.iter().enumerate() {
        let mut seq = parse_swing(index, item)?;
        if !seen.insert(seq.swing_id.clone()) {
            return Err(PoseError::DuplicateSwingId(seq.swing_id));
        }
        check_confidence(&seq, options.min_confidence)?;
        if options.mirror {
            seq = seq.mirrored_handedness();
        }
        out.push(seq);
    }
    Ok(out)
}

fn violation(index: usize, swing_id: &str, field: &str, message: &str) -> PoseError {
    PoseError::SchemaViolation {
        index,
        swing_id: swing_id.to_string(),
        field: field.to_string(),
        message: message.to_string(),
    }
}

fn parse_swing(index: usize, item: &Value) -> Result<SwingSequence> {
    let Value::Object(obj) = item else {
        return Err(violation(index, "?", "$", "swing entry must be an object"));
    };
    let string_field = |key: &str, id: &str| -> Result<String> {
        match obj.get(key) {
            Some(Value::String(s)) => Ok(s.clone()),
            _ => Err(violation(index, id, key, "expected a string")),
        }
    };
    let swing_id = string_field("swing_id", "?")?;
    let golfer_id = string_field("golfer_id", &swing_id)?;
    let view = string_field("view", &swing_id)?
        .parse::<View>()
        .map_err(|m| violation(index, &swing_id, "view", &m))?;

    let bbox = match obj.get("bbox").and_then(Value::as_array) {
        Some(arr) if arr.len() == 4 => {
            let vals: Vec<f64> = arr.iter().filter_map(Value::as_f64).collect();
            if vals.len() != 4 || vals.iter().any(|v| !v.is_finite()) {
                return Err(violation(index, &swing_id, "bbox", "expected four finite numbers"));
            }
            BBox {
                x: vals[0],
                y: vals[1],
                width: vals[2],
                height: vals[3],
            }
        }
        _ => return Err(violation(index, &swing_id, "bbox", "expected [x, y, w, h]")),
    };
    if !(bbox.width > 0.0 && bbox.height > 0.0) {
        return Err(violation(
            index,
            &swing_id,
            "bbox",
            "width and height must be positive",
        ));
    }

    let Some(Value::Object(events)) = obj.get("events") else {
        return Err(violation(index, &swing_id, "events", "expected an object keyed by event"));
    };
    if let Some(unknown) = events.keys().find(|k| SwingEvent::from_key(k).is_none()) {
        return Err(violation(
            index,
            &swing_id,
            &format!("events.{unknown}"),
            "unknown swing event",
        ));
    }
    let mut sets = Vec::with_capacity(EVENT_COUNT);
    for event in SwingEvent::ALL {
        let field = format!("events.{}", event.key());
        let Some(Value::Array(joints)) = events.get(event.key()) else {
            return Err(violation(index, &swing_id, &field, "missing event"));
        };
        if joints.len() != JOINT_COUNT {
            return Err(violation(
                index,
                &swing_id,
                &field,
                &format!("expected {JOINT_COUNT} joints, found {}", joints.len()),
            ));
        }
        let mut triples = [[0.0; 3]; JOINT_COUNT];
        for (j, joint) in joints.iter().enumerate() {
            let jfield = format!("{field}[{j}]");
            let vals: Option<Vec<f64>> = joint
                .as_array()
                .filter(|a| a.len() == 3)
                .map(|a| a.iter().filter_map(Value::as_f64).collect());
            match vals {
                Some(v) if v.len() == 3 => {
                    if !(v[0].is_finite() && v[1].is_finite()) {
                        return Err(violation(index, &swing_id, &jfield, "coordinates must be finite"));
                    }
                    if !(0.0..=1.0).contains(&v[2]) {
                        return Err(violation(index, &swing_id, &jfield, "confidence must lie in [0, 1]"));
                    }
                    triples[j] = [v[0], v[1], v[2]];
                }
                _ => return Err(violation(index, &swing_id, &jfield, "expected [x, y, confidence]")),
            }
        }
        sets.push(JointSet::from_triples(&triples));
    }
    let events: [JointSet; EVENT_COUNT] = sets.try_into().expect("eight events collected");

    Ok(SwingSequence {
        swing_id,
        golfer_id,
        view,
        bbox,
        events,
    })
}

fn check_confidence(seq: &SwingSequence, minimum: f64) -> Result<()> {
    if minimum <= 0.0 {
        return Ok(());
    }
    for event in SwingEvent::ALL {
        for joint in seq.event(event).joints() {
            if joint.confidence < minimum {
                return Err(PoseError::LowConfidence {
                    swing_id: seq.swing_id.clone(),
                    event,
                    joint: joint.name,
                    confidence: joint.confidence,
                    minimum,
                });
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RawEvents<'a> {
    address: &'a [[f64; 3]],
    takeaway: &'a [[f64; 3]],
    backswing: &'a [[f64; 3]],
    top: &'a [[f64; 3]],
    downswing: &'a [[f64; 3]],
    impact: &'a [[f64; 3]],
    follow_through: &'a [[f64; 3]],
    finish: &'a [[f64; 3]],
}

#[derive(Serialize)]
struct RawSwing<'a> {
    swing_id: &'a str,
    golfer_id: &'a str,
    view: View,
    bbox: [f64; 4],
    events: RawEvents<'a>,
}

/// Serializes sequences to keypoint JSON that [`parse_keypoint_str`] reads back.
pub fn keypoints_to_json(sequences: &[SwingSequence]) -> String {
    let triples: Vec<Vec<[[f64; 3]; JOINT_COUNT]>> = sequences
        .iter()
        .map(|s| s.events.iter().map(JointSet::triples).collect())
        .collect();
    let raw: Vec<RawSwing<'_>> = sequences
        .iter()
        .zip(&triples)
        .map(|(s, t)| RawSwing {
            swing_id: &s.swing_id,
            golfer_id: &s.golfer_id,
            view: s.view,
            bbox: [s.bbox.x, s.bbox.y, s.bbox.width, s.bbox.height],
            events: RawEvents {
                address: &t[0],
                takeaway: &t[1],
                backswing: &t[2],
                top: &t[3],
                downswing: &t[4],
                impact: &t[5],
                follow_through: &t[6],
                finish: &t[7],
            },
        })
        .collect();
    serde_json::to_string_pretty(&raw).expect("keypoint structs always serialize")
}

pub fn parse_ball_csv(path: impl AsRef<Path>) -> Result<Vec<BallRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| PoseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_ball_csv(file, &path.display().to_string())
}

pub fn read_ball_csv(reader: impl Read, origin: &str) -> Result<Vec<BallRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let malformed = |line: usize, message: String| PoseError::MalformedFile {
        path: origin.to_string(),
        line,
        column: 0,
        message,
    };
    let headers = rdr
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if headers.iter().ne(BALL_CSV_HEADER.iter().copied()) {
        return Err(malformed(
            1,
            format!("header must be `{}`", BALL_CSV_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(row + 1, |p| p.line() as usize);
            malformed(line, e.to_string())
        })?;
        let number = |col: usize| -> Result<f64> {
            rec[col].parse::<f64>().map_err(|_| PoseError::InvariantViolation {
                row,
                message: format!("{} `{}` is not a number", BALL_CSV_HEADER[col], &rec[col]),
            })
        };
        let club_type = rec[1].parse::<ClubType>().map_err(|_| PoseError::UnknownClubType {
            row,
            value: rec[1].to_string(),
        })?;
        let ball = BallRecord {
            swing_id: rec[0].to_string(),
            club_type,
            distance: number(2)?,
            carry: number(3)?,
            lr_distance_out: number(4)?,
            direction_angle: number(5)?,
            spin_axis: number(6)?,
            ball_speed: number(7)?,
        };
        ball.validate()
            .map_err(|message| PoseError::InvariantViolation { row, message })?;
        out.push(ball);
    }
    Ok(out)
}

pub fn write_ball_csv(records: &[BallRecord], writer: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BALL_CSV_HEADER)?;
    for b in records {
        w.write_record([
            b.swing_id.clone(),
            b.club_type.as_str().to_string(),
            b.distance.to_string(),
            b.carry.to_string(),
            b.lr_distance_out.to_string(),
            b.direction_angle.to_string(),
            b.spin_axis.to_string(),
            b.ball_speed.to_string(),
        ])?;
    }
    w.flush()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairing {
    pub shots: Vec<PairedShot>,
    pub unmatched_sequences: Vec<String>,
    pub unmatched_balls: Vec<String>,
}

impl Pairing {
    pub fn unmatched_count(&self) -> usize {
        self.unmatched_sequences.len() + self.unmatched_balls.len()
    }
}

/// Pairs sequences and ball records by exact `swing_id`, keeping sequence order.
/// A repeated ball id only pairs once; extra copies are reported unmatched.
pub fn pair_records(sequences: Vec<SwingSequence>, balls: Vec<BallRecord>) -> Pairing {
    let mut by_id: HashMap<String, BallRecord> = HashMap::new();
    let mut ball_order = Vec::new();
    let mut unmatched_balls = Vec::new();
    for ball in balls {
        if by_id.contains_key(&ball.swing_id) {
            unmatched_balls.push(ball.swing_id);
        } else {
            ball_order.push(ball.swing_id.clone());
            by_id.insert(ball.swing_id.clone(), ball);
        }
    }
    let mut pairing = Pairing::default();
    for sequence in sequences {
        match by_id.remove(&sequence.swing_id) {
            Some(ball) => pairing.shots.push(PairedShot { sequence, ball }),
            None => pairing.unmatched_sequences.push(sequence.swing_id),
        }
    }
    pairing
        .unmatched_balls
        .extend(ball_order.into_iter().filter(|id| by_id.contains_key(id)));
    pairing.unmatched_balls.extend(unmatched_balls);
    pairing
}

/// Translates joints to the bounding-box origin and divides by its width, so
/// coordinates from different camera setups share one scale.
pub fn normalize_sequence(seq: &SwingSequence) -> Result<SwingSequence> {
    let b = seq.bbox;
    if !(b.width > 0.0) {
        return Err(PoseError::DegenerateBBox {
            swing_id: seq.swing_id.clone(),
            width: b.width,
        });
    }
    let mut out = seq.clone();
    for set in out.events.iter_mut() {
        *set = set.map_points(|p| Point2::new((p.x - b.x) / b.width, (p.y - b.y) / b.width));
    }
    out.bbox = BBox {
        x: 0.0,
        y: 0.0,
        width: 1.0,
        height: b.height / b.width,
    };
    Ok(out)
}

/// Seeded shuffle of `0..n` split into `(train, test)` index lists with
/// `round(train_fraction * n)` training entries.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n == 0 {
        return Err(PoseError::EmptyDataset);
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(PoseError::InvalidFraction(train_fraction));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let test = order.split_off(n_train.min(n));
    Ok((order, test))
}

pub fn split_dataset<T: Clone>(items: &[T], train_fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (train, test) = split_indices(items.len(), train_fraction, seed)?;
    Ok((
        train.iter().map(|&i| items[i].clone()).collect(),
        test.iter().map(|&i| items[i].clone()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_swing(id: &str, joints: usize) -> String {
        let triple = "[1.0, 2.0, 0.9]";
        let list = vec![triple; joints].join(",");
        let events: Vec<String> = SwingEvent::ALL
            .iter()
            .map(|e| {
                let n = if *e == SwingEvent::Top { joints } else { JOINT_COUNT };
                let l = if n == joints { list.clone() } else { vec![triple; n].join(",") };
                format!("\"{}\": [{}]", e.key(), l)
            })
            .collect();
        format!(
            "{{\"swing_id\": \"{id}\", \"golfer_id\": \"g\", \"view\": \"FACEON\", \"bbox\": [0, 0, 100, 200], \"events\": {{{}}}}}",
            events.join(",")
        )
    }

    #[test]
    fn joint_and_event_tables() {
        assert_eq!(JointName::ALL.len(), 17);
        for (i, j) in JointName::ALL.iter().enumerate() {
            assert_eq!(j.index(), i);
            assert_eq!(j.opposite().opposite(), *j);
        }
        assert_eq!(JointName::ALL[0].as_str(), "Nose");
        assert_eq!(JointName::ALL[16].as_str(), "R_Ankle");
        for (i, e) in SwingEvent::ALL.iter().enumerate() {
            assert_eq!(SwingEvent::from_index(i), Some(*e));
            assert_eq!(SwingEvent::from_key(e.key()), Some(*e));
        }
        assert_eq!(SwingEvent::Backswing.index(), 2);
        assert_eq!(SwingEvent::from_index(8), None);
    }

    #[test]
    fn parses_minimal_file() {
        let text = format!("[{}]", sample_swing("a", 17));
        let seqs = parse_keypoint_str(&text, "mem", &IngestOptions::default()).unwrap();
        assert_eq!(seqs.len(), 1);
        assert_eq!(seqs[0].swing_id, "a");
        assert_eq!(seqs[0].event(SwingEvent::Finish).get(JointName::RAnkle).confidence, 0.9);
    }

    #[test]
    fn empty_array_is_empty_list() {
        let seqs = parse_keypoint_str("[]", "mem", &IngestOptions::default()).unwrap();
        assert!(seqs.is_empty());
    }

    #[test]
    fn short_event_is_schema_violation() {
        let text = format!("[{}]", sample_swing("bad", 16));
        match parse_keypoint_str(&text, "mem", &IngestOptions::default()) {
            Err(PoseError::SchemaViolation { swing_id, field, .. }) => {
                assert_eq!(swing_id, "bad");
                assert_eq!(field, "events.top");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        match parse_keypoint_str("[{\"swing_id\": }", "k.json", &IngestOptions::default()) {
            Err(PoseError::MalformedFile { path, line, .. }) => {
                assert_eq!(path, "k.json");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("[{},{}]", sample_swing("x", 17), sample_swing("x", 17));
        assert!(matches!(
            parse_keypoint_str(&text, "mem", &IngestOptions::default()),
            Err(PoseError::DuplicateSwingId(id)) if id == "x"
        ));
    }

    #[test]
    fn confidence_gate() {
        let text = format!("[{}]", sample_swing("c", 17));
        let opts = IngestOptions {
            min_confidence: 0.95,
            mirror: false,
        };
        assert!(matches!(
            parse_keypoint_str(&text, "mem", &opts),
            Err(PoseError::LowConfidence { .. })
        ));
    }

    #[test]
    fn ball_csv_rows() {
        let csv = format!(
            "{}\ns1,W1,250,240,-12,-3.5,8.2,155\n",
            BALL_CSV_HEADER.join(",")
        );
        let balls = read_ball_csv(csv.as_bytes(), "mem").unwrap();
        assert_eq!(balls.len(), 1);
        assert_eq!(balls[0].club_type, ClubType::W1);
        assert_eq!(balls[0].lr_distance_out, -12.0);
        assert_eq!(balls[0].spin_axis, 8.2);

        let bad_club = format!("{}\ns1,P9,250,240,-12,-3.5,8.2,155\n", BALL_CSV_HEADER.join(","));
        assert!(matches!(
            read_ball_csv(bad_club.as_bytes(), "mem"),
            Err(PoseError::UnknownClubType { row: 1, value }) if value == "P9"
        ));

        let long_carry = format!(
            "{}\ns0,I7,150,140,0,0,0,100\ns1,W1,250,260,-12,-3.5,8.2,155\n",
            BALL_CSV_HEADER.join(",")
        );
        assert!(matches!(
            read_ball_csv(long_carry.as_bytes(), "mem"),
            Err(PoseError::InvariantViolation { row: 2, .. })
        ));

        let bad_header = "id,club\n";
        assert!(matches!(
            read_ball_csv(bad_header.as_bytes(), "mem"),
            Err(PoseError::MalformedFile { .. })
        ));
    }

    fn ball(id: &str) -> BallRecord {
        BallRecord {
            swing_id: id.into(),
            club_type: ClubType::I7,
            distance: 150.0,
            carry: 140.0,
            lr_distance_out: 0.0,
            direction_angle: 0.0,
            spin_axis: 0.0,
            ball_speed: 100.0,
        }
    }

    fn seq(id: &str) -> SwingSequence {
        let set = JointSet::from_triples(&[[0.0, 0.0, 1.0]; JOINT_COUNT]);
        SwingSequence {
            swing_id: id.into(),
            golfer_id: "g".into(),
            view: View::FaceOn,
            bbox: BBox {
                x: 10.0,
                y: 20.0,
                width: 200.0,
                height: 400.0,
            },
            events: [set; EVENT_COUNT],
        }
    }

    #[test]
    fn pairing_cases() {
        let p = pair_records(vec![seq("a"), seq("b"), seq("c")], vec![ball("c"), ball("a"), ball("b")]);
        assert_eq!(p.shots.len(), 3);
        assert_eq!(p.unmatched_count(), 0);

        let p = pair_records(vec![seq("a"), seq("b")], vec![ball("a")]);
        assert_eq!(p.shots.len(), 1);
        assert_eq!(p.unmatched_sequences, vec!["b".to_string()]);

        let p = pair_records(vec![seq("a"), seq("b")], vec![ball("c"), ball("d")]);
        assert!(p.shots.is_empty());
        assert_eq!(p.unmatched_count(), 4);
    }

    #[test]
    fn normalize_affine_map() {
        let mut s = seq("n");
        let mut pts = [Point2::new(10.0, 20.0); JOINT_COUNT];
        pts[1] = Point2::new(110.0, 220.0);
        s.events[0] = JointSet::from_points(&pts);
        let n = normalize_sequence(&s).unwrap();
        assert_eq!(n.events[0].point(JointName::Nose), Point2::new(0.0, 0.0));
        // (110 - 10) / 200, (220 - 20) / 200
        assert_eq!(n.events[0].point(JointName::LEye), Point2::new(0.5, 1.0));
        assert_eq!(n.bbox, BBox { x: 0.0, y: 0.0, width: 1.0, height: 2.0 });
        assert_eq!(normalize_sequence(&n).unwrap(), n);

        s.bbox.width = 0.0;
        assert!(matches!(normalize_sequence(&s), Err(PoseError::DegenerateBBox { .. })));
    }

    #[test]
    fn split_sizes() {
        let items: Vec<usize> = (0..924).collect();
        let (train, test) = split_dataset(&items, 0.7997, 3).unwrap();
        assert_eq!((train.len(), test.len()), (739, 185));

        let ten: Vec<usize> = (0..10).collect();
        assert_eq!(split_dataset(&ten, 0.8, 1).unwrap(), split_dataset(&ten, 0.8, 1).unwrap());

        let five: Vec<usize> = (0..5).collect();
        for seed in [1, 2] {
            let (a, b) = split_dataset(&five, 0.8, seed).unwrap();
            assert_eq!((a.len(), b.len()), (4, 1));
        }
        assert!(matches!(split_dataset::<usize>(&[], 0.8, 1), Err(PoseError::EmptyDataset)));
        assert!(matches!(split_dataset(&five, 1.0, 1), Err(PoseError::InvalidFraction(_))));
    }

    fn arb_sequence() -> impl Strategy<Value = SwingSequence> {
        (
            proptest::collection::vec((-500.0f64..500.0, -500.0f64..500.0, 0.0f64..=1.0), JOINT_COUNT * EVENT_COUNT),
            1.0f64..300.0,
            1.0f64..300.0,
        )
            .prop_map(|(coords, w, h)| {
                let mut s = seq("p");
                s.bbox.width = w;
                s.bbox.height = h;
                for (e, set) in s.events.iter_mut().enumerate() {
                    let triples = std::array::from_fn(|j| {
                        let (x, y, c) = coords[e * JOINT_COUNT + j];
                        [x, y, c]
                    });
                    *set = JointSet::from_triples(&triples);
                }
                s
            })
    }

    proptest! {
        #[test]
        fn keypoint_json_round_trip(s in arb_sequence()) {
            let text = keypoints_to_json(std::slice::from_ref(&s));
            let back = parse_keypoint_str(&text, "mem", &IngestOptions::default()).unwrap();
            prop_assert_eq!(back, vec![s]);
        }

        #[test]
        fn normalization_preserves_difference_ratios(s in arb_sequence()) {
            let n = normalize_sequence(&s).unwrap();
            let raw = &s.events[3];
            let norm = &n.events[3];
            let (a, b, c) = (JointName::Nose, JointName::LHip, JointName::RKnee);
            let d_raw = raw.point(a).x - raw.point(b).x;
            let e_raw = raw.point(c).y - raw.point(b).y;
            let d_n = norm.point(a).x - norm.point(b).x;
            let e_n = norm.point(c).y - norm.point(b).y;
            prop_assert!((d_raw / s.bbox.width - d_n).abs() < 1e-9);
            prop_assert!((e_raw / s.bbox.width - e_n).abs() < 1e-9);
        }

        #[test]
        fn split_is_a_partition(n in 2usize..300, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let items: Vec<usize> = (0..n).collect();
            let (mut train, test) = split_dataset(&items, frac, seed).unwrap();
            prop_assert_eq!(train.len(), (frac * n as f64).round() as usize);
            let train_set: HashSet<usize> = train.iter().copied().collect();
            prop_assert!(test.iter().all(|t| !train_set.contains(t)));
            train.extend(test);
            train.sort_unstable();
            prop_assert_eq!(train, items);
        }
    }
}
