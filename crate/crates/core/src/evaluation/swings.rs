use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::pose::{BBox, BallRecord, ClubType, JointName, JointSet, PairedShot, SwingSequence, View, EVENT_COUNT, JOINT_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingSynthConfig {
    pub n_swings: usize,
    pub n_golfers: usize,
    pub seed: u64,
    pub club: ClubType,
    /// Standard deviation of per-joint pixel jitter.
    pub jitter: f64,
}

impl Default for SwingSynthConfig {
    fn default() -> Self {
        Self {
            n_swings: 300,
            n_golfers: 10,
            seed: 42,
            club: ClubType::I7,
            jitter: 1.0,
        }
    }
}

/// Face-on swings with launch-monitor readings that depend on the swing style.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSwings {
    pub sequences: Vec<SwingSequence>,
    pub balls: Vec<BallRecord>,
}

impl SyntheticSwings {
    pub fn shots(&self) -> Vec<PairedShot> {
        self.sequences
            .iter()
            .zip(&self.balls)
            .map(|(s, b)| PairedShot {
                sequence: s.clone(),
                ball: b.clone(),
            })
            .collect()
    }
}

/// Latent swing style, one standard-normal value per trait.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SwingStyle {
    pub stance: f64,
    pub head_drift: f64,
    pub hip_slide: f64,
    pub shoulder_tilt: f64,
    pub arm_bend: f64,
}

impl SwingStyle {
    fn sample(rng: &mut impl Rng, center: &SwingStyle, spread: f64) -> Self {
        let mut n = || -> f64 { StandardNormal.sample(rng) };
        Self {
            stance: center.stance + spread * n(),
            head_drift: center.head_drift + spread * n(),
            hip_slide: center.hip_slide + spread * n(),
            shoulder_tilt: center.shoulder_tilt + spread * n(),
            arm_bend: center.arm_bend + spread * n(),
        }
    }
}

// per-event choreography, indexed Address..Finish
const HIP_SHIFT: [f64; EVENT_COUNT] = [0.0, 1.0, -3.0, -5.0, 4.0, 8.0, 14.0, 18.0];
const HIP_TURN: [f64; EVENT_COUNT] = [1.0, 0.95, 0.7, 0.55, 0.75, 0.85, 0.5, 0.35];
const SHOULDER_TURN: [f64; EVENT_COUNT] = [1.0, 0.9, 0.6, 0.45, 0.6, 0.8, 0.5, 0.4];
const SHOULDER_TILT: [f64; EVENT_COUNT] = [3.0, 5.0, 20.0, 30.0, 15.0, 10.0, -15.0, -20.0];
const LEAN: [f64; EVENT_COUNT] = [-6.0, -6.0, -10.0, -12.0, -8.0, -10.0, 10.0, 14.0];
const HEAD: [f64; EVENT_COUNT] = [0.0, -2.0, -4.0, -5.0, -3.0, -2.0, 6.0, 10.0];
const HEAD_GAIN: [f64; EVENT_COUNT] = [0.0, 1.0, 3.0, 4.0, 3.0, 3.0, 2.0, 1.0];
const SLIDE_GAIN: [f64; EVENT_COUNT] = [0.0, 0.0, 0.0, 0.0, 3.0, 6.0, 6.0, 6.0];
const HANDS: [(f64, f64); EVENT_COUNT] = [
    (2.0, 300.0),
    (-30.0, 285.0),
    (-55.0, 200.0),
    (-40.0, 120.0),
    (-30.0, 230.0),
    (5.0, 300.0),
    (45.0, 220.0),
    (40.0, 110.0),
];
const KNEE_FLEX: [f64; EVENT_COUNT] = [-6.0, -6.0, -8.0, -9.0, -4.0, 2.0, 10.0, 12.0];

fn pose(style: &SwingStyle, event: usize) -> [Point2; JOINT_COUNT] {
    use JointName::*;
    let mut pts = [Point2::new(0.0, 0.0); JOINT_COUNT];
    let mut set = |j: JointName, x: f64, y: f64| pts[j.index()] = Point2::new(x, y);
    let centre = 220.0;
    let stride = 45.0 + 6.0 * style.stance.clamp(-3.0, 3.0);
    set(LAnkle, centre + stride, 450.0);
    set(RAnkle, centre - stride, 450.0);

    let hip_x = centre + HIP_SHIFT[event] + SLIDE_GAIN[event] * style.hip_slide;
    let hip_half = 22.0 * HIP_TURN[event];
    set(LHip, hip_x + hip_half, 290.0);
    set(RHip, hip_x - hip_half, 292.0);

    let flex = KNEE_FLEX[event];
    set(LKnee, centre + 0.5 * stride + hip_half * 0.5 + flex + 6.0, 372.0);
    set(RKnee, centre - 0.5 * stride - hip_half * 0.5 + flex - 6.0, 372.0);

    let sh_x = hip_x + LEAN[event];
    let sh_half = 36.0 * SHOULDER_TURN[event];
    let tilt = (SHOULDER_TILT[event] + 2.5 * style.shoulder_tilt).to_radians();
    let sh_y = 170.0;
    set(LShoulder, sh_x + sh_half * tilt.cos(), sh_y + sh_half * tilt.sin());
    set(RShoulder, sh_x - sh_half * tilt.cos(), sh_y - sh_half * tilt.sin());

    let head_x = sh_x + HEAD[event] + HEAD_GAIN[event] * style.head_drift;
    set(LEar, head_x + 10.0, 118.0);
    set(REar, head_x - 10.0, 118.0);
    set(LEye, head_x + 5.0, 112.0);
    set(REye, head_x - 5.0, 112.0);
    set(Nose, head_x, 120.0);

    let (hx, hy) = HANDS[event];
    let hands = Point2::new(sh_x + hx, hy);
    set(LWrist, hands.x + 3.0, hands.y);
    set(RWrist, hands.x - 3.0, hands.y + 4.0);
    let bend_lead = 6.0 + 3.0 * style.arm_bend.abs().min(3.0) * if event == 3 { 2.0 } else { 1.0 };
    let elbow = |sh: Point2, wr: Point2, bend: f64| {
        let (dx, dy) = (wr.x - sh.x, wr.y - sh.y);
        let len = dx.hypot(dy).max(1.0);
        Point2::new((sh.x + wr.x) / 2.0 - dy / len * bend, (sh.y + wr.y) / 2.0 + dx / len * bend)
    };
    let ls = pts[LShoulder.index()];
    let rs = pts[RShoulder.index()];
    let lw = pts[LWrist.index()];
    let rw = pts[RWrist.index()];
    pts[LElbow.index()] = elbow(ls, lw, bend_lead);
    pts[RElbow.index()] = elbow(rs, rw, -10.0);
    pts
}

fn base_speed(club: ClubType) -> f64 {
    match club {
        ClubType::W1 => 150.0,
        ClubType::W3 => 140.0,
        ClubType::I4 => 128.0,
        ClubType::I5 => 124.0,
        ClubType::I6 => 120.0,
        ClubType::I7 => 116.0,
        ClubType::I8 => 110.0,
        ClubType::I9 => 104.0,
    }
}

fn ball(id: &str, style: &SwingStyle, club: ClubType, rng: &mut impl Rng) -> BallRecord {
    let mut n = |sd: f64| -> f64 { Normal::new(0.0, sd).expect("positive sd").sample(rng) };
    let direction_angle = 7.0 * style.head_drift + 4.0 * (style.hip_slide * style.hip_slide - 1.0) - 1.0 + n(2.5);
    let spin_axis = 9.0 * style.shoulder_tilt.tanh() + 4.0 * style.hip_slide + n(4.0);
    let ball_speed = (base_speed(club) + 6.0 * style.stance - 3.0 * style.arm_bend * style.arm_bend + n(1.5)).max(20.0);
    let distance = (ball_speed * 1.25 + n(3.0)).max(1.0);
    let carry = distance * 0.93;
    let lr_distance_out = distance * (direction_angle + 0.5 * spin_axis).to_radians().sin();
    BallRecord {
        swing_id: id.to_string(),
        club_type: club,
        distance,
        carry,
        lr_distance_out,
        direction_angle,
        spin_axis,
        ball_speed,
    }
}

/// Generates right-handed face-on swings grouped by golfer. Each golfer has
/// a characteristic style; each swing varies around it with joint jitter.
pub fn generate_swings(config: &SwingSynthConfig) -> SyntheticSwings {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let golfers = config.n_golfers.max(1);
    let centres: Vec<SwingStyle> = (0..golfers)
        .map(|_| SwingStyle::sample(&mut rng, &SwingStyle::default(), 0.7))
        .collect();
    let jitter = Normal::new(0.0, config.jitter.max(0.0)).expect("finite jitter");
    let mut out = SyntheticSwings {
        sequences: Vec::with_capacity(config.n_swings),
        balls: Vec::with_capacity(config.n_swings),
    };
    for i in 0..config.n_swings {
        let g = i % golfers;
        let style = SwingStyle::sample(&mut rng, &centres[g], 0.7);
        let scale: f64 = rng.random_range(0.8..1.6);
        let offset = Point2::new(rng.random_range(0.0..200.0), rng.random_range(0.0..80.0));
        let events = std::array::from_fn(|e| {
            let pts = pose(&style, e);
            let triples = std::array::from_fn(|j| {
                let p = pts[j];
                let jx: f64 = if config.jitter > 0.0 { jitter.sample(&mut rng) } else { 0.0 };
                let jy: f64 = if config.jitter > 0.0 { jitter.sample(&mut rng) } else { 0.0 };
                let c: f64 = rng.random_range(0.85..1.0);
                [offset.x + scale * (p.x + jx), offset.y + scale * (p.y + jy), c]
            });
            JointSet::from_triples(&triples)
        });
        let swing_id = format!("g{g:02}-s{i:04}");
        let seq = SwingSequence {
            swing_id: swing_id.clone(),
            golfer_id: format!("g{g:02}"),
            view: View::FaceOn,
            bbox: BBox {
                x: offset.x + scale * 100.0,
                y: offset.y + scale * 80.0,
                width: scale * 240.0,
                height: scale * 400.0,
            },
            events,
        };
        out.balls.push(ball(&swing_id, &style, config.club, &mut rng));
        out.sequences.push(seq);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{assemble, default_schema};
    use crate::metrics::compute_all;
    use crate::pose::normalize_sequence;

    #[test]
    fn swings_yield_finite_features() {
        let cfg = SwingSynthConfig {
            n_swings: 40,
            ..Default::default()
        };
        let data = generate_swings(&cfg);
        let schema = default_schema(View::FaceOn);
        for (seq, ball) in data.sequences.iter().zip(&data.balls) {
            ball.validate().unwrap();
            let n = normalize_sequence(seq).unwrap();
            let fv = assemble(&n.swing_id, &compute_all(&n).unwrap(), &schema).unwrap();
            assert!(fv.values.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SwingSynthConfig {
            n_swings: 5,
            ..Default::default()
        };
        assert_eq!(generate_swings(&cfg), generate_swings(&cfg));
    }
}
