use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::curves::{optimal_value, Objective, ShapeCurve};
use super::FeedbackError;
use crate::features::Target;
use crate::models::AdditiveModel;
use crate::pose::BallRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackItem {
    pub feature: String,
    pub current: f64,
    pub optimal: f64,
    /// `f(optimal) - f(current)` in model-output units.
    pub effect_delta: f64,
    pub rank: usize,
}

impl FeedbackItem {
    pub fn advice(&self) -> String {
        let verb = if self.optimal > self.current {
            "increase"
        } else if self.optimal < self.current {
            "decrease"
        } else {
            "keep"
        };
        if verb == "keep" {
            format!("keep {} at {:.2}", self.feature, self.current)
        } else {
            format!("{verb} {} from {:.2} toward {:.2}", self.feature, self.current, self.optimal)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub golfer_id: String,
    pub target: Target,
    pub items: Vec<FeedbackItem>,
    pub n_swings: usize,
}

impl FeedbackReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Feedback for golfer {} on {} ({} swings)", self.golfer_id, self.target, self.n_swings);
        let unit = match self.target {
            Target::Speed => "ball-speed units",
            _ => "straight-class logit",
        };
        let _ = writeln!(s, "Effects are in {unit}; positive means closer to the goal.");
        for item in &self.items {
            let _ = writeln!(s, "{:>3}. {}  (effect {:+.4})", item.rank, item.advice(), item.effect_delta);
        }
        let _ = writeln!(s, "Each feature is scored on its own; correlations between features are ignored.");
        s
    }
}

/// Order-independent column mean: values are summed in sorted order.
fn column_mean(rows: &[Vec<f64>], i: usize) -> f64 {
    let mut col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
    col.sort_by(f64::total_cmp);
    col.iter().sum::<f64>() / col.len() as f64
}

/// Ranks features by how much moving the golfer's mean value to the
/// curve's optimum changes that feature's contribution. Features whose
/// curve has no grid point meeting the density floor are left out.
pub fn generate_feedback(
    model: &AdditiveModel,
    curves: &[ShapeCurve],
    golfer_id: &str,
    swings: &[Vec<f64>],
    target: Target,
    k: usize,
    density_floor: usize,
) -> Result<FeedbackReport, FeedbackError> {
    if swings.is_empty() {
        return Err(FeedbackError::EmptyDataset { needed: 1, got: 0 });
    }
    let d = model.n_features();
    if curves.len() != d {
        return Err(FeedbackError::DimensionMismatch {
            expected: d,
            got: curves.len(),
        });
    }
    if let Some(bad) = swings.iter().find(|r| r.len() != d) {
        return Err(FeedbackError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let objective = Objective::for_task(model.task);
    let mut items = Vec::with_capacity(d);
    for (i, curve) in curves.iter().enumerate() {
        let optimal = match optimal_value(curve, objective, density_floor) {
            Ok(v) => v,
            Err(FeedbackError::NoFeasibleRegion { .. }) => continue,
            Err(e) => return Err(e),
        };
        let current = column_mean(swings, i);
        let effect_delta = model.contribution(i, optimal)? - model.contribution(i, current)?;
        items.push(FeedbackItem {
            feature: curve.feature.clone(),
            current,
            optimal,
            effect_delta,
            rank: 0,
        });
    }
    items.sort_by(|a, b| {
        b.effect_delta
            .abs()
            .total_cmp(&a.effect_delta.abs())
            .then_with(|| a.feature.cmp(&b.feature))
    });
    items.truncate(k);
    for (r, item) in items.iter_mut().enumerate() {
        item.rank = r + 1;
    }
    Ok(FeedbackReport {
        golfer_id: golfer_id.to_string(),
        target,
        items,
        n_swings: swings.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureShift {
    pub feature: String,
    pub before: f64,
    pub after: f64,
    /// `after - before`
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionComparison {
    pub features: Vec<FeatureShift>,
    pub before_lr_distance_std: f64,
    pub after_lr_distance_std: f64,
    pub before_mean_abs_direction: f64,
    pub after_mean_abs_direction: f64,
    pub n_before: usize,
    pub n_after: usize,
}

fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

fn mean_abs_direction(balls: &[BallRecord]) -> f64 {
    balls.iter().map(|b| b.direction_angle.abs()).sum::<f64>() / balls.len() as f64
}

/// Per-feature mean shifts and ball dispersion of two sessions. Reports
/// differences only.
pub fn compare_sessions(
    names: &[String],
    before_features: &[Vec<f64>],
    before_balls: &[BallRecord],
    after_features: &[Vec<f64>],
    after_balls: &[BallRecord],
) -> Result<SessionComparison, FeedbackError> {
    for side in [before_features.len(), before_balls.len(), after_features.len(), after_balls.len()] {
        if side == 0 {
            return Err(FeedbackError::EmptyDataset { needed: 1, got: 0 });
        }
    }
    let d = names.len();
    if let Some(bad) = before_features.iter().chain(after_features).find(|r| r.len() != d) {
        return Err(FeedbackError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    let features = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let before = column_mean(before_features, i);
            let after = column_mean(after_features, i);
            FeatureShift {
                feature: name.clone(),
                before,
                after,
                shift: after - before,
            }
        })
        .collect();
    let lr = |balls: &[BallRecord]| population_std(&balls.iter().map(|b| b.lr_distance_out).collect::<Vec<_>>());
    Ok(SessionComparison {
        features,
        before_lr_distance_std: lr(before_balls),
        after_lr_distance_std: lr(after_balls),
        before_mean_abs_direction: mean_abs_direction(before_balls),
        after_mean_abs_direction: mean_abs_direction(after_balls),
        n_before: before_features.len(),
        n_after: after_features.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::extract_curves;
    use crate::features::Standardizer;
    use crate::models::{Dense, ShapeNet, Task};
    use crate::pose::ClubType;

    // f(x) = -softplus(4(x - c)) - softplus(4(c - x)), peaked at c
    fn peak(c: f64) -> ShapeNet {
        ShapeNet {
            layers: vec![
                Dense {
                    inputs: 1,
                    outputs: 2,
                    weights: vec![4.0, -4.0],
                    biases: vec![-4.0 * c, 4.0 * c],
                },
                Dense {
                    inputs: 2,
                    outputs: 1,
                    weights: vec![-1.0, -1.0],
                    biases: vec![0.0],
                },
            ],
            activation: crate::models::Activation::Softplus,
        }
    }

    fn model() -> AdditiveModel {
        AdditiveModel::from_parts(
            Task::Regression,
            vec![peak(0.0), peak(0.2), peak(-0.3)],
            1.0,
            Standardizer::identity(3),
            vec!["a".into(), "b".into(), "c".into()],
        )
    }

    fn train() -> Vec<Vec<f64>> {
        (0..300)
            .map(|i| {
                let t = -1.0 + 2.0 * i as f64 / 299.0;
                vec![t, -t, t * 0.9]
            })
            .collect()
    }

    #[test]
    fn golfer_at_optimum_gets_zero_deltas() {
        let m = model();
        let curves = extract_curves(&m, &train(), 41).unwrap();
        let opts: Vec<f64> = curves
            .iter()
            .map(|c| optimal_value(c, Objective::MaximizeOutput, 3).unwrap())
            .collect();
        let r = generate_feedback(&m, &curves, "g", std::slice::from_ref(&opts), Target::Speed, 3, 3).unwrap();
        assert_eq!(r.items.len(), 3);
        assert!(r.items.iter().all(|i| i.effect_delta == 0.0));
        let names: Vec<&str> = r.items.iter().map(|i| i.feature.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
    }

    #[test]
    fn displaced_feature_ranks_first_and_k_truncates() {
        let m = model();
        let curves = extract_curves(&m, &train(), 41).unwrap();
        let mut golfer: Vec<f64> = curves
            .iter()
            .map(|c| optimal_value(c, Objective::MaximizeOutput, 3).unwrap())
            .collect();
        golfer[1] += 0.6;
        let r = generate_feedback(&m, &curves, "g", &[golfer.clone(), golfer], Target::Speed, 2, 3).unwrap();
        assert_eq!(r.items.len(), 2);
        assert_eq!(r.items[0].feature, "b");
        assert!(r.items[0].advice().starts_with("decrease b from"));
        assert_eq!(r.n_swings, 2);
    }

    #[test]
    fn swing_order_does_not_matter() {
        let m = model();
        let curves = extract_curves(&m, &train(), 25).unwrap();
        let swings: Vec<Vec<f64>> = (0..7).map(|i| vec![0.1 * i as f64, 0.3, -0.01 * i as f64]).collect();
        let mut rev = swings.clone();
        rev.reverse();
        assert_eq!(
            generate_feedback(&m, &curves, "g", &swings, Target::Speed, 3, 1).unwrap(),
            generate_feedback(&m, &curves, "g", &rev, Target::Speed, 3, 1).unwrap()
        );
    }

    fn ball(lr: f64, dir: f64) -> BallRecord {
        BallRecord {
            swing_id: "s".into(),
            club_type: ClubType::I7,
            distance: 150.0,
            carry: 140.0,
            lr_distance_out: lr,
            direction_angle: dir,
            spin_axis: 0.0,
            ball_speed: 110.0,
        }
    }

    #[test]
    fn session_shifts() {
        let names = vec!["2-HEAD-LOC".to_string(), "5-SHOULDER-ANGLE".to_string()];
        let before = vec![vec![-1.07, 27.07]];
        let after = vec![vec![-0.90, 23.55]];
        let balls_b = [ball(-10.0, -8.0), ball(10.0, 4.0)];
        let balls_a = [ball(-2.0, -1.0), ball(2.0, 1.0)];
        let c = compare_sessions(&names, &before, &balls_b, &after, &balls_a).unwrap();
        assert!((c.features[0].shift - 0.17).abs() < 1e-12);
        assert!((c.features[1].shift + 3.52).abs() < 1e-12);
        assert_eq!(c.before_lr_distance_std, 10.0);
        assert_eq!(c.after_lr_distance_std, 2.0);
        assert_eq!(c.before_mean_abs_direction, 6.0);
        assert_eq!(c.after_mean_abs_direction, 1.0);

        let same = compare_sessions(&names, &before, &balls_b, &before, &balls_b).unwrap();
        assert!(same.features.iter().all(|f| f.shift == 0.0));
        assert!(compare_sessions(&names, &[], &balls_b, &after, &balls_a).is_err());
    }
}
