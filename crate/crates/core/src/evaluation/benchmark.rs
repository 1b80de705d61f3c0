use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{accuracy, auc, mse, EvalReport, EvaluationError};
use crate::features::{assemble, FeatureMatrix, FeatureSchema, LabelPolicy, Target};
use crate::metrics::compute_all;
use crate::models::{train_nam, LinearPipeline, Task, TrainedModel, TrainingConfig};
use crate::pose::{normalize_sequence, split_indices, BallRecord, PairedShot};

/// 739 training shots out of 924.
pub const DEFAULT_TRAIN_FRACTION: f64 = 739.0 / 924.0;

/// Feature rows joined to their ball records.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub balls: Vec<BallRecord>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn targets(&self, target: Target, policy: &LabelPolicy) -> Vec<f64> {
        self.balls.iter().map(|b| target.value(b, policy)).collect()
    }

    fn sorted_by_id(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        Self {
            names: self.names.clone(),
            ids: order.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
            balls: order.iter().map(|&i| self.balls[i].clone()).collect(),
        }
    }
}

/// Normalizes each shot's pose, computes its metrics and selects the schema's features.
pub fn dataset_from_shots(shots: &[PairedShot], schema: &FeatureSchema) -> Result<LabeledDataset, EvaluationError> {
    let mut data = LabeledDataset {
        names: schema.names(),
        ids: Vec::with_capacity(shots.len()),
        rows: Vec::with_capacity(shots.len()),
        balls: Vec::with_capacity(shots.len()),
    };
    for shot in shots {
        let seq = normalize_sequence(&shot.sequence)?;
        let values = compute_all(&seq)?;
        let fv = assemble(&seq.swing_id, &values, schema)?;
        data.ids.push(fv.swing_id);
        data.rows.push(fv.values);
        data.balls.push(shot.ball.clone());
    }
    Ok(data)
}

/// Joins feature rows to ball records by swing id, in feature-row order.
/// Returns the dataset and the ids of feature rows without a ball record.
pub fn join_features(matrix: &FeatureMatrix, balls: &[BallRecord]) -> (LabeledDataset, Vec<String>) {
    let by_id: HashMap<&str, &BallRecord> = balls.iter().map(|b| (b.swing_id.as_str(), b)).collect();
    let mut data = LabeledDataset {
        names: matrix.names.clone(),
        ids: Vec::new(),
        rows: Vec::new(),
        balls: Vec::new(),
    };
    let mut unmatched = Vec::new();
    for row in &matrix.rows {
        match by_id.get(row.swing_id.as_str()) {
            Some(ball) => {
                data.ids.push(row.swing_id.clone());
                data.rows.push(row.values.clone());
                data.balls.push((*ball).clone());
            }
            None => unmatched.push(row.swing_id.clone()),
        }
    }
    (data, unmatched)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "LR")]
    Linear,
    #[serde(rename = "NAM")]
    Additive,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 2] = [ModelFamily::Linear, ModelFamily::Additive];

    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::Linear => "LR",
            ModelFamily::Additive => "NAM",
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "linear" => Ok(ModelFamily::Linear),
            "nam" | "additive" => Ok(ModelFamily::Additive),
            _ => Err(format!("unknown model `{s}` (expected lr or nam)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub train_fraction: f64,
    pub seed: u64,
    pub policy: LabelPolicy,
    pub linear: TrainingConfig,
    pub nam: TrainingConfig,
    pub targets: Vec<Target>,
    pub families: Vec<ModelFamily>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 42,
            policy: LabelPolicy::default(),
            linear: TrainingConfig::linear(),
            nam: TrainingConfig::nam(),
            targets: Target::ALL.to_vec(),
            families: ModelFamily::ALL.to_vec(),
        }
    }
}

impl BenchmarkConfig {
    fn training_config(&self, family: ModelFamily) -> TrainingConfig {
        let mut cfg = match family {
            ModelFamily::Linear => self.linear.clone(),
            ModelFamily::Additive => self.nam.clone(),
        };
        cfg.seed = self.seed;
        cfg
    }
}

/// A (target, model) cell that could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRun {
    pub task: Target,
    pub model: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutcome {
    pub reports: Vec<EvalReport>,
    pub skipped: Vec<SkippedRun>,
}

impl BenchmarkOutcome {
    /// Pretty-printed JSON with a trailing newline; byte-stable for a given outcome.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("benchmark outcome serializes");
        s.push('\n');
        s
    }
}

/// Fits one model family for one target on the given rows.
pub fn fit_target(
    rows: &[Vec<f64>],
    y: &[f64],
    names: &[String],
    target: Target,
    family: ModelFamily,
    config: &TrainingConfig,
) -> Result<TrainedModel, EvaluationError> {
    let task = target.task();
    Ok(match family {
        ModelFamily::Linear => TrainedModel::Linear(LinearPipeline::fit(rows, y, task, names.to_vec(), config)?),
        ModelFamily::Additive => TrainedModel::Additive(train_nam(rows, y, task, names.to_vec(), config)?),
    })
}

fn single_class(y: &[f64]) -> bool {
    y.iter().all(|&v| v == y[0])
}

enum Cell {
    Report(EvalReport),
    Skipped(SkippedRun),
}

struct Split<'a> {
    names: &'a [String],
    train_x: Vec<Vec<f64>>,
    test_x: Vec<Vec<f64>>,
    train_balls: Vec<BallRecord>,
    test_balls: Vec<BallRecord>,
}

fn run_cell(split: &Split<'_>, target: Target, family: ModelFamily, cfg: &BenchmarkConfig) -> Result<Cell, EvaluationError> {
    let y_train: Vec<f64> = split.train_balls.iter().map(|b| target.value(b, &cfg.policy)).collect();
    let y_test: Vec<f64> = split.test_balls.iter().map(|b| target.value(b, &cfg.policy)).collect();
    let skip = |reason: &str| {
        Ok(Cell::Skipped(SkippedRun {
            task: target,
            model: family.name().to_string(),
            reason: reason.to_string(),
        }))
    };
    if target.task() == Task::Binary {
        if single_class(&y_train) {
            return skip("DegenerateLabels: training split holds a single class");
        }
        if single_class(&y_test) {
            return skip("DegenerateLabels: test split holds a single class");
        }
    }
    let model = fit_target(&split.train_x, &y_train, split.names, target, family, &cfg.training_config(family))?;
    let preds = split
        .test_x
        .iter()
        .map(|r| model.predict(r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = EvalReport {
        task: target,
        model: family.name().to_string(),
        accuracy: None,
        auc: None,
        mse: None,
        n_train: split.train_x.len(),
        n_test: split.test_x.len(),
        seed: cfg.seed,
    };
    match target.task() {
        Task::Binary => {
            report.accuracy = Some(accuracy(&preds, &y_test)?);
            report.auc = Some(auc(&preds, &y_test)?);
        }
        Task::Regression => report.mse = Some(mse(&preds, &y_test)?),
    }
    Ok(Cell::Report(report))
}

/// Seeded single train/test split, then every (target, model) cell is
/// trained on the training part and scored on the held-out part. Rows are
/// ordered by swing id first, so input order does not matter. Reports come
/// back target-major in the configured order.
pub fn benchmark(data: &LabeledDataset, config: &BenchmarkConfig) -> Result<BenchmarkOutcome, EvaluationError> {
    if data.len() < 10 {
        return Err(EvaluationError::EmptyDataset {
            needed: 10,
            got: data.len(),
        });
    }
    let data = data.sorted_by_id();
    let (train, test) = split_indices(data.len(), config.train_fraction, config.seed)?;
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<BallRecord>) {
        (
            idx.iter().map(|&i| data.rows[i].clone()).collect(),
            idx.iter().map(|&i| data.balls[i].clone()).collect(),
        )
    };
    let (train_x, train_balls) = pick(&train);
    let (test_x, test_balls) = pick(&test);
    let split = Split {
        names: &data.names,
        train_x,
        test_x,
        train_balls,
        test_balls,
    };
    let cells: Vec<(Target, ModelFamily)> = config
        .targets
        .iter()
        .flat_map(|&t| config.families.iter().map(move |&f| (t, f)))
        .collect();
    let results = run_cells(&split, &cells, config);
    let mut outcome = BenchmarkOutcome {
        reports: Vec::new(),
        skipped: Vec::new(),
    };
    for result in results {
        match result? {
            Cell::Report(r) => outcome.reports.push(r),
            Cell::Skipped(s) => outcome.skipped.push(s),
        }
    }
    Ok(outcome)
}

#[cfg(not(target_arch = "wasm32"))]
fn run_cells(split: &Split<'_>, cells: &[(Target, ModelFamily)], cfg: &BenchmarkConfig) -> Vec<Result<Cell, EvaluationError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&(t, f)| scope.spawn(move || run_cell(split, t, f, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("benchmark worker panicked"))
            .collect()
    })
}

#[cfg(target_arch = "wasm32")]
fn run_cells(split: &Split<'_>, cells: &[(Target, ModelFamily)], cfg: &BenchmarkConfig) -> Vec<Result<Cell, EvaluationError>> {
    cells.iter().map(|&(t, f)| run_cell(split, t, f, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::ClubType;

    fn ball(id: &str, dir: f64, spin: f64, speed: f64) -> BallRecord {
        BallRecord {
            swing_id: id.to_string(),
            club_type: ClubType::I7,
            distance: 150.0,
            carry: 140.0,
            lr_distance_out: dir,
            direction_angle: dir,
            spin_axis: spin,
            ball_speed: speed,
        }
    }

    fn toy(n: usize) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let a = ((i * 37) % 23) as f64 / 23.0 - 0.5;
                let b = ((i * 11) % 17) as f64 / 17.0;
                vec![a, b]
            })
            .collect();
        let balls = rows
            .iter()
            .enumerate()
            .map(|(i, r)| ball(&format!("s{i:03}"), 20.0 * r[0], -25.0 * r[0] + 3.0, 120.0 + 10.0 * r[1]))
            .collect();
        LabeledDataset {
            names: vec!["a".into(), "b".into()],
            ids: (0..n).map(|i| format!("s{i:03}")).collect(),
            rows,
            balls,
        }
    }

    fn quick() -> BenchmarkConfig {
        let mut cfg = BenchmarkConfig::default();
        cfg.nam.hidden_sizes = vec![8];
        cfg.nam.epochs = 5;
        cfg
    }

    #[test]
    fn six_reports_and_fields() {
        let out = benchmark(&toy(60), &quick()).unwrap();
        assert_eq!(out.reports.len(), 6);
        assert!(out.skipped.is_empty());
        for r in &out.reports {
            assert_eq!(r.n_train + r.n_test, 60);
            match r.task {
                Target::Speed => assert!(r.mse.is_some() && r.auc.is_none() && r.accuracy.is_none()),
                _ => assert!(r.mse.is_none() && r.auc.is_some() && r.accuracy.is_some()),
            }
        }
    }

    #[test]
    fn permuted_input_gives_identical_reports() {
        let data = toy(40);
        let mut rev = data.clone();
        rev.ids.reverse();
        rev.rows.reverse();
        rev.balls.reverse();
        assert_eq!(benchmark(&data, &quick()).unwrap(), benchmark(&rev, &quick()).unwrap());
    }

    #[test]
    fn single_class_is_skipped() {
        let mut data = toy(30);
        for b in &mut data.balls {
            b.direction_angle = 0.0;
            b.spin_axis = 0.0;
        }
        let out = benchmark(&data, &quick()).unwrap();
        assert_eq!(out.reports.len(), 2);
        assert_eq!(out.skipped.len(), 4);
        assert!(out.skipped.iter().all(|s| s.reason.starts_with("DegenerateLabels")));
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            benchmark(&toy(9), &quick()),
            Err(EvaluationError::EmptyDataset { needed: 10, got: 9 })
        ));
    }
}
