use serde::{Deserialize, Serialize};

use super::FeedbackError;
use crate::models::{AdditiveModel, Task};

pub const DEFAULT_GRID_SIZE: usize = 50;
pub const DEFAULT_BINS: usize = 20;

/// Equal-width histogram of training values over `[edges[0], edges[last]]`.
/// Values outside that range are not counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl DensityHistogram {
    pub fn build(values: &[f64], low: f64, high: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let mut edges: Vec<f64> = (0..=bins)
            .map(|i| low + (high - low) * i as f64 / bins as f64)
            .collect();
        edges[bins] = high;
        let mut hist = Self {
            edges,
            counts: vec![0; bins],
        };
        for &v in values {
            if let Some(b) = hist.bin_of(v) {
                hist.counts[b] += 1;
            }
        }
        hist
    }

    /// Bin holding `x`; the last bin is closed on the right.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let bins = self.counts.len();
        let (low, high) = (self.edges[0], self.edges[bins]);
        if !(x >= low && x <= high) {
            return None;
        }
        let b = ((x - low) / (high - low) * bins as f64).floor() as usize;
        Some(b.min(bins - 1))
    }

    pub fn count_at(&self, x: f64) -> usize {
        self.bin_of(x).map_or(0, |b| self.counts[b])
    }

    /// Centre of the fullest bin (the first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        0.5 * (self.edges[best] + self.edges[best + 1])
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// One shape function sampled on a grid of raw feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCurve {
    pub feature: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub density: DensityHistogram,
}

/// Linear-interpolated percentile of sorted data, `p` in `[0, 100]`.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Samples shape function `index` on `grid_size` evenly spaced points between
/// the 1st and 99th percentile of `column`, the feature's training values.
/// A degenerate range is widened symmetrically so the grid stays increasing.
pub fn extract_curve(
    model: &AdditiveModel,
    index: usize,
    column: &[f64],
    grid_size: usize,
    bins: usize,
) -> Result<ShapeCurve, FeedbackError> {
    if column.is_empty() {
        return Err(FeedbackError::EmptyDataset { needed: 1, got: 0 });
    }
    if grid_size < 2 {
        return Err(FeedbackError::InvalidGrid(grid_size));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut low, mut high) = (percentile(&sorted, 1.0), percentile(&sorted, 99.0));
    if high - low <= 1e-9 * (1.0 + low.abs() + high.abs()) {
        let w = 0.5 * (1e-3 * low.abs()).max(1e-3);
        low -= w;
        high += w;
    }
    let mut xs: Vec<f64> = (0..grid_size)
        .map(|i| low + (high - low) * i as f64 / (grid_size - 1) as f64)
        .collect();
    xs[grid_size - 1] = high;
    let ys = xs
        .iter()
        .map(|&x| model.contribution(index, x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShapeCurve {
        feature: model.feature_names[index].clone(),
        xs,
        ys,
        density: DensityHistogram::build(column, low, high, bins),
    })
}

/// One curve per model feature, with [`DEFAULT_BINS`] density bins.
pub fn extract_curves(
    model: &AdditiveModel,
    train: &[Vec<f64>],
    grid_size: usize,
) -> Result<Vec<ShapeCurve>, FeedbackError> {
    if train.is_empty() {
        return Err(FeedbackError::EmptyDataset { needed: 1, got: 0 });
    }
    let d = model.n_features();
    if let Some(bad) = train.iter().find(|r| r.len() != d) {
        return Err(FeedbackError::DimensionMismatch {
            expected: d,
            got: bad.len(),
        });
    }
    (0..d)
        .map(|i| {
            let column: Vec<f64> = train.iter().map(|r| r[i]).collect();
            extract_curve(model, i, &column, grid_size, DEFAULT_BINS)
        })
        .collect()
}

/// What "better" means for a shape function. Binary models predict the
/// straight class, so both objectives maximize the contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    MaximizeStraightLogit,
    MaximizeOutput,
}

impl Objective {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Binary => Objective::MaximizeStraightLogit,
            Task::Regression => Objective::MaximizeOutput,
        }
    }
}

/// At least 1% of the training samples, and at least one.
pub fn default_density_floor(n_train: usize) -> usize {
    n_train.div_ceil(100).max(1)
}

/// Grid index of the best feasible point: the largest `ys` among grid points
/// whose density bin holds at least `floor` samples. Exact ties go to the
/// point nearest the density mode, then to the smaller value.
pub fn optimal_point(curve: &ShapeCurve, _objective: Objective, floor: usize) -> Result<usize, FeedbackError> {
    let mode = curve.density.mode();
    let mut best: Option<usize> = None;
    for (i, (&x, &y)) in curve.xs.iter().zip(&curve.ys).enumerate() {
        if curve.density.count_at(x) < floor {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let by = curve.ys[b];
                let better = y > by || (y == by && (x - mode).abs() < (curve.xs[b] - mode).abs());
                Some(if better { i } else { b })
            }
        };
    }
    best.ok_or_else(|| FeedbackError::NoFeasibleRegion {
        feature: curve.feature.clone(),
        floor,
    })
}

pub fn optimal_value(curve: &ShapeCurve, objective: Objective, floor: usize) -> Result<f64, FeedbackError> {
    Ok(curve.xs[optimal_point(curve, objective, floor)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Standardizer;
    use crate::models::{Dense, ShapeNet};
    use proptest::prelude::*;

    fn curve(xs: Vec<f64>, ys: Vec<f64>, samples: &[f64]) -> ShapeCurve {
        let (lo, hi) = (xs[0], *xs.last().unwrap());
        ShapeCurve {
            feature: "f".into(),
            density: DensityHistogram::build(samples, lo, hi, 10),
            xs,
            ys,
        }
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn increasing_picks_right_end() {
        let xs = grid(11);
        let c = curve(xs.clone(), xs.iter().map(|x| x * x).collect(), &[]);
        assert_eq!(optimal_value(&c, Objective::MaximizeOutput, 0).unwrap(), 1.0);
    }

    #[test]
    fn u_shape_picks_centre() {
        let xs = grid(11);
        let ys = xs.iter().map(|x| -(x - 0.5f64).abs()).collect();
        let c = curve(xs, ys, &[0.5; 3]);
        assert_eq!(optimal_value(&c, Objective::MaximizeStraightLogit, 0).unwrap(), 0.5);
    }

    #[test]
    fn floor_excludes_empty_bins() {
        let xs = grid(11);
        let ys = xs.clone();
        let c = curve(xs, ys, &[0.15, 0.25, 0.35, 0.45]);
        assert_eq!(optimal_value(&c, Objective::MaximizeOutput, 1).unwrap(), 0.4);
        assert!(matches!(
            optimal_value(&c, Objective::MaximizeOutput, 5),
            Err(FeedbackError::NoFeasibleRegion { .. })
        ));
    }

    #[test]
    fn flat_curve_breaks_ties_at_mode() {
        let c = curve(grid(21), vec![0.0; 21], &[0.72, 0.75, 0.71, 0.2]);
        assert_eq!(optimal_value(&c, Objective::MaximizeOutput, 0).unwrap(), 0.75);
    }

    #[test]
    fn constant_feature_gets_widened_grid() {
        let m = AdditiveModel::from_parts(
            Task::Regression,
            vec![ShapeNet::constant(2.0)],
            0.0,
            Standardizer::identity(1),
            vec!["c".into()],
        );
        let c = extract_curve(&m, 0, &[3.0; 10], 5, 4).unwrap();
        assert!(c.xs.windows(2).all(|w| w[0] < w[1]));
        assert!(c.ys.iter().all(|&y| y == 2.0));
        assert_eq!(c.density.total(), 10);
        assert!(matches!(extract_curve(&m, 0, &[3.0], 1, 4), Err(FeedbackError::InvalidGrid(1))));
    }

    #[test]
    fn planted_peak_is_found() {
        // -softplus(a(x - c)) - softplus(a(c - x)) peaks at c
        let c0 = 0.5;
        let a = 8.0;
        let net = ShapeNet {
            layers: vec![
                Dense {
                    inputs: 1,
                    outputs: 2,
                    weights: vec![a, -a],
                    biases: vec![-a * c0, a * c0],
                },
                Dense {
                    inputs: 2,
                    outputs: 1,
                    weights: vec![-1.0, -1.0],
                    biases: vec![0.0],
                },
            ],
            activation: crate::models::Activation::Softplus,
        };
        let m = AdditiveModel::from_parts(Task::Regression, vec![net], 0.0, Standardizer::identity(1), vec!["p".into()]);
        let column: Vec<f64> = (0..200).map(|i| -1.0 + 2.0 * i as f64 / 199.0).collect();
        let c = extract_curve(&m, 0, &column, 41, 20).unwrap();
        let step = c.xs[1] - c.xs[0];
        let opt = optimal_value(&c, Objective::MaximizeOutput, default_density_floor(200)).unwrap();
        assert!((opt - c0).abs() <= step, "{opt}");
    }

    proptest! {
        #[test]
        fn optimum_meets_floor(
            ys in prop::collection::vec(-5.0f64..5.0, 12),
            samples in prop::collection::vec(0.0f64..1.0, 0..60),
            floor in 0usize..8,
        ) {
            let c = curve(grid(12), ys, &samples);
            match optimal_point(&c, Objective::MaximizeOutput, floor) {
                Ok(i) => {
                    prop_assert!(c.density.count_at(c.xs[i]) >= floor);
                    for (j, &x) in c.xs.iter().enumerate() {
                        if c.density.count_at(x) >= floor {
                            prop_assert!(c.ys[j] <= c.ys[i]);
                        }
                    }
                }
                Err(_) => prop_assert!(c.xs.iter().all(|&x| c.density.count_at(x) < floor)),
            }
        }
    }
}
