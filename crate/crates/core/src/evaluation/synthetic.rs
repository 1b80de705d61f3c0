use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::EvaluationError;
use crate::models::Task;

/// A planted univariate effect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Linear { slope: f64 },
    Quadratic { scale: f64 },
    /// `amplitude · sin(frequency · x)`
    Sine { amplitude: f64, frequency: f64 },
    /// Logistic ramp of `height` centred at `center` with scale `width`.
    SmoothStep { center: f64, width: f64, height: f64 },
    /// `height · exp(-((x - center) / width)²)`
    Peak { center: f64, width: f64, height: f64 },
    Zero,
}

impl GroundTruth {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            GroundTruth::Linear { slope } => slope * x,
            GroundTruth::Quadratic { scale } => scale * x * x,
            GroundTruth::Sine { amplitude, frequency } => amplitude * (frequency * x).sin(),
            GroundTruth::SmoothStep { center, width, height } => {
                height / (1.0 + (-(x - center) / width).exp())
            }
            GroundTruth::Peak { center, width, height } => {
                let u = (x - center) / width;
                height * (-u * u).exp()
            }
            GroundTruth::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GroundTruth::Zero)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTerm {
    pub name: String,
    pub truth: GroundTruth,
    /// Features are drawn uniformly on `[low, high)`.
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub terms: Vec<SyntheticTerm>,
    pub bias: f64,
    pub noise_std: f64,
    pub task: Task,
    /// Binary labels are `1` where the noiseless sum exceeds this.
    pub threshold: f64,
}

impl SyntheticSpec {
    pub fn regression(truths: &[GroundTruth], noise_std: f64) -> Self {
        Self {
            terms: truths
                .iter()
                .enumerate()
                .map(|(i, &truth)| SyntheticTerm {
                    name: format!("x{i}"),
                    truth,
                    low: -1.0,
                    high: 1.0,
                })
                .collect(),
            bias: 0.0,
            noise_std,
            task: Task::Regression,
            threshold: 0.0,
        }
    }

    /// Binary labels from the sign of the noiseless sum.
    pub fn binary(truths: &[GroundTruth]) -> Self {
        Self {
            task: Task::Binary,
            ..Self::regression(truths, 0.0)
        }
    }

    /// The five-term mix used to check shape recovery: linear, quadratic,
    /// sine, smooth step and an inert feature.
    pub fn shape_recovery() -> Self {
        Self::regression(
            &[
                GroundTruth::Linear { slope: 1.0 },
                GroundTruth::Quadratic { scale: 1.0 },
                GroundTruth::Sine {
                    amplitude: 1.0,
                    frequency: std::f64::consts::PI,
                },
                GroundTruth::SmoothStep {
                    center: 0.0,
                    width: 0.1,
                    height: 1.0,
                },
                GroundTruth::Zero,
            ],
            0.1,
        )
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.name.clone()).collect()
    }

    /// Noiseless `Σ g_i(x_i) + bias`.
    pub fn signal(&self, x: &[f64]) -> f64 {
        self.terms.iter().zip(x).map(|(t, &v)| t.truth.eval(v)).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticData {
    pub spec: SyntheticSpec,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Noiseless signal per row.
    pub signal: Vec<f64>,
}

pub fn generate_synthetic(seed: u64, n: usize, spec: &SyntheticSpec) -> Result<SyntheticData, EvaluationError> {
    if n < 10 {
        return Err(EvaluationError::EmptyDataset { needed: 10, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spec.noise_std.max(0.0)).expect("finite std");
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut signal = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = spec
            .terms
            .iter()
            .map(|t| if t.high > t.low { rng.random_range(t.low..t.high) } else { t.low })
            .collect();
        let s = spec.signal(&row);
        let target = match spec.task {
            Task::Regression => s + if spec.noise_std > 0.0 { noise.sample(&mut rng) } else { 0.0 },
            Task::Binary => {
                if s > spec.threshold {
                    1.0
                } else {
                    0.0
                }
            }
        };
        x.push(row);
        y.push(target);
        signal.push(s);
    }
    Ok(SyntheticData {
        spec: spec.clone(),
        x,
        y,
        signal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let spec = SyntheticSpec::regression(&[GroundTruth::Linear { slope: 2.0 }; 3], 0.5);
        let a = generate_synthetic(3, 10, &spec).unwrap();
        assert_eq!(a.x.len(), 10);
        assert!(a.x.iter().all(|r| r.len() == 3 && r.iter().all(|v| (-1.0..1.0).contains(v))));
        assert_eq!(a.y.len(), 10);
        assert_eq!(a, generate_synthetic(3, 10, &spec).unwrap());
        assert_ne!(a, generate_synthetic(4, 10, &spec).unwrap());
        assert!(generate_synthetic(3, 9, &spec).is_err());
    }

    #[test]
    fn binary_thresholds_noiseless_sum() {
        let spec = SyntheticSpec::binary(&[GroundTruth::Linear { slope: 1.0 }, GroundTruth::Zero]);
        let d = generate_synthetic(1, 200, &spec).unwrap();
        for (row, y) in d.x.iter().zip(&d.y) {
            assert_eq!(*y, if row[0] > 0.0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn truth_values() {
        assert_eq!(GroundTruth::Zero.eval(3.0), 0.0);
        assert_eq!(GroundTruth::Quadratic { scale: 2.0 }.eval(-3.0), 18.0);
        let step = GroundTruth::SmoothStep { center: 1.0, width: 0.2, height: 4.0 };
        assert_eq!(step.eval(1.0), 2.0);
        let peak = GroundTruth::Peak { center: 0.5, width: 0.3, height: 1.0 };
        assert_eq!(peak.eval(0.5), 1.0);
    }
}
