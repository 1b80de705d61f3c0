use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swinglens::evaluation::{generate_synthetic, GroundTruth, SyntheticSpec};
use swinglens::features::Standardizer;
use swinglens::models::{
    model_from_json, model_to_json, train_linear, train_nam, train_nam_standardized, Activation, AdditiveNet,
    LinearPipeline, Optimizer, SavedModel, Task, TrainedModel, TrainingConfig,
};

fn small_config(hidden: Vec<usize>, activation: Activation) -> TrainingConfig {
    TrainingConfig {
        hidden_sizes: hidden,
        activation,
        l2_penalty: 1e-2,
        output_penalty: 5e-2,
        ..TrainingConfig::nam()
    }
}

fn spec3(task: Task) -> SyntheticSpec {
    let truths = [
        GroundTruth::Linear { slope: 0.8 },
        GroundTruth::Quadratic { scale: -1.0 },
        GroundTruth::Sine {
            amplitude: 0.6,
            frequency: 2.0,
        },
    ];
    match task {
        Task::Regression => SyntheticSpec::regression(&truths, 0.1),
        Task::Binary => SyntheticSpec::binary(&truths),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn analytic_gradient_matches_central_differences(
        seed in any::<u64>(),
        k in 1usize..4,
        width in 1usize..5,
        depth in 1usize..3,
        tanh in any::<bool>(),
        binary in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let act = if tanh { Activation::Tanh } else { Activation::Softplus };
        let task = if binary { Task::Binary } else { Task::Regression };
        let cfg = small_config(vec![width; depth], act);
        let mut net = AdditiveNet::init(k, &cfg, &mut rng);
        net.bias = rng.random_range(-0.5..0.5);
        let n = 6;
        let columns: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = (0..n)
            .map(|_| if binary { f64::from(rng.random_bool(0.5) as u8) } else { rng.random_range(-1.0..1.0) })
            .collect();
        let (_, grad) = net.loss_and_gradient(&columns, &y, task, &cfg);
        let params = net.params();
        let h = 1e-5;
        for i in 0..params.len() {
            let mut probe = net.clone();
            let mut p = params.clone();
            p[i] += h;
            probe.set_params(&p);
            let up = probe.loss_and_gradient(&columns, &y, task, &cfg).0;
            p[i] = params[i] - h;
            probe.set_params(&p);
            let down = probe.loss_and_gradient(&columns, &y, task, &cfg).0;
            let numeric = (up - down) / (2.0 * h);
            let rel = (grad[i] - numeric).abs() / (grad[i].abs() + numeric.abs()).max(1e-6);
            prop_assert!(rel < 1e-4, "param {i}: analytic {} numeric {numeric}", grad[i]);
        }
    }

    #[test]
    fn additivity_holds_for_random_nets(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = small_config(vec![4, 3], Activation::Softplus);
        let net = AdditiveNet::init(k, &cfg, &mut rng);
        let z: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
        let parts: f64 = net.subnets.iter().zip(&z).map(|(s, &v)| s.eval(v)).sum();
        prop_assert!((net.decision(&z) - parts - net.bias).abs() <= 1e-12);
    }
}

#[test]
fn full_batch_descent_never_increases_loss() {
    for task in [Task::Regression, Task::Binary] {
        let spec = spec3(task);
        let data = generate_synthetic(3, 200, &spec).unwrap();
        let columns: Vec<Vec<f64>> = (0..3).map(|i| data.x.iter().map(|r| r[i]).collect()).collect();
        // plain gradient descent on the whole set at a deliberately small step
        let cfg = TrainingConfig {
            optimizer: Optimizer::Sgd,
            learning_rate: 1e-3,
            batch_size: usize::MAX,
            epochs: 10,
            hidden_sizes: vec![16, 8],
            ..TrainingConfig::nam()
        };
        let (_, losses) = train_nam_standardized(&columns, &data.y, task, &cfg).unwrap();
        assert_eq!(losses.len(), 10);
        for w in losses.windows(2) {
            assert!(w[1] <= w[0], "{task:?}: loss rose {} -> {}", w[0], w[1]);
        }
    }
}

fn rescaled(x: &[Vec<f64>], col: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| {
            let mut r = r.clone();
            r[col] = a * r[col] + b;
            r
        })
        .collect()
}

#[test]
fn power_of_two_rescaling_leaves_predictions_bit_identical() {
    let spec = spec3(Task::Binary);
    let data = generate_synthetic(11, 300, &spec).unwrap();
    let cfg = TrainingConfig {
        epochs: 5,
        hidden_sizes: vec![8, 4],
        ..TrainingConfig::nam()
    };
    let base = train_nam(&data.x, &data.y, Task::Binary, spec.names(), &cfg).unwrap();
    let base_lr = LinearPipeline::fit(&data.x, &data.y, Task::Binary, spec.names(), &TrainingConfig::linear()).unwrap();
    for a in [2.0, 4.0, 0.5] {
        let x2 = rescaled(&data.x, 1, a, 0.0);
        let s1 = Standardizer::fit(&data.x).unwrap();
        let s2 = Standardizer::fit(&x2).unwrap();
        assert_eq!(s1.transform_all(&data.x), s2.transform_all(&x2));
        let m = train_nam(&x2, &data.y, Task::Binary, spec.names(), &cfg).unwrap();
        let lr = LinearPipeline::fit(&x2, &data.y, Task::Binary, spec.names(), &TrainingConfig::linear()).unwrap();
        for (r1, r2) in data.x.iter().zip(&x2) {
            assert_eq!(base.predict(r1).unwrap().to_bits(), m.predict(r2).unwrap().to_bits());
            assert_eq!(base_lr.predict(r1).unwrap().to_bits(), lr.predict(r2).unwrap().to_bits());
        }
    }
}

#[test]
fn general_affine_rescaling_leaves_predictions_nearly_identical() {
    let spec = spec3(Task::Regression);
    let data = generate_synthetic(12, 300, &spec).unwrap();
    let cfg = TrainingConfig {
        epochs: 5,
        hidden_sizes: vec![8, 4],
        ..TrainingConfig::nam()
    };
    let base = train_nam(&data.x, &data.y, Task::Regression, spec.names(), &cfg).unwrap();
    let x2 = rescaled(&data.x, 0, 3.7, -12.5);
    let m = train_nam(&x2, &data.y, Task::Regression, spec.names(), &cfg).unwrap();
    for (r1, r2) in data.x.iter().zip(&x2) {
        assert!((base.predict(r1).unwrap() - m.predict(r2).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn saved_models_predict_identically_after_reload() {
    let spec = spec3(Task::Binary);
    let data = generate_synthetic(13, 200, &spec).unwrap();
    let cfg = TrainingConfig {
        epochs: 5,
        hidden_sizes: vec![8, 4],
        ..TrainingConfig::nam()
    };
    let nam = TrainedModel::Additive(train_nam(&data.x, &data.y, Task::Binary, spec.names(), &cfg).unwrap());
    let lr = TrainedModel::Linear(
        LinearPipeline::fit(&data.x, &data.y, Task::Binary, spec.names(), &TrainingConfig::linear()).unwrap(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let probes: Vec<Vec<f64>> = (0..100).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    for model in [nam, lr] {
        let saved = SavedModel { target: None, model };
        let back = model_from_json(&model_to_json(&saved)).unwrap();
        assert_eq!(back, saved);
        for p in &probes {
            assert_eq!(saved.model.predict(p).unwrap().to_bits(), back.model.predict(p).unwrap().to_bits());
        }
    }
}

#[test]
fn changing_one_feature_changes_only_its_contribution() {
    let spec = spec3(Task::Regression);
    let data = generate_synthetic(14, 300, &spec).unwrap();
    let cfg = TrainingConfig {
        epochs: 5,
        hidden_sizes: vec![8, 4],
        ..TrainingConfig::nam()
    };
    let m = train_nam(&data.x, &data.y, Task::Regression, spec.names(), &cfg).unwrap();
    let x = vec![0.1, -0.4, 0.7];
    let base = m.contributions(&x).unwrap();
    for i in 0..3 {
        let mut moved = x.clone();
        moved[i] += 0.5;
        let c = m.contributions(&moved).unwrap();
        for j in 0..3 {
            if j != i {
                assert_eq!(c[j], base[j]);
            }
        }
        let delta = m.decision(&moved).unwrap() - m.decision(&x).unwrap();
        assert!((delta - (c[i] - base[i])).abs() < 1e-12);
    }
}

#[test]
fn ridge_free_linear_fit_is_exact_on_noiseless_data() {
    let truths: Vec<GroundTruth> = [0.5, -1.25, 2.0].iter().map(|&s| GroundTruth::Linear { slope: s }).collect();
    let data = generate_synthetic(15, 50, &SyntheticSpec::regression(&truths, 0.0)).unwrap();
    let cfg = TrainingConfig {
        l2_penalty: 0.0,
        ..TrainingConfig::linear()
    };
    let m = train_linear(&data.x, &data.y, Task::Regression, &cfg).unwrap();
    for (w, t) in m.weights.iter().zip([0.5, -1.25, 2.0]) {
        assert!((w - t).abs() < 1e-9);
    }
    assert!(m.bias.abs() < 1e-9);
}
