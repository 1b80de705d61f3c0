use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_rows, sigmoid, softplus, Activation, ModelError, Optimizer, Task, TrainingConfig};
use crate::features::{fingerprint, Standardizer};

/// Fully connected layer, weights stored row-major as `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// A scalar-to-scalar feed-forward network: one shape function of the
/// additive model. Hidden layers use `activation`, the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeNet {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

#[derive(Default)]
struct NetCache {
    // acts[0] is the input batch, acts[l + 1] the output of layer l
    acts: Vec<Vec<f64>>,
    // pre-activations of hidden layers
    pre: Vec<Vec<f64>>,
}

impl ShapeNet {
    fn widths(hidden: &[usize]) -> Vec<usize> {
        let mut w = vec![1];
        w.extend_from_slice(hidden);
        w.push(1);
        w
    }

    /// Random initialization. The first layer draws slopes and offsets from
    /// `U(-2, 2)` so the ramp kinks spread across the standardized input
    /// range; deeper layers use Glorot-uniform weights and zero biases.
    pub fn init(hidden: &[usize], activation: Activation, rng: &mut impl Rng) -> Self {
        let widths = Self::widths(hidden);
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (inputs, outputs) = (w[0], w[1]);
                let mut layer = Dense::zeros(inputs, outputs);
                if l == 0 && widths.len() > 2 {
                    for v in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                        *v = rng.random_range(-2.0..2.0);
                    }
                } else {
                    let limit = (6.0 / (inputs + outputs) as f64).sqrt();
                    for v in layer.weights.iter_mut() {
                        *v = rng.random_range(-limit..limit);
                    }
                }
                layer
            })
            .collect();
        Self { layers, activation }
    }

    pub fn zeros(hidden: &[usize], activation: Activation) -> Self {
        let layers = Self::widths(hidden)
            .windows(2)
            .map(|w| Dense::zeros(w[0], w[1]))
            .collect();
        Self { layers, activation }
    }

    /// A network that outputs `value` everywhere.
    pub fn constant(value: f64) -> Self {
        let mut layer = Dense::zeros(1, 1);
        layer.biases[0] = value;
        Self {
            layers: vec![layer],
            activation: Activation::Softplus,
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut cur = vec![x];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut next = layer.biases.clone();
            for (k, out) in next.iter_mut().enumerate() {
                let row = &layer.weights[k * layer.inputs..(k + 1) * layer.inputs];
                *out += row.iter().zip(&cur).map(|(w, a)| w * a).sum::<f64>();
                if l != last {
                    *out = self.activation.apply(*out);
                }
            }
            cur = next;
        }
        cur[0]
    }

    fn forward_batch(&self, xs: &[f64], cache: &mut NetCache) {
        let batch = xs.len();
        let last = self.layers.len() - 1;
        cache.acts.resize_with(self.layers.len() + 1, Vec::new);
        cache.pre.resize_with(last, Vec::new);
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(xs);
        for (l, layer) in self.layers.iter().enumerate() {
            let (i_w, o_w) = (layer.inputs, layer.outputs);
            let (before, after) = cache.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            out.clear();
            out.resize(batch * o_w, 0.0);
            for b in 0..batch {
                let a_in = &input[b * i_w..(b + 1) * i_w];
                for k in 0..o_w {
                    let row = &layer.weights[k * i_w..(k + 1) * i_w];
                    let mut z = layer.biases[k];
                    for (w, a) in row.iter().zip(a_in) {
                        z += w * a;
                    }
                    out[b * o_w + k] = z;
                }
            }
            if l != last {
                let pre = &mut cache.pre[l];
                pre.clear();
                pre.extend_from_slice(out);
                for v in out.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
        }
    }

    /// Accumulates parameter gradients into `grad` (this net's slice of the
    /// flat gradient) given `d_out`, the loss derivative per batch output.
    fn backward_batch(&self, cache: &NetCache, d_out: &[f64], grad: &mut [f64]) {
        let batch = d_out.len();
        let mut delta = d_out.to_vec();
        let mut offsets = Vec::with_capacity(self.layers.len());
        let mut off = 0;
        for layer in &self.layers {
            offsets.push(off);
            off += layer.param_count();
        }
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let (i_w, o_w) = (layer.inputs, layer.outputs);
            let a_in = &cache.acts[l];
            let (gw, gb) = grad[offsets[l]..offsets[l] + layer.param_count()].split_at_mut(i_w * o_w);
            for b in 0..batch {
                let d = &delta[b * o_w..(b + 1) * o_w];
                let a = &a_in[b * i_w..(b + 1) * i_w];
                for k in 0..o_w {
                    let dk = d[k];
                    if dk == 0.0 {
                        continue;
                    }
                    gb[k] += dk;
                    let row = &mut gw[k * i_w..(k + 1) * i_w];
                    for (g, av) in row.iter_mut().zip(a) {
                        *g += dk * av;
                    }
                }
            }
            if l == 0 {
                break;
            }
            let pre = &cache.pre[l - 1];
            let mut next = vec![0.0; batch * i_w];
            for b in 0..batch {
                let d = &delta[b * o_w..(b + 1) * o_w];
                let nd = &mut next[b * i_w..(b + 1) * i_w];
                for k in 0..o_w {
                    let dk = d[k];
                    if dk == 0.0 {
                        continue;
                    }
                    let row = &layer.weights[k * i_w..(k + 1) * i_w];
                    for (n, w) in nd.iter_mut().zip(row) {
                        *n += dk * w;
                    }
                }
                for j in 0..i_w {
                    let idx = b * i_w + j;
                    nd[j] *= self.activation.derivative(pre[idx], a_in[idx]);
                }
            }
            delta = next;
        }
    }

    fn visit_params(&self, f: &mut impl FnMut(f64)) {
        for layer in &self.layers {
            layer.weights.iter().chain(&layer.biases).for_each(|&v| f(v));
        }
    }

    fn visit_params_mut(&mut self, f: &mut impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            layer.weights.iter_mut().chain(layer.biases.iter_mut()).for_each(&mut *f);
        }
    }

    fn weight_norm_sq(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| &l.weights)
            .map(|w| w * w)
            .sum()
    }

    fn add_weight_decay(&self, l2: f64, grad: &mut [f64]) {
        let mut off = 0;
        for layer in &self.layers {
            for (g, w) in grad[off..off + layer.weights.len()].iter_mut().zip(&layer.weights) {
                *g += 2.0 * l2 * w;
            }
            off += layer.param_count();
        }
    }
}

/// The trainable form of the additive model operating on standardized inputs:
/// `s(z) = Σ_i net_i(z_i) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveNet {
    pub subnets: Vec<ShapeNet>,
    pub bias: f64,
}

impl AdditiveNet {
    pub fn init(features: usize, config: &TrainingConfig, rng: &mut impl Rng) -> Self {
        let subnets = (0..features)
            .map(|_| ShapeNet::init(&config.hidden_sizes, config.activation, rng))
            .collect();
        Self { subnets, bias: 0.0 }
    }

    pub fn param_count(&self) -> usize {
        self.subnets.iter().map(ShapeNet::param_count).sum::<usize>() + 1
    }

    /// Parameters flattened as: each subnet's layers (weights, then biases), then the bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for net in &self.subnets {
            net.visit_params(&mut |v| out.push(v));
        }
        out.push(self.bias);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count(), "parameter count");
        let mut it = params.iter();
        for net in &mut self.subnets {
            net.visit_params_mut(&mut |v| *v = *it.next().expect("sized"));
        }
        self.bias = *it.next().expect("sized");
    }

    fn visit_params_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        for net in &mut self.subnets {
            net.visit_params_mut(&mut f);
        }
        f(&mut self.bias);
    }

    pub fn decision(&self, z: &[f64]) -> f64 {
        self.subnets.iter().zip(z).map(|(n, &v)| n.eval(v)).sum::<f64>() + self.bias
    }

    /// Total training objective and its gradient (flat, in [`Self::params`] order).
    ///
    /// `columns[i]` holds the standardized values of feature `i` for every
    /// sample in the batch. The objective is the mean data loss (squared error
    /// or logistic) plus `output_penalty · mean f_i²` over samples and
    /// features plus `l2_penalty · Σ w²` over all subnet weights.
    pub fn loss_and_gradient(
        &self,
        columns: &[Vec<f64>],
        y: &[f64],
        task: Task,
        config: &TrainingConfig,
    ) -> (f64, Vec<f64>) {
        let mut caches: Vec<NetCache> = (0..self.subnets.len()).map(|_| NetCache::default()).collect();
        self.loss_and_gradient_with(columns, y, task, config, &mut caches)
    }

    fn loss_and_gradient_with(
        &self,
        columns: &[Vec<f64>],
        y: &[f64],
        task: Task,
        config: &TrainingConfig,
        caches: &mut [NetCache],
    ) -> (f64, Vec<f64>) {
        let batch = y.len();
        let n = batch as f64;
        let k = self.subnets.len().max(1) as f64;
        let mut scores = vec![self.bias; batch];
        let mut out_sq = 0.0;
        for ((net, col), cache) in self.subnets.iter().zip(columns).zip(caches.iter_mut()) {
            net.forward_batch(col, cache);
            let out = cache.acts.last().expect("forward ran");
            for (s, f) in scores.iter_mut().zip(out) {
                *s += f;
                out_sq += f * f;
            }
        }
        let mut data_loss = 0.0;
        let d_score: Vec<f64> = scores
            .iter()
            .zip(y)
            .map(|(&s, &t)| match task {
                Task::Regression => {
                    data_loss += (s - t) * (s - t);
                    2.0 * (s - t) / n
                }
                Task::Binary => {
                    data_loss += softplus(s) - t * s;
                    (sigmoid(s) - t) / n
                }
            })
            .collect();
        let weight_sq: f64 = self.subnets.iter().map(ShapeNet::weight_norm_sq).sum();
        let loss = data_loss / n
            + config.output_penalty * out_sq / (n * k)
            + config.l2_penalty * weight_sq;

        let mut grad = vec![0.0; self.param_count()];
        let mut off = 0;
        let mut d_out = vec![0.0; batch];
        for (net, cache) in self.subnets.iter().zip(caches.iter()) {
            let out = cache.acts.last().expect("forward ran");
            for ((d, ds), f) in d_out.iter_mut().zip(&d_score).zip(out) {
                *d = ds + 2.0 * config.output_penalty * f / (n * k);
            }
            let len = net.param_count();
            let slice = &mut grad[off..off + len];
            net.backward_batch(cache, &d_out, slice);
            net.add_weight_decay(config.l2_penalty, slice);
            off += len;
        }
        grad[off] = d_score.iter().sum();
        (loss, grad)
    }
}

/// Trains on already-standardized columns (`columns[i][sample]`). Returns the
/// network and the mean batch loss of every epoch.
pub fn train_nam_standardized(
    columns: &[Vec<f64>],
    y: &[f64],
    task: Task,
    config: &TrainingConfig,
) -> Result<(AdditiveNet, Vec<f64>), ModelError> {
    config.validate()?;
    let n = y.len();
    if n == 0 {
        return Err(ModelError::EmptyDataset);
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != n) {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            got: bad.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut net = AdditiveNet::init(columns.len(), config, &mut rng);
    let mean_y = y.iter().sum::<f64>() / n as f64;
    net.bias = match task {
        Task::Regression => mean_y,
        Task::Binary => {
            let p = mean_y.clamp(1e-3, 1.0 - 1e-3);
            (p / (1.0 - p)).ln()
        }
    };

    let n_params = net.param_count();
    let (mut m, mut v) = (vec![0.0; n_params], vec![0.0; n_params]);
    let (beta1, beta2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-8);
    let mut step = 0i32;
    let batch_size = config.batch_size.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut caches: Vec<NetCache> = (0..columns.len()).map(|_| NetCache::default()).collect();
    let mut batch_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(batch_size); columns.len()];
    let mut batch_y = Vec::with_capacity(batch_size);
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if batch_size < n {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(batch_size) {
            for (bc, col) in batch_cols.iter_mut().zip(columns) {
                bc.clear();
                bc.extend(chunk.iter().map(|&i| col[i]));
            }
            batch_y.clear();
            batch_y.extend(chunk.iter().map(|&i| y[i]));
            let (loss, grad) = net.loss_and_gradient_with(&batch_cols, &batch_y, task, config, &mut caches);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(ModelError::NonFinite { epoch });
            }
            epoch_loss += loss;
            batches += 1;
            step += 1;
            let lr = config.learning_rate;
            let mut idx = 0;
            match config.optimizer {
                Optimizer::Sgd => net.visit_params_mut(|p| {
                    *p -= lr * grad[idx];
                    idx += 1;
                }),
                Optimizer::Adam => {
                    let c1 = 1.0 - beta1.powi(step);
                    let c2 = 1.0 - beta2.powi(step);
                    net.visit_params_mut(|p| {
                        let g = grad[idx];
                        m[idx] = beta1 * m[idx] + (1.0 - beta1) * g;
                        v[idx] = beta2 * v[idx] + (1.0 - beta2) * g * g;
                        *p -= lr * (m[idx] / c1) / ((v[idx] / c2).sqrt() + eps);
                        idx += 1;
                    });
                }
            }
        }
        history.push(epoch_loss / batches as f64);
    }
    Ok((net, history))
}

/// The fitted additive model over raw feature values.
///
/// Each shape function is stored centred: `contribution_i(x) =
/// net_i(z_i) - centers[i]` where `z_i` is the standardized input and
/// `centers[i]` the mean of `net_i` over the training set. The centres are
/// folded into `bias`, so the pre-link prediction is exactly
/// `Σ contribution_i + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditiveModel {
    pub task: Task,
    pub subnets: Vec<ShapeNet>,
    pub centers: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    pub feature_names: Vec<String>,
}

impl AdditiveModel {
    /// Assembles a model from parts with zero centring offsets.
    pub fn from_parts(
        task: Task,
        subnets: Vec<ShapeNet>,
        bias: f64,
        standardizer: Standardizer,
        feature_names: Vec<String>,
    ) -> Self {
        let k = subnets.len();
        assert_eq!(standardizer.dim(), k, "standardizer width");
        assert_eq!(feature_names.len(), k, "feature names");
        Self {
            task,
            subnets,
            centers: vec![0.0; k],
            bias,
            standardizer,
            feature_names,
        }
    }

    pub fn n_features(&self) -> usize {
        self.subnets.len()
    }

    pub fn schema_fingerprint(&self) -> String {
        fingerprint(&self.feature_names)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.n_features() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Centred shape function `i` at the raw feature value `raw`.
    pub fn contribution(&self, index: usize, raw: f64) -> Result<f64, ModelError> {
        let net = self.subnets.get(index).ok_or(ModelError::IndexOutOfRange {
            index,
            len: self.n_features(),
        })?;
        let z = self.standardizer.transform_value(index, raw);
        Ok(net.eval(z) - self.centers[index])
    }

    pub fn contributions(&self, raw: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.check_dim(raw)?;
        raw.iter()
            .enumerate()
            .map(|(i, &x)| self.contribution(i, x))
            .collect()
    }

    /// Pre-link prediction `Σ contribution_i + bias`.
    pub fn decision(&self, raw: &[f64]) -> Result<f64, ModelError> {
        Ok(self.contributions(raw)?.iter().sum::<f64>() + self.bias)
    }

    /// Regression output, or the positive-class probability for binary models.
    pub fn predict(&self, raw: &[f64]) -> Result<f64, ModelError> {
        let s = self.decision(raw)?;
        Ok(match self.task {
            Task::Regression => s,
            Task::Binary => sigmoid(s),
        })
    }

    /// `(x, f_i(x))` pairs over raw feature values.
    pub fn shape_function(&self, index: usize, grid: &[f64]) -> Result<Vec<(f64, f64)>, ModelError> {
        grid.iter()
            .map(|&x| Ok((x, self.contribution(index, x)?)))
            .collect()
    }
}

/// Fits a standardizer on `raw`, trains the additive network on the
/// standardized data and centres every shape function on the training set.
pub fn train_nam(
    raw: &[Vec<f64>],
    y: &[f64],
    task: Task,
    feature_names: Vec<String>,
    config: &TrainingConfig,
) -> Result<AdditiveModel, ModelError> {
    let d = check_rows(raw, y)?;
    if feature_names.len() != d {
        return Err(ModelError::DimensionMismatch {
            expected: d,
            got: feature_names.len(),
        });
    }
    let standardizer = if raw.len() >= 2 {
        Standardizer::fit(raw).map_err(|_| ModelError::EmptyDataset)?
    } else {
        Standardizer::identity(d)
    };
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|i| raw.iter().map(|r| standardizer.transform_value(i, r[i])).collect())
        .collect();
    let (net, _) = train_nam_standardized(&columns, y, task, config)?;
    let n = y.len() as f64;
    let centers: Vec<f64> = net
        .subnets
        .iter()
        .zip(&columns)
        .map(|(s, col)| col.iter().map(|&z| s.eval(z)).sum::<f64>() / n)
        .collect();
    let bias = net.bias + centers.iter().sum::<f64>();
    Ok(AdditiveModel {
        task,
        subnets: net.subnets,
        centers,
        bias,
        standardizer,
        feature_names,
    })
}
