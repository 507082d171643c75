//! One-hidden-layer sigmoid perceptron trained by online backpropagation
//! with momentum, plus the min-max feature scaling and model files.
//!
//! Loss per sample is `E = sum_k (o_k - t_k)^2` against a one-hot target.
//! Every parameter moves by `dw_t = -lr * dE/dw + momentum * dw_{t-1}`.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureMatrix, FeatureVector, FEATURE_COUNT, LAYOUT_VERSION};
use crate::par;

pub const MODEL_FORMAT: &str = "hullbay-mlp";
pub const MODEL_VERSION: u32 = 1;
pub const CLASSES: usize = 10;
/// Initial weights are drawn uniformly from `[-INIT_RANGE, INIT_RANGE]`.
pub const INIT_RANGE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file version mismatch: {0}")]
    VersionMismatch(String),
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("no training samples")]
    EmptyTrainingSet,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub seed: u64,
    pub shuffle: bool,
    /// Samples per update; the update uses their mean gradient. 1 is pure
    /// online training.
    pub batch_size: usize,
    /// Stop once training accuracy has not improved for this many epochs.
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.8,
            momentum: 0.7,
            epochs: 50,
            hidden_dim: 110,
            seed: 1,
            shuffle: true,
            batch_size: 8,
            early_stop_patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.hidden_dim == 0 {
            return bad("hidden layer must have at least one unit");
        }
        Ok(())
    }
}

/// Parameters (or gradients) of a network, weights row-major by receiving unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// `hidden_dim x input_dim`
    pub w_hidden: Vec<f64>,
    pub b_hidden: Vec<f64>,
    /// `output_dim x hidden_dim`
    pub w_output: Vec<f64>,
    pub b_output: Vec<f64>,
}

impl Params {
    fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        Self {
            w_hidden: vec![0.0; hidden * input],
            b_hidden: vec![0.0; hidden],
            w_output: vec![0.0; output * hidden],
            b_output: vec![0.0; output],
        }
    }

    fn slices(&self) -> [&[f64]; 4] {
        [&self.w_hidden, &self.b_hidden, &self.w_output, &self.b_output]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w_hidden, &mut self.b_hidden, &mut self.w_output, &mut self.b_output]
    }

    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.slices().into_iter().flatten().copied()
    }

    fn fill(&mut self, v: f64) {
        for s in self.slices_mut() {
            s.fill(v);
        }
    }

    fn add_assign(&mut self, other: &Params) {
        for (s, o) in self.slices_mut().into_iter().zip(other.slices()) {
            for (a, b) in s.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    fn scale(&mut self, k: f64) {
        for s in self.slices_mut() {
            for a in s.iter_mut() {
                *a *= k;
            }
        }
    }

    fn get_mut(&mut self, mut i: usize) -> &mut f64 {
        for s in self.slices_mut() {
            if i < s.len() {
                return &mut s[i];
            }
            i -= s.len();
        }
        panic!("parameter index out of range");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub output_dim: usize,
    pub params: Params,
    /// Previous update of every parameter.
    pub velocity: Params,
}

/// Activations from one forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl Network {
    pub fn zeros(input_dim: usize, hidden_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            output_dim,
            params: Params::zeros(input_dim, hidden_dim, output_dim),
            velocity: Params::zeros(input_dim, hidden_dim, output_dim),
        }
    }

    /// Weights and biases uniform in `[-INIT_RANGE, INIT_RANGE]`, zero velocity.
    pub fn random(input_dim: usize, hidden_dim: usize, output_dim: usize, seed: u64) -> Self {
        let mut net = Self::zeros(input_dim, hidden_dim, output_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for s in net.params.slices_mut() {
            for v in s.iter_mut() {
                *v = rng.random_range(-INIT_RANGE..=INIT_RANGE);
            }
        }
        net
    }

    pub fn activations(&self, x: &[f64]) -> Activations {
        debug_assert_eq!(x.len(), self.input_dim);
        let p = &self.params;
        let hidden: Vec<f64> = p.w_hidden.chunks_exact(self.input_dim).zip(&p.b_hidden).map(|(row, b)| sigmoid(dot(row, x) + b)).collect();
        let output = p.w_output.chunks_exact(self.hidden_dim).zip(&p.b_output).map(|(row, b)| sigmoid(dot(row, &hidden) + b)).collect();
        Activations { hidden, output }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).output
    }

    pub fn loss(&self, x: &[f64], target: &[f64]) -> f64 {
        self.forward(x).iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum()
    }

    /// `dE/dparam` for one sample, and the output it was computed at.
    pub fn gradients(&self, x: &[f64], target: &[f64]) -> (Params, Vec<f64>) {
        let act = self.activations(x);
        let mut g = Params::zeros(self.input_dim, self.hidden_dim, self.output_dim);
        self.backprop_into(x, target, &act, &mut g);
        (g, act.output)
    }

    fn backprop_into(&self, x: &[f64], target: &[f64], act: &Activations, g: &mut Params) {
        let delta_out: Vec<f64> = act.output.iter().zip(target).map(|(&o, &t)| 2.0 * (o - t) * o * (1.0 - o)).collect();
        for (k, &d) in delta_out.iter().enumerate() {
            g.b_output[k] = d;
            let row = &mut g.w_output[k * self.hidden_dim..(k + 1) * self.hidden_dim];
            for (w, &h) in row.iter_mut().zip(&act.hidden) {
                *w = d * h;
            }
        }
        for j in 0..self.hidden_dim {
            let back: f64 = delta_out.iter().enumerate().map(|(k, d)| d * self.params.w_output[k * self.hidden_dim + j]).sum();
            let h = act.hidden[j];
            let d = back * h * (1.0 - h);
            g.b_hidden[j] = d;
            let row = &mut g.w_hidden[j * self.input_dim..(j + 1) * self.input_dim];
            for (w, &xi) in row.iter_mut().zip(x) {
                *w = d * xi;
            }
        }
    }

    /// `velocity = -lr * grad + momentum * velocity; params += velocity`.
    pub fn apply_update(&mut self, grad: &Params, learning_rate: f64, momentum: f64) {
        let vs = self.velocity.slices_mut();
        let ps = self.params.slices_mut();
        for ((v, p), g) in vs.into_iter().zip(ps).zip(grad.slices()) {
            for ((vi, pi), gi) in v.iter_mut().zip(p.iter_mut()).zip(g) {
                *vi = -learning_rate * gi + momentum * *vi;
                *pi += *vi;
            }
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Class read off an output vector: argmax with ties to the lowest index,
/// or `o >= 0.5` for a single output.
pub fn decide(output: &[f64]) -> usize {
    if output.len() == 1 {
        return usize::from(output[0] >= 0.5);
    }
    let mut best = 0;
    for (i, &v) in output.iter().enumerate().skip(1) {
        if v > output[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean of `(o - t)^2` over samples and output units, measured online.
    pub mse: f64,
    /// Fraction of samples classified correctly before their own update.
    pub accuracy: f64,
}

/// One pass of online updates. With `shuffle` set the visiting order is a
/// permutation drawn from `(config.seed, epoch)`.
pub fn train_epoch(net: &mut Network, inputs: &[Vec<f64>], targets: &[Vec<f64>], config: &TrainConfig, epoch: usize) -> EpochMetrics {
    assert_eq!(inputs.len(), targets.len());
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    if config.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(epoch as u64 + 1);
        order.shuffle(&mut rng);
    }
    let mut grad = Params::zeros(net.input_dim, net.hidden_dim, net.output_dim);
    let mut sum = grad.clone();
    let (mut sq_err, mut correct) = (0.0, 0usize);
    for batch in order.chunks(config.batch_size) {
        if batch.len() == 1 {
            let (x, t) = (&inputs[batch[0]], &targets[batch[0]]);
            let act = net.activations(x);
            sq_err += act.output.iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
            correct += usize::from(decide(&act.output) == decide(t));
            net.backprop_into(x, t, &act, &mut grad);
            net.apply_update(&grad, config.learning_rate, config.momentum);
            continue;
        }
        sum.fill(0.0);
        for &i in batch {
            let (x, t) = (&inputs[i], &targets[i]);
            let act = net.activations(x);
            sq_err += act.output.iter().zip(t).map(|(o, t)| (o - t) * (o - t)).sum::<f64>();
            correct += usize::from(decide(&act.output) == decide(t));
            net.backprop_into(x, t, &act, &mut grad);
            sum.add_assign(&grad);
        }
        sum.scale(1.0 / batch.len() as f64);
        net.apply_update(&sum, config.learning_rate, config.momentum);
    }
    let n = inputs.len().max(1) as f64;
    EpochMetrics { epoch, mse: sq_err / (n * net.output_dim as f64), accuracy: correct as f64 / n }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// max over parameters of `|a - n| / max(|a| + |n|, 1e-8)`
    pub max_relative: f64,
    pub max_absolute: f64,
}

/// Backprop gradients against central differences with step `h`.
pub fn gradient_check(net: &Network, x: &[f64], target: &[f64], h: f64) -> GradientCheck {
    let (analytic, _) = net.gradients(x, target);
    let mut probe = net.clone();
    let mut out = GradientCheck { max_relative: 0.0, max_absolute: 0.0 };
    for (i, a) in analytic.iter().enumerate() {
        let orig = *probe.params.get_mut(i);
        *probe.params.get_mut(i) = orig + h;
        let up = probe.loss(x, target);
        *probe.params.get_mut(i) = orig - h;
        let down = probe.loss(x, target);
        *probe.params.get_mut(i) = orig;
        let numeric = (up - down) / (2.0 * h);
        let abs = (a - numeric).abs();
        out.max_absolute = out.max_absolute.max(abs);
        out.max_relative = out.max_relative.max(abs / (a.abs() + numeric.abs()).max(1e-8));
    }
    out
}

/// Per-feature min-max scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormParams {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut it = rows.into_iter();
        let first = it.next().expect("at least one row");
        let (mut min, mut max) = (first.to_vec(), first.to_vec());
        for row in it {
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Self { min, max }
    }

    /// `(v - min) / (max - min)` clamped to `[0, 1]`; constant features map to 0.
    pub fn normalize(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&x, (&lo, &hi))| if hi > lo { ((x - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 })
            .collect()
    }

    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.min.iter().zip(&self.max)).map(|(&x, (&lo, &hi))| lo + x * (hi - lo)).collect()
    }
}

pub fn one_hot(label: u8) -> Vec<f64> {
    let mut t = vec![0.0; CLASSES];
    t[label as usize] = 1.0;
    t
}

/// A trained digit classifier: scaling, network and how it was trained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub format: String,
    pub version: u32,
    pub feature_layout: String,
    pub config: TrainConfig,
    pub epochs_trained: usize,
    pub norm: NormParams,
    pub network: Network,
}

impl MlpModel {
    /// Untrained model: all-zero weights, scaling with min 0 and max 1.
    pub fn zeroed(config: TrainConfig) -> Self {
        Self::from_parts(
            config,
            NormParams { min: vec![0.0; FEATURE_COUNT], max: vec![1.0; FEATURE_COUNT] },
            Network::zeros(FEATURE_COUNT, config.hidden_dim, CLASSES),
        )
    }

    fn from_parts(config: TrainConfig, norm: NormParams, network: Network) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            feature_layout: LAYOUT_VERSION.to_string(),
            config,
            epochs_trained: 0,
            norm,
            network,
        }
    }

    pub fn outputs(&self, fv: &FeatureVector) -> Vec<f64> {
        self.network.forward(&self.norm.normalize(fv.as_slice()))
    }

    pub fn predict(&self, fv: &FeatureVector) -> u8 {
        decide(&self.outputs(fv)) as u8
    }

    /// Parallel under the `parallel` feature; same answers as `predict`.
    pub fn predict_batch(&self, rows: &[FeatureVector]) -> Vec<u8> {
        par::map(rows, |fv| self.predict(fv))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        let format = value.get("format").and_then(|v| v.as_str());
        if format != Some(MODEL_FORMAT) {
            return Err(ModelError::CorruptFile(format!("format tag is {format:?}")));
        }
        let version = value.get("version").and_then(|v| v.as_u64());
        if version != Some(u64::from(MODEL_VERSION)) {
            return Err(ModelError::VersionMismatch(format!("expected version {MODEL_VERSION}, found {version:?}")));
        }
        let layout = value.get("feature_layout").and_then(|v| v.as_str());
        if layout != Some(LAYOUT_VERSION) {
            return Err(ModelError::VersionMismatch(format!("expected layout {LAYOUT_VERSION}, found {layout:?}")));
        }
        let model: MlpModel = serde_json::from_value(value).map_err(|e| ModelError::CorruptFile(e.to_string()))?;
        model.check_shapes()?;
        Ok(model)
    }

    fn check_shapes(&self) -> Result<(), ModelError> {
        let n = &self.network;
        let expect = Params::zeros(n.input_dim, n.hidden_dim, n.output_dim);
        let same = |p: &Params| p.slices().iter().zip(expect.slices()).all(|(a, b)| a.len() == b.len());
        let ok = n.input_dim == FEATURE_COUNT
            && n.output_dim == CLASSES
            && same(&n.params)
            && same(&n.velocity)
            && self.norm.min.len() == FEATURE_COUNT
            && self.norm.max.len() == FEATURE_COUNT
            && self.norm.min.iter().zip(&self.norm.max).all(|(lo, hi)| lo <= hi);
        if ok {
            Ok(())
        } else {
            Err(ModelError::CorruptFile("parameter shapes do not match the declared dimensions".into()))
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Fits scaling on `train`, then trains a fresh network seeded by
/// `config.seed`. Returns the model and one metrics row per epoch run.
pub fn fit(train: &FeatureMatrix, config: &TrainConfig) -> Result<(MlpModel, Vec<EpochMetrics>), ModelError> {
    config.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let norm = NormParams::fit(train.rows.iter().map(FeatureVector::as_slice));
    let inputs: Vec<Vec<f64>> = train.rows.iter().map(|r| norm.normalize(r.as_slice())).collect();
    let targets: Vec<Vec<f64>> = train.labels.iter().map(|&l| one_hot(l)).collect();

    let network = Network::random(FEATURE_COUNT, config.hidden_dim, CLASSES, config.seed);
    let mut model = MlpModel::from_parts(*config, norm, network);
    let mut log = Vec::with_capacity(config.epochs);
    let (mut best, mut stale) = (f64::NEG_INFINITY, 0);
    for epoch in 0..config.epochs {
        let m = train_epoch(&mut model.network, &inputs, &targets, config, epoch);
        model.epochs_trained += 1;
        log::debug!("epoch {} mse {:.6} accuracy {:.4}", m.epoch + 1, m.mse, m.accuracy);
        log.push(m);
        if let Some(patience) = config.early_stop_patience {
            if m.accuracy > best {
                best = m.accuracy;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    break;
                }
            }
        }
    }
    Ok((model, log))
}
