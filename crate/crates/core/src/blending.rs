//! Uniform, OLS and neural-network blending of a feature matrix.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature_bank::FeatureMatrix;

/// Average of the prediction columns; the bias column is ignored.
pub fn uniform_blend(x: &FeatureMatrix) -> Result<Vec<f64>> {
    let n = x.n_features();
    if n == 0 {
        return Err(Error::InvalidParameter("uniform blend of an empty bank".into()));
    }
    Ok((0..x.n_rows())
        .map(|t| x.features(t).iter().sum::<f64>() / n as f64)
        .collect())
}

/// Linear blend weights; the last entry multiplies the bias column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub w: Vec<f64>,
    /// Numerical rank of the design at fit time.
    pub rank: usize,
}

impl BlendWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite blend weight".into()));
        }
        let rank = w.len();
        Ok(Self { w, rank })
    }

    pub fn intercept(&self) -> f64 {
        *self.w.last().expect("at least the intercept")
    }
}

/// Least squares `min ‖Xw − h‖²` by singular value decomposition. Singular
/// values below `max(T, N+1)·ε·σ_max` are dropped, which yields the
/// minimum-norm solution when `X` is rank deficient.
pub fn ols_fit(x: &FeatureMatrix, h: &[f64]) -> Result<BlendWeights> {
    let (t, w) = (x.n_rows(), x.width());
    if h.len() != t {
        return Err(Error::Dimension(format!("{t} design rows vs {} targets", h.len())));
    }
    if t <= w {
        return Err(Error::InsufficientData(format!(
            "OLS with {w} columns needs more than {w} rows, got {t}"
        )));
    }
    let design = faer::Mat::<f64>::from_fn(t, w, |i, j| x.row(i)[j]);
    let svd = design
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("OLS SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let s_max = (0..w).map(|k| s[k]).fold(0.0, f64::max);
    let tol = t.max(w) as f64 * f64::EPSILON * s_max;
    let rank = (0..w).filter(|&k| s[k] > tol).count();
    if rank < w {
        warn!("OLS design has rank {rank} < {w}; returning the minimum-norm solution");
    }
    // w = V Σ⁺ Uᵀ h over the retained singular values
    let mut sol = vec![0.0; w];
    for k in (0..w).filter(|&k| s[k] > tol) {
        let c = (0..t).map(|i| u[(i, k)] * h[i]).sum::<f64>() / s[k];
        for (j, sj) in sol.iter_mut().enumerate() {
            *sj += v[(j, k)] * c;
        }
    }
    let mut weights = BlendWeights::new(sol)?;
    weights.rank = rank;
    Ok(weights)
}

/// `h_t = x_tᵀ w` including the bias entry.
pub fn linear_blend(x: &FeatureMatrix, w: &BlendWeights) -> Result<Vec<f64>> {
    if w.w.len() != x.width() {
        return Err(Error::Dimension(format!(
            "{} weights for {} columns",
            w.w.len(),
            x.width()
        )));
    }
    Ok((0..x.n_rows())
        .map(|t| x.row(t).iter().zip(&w.w).map(|(a, b)| a * b).sum())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// L2 penalty on weights (biases are not penalized).
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables.
    pub patience: usize,
    /// Train on a standardized target and map predictions back.
    pub standardize_target: bool,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            hidden: vec![100, 50, 50],
            learning_rate: 1e-3,
            batch_size: 200,
            alpha: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            patience: 50,
            standardize_target: true,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.hidden.contains(&0) {
            return bad("hidden layer of width zero");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(self.alpha >= 0.0) {
            return bad("L2 penalty must be non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("Adam moment decay rates must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Dense layer, weights stored row-major as `n_out × n_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn weight_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_out, self.n_in, &self.weights)
    }

    fn from_matrices(w: &DMatrix<f64>, b: &DVector<f64>) -> Self {
        Self {
            n_in: w.ncols(),
            n_out: w.nrows(),
            weights: w.transpose().as_slice().to_vec(),
            biases: b.as_slice().to_vec(),
        }
    }
}

/// ReLU network on hidden layers with an identity output.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: Vec<DMatrix<f64>>,
    biases: Vec<DVector<f64>>,
}

impl Network {
    /// Glorot-uniform weights in `±√(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let (n_in, n_out) = (pair[0], pair[1]);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            weights.push(DMatrix::from_fn(n_out, n_in, |_, _| dist.sample(&mut rng)));
            biases.push(DVector::zeros(n_out));
        }
        Self { weights, biases }
    }

    pub fn from_layers(layers: &[Layer]) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("network without layers".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weights.len() != l.n_in * l.n_out || l.biases.len() != l.n_out {
                return Err(Error::Dimension(format!("layer {i} storage does not match its shape")));
            }
            if i > 0 && layers[i - 1].n_out != l.n_in {
                return Err(Error::Dimension(format!(
                    "layer {i} expects {} inputs, previous layer emits {}",
                    l.n_in,
                    layers[i - 1].n_out
                )));
            }
        }
        if layers.last().map(|l| l.n_out) != Some(1) {
            return Err(Error::Dimension("output layer must have one unit".into()));
        }
        Ok(Self {
            weights: layers.iter().map(Layer::weight_matrix).collect(),
            biases: layers.iter().map(|l| DVector::from_column_slice(&l.biases)).collect(),
        })
    }

    pub fn layers(&self) -> Vec<Layer> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| Layer::from_matrices(w, b))
            .collect()
    }

    pub fn n_inputs(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// All parameters, layer by layer: weights (column-major) then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b.as_slice());
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "{} parameters for a network with {}",
                p.len(),
                self.n_params()
            )));
        }
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let n = w.len();
            w.as_mut_slice().copy_from_slice(&p[k..k + n]);
            k += n;
            let n = b.len();
            b.as_mut_slice().copy_from_slice(&p[k..k + n]);
            k += n;
        }
        Ok(())
    }

    /// Forward pass over a `n_in × B` input block; returns every layer's
    /// pre-activation and activation.
    fn forward(&self, x: &DMatrix<f64>) -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>) {
        let last = self.weights.len() - 1;
        let mut pre = Vec::with_capacity(last + 1);
        let mut act = Vec::with_capacity(last + 2);
        act.push(x.clone());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = w * &act[l];
            for mut col in z.column_iter_mut() {
                col += b;
            }
            let a = if l < last { z.map(|v| v.max(0.0)) } else { z.clone() };
            pre.push(z);
            act.push(a);
        }
        (pre, act)
    }

    pub fn predict_block(&self, x: &DMatrix<f64>) -> Vec<f64> {
        let (_, act) = self.forward(x);
        act.last().expect("output").iter().copied().collect()
    }

    /// `L = (1/2B) Σ (ŷ − y)² + (α/2B) Σ ‖W‖²` and its gradient in the order of
    /// [`Network::params`]. `x` holds one sample per column.
    pub fn loss_and_gradient(&self, x: &DMatrix<f64>, y: &[f64], alpha: f64) -> (f64, Vec<f64>) {
        let bsz = x.ncols() as f64;
        let (pre, act) = self.forward(x);
        let out = act.last().expect("output");
        let mut delta = DMatrix::from_fn(1, x.ncols(), |_, j| (out[(0, j)] - y[j]) / bsz);
        let sq: f64 = out.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let penalty: f64 = self.weights.iter().map(|w| w.norm_squared()).sum();
        let loss = sq / (2.0 * bsz) + alpha * penalty / (2.0 * bsz);

        let n = self.weights.len();
        let mut grads_w = vec![DMatrix::zeros(0, 0); n];
        let mut grads_b = vec![DVector::zeros(0); n];
        for l in (0..n).rev() {
            grads_w[l] = &delta * act[l].transpose() + &self.weights[l] * (alpha / bsz);
            grads_b[l] = delta.column_sum();
            if l > 0 {
                let mut back = self.weights[l].transpose() * &delta;
                back.zip_apply(&pre[l - 1], |g, z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
        }
        let mut g = Vec::with_capacity(self.n_params());
        for (w, b) in grads_w.iter().zip(&grads_b) {
            g.extend_from_slice(w.as_slice());
            g.extend_from_slice(b.as_slice());
        }
        (loss, g)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub epochs_run: usize,
    /// Epoch whose weights were kept (0 means the initialization).
    pub best_epoch: usize,
    pub best_val_mse: f64,
    /// Full training-set objective after each epoch, in training units.
    pub train_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
    pub config: MlpConfig,
    pub summary: TrainingSummary,
    /// Predictions on the training rows with the returned weights.
    #[serde(skip)]
    pub train_predictions: Vec<f64>,
}

impl MlpModel {
    pub fn network(&self) -> Result<Network> {
        Network::from_layers(&self.layers)
    }
}

fn column_stats(rows: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..k).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std = (0..k)
        .map(|j| {
            let v = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if v > 0.0 { v.sqrt() } else { 1.0 }
        })
        .collect();
    (mean, std)
}

/// Standardized inputs, one sample per column.
fn input_block(x: &FeatureMatrix, idx: &[usize], mean: &[f64], std: &[f64]) -> DMatrix<f64> {
    let k = mean.len();
    DMatrix::from_fn(k, idx.len(), |j, c| (x.features(idx[c])[j] - mean[j]) / std[j])
}

fn block_mse(net: &Network, x: &DMatrix<f64>, y: &[f64]) -> f64 {
    let p = net.predict_block(x);
    p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

/// Trains a ReLU network by mini-batch Adam and keeps the weights of the epoch
/// with the lowest validation MSE (training MSE when `x_val` is empty).
pub fn mlp_fit(
    x_train: &FeatureMatrix,
    h_train: &[f64],
    x_val: &FeatureMatrix,
    h_val: &[f64],
    cfg: &MlpConfig,
) -> Result<MlpModel> {
    cfg.validate()?;
    let k = x_train.n_features();
    if k == 0 {
        return Err(Error::InvalidParameter("MLP needs at least one feature".into()));
    }
    if x_train.n_rows() != h_train.len() || x_val.n_rows() != h_val.len() {
        return Err(Error::Dimension("feature rows and targets differ in length".into()));
    }
    if x_val.n_features() != k {
        return Err(Error::Dimension(format!(
            "validation has {} features, training {k}",
            x_val.n_features()
        )));
    }
    if h_train.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }

    let (input_mean, input_std) = column_stats(&x_train.feature_rows(), k);
    let (target_mean, target_std) = if cfg.standardize_target {
        let (m, s) = column_stats(&h_train.iter().map(|v| vec![*v]).collect::<Vec<_>>(), 1);
        (m[0], s[0])
    } else {
        (0.0, 1.0)
    };
    let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|y| (y - target_mean) / target_std).collect() };
    let y_train = scale(h_train);
    let y_val = scale(h_val);

    let n = h_train.len();
    let all: Vec<usize> = (0..n).collect();
    let train_block = input_block(x_train, &all, &input_mean, &input_std);
    let val_idx: Vec<usize> = (0..h_val.len()).collect();
    let val_block = input_block(x_val, &val_idx, &input_mean, &input_std);
    let monitor = |net: &Network| {
        if h_val.is_empty() {
            block_mse(net, &train_block, &y_train)
        } else {
            block_mse(net, &val_block, &y_val)
        }
    };

    let mut sizes = vec![k];
    sizes.extend(&cfg.hidden);
    sizes.push(1);
    let mut net = Network::init(&sizes, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let n_params = net.n_params();
    let (mut m1, mut m2) = (vec![0.0; n_params], vec![0.0; n_params]);
    let mut step = 0i32;
    let mut order = all.clone();

    let mut best = net.clone();
    let mut summary = TrainingSummary {
        best_val_mse: monitor(&net),
        ..Default::default()
    };
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let xb = DMatrix::from_fn(k, chunk.len(), |j, c| train_block[(j, chunk[c])]);
            let yb: Vec<f64> = chunk.iter().map(|&i| y_train[i]).collect();
            let (loss, grad) = net.loss_and_gradient(&xb, &yb, cfg.alpha);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical(format!(
                    "MLP diverged at epoch {epoch}, step {step}: batch loss {loss}"
                )));
            }
            step += 1;
            let c1 = 1.0 - cfg.beta1.powi(step);
            let c2 = 1.0 - cfg.beta2.powi(step);
            let mut p = net.params();
            for i in 0..n_params {
                m1[i] = cfg.beta1 * m1[i] + (1.0 - cfg.beta1) * grad[i];
                m2[i] = cfg.beta2 * m2[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
                p[i] -= cfg.learning_rate * (m1[i] / c1) / ((m2[i] / c2).sqrt() + cfg.epsilon);
            }
            net.set_params(&p)?;
        }
        let (full_loss, _) = net.loss_and_gradient(&train_block, &y_train, cfg.alpha);
        summary.train_loss.push(full_loss);
        summary.epochs_run = epoch;
        let score = monitor(&net);
        if !score.is_finite() {
            return Err(Error::Numerical(format!("MLP monitor MSE {score} at epoch {epoch}")));
        }
        if score < summary.best_val_mse {
            summary.best_val_mse = score;
            summary.best_epoch = epoch;
            best = net.clone();
        } else if cfg.patience > 0 && epoch - summary.best_epoch >= cfg.patience {
            break;
        }
    }

    let mut model = MlpModel {
        layers: best.layers(),
        input_mean,
        input_std,
        target_mean,
        target_std,
        config: cfg.clone(),
        summary,
        train_predictions: Vec::new(),
    };
    model.train_predictions = mlp_predict(&model, x_train)?;
    Ok(model)
}

pub fn mlp_predict(model: &MlpModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let net = model.network()?;
    if x.n_features() != net.n_inputs() || model.input_mean.len() != net.n_inputs() {
        return Err(Error::Dimension(format!(
            "model expects {} features, got {}",
            net.n_inputs(),
            x.n_features()
        )));
    }
    let idx: Vec<usize> = (0..x.n_rows()).collect();
    let block = input_block(x, &idx, &model.input_mean, &model.input_std);
    Ok(net
        .predict_block(&block)
        .into_iter()
        .map(|v| v * model.target_std + model.target_mean)
        .collect())
}
