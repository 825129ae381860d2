//! ε-insensitive support vector regression with an RBF kernel, the two-stage
//! SVR-GARCH forecaster and the Eavesdrop persistence baseline.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{realized_vol_proxy, rmse, PROXY_WINDOW};
use crate::market_data::SplitSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrHyper {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl SvrHyper {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("C", self.c), ("epsilon", self.epsilon), ("gamma", self.gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("SVR {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// How the second index of the working pair is chosen; the first is always
/// the maximal violator from the "up" set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    /// Maximal violator from the "low" set.
    MaxViolating,
    /// Largest guaranteed decrease of the dual objective among violators.
    #[default]
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Stop once the maximal KKT violation `m(α) − M(α)` falls below this.
    pub tolerance: f64,
    pub max_iter: usize,
    pub selection: PairSelection,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iter: 100_000,
            selection: PairSelection::SecondOrder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i − α_i*` for each support vector.
    pub dual_coef: Vec<f64>,
    pub intercept: f64,
    pub hyper: SvrHyper,
    pub iterations: usize,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Dense RBF Gram matrix, row-major.
pub fn kernel_matrix(inputs: &[Vec<f64>], gamma: f64) -> Vec<f64> {
    let n = inputs.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = rbf(gamma, &inputs[i], &inputs[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

fn check_inputs(inputs: &[Vec<f64>], targets: &[f64]) -> Result<()> {
    if inputs.len() != targets.len() {
        return Err(Error::Dimension(format!(
            "{} inputs vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    if inputs.len() < 2 {
        return Err(Error::InsufficientData("SVR needs at least two samples".into()));
    }
    let d = inputs[0].len();
    if inputs.iter().any(|x| x.len() != d) {
        return Err(Error::Dimension("inputs of differing dimension".into()));
    }
    if inputs.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite SVR data".into()));
    }
    Ok(())
}

pub fn svr_fit(inputs: &[Vec<f64>], targets: &[f64], hyper: SvrHyper) -> Result<SvrModel> {
    check_inputs(inputs, targets)?;
    hyper.validate()?;
    let k = kernel_matrix(inputs, hyper.gamma);
    svr_fit_with_kernel(inputs, targets, &k, hyper, SolverOptions::default())
}

/// Solves the ε-SVR dual
/// `min ½ (α − α*)ᵀ K (α − α*) + ε Σ(α + α*) − Σ z (α − α*)`,
/// `Σ(α − α*) = 0`, `0 ≤ α, α* ≤ C`, by sequential minimal optimization over
/// the `2n` stacked variables. The first working index is the maximal
/// violator; the second follows `opts.selection`. Lowest index wins ties.
/// `kernel` is the row-major Gram matrix of `inputs`.
pub fn svr_fit_with_kernel(
    inputs: &[Vec<f64>],
    targets: &[f64],
    kernel: &[f64],
    hyper: SvrHyper,
    opts: SolverOptions,
) -> Result<SvrModel> {
    check_inputs(inputs, targets)?;
    hyper.validate()?;
    let n = targets.len();
    if kernel.len() != n * n {
        return Err(Error::Dimension(format!("kernel has {} entries for n={n}", kernel.len())));
    }
    let l = 2 * n;
    let c = hyper.c;
    let y = |t: usize| if t < n { 1.0 } else { -1.0 };
    let mut alpha = vec![0.0f64; l];
    // gradient of the objective at α = 0 is the linear term p
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { hyper.epsilon - targets[t] } else { hyper.epsilon + targets[t - n] })
        .collect();

    let row = |a: usize| &kernel[(a % n) * n..(a % n + 1) * n];

    let mut iterations = 0;
    loop {
        // maximal violating pair: i maximizes −y∇f over the "up" set, j
        // minimizes it over the "low" set
        let (mut gmax, mut i) = (f64::NEG_INFINITY, usize::MAX);
        let (mut gmin, mut j) = (f64::INFINITY, usize::MAX);
        for t in 0..n {
            let v = -grad[t];
            if alpha[t] < c && v > gmax {
                gmax = v;
                i = t;
            }
            if alpha[t] > 0.0 && v < gmin {
                gmin = v;
                j = t;
            }
        }
        for t in n..l {
            let v = grad[t];
            if alpha[t] > 0.0 && v > gmax {
                gmax = v;
                i = t;
            }
            if alpha[t] < c && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < opts.tolerance {
            break;
        }
        if opts.selection == PairSelection::SecondOrder {
            let ki = row(i);
            let kii = ki[i % n];
            let mut best = f64::INFINITY;
            let mut consider = |t: usize, v: f64| {
                if v < gmax {
                    let b = gmax - v;
                    let a = (kii + kernel[(t % n) * (n + 1)] - 2.0 * ki[t % n]).max(1e-12);
                    let gain = -b * b / a;
                    if gain < best {
                        best = gain;
                        j = t;
                    }
                }
            };
            for t in 0..n {
                if alpha[t] > 0.0 {
                    consider(t, -grad[t]);
                }
            }
            for t in n..l {
                if alpha[t] < c {
                    consider(t, grad[t]);
                }
            }
        }
        if iterations >= opts.max_iter {
            return Err(Error::Numerical(format!(
                "SVR solver did not converge in {} iterations (C={}, ε={}, γ={}, gap {:e})",
                opts.max_iter,
                hyper.c,
                hyper.epsilon,
                hyper.gamma,
                gmax - gmin
            )));
        }
        iterations += 1;

        let (yi, yj) = (y(i), y(j));
        let (ki, kj) = (row(i), row(j));
        let qij = yi * yj * ki[j % n];
        let (qii, qjj) = (ki[i % n], kj[j % n]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        if yi != yj {
            let quad = (qii + qjj + 2.0 * qij).max(1e-12);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(1e-12);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        let (si, sj) = (yi * di, yj * dj);
        let (upper, lower) = grad.split_at_mut(n);
        for t in 0..n {
            let u = si * ki[t] + sj * kj[t];
            upper[t] += u;
            lower[t] -= u;
        }
    }

    // intercept: average over free variables, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..l {
        let yg = y(t) * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y(t) < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if y(t) > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };

    let mut support_vectors = Vec::new();
    let mut dual_coef = Vec::new();
    for s in 0..n {
        let beta = alpha[s] - alpha[s + n];
        if beta != 0.0 {
            support_vectors.push(inputs[s].clone());
            dual_coef.push(beta);
        }
    }
    debug!("SVR converged in {iterations} iterations with {} support vectors", dual_coef.len());
    Ok(SvrModel {
        support_vectors,
        dual_coef,
        intercept: -rho,
        hyper,
        iterations,
    })
}

pub fn svr_predict(model: &SvrModel, x: &[f64]) -> f64 {
    model
        .support_vectors
        .iter()
        .zip(&model.dual_coef)
        .map(|(sv, b)| b * rbf(model.hyper.gamma, sv, x))
        .sum::<f64>()
        + model.intercept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            c: vec![0.1, 1.0, 10.0, 100.0],
            epsilon: vec![1e-5, 1e-4, 1e-3],
            gamma: vec![0.1, 1.0, 10.0],
            solver: SolverOptions::default(),
        }
    }
}

impl SvrGrid {
    pub fn cells(&self) -> Vec<SvrHyper> {
        let mut out = Vec::new();
        for &gamma in &self.gamma {
            for &c in &self.c {
                for &epsilon in &self.epsilon {
                    out.push(SvrHyper { c, epsilon, gamma });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.is_empty() || self.epsilon.is_empty() || self.gamma.is_empty() {
            return Err(Error::InvalidParameter("SVR grid has an empty axis".into()));
        }
        self.cells().iter().try_for_each(SvrHyper::validate)
    }
}

/// Column means and standard deviations (population; zero spread maps to 1).
fn scaler(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std = (0..d)
        .map(|j| {
            let v = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if v > 0.0 { v.sqrt() } else { 1.0 }
        })
        .collect();
    (mean, std)
}

fn apply_scaler(row: &[f64], mean: &[f64], std: &[f64]) -> Vec<f64> {
    row.iter().zip(mean).zip(std).map(|((v, m), s)| (v - m) / s).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedSvr {
    pub model: SvrModel,
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub val_rmse: f64,
}

impl TunedSvr {
    pub fn predict(&self, x: &[f64]) -> f64 {
        svr_predict(&self.model, &apply_scaler(x, &self.input_mean, &self.input_std))
    }
}

/// Fits every grid cell on standardized training inputs and keeps the one with
/// the lowest validation RMSE (first cell on ties). Failed cells are skipped.
pub fn grid_search(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    grid: &SvrGrid,
) -> Result<TunedSvr> {
    grid.validate()?;
    check_inputs(train_x, train_y)?;
    if val_x.len() != val_y.len() || val_y.is_empty() {
        return Err(Error::InsufficientData("SVR grid search needs validation data".into()));
    }
    let (mean, std) = scaler(train_x);
    let xs: Vec<Vec<f64>> = train_x.iter().map(|r| apply_scaler(r, &mean, &std)).collect();
    let vs: Vec<Vec<f64>> = val_x.iter().map(|r| apply_scaler(r, &mean, &std)).collect();

    let mut results: Vec<(SvrHyper, Result<(SvrModel, f64)>)> = Vec::new();
    for &gamma in &grid.gamma {
        let k = kernel_matrix(&xs, gamma);
        let cells: Vec<SvrHyper> = grid.cells().into_iter().filter(|h| h.gamma == gamma).collect();
        let fits: Vec<_> = cells
            .par_iter()
            .map(|h| {
                let m = svr_fit_with_kernel(&xs, train_y, &k, *h, grid.solver)?;
                let pred: Vec<f64> = vs.iter().map(|x| svr_predict(&m, x)).collect();
                let score = rmse(val_y, &pred)?;
                Ok((m, score))
            })
            .collect();
        results.extend(cells.into_iter().zip(fits));
    }

    let mut best: Option<(SvrModel, f64)> = None;
    for (h, res) in results {
        match res {
            Ok((m, s)) => {
                if best.as_ref().is_none_or(|(_, b)| s < *b) {
                    best = Some((m, s));
                }
            }
            Err(e) => warn!("skipping SVR cell C={} ε={} γ={}: {e}", h.c, h.epsilon, h.gamma),
        }
    }
    let (model, val_rmse) =
        best.ok_or_else(|| Error::Numerical("every SVR grid cell failed".into()))?;
    Ok(TunedSvr {
        model,
        input_mean: mean,
        input_std: std,
        val_rmse,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrGarchForecast {
    /// `forecasts[t]` predicts `h̃_t`; `None` before the proxy warm-up ends.
    pub forecasts: Vec<Option<f64>>,
    pub mean_model: TunedSvr,
    pub variance_model: TunedSvr,
}

/// Two-stage SVR-GARCH. Stage one fits `r_t = f(r_{t−1})` and sets
/// `a_t = r_t − f(r_{t−1})`; stage two fits `h̃_t = g(h̃_{t−1}, a²_{t−1})` on the
/// realized proxy. Both stages train on the training split and pick their
/// hyperparameters on the validation split. Forecasts feed the realized
/// `h̃_{t−1}` and `a_{t−1}`, so the value at `t` uses returns before `t` only.
pub fn svr_garch_forecast(
    returns: &[f64],
    split: SplitSpec,
    grid: &SvrGrid,
) -> Result<SvrGarchForecast> {
    if split.total() != returns.len() {
        return Err(Error::Dimension(format!(
            "split covers {} observations, series has {}",
            split.total(),
            returns.len()
        )));
    }
    let (train, val) = (split.train_range(), split.val_range());
    let first = PROXY_WINDOW; // first t with h̃_{t−1} defined
    if train.end < first + 2 || val.is_empty() {
        return Err(Error::InsufficientData(
            "SVR-GARCH needs a training split past the proxy warm-up and a validation split".into(),
        ));
    }

    let pairs = |r: std::ops::Range<usize>| -> (Vec<Vec<f64>>, Vec<f64>) {
        r.map(|t| (vec![returns[t - 1]], returns[t])).unzip()
    };
    let (tx, ty) = pairs(1..train.end);
    let (vx, vy) = pairs(val.clone());
    let mean_model = grid_search(&tx, &ty, &vx, &vy, grid)?;

    let mut resid = vec![returns[0]; returns.len()];
    for t in 1..returns.len() {
        resid[t] = returns[t] - mean_model.predict(&[returns[t - 1]]);
    }
    let proxy = realized_vol_proxy(returns)?;
    let input = |t: usize| -> Vec<f64> {
        let prev = proxy[t - 1].expect("proxy defined past warm-up");
        vec![prev, resid[t - 1] * resid[t - 1]]
    };
    let target = |t: usize| proxy[t].expect("proxy defined past warm-up");
    let (gx, gy): (Vec<_>, Vec<_>) = (first..train.end).map(|t| (input(t), target(t))).unzip();
    let (gvx, gvy): (Vec<_>, Vec<_>) = val.map(|t| (input(t), target(t))).unzip();
    let variance_model = grid_search(&gx, &gy, &gvx, &gvy, grid)?;

    let mut forecasts = vec![None; returns.len()];
    for (t, f) in forecasts.iter_mut().enumerate().skip(first) {
        *f = Some(variance_model.predict(&input(t)));
    }
    Ok(SvrGarchForecast {
        forecasts,
        mean_model,
        variance_model,
    })
}

/// `ŷ_t = h̃_{t−1}`: the forecasts for `t = 1 .. n−1`.
pub fn eavesdrop(proxy: &[f64]) -> Result<Vec<f64>> {
    if proxy.len() < 2 {
        return Err(Error::InsufficientData("Eavesdrop needs at least two proxy values".into()));
    }
    Ok(proxy[..proxy.len() - 1].to_vec())
}
