//! Maximum-likelihood estimation.
//!
//! The likelihood is maximized with Nelder-Mead over an unconstrained
//! reparametrization:
//!
//! * `α₀ = exp(θ)` for ARCH/GARCH/GJR, raw for EGARCH;
//! * the linear families' coefficients `(α, γ/2, β)` map through a softmax with
//!   a slack term, so every coefficient is positive and their sum (the
//!   persistence) stays below one;
//! * EGARCH coefficients are raw, with `Σ|β| < 1` as a hard barrier;
//! * `ν = 2 + exp(θ)` for the t families, `ν = exp(θ)` for GED, `λ = tanh(θ)`.
//!
//! Each fit starts from the three points of [`starting_points`], refines the
//! best vertex once more from a fresh, smaller simplex, and keeps the start
//! with the highest likelihood.

use std::cell::RefCell;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::innovations::{InnovationDist, InnovationKind};
use crate::optim::{nelder_mead, NelderMeadOptions};

use super::recursion::{loglik_from_path, recursion_unchecked, variance_recursion};
use super::{Family, ModelParams, ModelSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub params: ModelParams,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    /// Pre-sample seed of the recursion (in-sample variance of the returns).
    pub h_init: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub in_sample_h: Vec<f64>,
}

impl FittedModel {
    /// Evaluates `params` on `returns` without optimizing.
    pub fn from_params(
        spec: ModelSpec,
        params: ModelParams,
        returns: &[f64],
        h_init: f64,
    ) -> Result<Self> {
        let h = variance_recursion(&spec, &params, returns, h_init)?;
        let density = params.innovation.evaluator()?;
        let loglik = loglik_from_path(&density, returns, &h);
        if !loglik.is_finite() {
            return Err(Error::Numerical(format!(
                "{}: non-finite log-likelihood",
                spec.label()
            )));
        }
        let (_, aic, bic) = criteria(spec.n_params(), returns.len(), loglik);
        Ok(Self {
            spec,
            params,
            loglik,
            aic,
            bic,
            n_obs: returns.len(),
            h_init,
            converged: true,
            iterations: 0,
            in_sample_h: h,
        })
    }

    pub fn label(&self) -> String {
        self.spec.label()
    }
}

fn criteria(k: usize, n: usize, loglik: f64) -> (f64, f64, f64) {
    let k = k as f64;
    (loglik, 2.0 * k - 2.0 * loglik, k * (n as f64).ln() - 2.0 * loglik)
}

/// `(LL, AIC, BIC)` with `AIC = 2k − 2LL` and `BIC = k ln T − 2LL`.
pub fn information_criteria(model: &FittedModel) -> (f64, f64, f64) {
    criteria(model.spec.n_params(), model.n_obs, model.loglik)
}

/// `(LL, AIC, BIC)` of the frozen model on `full_returns[range]`, with the
/// recursion rolled over the whole series and `T = range.len()`.
pub fn segment_criteria(
    model: &FittedModel,
    full_returns: &[f64],
    range: std::ops::Range<usize>,
) -> Result<(f64, f64, f64)> {
    if range.end > full_returns.len() || range.is_empty() {
        return Err(Error::Dimension(format!(
            "segment {range:?} outside a series of length {}",
            full_returns.len()
        )));
    }
    let h = variance_recursion(&model.spec, &model.params, full_returns, model.h_init)?;
    let density = model.params.innovation.evaluator()?;
    let loglik = loglik_from_path(&density, &full_returns[range.clone()], &h[range.clone()]);
    if !loglik.is_finite() {
        return Err(Error::Numerical(format!(
            "{}: non-finite log-likelihood on {range:?}",
            model.label()
        )));
    }
    Ok(criteria(model.spec.n_params(), range.len(), loglik))
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub nelder_mead: NelderMeadOptions,
    /// Step of the refinement simplex started at each start's optimum.
    pub restart_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            nelder_mead: NelderMeadOptions::default(),
            restart_step: 0.1,
        }
    }
}

/// Population variance of the returns around their mean.
pub(crate) fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n
}

fn default_innovation(kind: InnovationKind) -> InnovationDist {
    match kind {
        InnovationKind::Normal => InnovationDist::Normal,
        InnovationKind::StudentT => InnovationDist::StudentT { nu: 8.0 },
        InnovationKind::SkewStudentT => InnovationDist::SkewStudentT {
            nu: 8.0,
            lambda: 0.0,
        },
        InnovationKind::Ged => InnovationDist::Ged { nu: 1.5 },
    }
}

/// The three fixed starting points.
///
/// | family        | start 1            | start 2            | start 3            |
/// |---------------|--------------------|--------------------|--------------------|
/// | ARCH          | Σα = 0.2           | Σα = 0.5           | Σα = 0.8           |
/// | GARCH         | Σα = .05, Σβ = .90 | Σα = .10, Σβ = .80 | Σα = .20, Σβ = .60 |
/// | GJR           | as GARCH with the shock weight split `α = s/2`, `γ = s` |||
/// | EGARCH        | Σα = .05, Σβ = .95 | Σα = .10, Σβ = .90 | Σα = .20, Σβ = .80 |
///
/// Weights are spread evenly across lags. `α₀` places the unconditional level
/// at `h_init` (for EGARCH using `E|z| ≈ 0.8`). Shapes start at `ν = 8` for
/// the t families, `λ = 0`, and `ν = 1.5` for GED.
pub fn starting_points(spec: &ModelSpec, h_init: f64) -> Vec<ModelParams> {
    let innovation = default_innovation(spec.innovation);
    let spread = |total: f64, n: usize| vec![total / n.max(1) as f64; n];
    let linear = |shock: f64, beta: f64| {
        let (alpha_total, gamma_total) = match spec.family {
            Family::Gjr => (0.5 * shock, shock),
            _ => (shock, 0.0),
        };
        let persistence = shock + beta;
        ModelParams::new(
            h_init * (1.0 - persistence),
            spread(alpha_total, spec.n_alpha()),
            spread(beta, spec.n_beta()),
            spread(gamma_total, spec.n_gamma()),
            innovation,
        )
    };
    match spec.family {
        Family::Arch => [0.2, 0.5, 0.8].iter().map(|&s| linear(s, 0.0)).collect(),
        Family::Garch | Family::Gjr => [(0.05, 0.90), (0.10, 0.80), (0.20, 0.60)]
            .iter()
            .map(|&(a, b)| linear(a, b))
            .collect(),
        Family::Egarch => [(0.05, 0.95), (0.10, 0.90), (0.20, 0.80)]
            .iter()
            .map(|&(a, b)| {
                let center = if spec.egarch_centered { 0.0 } else { 0.8 };
                ModelParams::new(
                    (1.0 - b) * h_init.ln() - a * center,
                    spread(a, spec.n_alpha()),
                    spread(b, spec.n_beta()),
                    vec![0.0; spec.n_gamma()],
                    innovation,
                )
            })
            .collect(),
    }
}

/// Maps between `ModelParams` and the unconstrained optimizer vector.
struct Transform {
    spec: ModelSpec,
}

impl Transform {
    fn dim(&self) -> usize {
        self.spec.n_params()
    }

    fn encode(&self, p: &ModelParams) -> Vec<f64> {
        let mut th = Vec::with_capacity(self.dim());
        match self.spec.family {
            Family::Egarch => {
                th.push(p.alpha0);
                th.extend(&p.alphas);
                th.extend(&p.gammas);
                th.extend(&p.betas);
            }
            _ => {
                th.push(p.alpha0.ln());
                let w: Vec<f64> = p
                    .alphas
                    .iter()
                    .copied()
                    .chain(p.gammas.iter().map(|g| 0.5 * g))
                    .chain(p.betas.iter().copied())
                    .map(|v| v.max(1e-8))
                    .collect();
                let slack = (1.0 - w.iter().sum::<f64>()).max(1e-8);
                th.extend(w.iter().map(|v| (v / slack).ln()));
            }
        }
        match p.innovation {
            InnovationDist::Normal => {}
            InnovationDist::StudentT { nu } => th.push((nu - 2.0).ln()),
            InnovationDist::SkewStudentT { nu, lambda } => {
                th.push((nu - 2.0).ln());
                th.push(lambda.atanh());
            }
            InnovationDist::Ged { nu } => th.push(nu.ln()),
        }
        th
    }

    fn decode(&self, th: &[f64]) -> Option<ModelParams> {
        let s = &self.spec;
        let (na, ng, nb) = (s.n_alpha(), s.n_gamma(), s.n_beta());
        let m = na + ng + nb;
        let coef = &th[1..1 + m];
        let (alpha0, alphas, gammas, betas) = match s.family {
            Family::Egarch => {
                let betas = coef[na + ng..].to_vec();
                if betas.iter().map(|b| b.abs()).sum::<f64>() >= 1.0 {
                    return None;
                }
                (
                    th[0],
                    coef[..na].to_vec(),
                    coef[na..na + ng].to_vec(),
                    betas,
                )
            }
            _ => {
                let top = coef.iter().copied().fold(0.0f64, f64::max);
                let denom = (-top).exp() + coef.iter().map(|u| (u - top).exp()).sum::<f64>();
                let w: Vec<f64> = coef.iter().map(|u| (u - top).exp() / denom).collect();
                (
                    th[0].exp(),
                    w[..na].to_vec(),
                    w[na..na + ng].iter().map(|v| 2.0 * v).collect(),
                    w[na + ng..].to_vec(),
                )
            }
        };
        let shape = &th[1 + m..];
        let innovation = match s.innovation {
            InnovationKind::Normal => InnovationDist::Normal,
            InnovationKind::StudentT => InnovationDist::StudentT {
                nu: 2.0 + shape[0].exp(),
            },
            InnovationKind::SkewStudentT => InnovationDist::SkewStudentT {
                nu: 2.0 + shape[0].exp(),
                lambda: shape[1].tanh(),
            },
            InnovationKind::Ged => InnovationDist::Ged {
                nu: shape[0].exp(),
            },
        };
        if innovation.validate().is_err() || !alpha0.is_finite() || alpha0 == 0.0 && s.family != Family::Egarch {
            return None;
        }
        Some(ModelParams::new(alpha0, alphas, betas, gammas, innovation))
    }
}

pub fn fit_mle(spec: &ModelSpec, returns: &[f64]) -> Result<FittedModel> {
    fit_mle_with(spec, returns, &FitOptions::default())
}

pub fn fit_mle_with(spec: &ModelSpec, returns: &[f64], opts: &FitOptions) -> Result<FittedModel> {
    spec.validate()?;
    let k = spec.n_params();
    if returns.len() <= 10 * k {
        return Err(Error::InsufficientData(format!(
            "{} has {k} parameters and needs more than {} returns, got {}",
            spec.label(),
            10 * k,
            returns.len()
        )));
    }
    if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
        return Err(Error::Domain(format!("non-finite return at index {i}")));
    }
    let h_init = sample_variance(returns);
    if !(h_init > 0.0) {
        return Err(Error::Domain("returns have zero variance".into()));
    }

    let transform = Transform { spec: *spec };
    let scratch = RefCell::new(Vec::with_capacity(returns.len()));
    let objective = |th: &[f64]| -> f64 {
        let Some(params) = transform.decode(th) else {
            return f64::INFINITY;
        };
        let Ok(density) = params.innovation.evaluator() else {
            return f64::INFINITY;
        };
        let mut h = scratch.borrow_mut();
        recursion_unchecked(spec, &params, returns, h_init, &mut h);
        if h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return f64::INFINITY;
        }
        let ll = loglik_from_path(&density, returns, &h);
        if ll.is_finite() {
            -ll
        } else {
            f64::INFINITY
        }
    };

    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    for start in starting_points(spec, h_init) {
        let x0 = transform.encode(&start);
        let first = nelder_mead(objective, &x0, &opts.nelder_mead);
        let remaining = opts.nelder_mead.max_iter.saturating_sub(first.iterations);
        let refine = nelder_mead(
            objective,
            &first.x,
            &NelderMeadOptions {
                initial_step: opts.restart_step,
                max_iter: remaining.max(1),
                ..opts.nelder_mead
            },
        );
        let (x, value, converged) = if refine.value <= first.value {
            (refine.x, refine.value, first.converged && refine.converged)
        } else {
            (first.x, first.value, first.converged)
        };
        let iterations = first.iterations + refine.iterations;
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((x, value, iterations, converged));
        }
    }

    let (x, value, iterations, converged) = best.expect("at least one starting point");
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "{}: likelihood is not finite at any starting point",
            spec.label()
        )));
    }
    if !converged {
        warn!(
            "{}: optimizer stopped at the iteration cap; returning best point found",
            spec.label()
        );
    }
    let params = transform.decode(&x).expect("finite optimum decodes");
    let mut fitted = FittedModel::from_params(*spec, params, returns, h_init)?;
    fitted.converged = converged;
    fitted.iterations = iterations;
    Ok(fitted)
}

/// Smallest BIC, ties broken by smaller `p + q` and then smaller `p`.
pub fn best_by_bic(models: impl IntoIterator<Item = FittedModel>) -> Option<FittedModel> {
    let key = |m: &FittedModel| (m.bic, m.spec.p + m.spec.q, m.spec.p);
    let mut best: Option<FittedModel> = None;
    for m in models {
        let better = best.as_ref().is_none_or(|b| {
            let (kb, km) = (key(b), key(&m));
            km.0 < kb.0 || (km.0 == kb.0 && (km.1, km.2) < (kb.1, kb.2))
        });
        if better {
            best = Some(m);
        }
    }
    best
}

/// Fits every `(p, q)` in `grid` and keeps the [`best_by_bic`] model. For ARCH
/// the `q` entry is ignored.
pub fn select_order(
    family: Family,
    innovation: InnovationKind,
    grid: &[(usize, usize)],
    returns: &[f64],
) -> Result<FittedModel> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty order grid".into()));
    }
    let mut cells: Vec<(usize, usize)> = grid
        .iter()
        .map(|&(p, q)| if family == Family::Arch { (p, 0) } else { (p, q) })
        .collect();
    cells.sort_unstable();
    cells.dedup();

    let fits: Vec<Result<FittedModel>> = cells
        .par_iter()
        .map(|&(p, q)| {
            let spec = ModelSpec::new(family, p, q, innovation)?;
            fit_mle(&spec, returns)
        })
        .collect();

    let mut ok = Vec::new();
    let mut last_err = None;
    for (cell, fit) in cells.iter().zip(fits) {
        match fit {
            Ok(m) => ok.push(m),
            Err(e) => {
                warn!("{} {cell:?} failed: {e}", family.name());
                last_err = Some(e);
            }
        }
    }
    let best = best_by_bic(ok);
    best.ok_or_else(|| {
        Error::Numerical(format!(
            "every {} order failed; last error: {}",
            family.name(),
            last_err.map(|e| e.to_string()).unwrap_or_default()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch_family::{log_likelihood, simulate};

    const N: InnovationKind = InnovationKind::Normal;

    #[test]
    fn transform_round_trips() {
        let cases = [
            (
                ModelSpec::gjr(2, 1, InnovationKind::SkewStudentT).unwrap(),
                ModelParams::new(
                    3e-6,
                    vec![0.03],
                    vec![0.5, 0.3],
                    vec![0.1],
                    InnovationDist::SkewStudentT { nu: 7.0, lambda: -0.2 },
                ),
            ),
            (
                ModelSpec::egarch(1, 2, InnovationKind::Ged).unwrap(),
                ModelParams::new(
                    -0.4,
                    vec![0.1, 0.05],
                    vec![0.9],
                    vec![-0.3, 0.2],
                    InnovationDist::Ged { nu: 1.3 },
                ),
            ),
        ];
        for (spec, params) in cases {
            let t = Transform { spec };
            let back = t.decode(&t.encode(&params)).unwrap();
            let a = t.encode(&params);
            let b = t.encode(&back);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
            assert!((back.alpha0 - params.alpha0).abs() < 1e-12);
        }
    }

    #[test]
    fn starting_points_are_valid() {
        for family in Family::ALL {
            for kind in InnovationKind::ALL {
                let spec = ModelSpec::new(family, 2, 3, kind).unwrap();
                let starts = starting_points(&spec, 1e-4);
                assert_eq!(starts.len(), 3);
                for s in starts {
                    s.validate(&spec).unwrap();
                    if family != Family::Egarch {
                        assert!(s.persistence(family) < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_short_series() {
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        assert!(matches!(
            fit_mle(&spec, &[0.01; 30]),
            Err(Error::InsufficientData(_))
        ));
    }

    fn garch_sample(seed: u64, n: usize) -> Vec<f64> {
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let params = ModelParams::normal(5e-6, vec![0.10], vec![0.85]);
        simulate(&spec, &params, n, seed).unwrap().values().to_vec()
    }

    #[test]
    fn fit_improves_on_start_and_is_deterministic() {
        let r = garch_sample(1, 1500);
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let a = fit_mle(&spec, &r).unwrap();
        let b = fit_mle(&spec, &r).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
        let h_init = sample_variance(&r);
        for s in starting_points(&spec, h_init) {
            let ll0 = log_likelihood(&spec, &s, &r, h_init).unwrap();
            assert!(a.loglik >= ll0);
        }
        let (ll, aic, bic) = information_criteria(&a);
        assert_eq!(ll, a.loglik);
        assert_eq!(aic, a.aic);
        assert_eq!(bic, a.bic);
        assert_eq!(a.in_sample_h.len(), r.len());
    }

    #[test]
    fn optimum_beats_true_parameters() {
        let r = garch_sample(4, 2000);
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let fit = fit_mle(&spec, &r).unwrap();
        let truth = ModelParams::normal(5e-6, vec![0.10], vec![0.85]);
        let ll_true = log_likelihood(&spec, &truth, &r, fit.h_init).unwrap();
        assert!(fit.loglik >= ll_true - 1e-6, "{} < {}", fit.loglik, ll_true);
    }

    #[test]
    fn iid_normal_data_has_small_alpha() {
        let r: Vec<f64> = InnovationDist::Normal
            .sample(8, 3000)
            .unwrap()
            .iter()
            .map(|z| 0.01 * z)
            .collect();
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let fit = fit_mle(&spec, &r).unwrap();
        let var = sample_variance(&r);
        assert!(fit.params.alphas[0] < 0.03, "alpha {}", fit.params.alphas[0]);
        let uncond = fit.params.alpha0 / (1.0 - fit.params.alphas[0] - fit.params.betas[0]);
        assert!((uncond / var - 1.0).abs() < 0.1, "{uncond} vs {var}");
    }

    #[test]
    fn nested_arch_likelihood() {
        let r = garch_sample(2, 1200);
        let a1 = fit_mle(&ModelSpec::arch(1, N).unwrap(), &r).unwrap();
        let a2 = fit_mle(&ModelSpec::arch(2, N).unwrap(), &r).unwrap();
        assert!(a2.loglik >= a1.loglik - 1e-6);
    }

    #[test]
    fn information_criteria_formula() {
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let m = FittedModel {
            spec,
            params: ModelParams::normal(1.0, vec![0.0], vec![0.0]),
            loglik: 0.0,
            aic: 0.0,
            bic: 0.0,
            n_obs: 100,
            h_init: 1.0,
            converged: true,
            iterations: 0,
            in_sample_h: vec![],
        };
        let (ll, aic, bic) = information_criteria(&m);
        assert_eq!(ll, 0.0);
        assert_eq!(aic, 6.0);
        assert!((bic - 3.0 * 100f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_cell_grid() {
        let r = garch_sample(3, 800);
        let m = select_order(Family::Gjr, N, &[(2, 1)], &r).unwrap();
        assert_eq!((m.spec.p, m.spec.q), (2, 1));
        assert!(select_order(Family::Garch, N, &[], &r).is_err());
    }

    #[test]
    fn every_family_and_innovation_fits() {
        let r = garch_sample(5, 1000);
        for family in Family::ALL {
            for kind in InnovationKind::ALL {
                let spec = ModelSpec::new(family, 1, 1, kind).unwrap();
                let fit = fit_mle(&spec, &r).unwrap();
                fit.params.validate(&spec).unwrap();
                assert!(fit.loglik.is_finite());
                assert!(fit.in_sample_h.iter().all(|h| *h > 0.0));
                if family != Family::Egarch {
                    assert!(fit.params.persistence(family) < 1.0);
                }
            }
        }
    }

    #[test]
    fn fitted_model_serializes() {
        let r = garch_sample(6, 600);
        let fit = fit_mle(&ModelSpec::garch(1, 1, InnovationKind::StudentT).unwrap(), &r).unwrap();
        let json = serde_json::to_value(&fit).unwrap();
        assert!(json.get("loglik").is_some());
        assert!(json.get("bic").is_some());
        assert!(json.get("in_sample_h").is_none());
        let back: FittedModel = serde_json::from_value(json).unwrap();
        assert_eq!(back.params, fit.params);
    }

    #[test]
    fn segment_criteria_is_a_difference_of_prefix_likelihoods() {
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let truth = ModelParams::normal(5e-6, vec![0.1], vec![0.85]);
        let r = simulate(&spec, &truth, 400, 3).unwrap();
        let r = r.values();
        let m = fit_mle(&spec, &r[..300]).unwrap();

        let (ll, aic, bic) = segment_criteria(&m, r, 0..300).unwrap();
        let (ll0, aic0, bic0) = information_criteria(&m);
        assert!((ll - ll0).abs() < 1e-9 * ll0.abs());
        assert!((aic - aic0).abs() < 1e-9 * aic0.abs() && (bic - bic0).abs() < 1e-9 * bic0.abs());

        let whole = log_likelihood(&spec, &m.params, r, m.h_init).unwrap();
        let head = log_likelihood(&spec, &m.params, &r[..300], m.h_init).unwrap();
        let (ll, aic, bic) = segment_criteria(&m, r, 300..400).unwrap();
        assert!((ll - (whole - head)).abs() < 1e-9 * whole.abs());
        assert!((aic - (6.0 - 2.0 * ll)).abs() < 1e-12 * aic.abs());
        assert!((bic - (3.0 * 100f64.ln() - 2.0 * ll)).abs() < 1e-12 * bic.abs());

        assert!(segment_criteria(&m, r, 300..401).is_err());
        assert!(segment_criteria(&m, r, 5..5).is_err());
    }

    #[test]
    fn best_by_bic_breaks_ties_by_order() {
        let spec = ModelSpec::garch(1, 1, N).unwrap();
        let truth = ModelParams::normal(5e-6, vec![0.1], vec![0.85]);
        let r = simulate(&spec, &truth, 300, 4).unwrap();
        let base = fit_mle(&spec, r.values()).unwrap();
        let with = |p: usize, q: usize, bic: f64| {
            let mut m = base.clone();
            m.spec = ModelSpec::garch(p, q, N).unwrap();
            m.bic = bic;
            m
        };
        let pick = |ms: Vec<FittedModel>| {
            let b = best_by_bic(ms).unwrap();
            (b.spec.p, b.spec.q)
        };
        assert_eq!(pick(vec![with(2, 2, -10.0), with(3, 1, -11.0)]), (3, 1));
        assert_eq!(pick(vec![with(2, 2, -10.0), with(1, 2, -10.0), with(2, 1, -10.0)]), (1, 2));
        assert_eq!(pick(vec![with(2, 1, -10.0), with(1, 2, -10.0)]), (1, 2));
        assert!(best_by_bic(Vec::new()).is_none());
    }

}
