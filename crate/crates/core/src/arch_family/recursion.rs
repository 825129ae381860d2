use crate::error::{Error, Result};

use super::{Family, ModelParams, ModelSpec};

/// `E|z|` for a standard normal, subtracted in the centered EGARCH variant.
pub const EGARCH_CENTER: f64 = 0.797_884_560_802_865_4;

/// One-step variance update with pre-sample seeding baked in.
pub(crate) struct VarianceStep<'a> {
    family: Family,
    params: &'a ModelParams,
    h_init: f64,
    ln_h_init: f64,
    center: f64,
}

impl<'a> VarianceStep<'a> {
    pub(crate) fn new(spec: &ModelSpec, params: &'a ModelParams, h_init: f64) -> Self {
        Self {
            family: spec.family,
            params,
            h_init,
            ln_h_init: h_init.ln(),
            center: if spec.egarch_centered { EGARCH_CENTER } else { 0.0 },
        }
    }

    /// `h_t` from returns and variances at indices `< t`.
    #[inline]
    pub(crate) fn next(&self, t: usize, r: &[f64], h: &[f64]) -> f64 {
        let p = self.params;
        match self.family {
            Family::Arch | Family::Garch | Family::Gjr => {
                let mut ht = p.alpha0;
                for (i, &alpha) in p.alphas.iter().enumerate() {
                    let lag = i + 1;
                    let gamma = p.gammas.get(i).copied().unwrap_or(0.0);
                    if t >= lag {
                        let a = r[t - lag];
                        let neg = if a < 0.0 { gamma } else { 0.0 };
                        ht += (alpha + neg) * a * a;
                    } else {
                        ht += (alpha + 0.5 * gamma) * self.h_init;
                    }
                }
                for (i, &beta) in p.betas.iter().enumerate() {
                    let lag = i + 1;
                    ht += beta * if t >= lag { h[t - lag] } else { self.h_init };
                }
                ht
            }
            Family::Egarch => {
                let mut ln_h = p.alpha0;
                for (i, &beta) in p.betas.iter().enumerate() {
                    let lag = i + 1;
                    ln_h += beta * if t >= lag { h[t - lag].ln() } else { self.ln_h_init };
                }
                for (i, (&alpha, &gamma)) in p.alphas.iter().zip(&p.gammas).enumerate() {
                    let lag = i + 1;
                    let term = if t >= lag {
                        let a = r[t - lag];
                        (a.abs() + gamma * a) / h[t - lag].sqrt() - self.center
                    } else {
                        1.0 - self.center
                    };
                    ln_h += alpha * term;
                }
                ln_h.exp()
            }
        }
    }
}

fn check_h_init(h_init: f64) -> Result<()> {
    if h_init.is_finite() && h_init > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "h_init must be positive and finite, got {h_init}"
        )))
    }
}

/// Conditional variances `h_0 .. h_{T-1}`; `h_t` depends on returns before `t` only.
pub fn variance_recursion(
    spec: &ModelSpec,
    params: &ModelParams,
    returns: &[f64],
    h_init: f64,
) -> Result<Vec<f64>> {
    params.validate(spec)?;
    check_h_init(h_init)?;
    let mut h = Vec::with_capacity(returns.len());
    recursion_unchecked(spec, params, returns, h_init, &mut h);
    if let Some(t) = h.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Numerical(format!(
            "{}: variance recursion produced {} at t={t}",
            spec.label(),
            h[t]
        )));
    }
    Ok(h)
}

pub(crate) fn recursion_unchecked(
    spec: &ModelSpec,
    params: &ModelParams,
    returns: &[f64],
    h_init: f64,
    h: &mut Vec<f64>,
) {
    h.clear();
    let step = VarianceStep::new(spec, params, h_init);
    for t in 0..returns.len() {
        let ht = step.next(t, returns, h);
        h.push(ht);
    }
}

/// `Σ_t [ln f(a_t / √h_t) − ½ ln h_t]` with `f` the standardized innovation density.
pub fn log_likelihood(
    spec: &ModelSpec,
    params: &ModelParams,
    returns: &[f64],
    h_init: f64,
) -> Result<f64> {
    let h = variance_recursion(spec, params, returns, h_init)?;
    let density = params.innovation.evaluator()?;
    let ll = loglik_from_path(&density, returns, &h);
    if ll.is_finite() {
        Ok(ll)
    } else {
        Err(Error::Numerical(format!(
            "{}: non-finite log-likelihood",
            spec.label()
        )))
    }
}

#[inline]
pub(crate) fn loglik_from_path(
    density: &crate::innovations::LogDensity,
    returns: &[f64],
    h: &[f64],
) -> f64 {
    returns
        .iter()
        .zip(h)
        .map(|(&a, &ht)| density.eval(a / ht.sqrt()) - 0.5 * ht.ln())
        .sum()
}

/// One-step-ahead variance forecasts for `full_returns[start..]` with the
/// parameters frozen at their fitted values. The recursion state is rolled
/// forward on realized returns, so the forecast at `t` uses returns before `t` only.
pub fn forecast_path(
    model: &super::FittedModel,
    full_returns: &[f64],
    start: usize,
) -> Result<Vec<f64>> {
    if start > full_returns.len() {
        return Err(Error::Dimension(format!(
            "out-of-sample start {start} beyond series length {}",
            full_returns.len()
        )));
    }
    let h = variance_recursion(&model.spec, &model.params, full_returns, model.h_init)?;
    Ok(h[start..].to_vec())
}
