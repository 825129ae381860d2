use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::ReturnSeries;

use super::recursion::{VarianceStep, EGARCH_CENTER};
use super::{Family, ModelParams, ModelSpec};

const BURN_IN: usize = 500;

fn sim_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date")
}

/// Long-run variance `α₀ / (1 − persistence)`; for EGARCH the exponential of the
/// long-run log variance with `E|z|` taken from the normal distribution.
pub fn unconditional_variance(spec: &ModelSpec, params: &ModelParams) -> Result<f64> {
    params.validate(spec)?;
    let persistence = params.persistence(spec.family);
    match spec.family {
        Family::Egarch => {
            let b_abs: f64 = params.betas.iter().map(|b| b.abs()).sum();
            if b_abs >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{}: Σ|β| = {b_abs} is not stationary",
                    spec.label()
                )));
            }
            let center = if spec.egarch_centered { EGARCH_CENTER } else { 0.0 };
            let shock: f64 = params
                .alphas
                .iter()
                .map(|a| a * (EGARCH_CENTER - center))
                .sum();
            Ok(((params.alpha0 + shock) / (1.0 - persistence)).exp())
        }
        _ => {
            if persistence >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{}: persistence {persistence} is not stationary",
                    spec.label()
                )));
            }
            Ok(params.alpha0 / (1.0 - persistence))
        }
    }
}

/// Simulates `r_t = √h_t · ε_t` after discarding a 500-step burn-in.
pub fn simulate(spec: &ModelSpec, params: &ModelParams, n: usize, seed: u64) -> Result<ReturnSeries> {
    simulate_regimes(spec, std::slice::from_ref(params), n.max(1), n, seed)
}

/// Like [`simulate`] but cycles through `regimes` every `block_len` observations
/// (burn-in uses the first regime). The recursion state carries across switches.
/// Innovations always follow the first regime's distribution.
pub fn simulate_regimes(
    spec: &ModelSpec,
    regimes: &[ModelParams],
    block_len: usize,
    n: usize,
    seed: u64,
) -> Result<ReturnSeries> {
    let first = regimes
        .first()
        .ok_or_else(|| Error::InvalidParameter("no regimes given".into()))?;
    if block_len == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    for r in regimes {
        unconditional_variance(spec, r)?;
    }
    let h_init = unconditional_variance(spec, first)?;
    let steps: Vec<VarianceStep> = regimes
        .iter()
        .map(|p| VarianceStep::new(spec, p, h_init))
        .collect();

    let total = BURN_IN + n;
    let z = first.innovation.sample(seed, total)?;
    let mut r = Vec::with_capacity(total);
    let mut h = Vec::with_capacity(total);
    for t in 0..total {
        let regime = if t < BURN_IN {
            0
        } else {
            ((t - BURN_IN) / block_len) % steps.len()
        };
        let ht = steps[regime].next(t, &r, &h);
        if !(ht.is_finite() && ht > 0.0) {
            return Err(Error::Numerical(format!(
                "{}: simulated variance {ht} at step {t}",
                spec.label()
            )));
        }
        h.push(ht);
        r.push(ht.sqrt() * z[t]);
    }
    ReturnSeries::with_business_days(sim_start_date(), r.split_off(BURN_IN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::InnovationKind;

    #[test]
    fn garch_long_run_variance() {
        let spec = ModelSpec::garch(1, 1, InnovationKind::Normal).unwrap();
        let params = ModelParams::normal(5e-6, vec![0.1], vec![0.85]);
        assert!((unconditional_variance(&spec, &params).unwrap() - 1e-4).abs() < 1e-15);
        let r = simulate(&spec, &params, 100_000, 21).unwrap();
        let v = r.values().iter().map(|x| x * x).sum::<f64>() / r.len() as f64;
        assert!((v / 1e-4 - 1.0).abs() < 0.1, "sample variance {v}");
    }

    #[test]
    fn constant_variance_when_no_dynamics() {
        let spec = ModelSpec::garch(1, 1, InnovationKind::Normal).unwrap();
        let params = ModelParams::normal(2.0, vec![0.0], vec![0.0]);
        let r = simulate(&spec, &params, 200_000, 9).unwrap();
        let v = r.values().iter().map(|x| x * x).sum::<f64>() / r.len() as f64;
        assert!((v / 2.0 - 1.0).abs() < 0.02);
        // lag-1 correlation of squares is ~0 for an i.i.d. sequence
        let x2: Vec<f64> = r.values().iter().map(|x| x * x).collect();
        let m = x2.iter().sum::<f64>() / x2.len() as f64;
        let c1: f64 = x2.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        let c0: f64 = x2.iter().map(|v| (v - m).powi(2)).sum();
        assert!((c1 / c0).abs() < 0.01);
    }

    #[test]
    fn simulation_is_seeded() {
        let spec = ModelSpec::gjr(1, 1, InnovationKind::StudentT).unwrap();
        let params = ModelParams::normal(1e-5, vec![0.05], vec![0.85])
            .with_gammas(vec![0.1])
            .with_innovation(crate::innovations::InnovationDist::StudentT { nu: 6.0 });
        let a = simulate(&spec, &params, 300, 5).unwrap();
        let b = simulate(&spec, &params, 300, 5).unwrap();
        let c = simulate(&spec, &params, 300, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 300);
    }

    #[test]
    fn rejects_non_stationary() {
        let spec = ModelSpec::garch(1, 1, InnovationKind::Normal).unwrap();
        let params = ModelParams::normal(1e-6, vec![0.2], vec![0.85]);
        assert!(simulate(&spec, &params, 10, 1).is_err());
        let e = ModelSpec::egarch(1, 1, InnovationKind::Normal).unwrap();
        let ep = ModelParams::normal(-0.1, vec![0.1], vec![1.01]).with_gammas(vec![0.0]);
        assert!(simulate(&e, &ep, 10, 1).is_err());
    }

    #[test]
    fn regimes_alternate() {
        let spec = ModelSpec::garch(1, 1, InnovationKind::Normal).unwrap();
        let calm = ModelParams::normal(2e-6, vec![0.05], vec![0.90]);
        let wild = ModelParams::normal(6e-5, vec![0.15], vec![0.80]);
        let r = simulate_regimes(&spec, &[calm, wild], 500, 4000, 3).unwrap();
        let block_var = |b: usize| {
            let s = &r.values()[b * 500..(b + 1) * 500];
            s.iter().map(|x| x * x).sum::<f64>() / 500.0
        };
        let calm_avg = (0..8).step_by(2).map(block_var).sum::<f64>() / 4.0;
        let wild_avg = (1..8).step_by(2).map(block_var).sum::<f64>() / 4.0;
        assert!(wild_avg > 5.0 * calm_avg, "{wild_avg} vs {calm_avg}");
    }
}
