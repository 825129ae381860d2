//! Efficiency-ratio augmentation of variance forecasts.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::rmse;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Add `σ · e_t` as written.
    Raw,
    /// Add `σ · std(in-sample proxy) · e_t`.
    #[default]
    ProxyStd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub window: usize,
    pub sigma: f64,
    pub scale_mode: ScaleMode,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            window: 15,
            sigma: 0.1,
            scale_mode: ScaleMode::ProxyStd,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidParameter("augmentation window must be at least 1".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "augmentation sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// `e_t = (h_{t−1} − h_{t−1−M}) / Σ_{i=1..M} |h_{t−i} − h_{t−1−i}|`, reading
/// only entries before `t`. A flat window gives 0.
pub fn effective_ratio(h: &[f64], m: usize, t: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if t < m + 1 || t > h.len() {
        return Err(Error::InsufficientData(format!(
            "efficiency ratio at t={t} with M={m} needs h[{}..{t}] (series length {})",
            t.saturating_sub(m + 1),
            h.len()
        )));
    }
    let w = &h[t - 1 - m..t];
    let steps = || w.windows(2).map(|p| p[1] - p[0]);
    let path: f64 = steps().map(f64::abs).sum();
    if path == 0.0 {
        return Ok(0.0);
    }
    // Rounding in the two sums can push a monotone window off ±1.
    if steps().all(|d| d >= 0.0) {
        return Ok(1.0);
    }
    if steps().all(|d| d <= 0.0) {
        return Ok(-1.0);
    }
    Ok(((w[m] - w[0]) / path).clamp(-1.0, 1.0))
}

/// Sample standard deviation of the defined proxy values in `range`.
pub fn proxy_std(proxy: &[Option<f64>], range: Range<usize>) -> Result<f64> {
    let vals: Vec<f64> = proxy[range].iter().flatten().copied().collect();
    if vals.len() < 2 {
        return Err(Error::InsufficientData(
            "proxy scale needs at least two defined values".into(),
        ));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    Ok((vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

/// The additive multiplier on `e_t` for this config; `in_sample` is the range
/// of proxy entries used by the `proxy_std` mode.
pub fn effective_sigma(
    cfg: &AugmentConfig,
    proxy: &[Option<f64>],
    in_sample: Range<usize>,
) -> Result<f64> {
    cfg.validate()?;
    Ok(match cfg.scale_mode {
        ScaleMode::Raw => cfg.sigma,
        ScaleMode::ProxyStd => cfg.sigma * proxy_std(proxy, in_sample)?,
    })
}

/// `base[i]` is the forecast for time `start + i`; returns
/// `base[i] + σ_eff · e_{start+i}(M)` with `e` taken over the realized proxy.
pub fn augment(
    base: &[f64],
    proxy: &[Option<f64>],
    start: usize,
    cfg: &AugmentConfig,
    sigma_eff: f64,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let m = cfg.window;
    if start < m + 1 {
        return Err(Error::InsufficientData(format!(
            "forecasts from t={start} leave no room for a {m}-step history"
        )));
    }
    let end = start + base.len();
    if end - 1 > proxy.len() {
        return Err(Error::InsufficientData(format!(
            "proxy has {} entries, forecasts reach t={}",
            proxy.len(),
            end - 1
        )));
    }
    let lo = start - m - 1;
    let hist: Vec<f64> = proxy[lo..end - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                Error::InsufficientData(format!("proxy undefined at t={} inside the history", lo + i))
            })
        })
        .collect::<Result<_>>()?;
    base.iter()
        .enumerate()
        .map(|(i, b)| Ok(b + sigma_eff * effective_ratio(&hist, m, start + i - lo)?))
        .collect()
}

/// Picks the `(M, σ)` pair with the lowest RMSE of the augmented forecasts
/// against `target`. Ties keep the earlier candidate.
pub fn tune(
    base: &[f64],
    target: &[f64],
    proxy: &[Option<f64>],
    start: usize,
    in_sample: Range<usize>,
    candidates: &[AugmentConfig],
) -> Result<(AugmentConfig, f64)> {
    let mut best: Option<(AugmentConfig, f64)> = None;
    for c in candidates {
        let s = effective_sigma(c, proxy, in_sample.clone())?;
        let score = rmse(target, &augment(base, proxy, start, c, s)?)?;
        if best.is_none_or(|(_, b)| score < b) {
            best = Some((*c, score));
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no augmentation candidates".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn some(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn monotone_windows_are_unit() {
        let up: Vec<f64> = (0..20).map(|i| (i as f64).powf(1.3)).collect();
        assert_eq!(effective_ratio(&up, 15, 20).unwrap(), 1.0);
        let down: Vec<f64> = up.iter().rev().copied().collect();
        assert_eq!(effective_ratio(&down, 15, 17).unwrap(), -1.0);
    }

    #[test]
    fn alternating_window() {
        let h = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        // t = 6: numerator h5 − h1 = 2 − 2 = 0; t = 5: h4 − h0 = 0
        assert_eq!(effective_ratio(&h, 4, 6).unwrap(), 0.0);
        let h = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 3.0];
        // t = 7: (h6 − h2) / (|1| + |1| + |1| + |1|) = 2 / 4
        assert_eq!(effective_ratio(&h, 4, 7).unwrap(), 0.5);
        let h = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        // M = 3, t = 6: (h5 − h2) / 3 = 1 / 3
        assert!((effective_ratio(&h, 3, 6).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn flat_and_short_windows() {
        assert_eq!(effective_ratio(&[2.0; 10], 5, 8).unwrap(), 0.0);
        assert!(effective_ratio(&[1.0; 10], 5, 5).is_err());
        assert!(effective_ratio(&[1.0; 10], 5, 11).is_err());
        assert!(effective_ratio(&[1.0; 10], 0, 5).is_err());
    }

    #[test]
    fn zero_sigma_is_identity() {
        let proxy = some(&(0..40).map(|i| (i as f64 * 0.7).sin().abs()).collect::<Vec<_>>());
        let base: Vec<f64> = (0..20).map(|i| 0.1 * i as f64 + 0.013).collect();
        let cfg = AugmentConfig { sigma: 0.0, ..Default::default() };
        let s = effective_sigma(&cfg, &proxy, 0..20).unwrap();
        assert_eq!(augment(&base, &proxy, 20, &cfg, s).unwrap(), base);
    }

    #[test]
    fn flat_proxy_leaves_base_alone() {
        let proxy = some(&[3.0; 40]);
        let base = vec![1.0, 2.0, 3.0];
        let cfg = AugmentConfig { scale_mode: ScaleMode::Raw, ..Default::default() };
        assert_eq!(augment(&base, &proxy, 30, &cfg, 0.1).unwrap(), base);
    }

    #[test]
    fn rising_proxy_adds_scaled_sigma() {
        let vals: Vec<f64> = (0..60).map(|i| 1e-4 * (1.0 + i as f64 / 10.0)).collect();
        let proxy = some(&vals);
        let cfg = AugmentConfig::default();
        let sd = proxy_std(&proxy, 0..30).unwrap();
        let s = effective_sigma(&cfg, &proxy, 0..30).unwrap();
        assert_eq!(s, 0.1 * sd);
        let base = vec![2e-4; 20];
        let out = augment(&base, &proxy, 30, &cfg, s).unwrap();
        for v in out {
            assert_eq!(v, 2e-4 + 0.1 * sd);
        }
    }

    #[test]
    fn augment_errors() {
        let mut proxy = some(&[1.0; 30]);
        let cfg = AugmentConfig { window: 5, ..Default::default() };
        assert!(augment(&[1.0], &proxy, 5, &cfg, 0.1).is_err());
        assert!(augment(&[1.0; 5], &proxy, 28, &cfg, 0.1).is_err());
        proxy[10] = None;
        assert!(augment(&[1.0], &proxy, 14, &cfg, 0.1).is_err());
        assert!(augment(&[1.0], &proxy, 18, &cfg, 0.1).is_ok());
        let bad = AugmentConfig { sigma: -0.1, ..cfg };
        assert!(augment(&[1.0], &proxy, 18, &bad, 0.1).is_err());
    }

    #[test]
    fn tune_picks_helpful_sigma() {
        let vals: Vec<f64> = (0..80).map(|i| 1.0 + 0.05 * i as f64).collect();
        let proxy = some(&vals);
        let base: Vec<f64> = vals[40..60].iter().map(|v| v - 0.05).collect();
        let target = &vals[40..60];
        let cands: Vec<AugmentConfig> = [0.0, 0.05, 0.5]
            .iter()
            .map(|&sigma| AugmentConfig { window: 5, sigma, scale_mode: ScaleMode::Raw })
            .collect();
        let (best, score) = tune(&base, target, &proxy, 40, 0..40, &cands).unwrap();
        assert_eq!(best.sigma, 0.05);
        assert!(score < 1e-12);
    }

    #[test]
    fn longer_windows_shrink_the_ratio_on_a_random_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut walk = vec![0.0f64];
        for _ in 0..5000 {
            let step: f64 = StandardNormal.sample(&mut rng);
            walk.push(walk.last().unwrap() + step);
        }
        let median_abs = |m: usize| {
            let mut v: Vec<f64> = (60..walk.len())
                .map(|t| effective_ratio(&walk, m, t).unwrap().abs())
                .collect();
            v.sort_by(f64::total_cmp);
            v[v.len() / 2]
        };
        assert!(median_abs(50) < median_abs(5));
    }

    proptest! {
        #[test]
        fn ratio_is_bounded_and_causal(
            h in prop::collection::vec(-1e3f64..1e3, 3..80), m in 1usize..30, extra in -1e3f64..1e3,
        ) {
            prop_assume!(h.len() > m + 1);
            for t in m + 1..=h.len() {
                let e = effective_ratio(&h, m, t).unwrap();
                prop_assert!(e.abs() <= 1.0);
                let mut longer = h[..t].to_vec();
                longer.push(extra);
                prop_assert_eq!(e, effective_ratio(&longer, m, t).unwrap());
            }
        }

        #[test]
        fn augmentation_is_additive(
            p in prop::collection::vec(0.0f64..1.0, 40), a in prop::collection::vec(0.0f64..1.0, 10),
            b in prop::collection::vec(0.0f64..1.0, 10), sigma in 0.0f64..1.0,
        ) {
            let proxy = some(&p);
            let cfg = AugmentConfig { window: 7, sigma, scale_mode: ScaleMode::Raw };
            let aa = augment(&a, &proxy, 25, &cfg, sigma).unwrap();
            let bb = augment(&b, &proxy, 25, &cfg, sigma).unwrap();
            for i in 0..10 {
                prop_assert!(((aa[i] - a[i]) - (bb[i] - b[i])).abs() < 1e-15);
            }
        }
    }
}
