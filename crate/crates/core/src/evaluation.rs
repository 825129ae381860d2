//! Realized-variance proxy, error metrics and the Diebold-Mariano test.

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::market_data::csv_field;

/// Width of the realized-variance window.
pub const PROXY_WINDOW: usize = 5;

/// `h̃_t = (1/5) Σ_{i=0..4} r²_{t−i}`. The first four entries are `None`.
pub fn realized_vol_proxy(returns: &[f64]) -> Result<Vec<Option<f64>>> {
    if returns.len() < PROXY_WINDOW {
        return Err(Error::InsufficientData(format!(
            "realized proxy needs at least {PROXY_WINDOW} returns, got {}",
            returns.len()
        )));
    }
    let mut out = vec![None; PROXY_WINDOW - 1];
    out.extend(
        returns
            .windows(PROXY_WINDOW)
            .map(|w| Some(w.iter().map(|r| r * r).sum::<f64>() / PROXY_WINDOW as f64)),
    );
    Ok(out)
}

fn check_pair(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::Dimension(format!(
            "{} observations vs {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    Ok(())
}

pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let sae: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sae / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmResult {
    pub stat: f64,
    pub p_value: f64,
    /// `N − 1` autocovariance lags, `N = ⌊T^{1/3}⌋ + 1`.
    pub n_lags: usize,
    pub mean_diff: f64,
    /// Set when the two forecasts incur identical losses at every point.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DmOptions {
    /// Harvey-Leybourne-Newbold small-sample correction (horizon 1) with a
    /// Student-t reference distribution.
    pub harvey_correction: bool,
}

/// Two-sided Diebold-Mariano test on absolute-error losses,
/// `d_i = |f_i − y_i| − |g_i − y_i|`. Positive statistics mean `f` is worse.
pub fn dm_test(y: &[f64], f: &[f64], g: &[f64]) -> Result<DmResult> {
    dm_test_with(y, f, g, DmOptions::default())
}

pub fn dm_test_with(y: &[f64], f: &[f64], g: &[f64], opts: DmOptions) -> Result<DmResult> {
    check_pair(y, f)?;
    check_pair(y, g)?;
    let t = y.len();
    if t < 8 {
        return Err(Error::InsufficientData(format!(
            "DM test needs at least 8 observations, got {t}"
        )));
    }
    let n = (t as f64).cbrt().floor() as usize + 1;
    let n_lags = n - 1;
    let d: Vec<f64> = y
        .iter()
        .zip(f)
        .zip(g)
        .map(|((yi, fi), gi)| (fi - yi).abs() - (gi - yi).abs())
        .collect();
    if d.iter().all(|v| *v == 0.0) {
        return Ok(DmResult {
            stat: 0.0,
            p_value: 1.0,
            n_lags,
            mean_diff: 0.0,
            degenerate: true,
        });
    }
    let tf = t as f64;
    let mean_diff = d.iter().sum::<f64>() / tf;
    let autocov = |k: usize| {
        (k..t)
            .map(|i| (d[i] - mean_diff) * (d[i - k] - mean_diff))
            .sum::<f64>()
            / tf
    };
    let long_run = autocov(0) + 2.0 * (1..n).map(autocov).sum::<f64>();
    if !(long_run > 0.0) {
        return Err(Error::Numerical(format!(
            "DM long-run variance estimate is {long_run} (T={t}, lags={n_lags}, mean diff {mean_diff})"
        )));
    }
    let mut stat = mean_diff / (long_run / tf).sqrt();
    let p_value = if opts.harvey_correction {
        // horizon h = 1: sqrt((T + 1 - 2h + h(h-1)/T) / T)
        stat *= ((tf - 1.0) / tf).sqrt();
        let dist = StudentsT::new(0.0, 1.0, tf - 1.0).expect("valid t");
        2.0 * dist.sf(stat.abs())
    } else {
        2.0 * Normal::standard().sf(stat.abs())
    };
    Ok(DmResult {
        stat,
        p_value: p_value.clamp(0.0, 1.0),
        n_lags,
        mean_diff,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub name: String,
    pub rmse: f64,
    pub mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmRow {
    pub name: String,
    pub dm_stat: f64,
    pub p_value: f64,
    pub degenerate: bool,
    /// Why the statistic is missing (NaN), when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scores: Vec<ScoreRow>,
    pub benchmark: String,
    pub dm: Vec<DmRow>,
}

impl EvalReport {
    pub fn score(&self, name: &str) -> Option<&ScoreRow> {
        self.scores.iter().find(|r| r.name == name)
    }

    /// `model,rmse_e-3,mae_e-3` rows, errors scaled by 10³.
    pub fn scores_csv(&self) -> String {
        let mut s = String::from("model,rmse_e-3,mae_e-3\n");
        for r in &self.scores {
            s.push_str(&format!("{},{:.6},{:.6}\n", csv_field(&r.name), r.rmse * 1e3, r.mae * 1e3));
        }
        s
    }

    /// `model,dm_stat,p_value` rows against the benchmark.
    pub fn dm_csv(&self) -> String {
        let mut s = String::from("model,dm_stat,p_value\n");
        for r in &self.dm {
            s.push_str(&format!("{},{:.6},{:.6}\n", csv_field(&r.name), r.dm_stat, r.p_value));
        }
        s
    }
}

/// Scores every forecast against `y` and runs the DM test of each one against
/// `benchmark`. All forecasts must cover exactly the index set of `y`.
pub fn evaluate(
    y: &[f64],
    forecasts: &[(String, Vec<f64>)],
    benchmark: &str,
    opts: DmOptions,
) -> Result<EvalReport> {
    let mut scores = Vec::with_capacity(forecasts.len());
    for (name, f) in forecasts {
        scores.push(ScoreRow {
            name: name.clone(),
            rmse: rmse(y, f)?,
            mae: mae(y, f)?,
        });
    }
    let bench = forecasts
        .iter()
        .find(|(n, _)| n == benchmark)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Config(format!("benchmark model `{benchmark}` not among forecasts")))?;
    let mut dm = Vec::new();
    for (name, f) in forecasts.iter().filter(|(n, _)| n != benchmark) {
        let row = match dm_test_with(y, f, bench, opts) {
            Ok(r) => DmRow {
                name: name.clone(),
                dm_stat: r.stat,
                p_value: r.p_value,
                degenerate: r.degenerate,
                error: None,
            },
            Err(Error::Numerical(msg)) => {
                warn!("DM test of {name} against {benchmark}: {msg}");
                DmRow {
                    name: name.clone(),
                    dm_stat: f64::NAN,
                    p_value: f64::NAN,
                    degenerate: false,
                    error: Some(msg),
                }
            }
            Err(e) => return Err(e),
        };
        dm.push(row);
    }
    Ok(EvalReport {
        scores,
        benchmark: benchmark.to_string(),
        dm,
    })
}
