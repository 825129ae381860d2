//! The feature bank: one column of one-step variance forecasts per fitted
//! model plus a constant bias column, and cosine-correlation based selection.

use std::ops::Range;

use chrono::NaiveDate;
use log::warn;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arch_family::{fit_mle, forecast_path, Family, FittedModel, ModelSpec};
use crate::error::{Error, Result};
use crate::innovations::InnovationKind;
use crate::market_data::{csv_field, ReturnSeries, SplitSpec};

/// Row-major `T × (N + 1)` matrix; the last column is the constant bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    column_labels: Vec<String>,
    dates: Vec<NaiveDate>,
}

impl FeatureMatrix {
    /// Assembles the matrix from prediction columns and appends the bias.
    pub fn from_columns(
        labels: Vec<String>,
        columns: &[Vec<f64>],
        dates: Vec<NaiveDate>,
    ) -> Result<Self> {
        if labels.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        let n_rows = dates.len();
        for (l, c) in labels.iter().zip(columns) {
            if c.len() != n_rows {
                return Err(Error::Dimension(format!(
                    "column {l} has {} rows, expected {n_rows}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("column {l} has non-finite entries")));
            }
        }
        let width = columns.len() + 1;
        let mut values = Vec::with_capacity(n_rows * width);
        for t in 0..n_rows {
            values.extend(columns.iter().map(|c| c[t]));
            values.push(1.0);
        }
        Ok(Self {
            values,
            n_rows,
            column_labels: labels,
            dates,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Prediction columns, excluding the bias.
    pub fn n_features(&self) -> usize {
        self.column_labels.len()
    }

    pub fn width(&self) -> usize {
        self.n_features() + 1
    }

    pub fn labels(&self) -> &[String] {
        &self.column_labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    /// Row `t` including the trailing bias entry.
    pub fn row(&self, t: usize) -> &[f64] {
        let w = self.width();
        &self.values[t * w..(t + 1) * w]
    }

    /// Prediction entries of row `t` (no bias).
    pub fn features(&self, t: usize) -> &[f64] {
        let w = self.width();
        &self.values[t * w..(t + 1) * w - 1]
    }

    /// Prediction rows (no bias) as owned vectors.
    pub fn feature_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows).map(|t| self.features(t).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|t| self.row(t)[j]).collect()
    }

    pub fn rows(&self, range: Range<usize>) -> FeatureMatrix {
        let w = self.width();
        FeatureMatrix {
            values: self.values[range.start * w..range.end * w].to_vec(),
            n_rows: range.len(),
            column_labels: self.column_labels.clone(),
            dates: self.dates[range].to_vec(),
        }
    }

    /// Keeps the listed prediction columns (in the given order) and the bias.
    pub fn select_columns(&self, idx: &[usize]) -> Result<FeatureMatrix> {
        if let Some(&j) = idx.iter().find(|&&j| j >= self.n_features()) {
            return Err(Error::Dimension(format!(
                "feature index {j} out of range for {} features",
                self.n_features()
            )));
        }
        let columns: Vec<Vec<f64>> = idx.iter().map(|&j| self.column(j)).collect();
        let labels = idx.iter().map(|&j| self.column_labels[j].clone()).collect();
        FeatureMatrix::from_columns(labels, &columns, self.dates.clone())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("date");
        for l in &self.column_labels {
            s.push(',');
            s.push_str(&csv_field(l));
        }
        s.push_str(",bias\n");
        for t in 0..self.n_rows {
            s.push_str(&self.dates[t].to_string());
            for v in self.row(t) {
                s.push_str(&format!(",{v:e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// The 90-model default bank: ARCH(1..10), and GARCH, EGARCH, GJR at
/// (1,1), (2,1), (1,2), (2,2), each under all four innovations, plus
/// GARCH-N(3,3) and GJR-N(3,3).
pub fn default_bank() -> Vec<ModelSpec> {
    let mut specs = Vec::with_capacity(90);
    for kind in InnovationKind::ALL {
        for p in 1..=10 {
            specs.push(ModelSpec::arch(p, kind).expect("valid order"));
        }
    }
    for family in [Family::Garch, Family::Egarch, Family::Gjr] {
        for kind in InnovationKind::ALL {
            for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
                specs.push(ModelSpec::new(family, p, q, kind).expect("valid order"));
            }
        }
    }
    specs.push(ModelSpec::garch(3, 3, InnovationKind::Normal).expect("valid order"));
    specs.push(ModelSpec::gjr(3, 3, InnovationKind::Normal).expect("valid order"));
    specs
}

#[derive(Debug, Clone)]
pub struct FeatureBank {
    pub matrix: FeatureMatrix,
    pub models: Vec<FittedModel>,
    /// Specs whose fit failed, with the reason.
    pub dropped: Vec<(String, String)>,
}

/// Fits every spec on the training returns and predicts the whole series with
/// frozen parameters. Failed specs are dropped with a warning.
pub fn build_feature_bank(
    returns: &ReturnSeries,
    split: SplitSpec,
    specs: &[ModelSpec],
) -> Result<FeatureBank> {
    if split.total() != returns.len() {
        return Err(Error::Dimension(format!(
            "split covers {} observations, series has {}",
            split.total(),
            returns.len()
        )));
    }
    if specs.is_empty() {
        return Err(Error::InvalidParameter("empty model bank".into()));
    }
    let train = &returns.values()[split.train_range()];
    let fits: Vec<Result<FittedModel>> = specs.par_iter().map(|spec| fit_mle(spec, train)).collect();
    assemble_bank(returns, specs, fits)
}

/// Builds the bank from models already fitted on the training range; `fits[i]`
/// belongs to `specs[i]`. Failed fits are recorded in `dropped`.
pub fn assemble_bank(
    returns: &ReturnSeries,
    specs: &[ModelSpec],
    fits: Vec<Result<FittedModel>>,
) -> Result<FeatureBank> {
    if specs.len() != fits.len() {
        return Err(Error::Dimension(format!(
            "{} specs but {} fits",
            specs.len(),
            fits.len()
        )));
    }
    let full = returns.values();
    let results: Vec<Result<(FittedModel, Vec<f64>)>> = fits
        .into_par_iter()
        .map(|fit| {
            let model = fit?;
            let path = forecast_path(&model, full, 0)?;
            Ok((model, path))
        })
        .collect();

    let mut models = Vec::new();
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for (spec, res) in specs.iter().zip(results) {
        match res {
            Ok((model, path)) => {
                labels.push(spec.label());
                columns.push(path);
                models.push(model);
            }
            Err(e) => {
                warn!("dropping {} from the bank: {e}", spec.label());
                dropped.push((spec.label(), e.to_string()));
            }
        }
    }
    if models.is_empty() {
        return Err(Error::Numerical("every model in the bank failed to fit".into()));
    }
    let matrix = FeatureMatrix::from_columns(labels, &columns, returns.dates().to_vec())?;
    Ok(FeatureBank {
        matrix,
        models,
        dropped,
    })
}

pub fn cosine(x1: &[f64], x2: &[f64]) -> Result<f64> {
    if x1.len() != x2.len() {
        return Err(Error::Dimension(format!(
            "cosine of vectors of length {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    let dot: f64 = x1.iter().zip(x2).map(|(a, b)| a * b).sum();
    let n1 = x1.iter().map(|a| a * a).sum::<f64>().sqrt();
    let n2 = x2.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Domain("cosine of a zero vector".into()));
    }
    Ok(dot / (n1 * n2))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn from_values(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries for a {n}×{n} matrix",
                values.len()
            )));
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    /// Mean of row `i` without the diagonal.
    pub fn off_diagonal_mean(&self, i: usize) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        (0..n).filter(|&j| j != i).map(|j| self.get(i, j)).sum::<f64>() / (n - 1) as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature");
        for l in &self.labels {
            s.push(',');
            s.push_str(&csv_field(l));
        }
        s.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            s.push_str(&csv_field(l));
            for j in 0..self.len() {
                s.push_str(&format!(",{:.6}", self.get(i, j)));
            }
            s.push('\n');
        }
        s
    }
}

/// Cosine correlation between prediction columns over `rows` (the bias is left out).
pub fn correlation_matrix(x: &FeatureMatrix, rows: Range<usize>) -> Result<CorrelationMatrix> {
    let n = x.n_features();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "correlation matrix needs at least two features, got {n}"
        )));
    }
    if rows.end > x.n_rows() || rows.is_empty() {
        return Err(Error::Dimension(format!(
            "row range {rows:?} invalid for {} rows",
            x.n_rows()
        )));
    }
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j)[rows.clone()].to_vec()).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let c = cosine(&cols[i], &cols[j])
                .map_err(|e| Error::Domain(format!("{} vs {}: {e}", x.labels()[i], x.labels()[j])))?
                .clamp(-1.0, 1.0);
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    CorrelationMatrix::from_values(x.labels().to_vec(), values)
}

/// Indices whose mean off-diagonal correlation is below `threshold`.
pub fn select_features(c: &CorrelationMatrix, threshold: f64) -> Vec<usize> {
    (0..c.len())
        .filter(|&i| c.off_diagonal_mean(i) < threshold)
        .collect()
}

/// `k` distinct feature indices drawn uniformly from `0..n` with a seeded RNG,
/// returned in ascending order.
pub fn random_subset(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {k} features out of {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, n, k).into_vec();
    idx.sort_unstable();
    Ok(idx)
}
