//! End-to-end forecasting run driven by a [`PipelineConfig`].
//!
//! Stages run in order: config, ingest, fit, select, blend, augment, baseline,
//! evaluate, write. Errors carry the stage they came from. Reports are built in
//! memory and written at the end; if writing fails, the files already written
//! are removed.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::arch_family::{
    best_by_bic, fit_mle, forecast_path, segment_criteria, FittedModel, ModelSpec,
};
use crate::augmentation::{augment, effective_sigma};
use crate::blending::{
    linear_blend, mlp_fit, mlp_predict, ols_fit, uniform_blend, MlpConfig, MlpModel,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, realized_vol_proxy, DmOptions, EvalReport};
use crate::feature_bank::{
    assemble_bank, correlation_matrix, random_subset, select_features, CorrelationMatrix,
    FeatureBank,
};
use crate::market_data::{log_returns, read_prices, ReturnSeries, SplitSpec};
use crate::svr_baseline::{eavesdrop, svr_garch_forecast};

pub use config::{
    validate_config, AugmentSection, BankConfig, BlendConfig, BlendMethod, DataConfig,
    EvaluationConfig, PipelineConfig, Problem, SelectionConfig, SingleConfig, SingleGroup,
    SplitConfig, SvrSection, EAVESDROP, MIN_TEST_LEN, SVR_GARCH,
};
use config::PROXY_START;

/// Where a run starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum RunStage {
    /// Fit every model and refresh the fit cache.
    #[default]
    All,
    /// Reuse the cached fits and rerun selection, blending and evaluation.
    Blend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Fit,
    Select,
    Blend,
    Augment,
    Baseline,
    Evaluate,
    Write,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Fit => "fit",
            Stage::Select => "select",
            Stage::Blend => "blend",
            Stage::Augment => "augment",
            Stage::Baseline => "baseline",
            Stage::Evaluate => "evaluate",
            Stage::Write => "write",
        }
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.name(), self.source)
    }
}

impl std::error::Error for PipelineError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl PipelineError {
    /// 2 for configuration errors, 3 for data errors, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.source)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Io { .. } | Error::Parse(_) | Error::InsufficientData(_) | Error::Domain(_) => 3,
        Error::Numerical(_) | Error::Dimension(_) | Error::InvalidParameter(_) => 4,
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: EvalReport,
    /// Every file written, in write order.
    pub artifacts: Vec<PathBuf>,
    /// Test-window forecasts in report order.
    pub forecasts: Vec<(String, Vec<f64>)>,
}

pub fn run_pipeline(cfg: &PipelineConfig) -> std::result::Result<PipelineOutput, PipelineError> {
    run_pipeline_from(cfg, RunStage::All)
}

pub fn run_pipeline_from(
    cfg: &PipelineConfig,
    start: RunStage,
) -> std::result::Result<PipelineOutput, PipelineError> {
    let problems = validate_config(cfg);
    if !problems.is_empty() {
        let list: Vec<String> = problems.iter().map(Problem::to_string).collect();
        return Err(Error::Config(list.join("; "))).at(Stage::Config);
    }
    let bank_specs = cfg.bank.specs().at(Stage::Config)?;
    let groups = cfg.single.groups(cfg.bank.egarch_centered).at(Stage::Config)?;

    // ingest
    let data_path = cfg.data_path();
    let bytes = std::fs::read(&data_path)
        .map_err(|e| Error::Io {
            path: data_path.clone(),
            source: e,
        })
        .at(Stage::Ingest)?;
    let prices = read_prices(bytes.as_slice()).at(Stage::Ingest)?;
    let all_returns = log_returns(&prices).at(Stage::Ingest)?;
    let (offset, split) = cfg.split.resolve(all_returns.len()).at(Stage::Ingest)?;
    let returns = all_returns.slice(offset..all_returns.len());
    info!(
        "{} returns: train {}, validation {}, test {}",
        returns.len(),
        split.train_len,
        split.val_len,
        split.test_len
    );

    // fit
    let mut union: BTreeSet<ModelSpec> = bank_specs.iter().copied().collect();
    for g in &groups {
        union.extend(g.candidates.iter().copied());
    }
    let union: Vec<ModelSpec> = union.into_iter().collect();
    let key = cache_key(&bytes, offset, split, &union);
    let cache_path = cfg.output_path().join(".cache").join(format!("fits-{}.json", &key[..16]));
    let fits = match start {
        RunStage::All => {
            let fits = fit_all(&union, &returns.values()[split.train_range()]);
            if let Err(e) = write_cache(&cache_path, &key, &fits) {
                warn!("could not write the fit cache: {e}");
            }
            fits
        }
        RunStage::Blend => read_cache(&cache_path, &key, &union).at(Stage::Fit)?,
    };
    let by_spec: BTreeMap<ModelSpec, &CachedFit> = fits.iter().map(|f| (f.spec, f)).collect();
    let lookup = |s: &ModelSpec| -> Result<FittedModel> {
        let f = by_spec[s];
        match (&f.model, &f.error) {
            (Some(m), _) => Ok(m.clone()),
            (None, e) => Err(Error::Numerical(e.clone().unwrap_or_default())),
        }
    };
    let bank = assemble_bank(&returns, &bank_specs, bank_specs.iter().map(lookup).collect())
        .at(Stage::Fit)?;
    let mut singles = Vec::new();
    for g in &groups {
        match best_by_bic(g.candidates.iter().filter_map(|s| lookup(s).ok())) {
            Some(m) => singles.push(m),
            None => warn!(
                "no {}-{} order could be fitted; the model is left out of the report",
                g.family.name(),
                g.innovation.tag()
            ),
        }
    }

    // select
    let full = returns.values();
    let train = split.train_range();
    let test = split.test_range();
    let proxy = realized_vol_proxy(full).at(Stage::Select)?;
    let corr = correlation_matrix(&bank.matrix, train.clone()).at(Stage::Select)?;
    let n_feat = bank.matrix.n_features();
    let mut subsets: Vec<(String, Vec<usize>)> = Vec::new();
    for &k in &cfg.selection.random_k {
        if k > n_feat {
            return Err(Error::InsufficientData(format!(
                "K = {k} but only {n_feat} bank models could be fitted"
            )))
            .at(Stage::Select);
        }
        let idx = random_subset(n_feat, k, derive_seed(cfg.seed, &format!("subset/{k}")))
            .at(Stage::Select)?;
        subsets.push((k.to_string(), idx));
    }
    if cfg.selection.correlation {
        let idx = correlation_subset(&corr, cfg.selection.threshold, cfg.selection.min_features);
        subsets.push(("CO".into(), idx));
    }

    // blend
    let fit_rows = PROXY_START.max(train.start)..train.end;
    let target = |r: Range<usize>| -> Vec<f64> {
        proxy[r].iter().map(|v| v.expect("proxy defined after warm-up")).collect()
    };
    let jobs: Vec<(BlendMethod, &(String, Vec<usize>))> = cfg
        .blend
        .methods
        .iter()
        .flat_map(|&m| subsets.iter().map(move |s| (m, s)))
        .collect();
    let blends: Vec<Blend> = jobs
        .par_iter()
        .map(|&(method, (tag, idx))| {
            let name = method.model_name(tag);
            run_blend(cfg, method, &name, &bank, idx, &fit_rows, split, &target)
        })
        .collect::<Result<_>>()
        .at(Stage::Blend)?;

    // augment
    let in_sample = 0..split.in_sample_len();
    let aug_cfg = cfg.augment.config();
    let sigma_eff = if cfg.augment.enabled {
        Some(effective_sigma(&aug_cfg, &proxy, in_sample.clone()).at(Stage::Augment)?)
    } else {
        None
    };
    let augmented: Vec<(String, Vec<f64>)> = match sigma_eff {
        Some(s) => blends
            .iter()
            .map(|b| Ok((format!("a{}", b.name), augment(&b.forecast, &proxy, test.start, &aug_cfg, s)?)))
            .collect::<Result<_>>()
            .at(Stage::Augment)?,
        None => vec![],
    };

    // baselines
    let mut svr_rows = Vec::new();
    let mut svr_manifest = serde_json::Value::Null;
    if cfg.svr.enabled {
        let svr = svr_garch_forecast(full, split, &cfg.svr.grid()).at(Stage::Baseline)?;
        let f: Vec<f64> = svr.forecasts[test.clone()]
            .iter()
            .map(|v| v.expect("SVR-GARCH forecasts are defined past the warm-up"))
            .collect();
        if let Some(s) = sigma_eff {
            let a = augment(&f, &proxy, test.start, &aug_cfg, s).at(Stage::Augment)?;
            svr_rows.push((SVR_GARCH.to_string(), f));
            svr_rows.push((format!("a{SVR_GARCH}"), a));
        } else {
            svr_rows.push((SVR_GARCH.to_string(), f));
        }
        let tuned = |t: &crate::svr_baseline::TunedSvr| {
            json!({
                "c": t.model.hyper.c,
                "epsilon": t.model.hyper.epsilon,
                "gamma": t.model.hyper.gamma,
                "support_vectors": t.model.support_vectors.len(),
                "validation_rmse": t.val_rmse,
            })
        };
        svr_manifest = json!({
            "mean_model": tuned(&svr.mean_model),
            "variance_model": tuned(&svr.variance_model),
        });
    }
    let single_rows: Vec<(String, Vec<f64>)> = singles
        .iter()
        .map(|m| Ok((m.label(), forecast_path(m, full, test.start)?)))
        .collect::<Result<_>>()
        .at(Stage::Baseline)?;
    let defined = target(test.start - 1..test.end);
    let eaves = eavesdrop(&defined).at(Stage::Baseline)?;

    // evaluate
    let floor = |v: Vec<f64>| -> Vec<f64> {
        if cfg.blend.floor {
            v.into_iter().map(|x| x.max(0.0)).collect()
        } else {
            v
        }
    };
    let mut forecasts: Vec<(String, Vec<f64>)> = Vec::new();
    forecasts.extend(blends.iter().map(|b| (b.name.clone(), floor(b.forecast.clone()))));
    forecasts.extend(augmented.into_iter().map(|(n, f)| (n, floor(f))));
    forecasts.extend(svr_rows.into_iter().map(|(n, f)| (n, floor(f))));
    forecasts.extend(single_rows);
    forecasts.push((EAVESDROP.to_string(), eaves));
    let y = target(test.clone());
    let report = evaluate(
        &y,
        &forecasts,
        &cfg.evaluation.benchmark,
        DmOptions {
            harvey_correction: cfg.evaluation.harvey,
        },
    )
    .at(Stage::Evaluate)?;

    // write
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    files.push(("eval_report.csv".into(), report.scores_csv()));
    files.push(("eval_report.json".into(), pretty(&json!({
        "benchmark": report.benchmark,
        "scores": report.scores,
    }))));
    files.push(("dm_report.csv".into(), report.dm_csv()));
    files.push(("dm_report.json".into(), pretty(&json!({
        "benchmark": report.benchmark,
        "loss": "absolute error",
        "harvey_correction": cfg.evaluation.harvey,
        "rows": report.dm,
    }))));
    files.push(("correlation_matrix.csv".into(), corr.to_csv()));
    let dates = &returns.dates()[test.clone()];
    let mut used = BTreeSet::new();
    for (name, f) in &forecasts {
        let file = file_stem(name);
        if !used.insert(file.clone()) {
            return Err(Error::Config(format!("two models share the file name {file}")))
                .at(Stage::Write);
        }
        let mut s = String::from("date,predicted_h,realized_proxy\n");
        for ((d, v), p) in dates.iter().zip(f).zip(&y) {
            s.push_str(&format!("{},{v:e},{p:e}\n", d.format("%Y-%m-%d")));
        }
        files.push((Path::new("forecasts").join(format!("{file}.csv")), s));
    }
    for b in &blends {
        if let Some(m) = &b.mlp {
            let path = Path::new("models").join(format!("{}.json", file_stem(&b.name)));
            files.push((path, pretty(m)));
        }
    }
    let manifest = build_manifest(ManifestInput {
        cfg,
        key: &key,
        returns: &returns,
        offset,
        split,
        singles: &singles,
        bank: &bank,
        subsets: &subsets,
        blends: &blends,
        sigma_eff,
        svr: svr_manifest,
    })
    .at(Stage::Write)?;
    files.push(("manifest.json".into(), pretty(&manifest)));

    let artifacts = write_all(&cfg.output_path(), &files).at(Stage::Write)?;
    info!("wrote {} files to {}", artifacts.len(), cfg.output_path().display());
    Ok(PipelineOutput {
        report,
        artifacts,
        forecasts,
    })
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

struct Blend {
    name: String,
    method: BlendMethod,
    features: Vec<String>,
    /// Raw test-window forecast.
    forecast: Vec<f64>,
    ols: Option<crate::blending::BlendWeights>,
    mlp: Option<MlpModel>,
}

#[allow(clippy::too_many_arguments)]
fn run_blend(
    cfg: &PipelineConfig,
    method: BlendMethod,
    name: &str,
    bank: &FeatureBank,
    idx: &[usize],
    fit_rows: &Range<usize>,
    split: SplitSpec,
    target: &dyn Fn(Range<usize>) -> Vec<f64>,
) -> Result<Blend> {
    let x = bank.matrix.select_columns(idx)?;
    let test = split.test_range();
    let mut out = Blend {
        name: name.to_string(),
        method,
        features: x.labels().to_vec(),
        forecast: vec![],
        ols: None,
        mlp: None,
    };
    match method {
        BlendMethod::Uniform => out.forecast = uniform_blend(&x.rows(test))?,
        BlendMethod::Ols => {
            let w = ols_fit(&x.rows(fit_rows.clone()), &target(fit_rows.clone()))?;
            out.forecast = linear_blend(&x.rows(test), &w)?;
            out.ols = Some(w);
        }
        BlendMethod::Mlp => {
            let mlp_cfg = MlpConfig {
                seed: derive_seed(cfg.seed ^ cfg.mlp.seed, name),
                ..cfg.mlp.clone()
            };
            let val = split.val_range();
            let model = mlp_fit(
                &x.rows(fit_rows.clone()),
                &target(fit_rows.clone()),
                &x.rows(val.clone()),
                &target(val),
                &mlp_cfg,
            )?;
            info!(
                "{name}: best epoch {} of {}",
                model.summary.best_epoch, model.summary.epochs_run
            );
            out.forecast = mlp_predict(&model, &x.rows(test))?;
            out.mlp = Some(model);
        }
    }
    Ok(out)
}

/// Features under the mean-correlation threshold, topped up with the least
/// correlated remaining features to `min_features`. Sorted by index.
pub fn correlation_subset(corr: &CorrelationMatrix, threshold: f64, min_features: usize) -> Vec<usize> {
    let mut idx = select_features(corr, threshold);
    let want = min_features.min(corr.len());
    if idx.len() < want {
        let mut rest: Vec<usize> = (0..corr.len()).filter(|i| !idx.contains(i)).collect();
        rest.sort_by(|&a, &b| {
            corr.off_diagonal_mean(a)
                .total_cmp(&corr.off_diagonal_mean(b))
                .then(a.cmp(&b))
        });
        warn!(
            "{} of {} features have mean correlation below {threshold}; adding the {} least correlated others",
            idx.len(),
            corr.len(),
            want - idx.len()
        );
        idx.extend(rest.into_iter().take(want - idx.len()));
        idx.sort_unstable();
    }
    idx
}

/// Deterministic child seed for a named consumer.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(tag.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// File-system-safe stem for a model name: `BARCH-NN(5)` → `BARCH-NN_5`.
pub fn file_stem(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    while s.ends_with('_') {
        s.pop();
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CachedFit {
    spec: ModelSpec,
    model: Option<FittedModel>,
    error: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: String,
    fits: Vec<CachedFit>,
}

fn fit_all(specs: &[ModelSpec], train: &[f64]) -> Vec<CachedFit> {
    info!("fitting {} models on {} returns", specs.len(), train.len());
    specs
        .par_iter()
        .map(|&spec| match fit_mle(&spec, train) {
            Ok(m) => CachedFit {
                spec,
                model: Some(m),
                error: None,
            },
            Err(e) => CachedFit {
                spec,
                model: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Hash of everything the fits depend on: the data bytes, the window used, the
/// model list and the crate version.
fn cache_key(data: &[u8], offset: usize, split: SplitSpec, specs: &[ModelSpec]) -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(data);
    for v in [offset, split.train_len, split.val_len, split.test_len] {
        h.update((v as u64).to_le_bytes());
    }
    for s in specs {
        h.update(s.label().as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn write_cache(path: &Path, key: &str, fits: &[CachedFit]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = CacheFile {
        key: key.to_string(),
        fits: fits.to_vec(),
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_cache(path: &Path, key: &str, specs: &[ModelSpec]) -> Result<Vec<CachedFit>> {
    let text = std::fs::read_to_string(path).map_err(|_| {
        Error::Config(format!(
            "no cached fits at {}; run all stages first",
            path.display()
        ))
    })?;
    let file: CacheFile =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let cached: Vec<ModelSpec> = file.fits.iter().map(|f| f.spec).collect();
    if file.key != key || cached != specs {
        return Err(Error::Config(format!(
            "cached fits at {} belong to a different data set or model list; run all stages first",
            path.display()
        )));
    }
    info!("reusing {} cached fits", file.fits.len());
    Ok(file.fits)
}

/// Writes every file under `dir`; on failure removes what was written.
fn write_all(dir: &Path, files: &[(PathBuf, String)]) -> Result<Vec<PathBuf>> {
    let mut written: Vec<PathBuf> = Vec::new();
    let mut write_one = |rel: &Path, body: &str| -> Result<()> {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for (rel, body) in files {
        if let Err(e) = write_one(rel, body) {
            for p in &written {
                let _ = std::fs::remove_file(p);
            }
            return Err(e);
        }
    }
    Ok(written)
}

struct ManifestInput<'a> {
    cfg: &'a PipelineConfig,
    key: &'a str,
    returns: &'a ReturnSeries,
    offset: usize,
    split: SplitSpec,
    singles: &'a [FittedModel],
    bank: &'a FeatureBank,
    subsets: &'a [(String, Vec<usize>)],
    blends: &'a [Blend],
    sigma_eff: Option<f64>,
    svr: serde_json::Value,
}

fn build_manifest(m: ManifestInput<'_>) -> Result<serde_json::Value> {
    let full = m.returns.values();
    let dates = m.returns.dates();
    let range_json = |r: Range<usize>| {
        json!({
            "length": r.len(),
            "first_date": dates[r.start].to_string(),
            "last_date": dates[r.end - 1].to_string(),
        })
    };
    let crit = |(ll, aic, bic): (f64, f64, f64)| json!({"loglik": ll, "aic": aic, "bic": bic});
    let singles = m
        .singles
        .iter()
        .map(|s| {
            Ok(json!({
                "model": s.label(),
                "params": s.params,
                "converged": s.converged,
                "train": crit((s.loglik, s.aic, s.bic)),
                "test": crit(segment_criteria(s, full, m.split.test_range())?),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let bank: Vec<_> = m
        .bank
        .models
        .iter()
        .map(|s| {
            json!({
                "model": s.label(),
                "params": s.params,
                "converged": s.converged,
                "train": crit((s.loglik, s.aic, s.bic)),
            })
        })
        .collect();
    let labels = m.bank.matrix.labels();
    let subsets: Vec<_> = m
        .subsets
        .iter()
        .map(|(tag, idx)| {
            json!({
                "subset": tag,
                "features": idx.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let blends: Vec<_> = m
        .blends
        .iter()
        .map(|b| {
            let mut v = json!({
                "model": b.name,
                "method": b.method,
                "features": b.features,
            });
            if let Some(w) = &b.ols {
                v["weights"] = json!(w.w);
                v["rank"] = json!(w.rank);
            }
            if let Some(n) = &b.mlp {
                v["network"] = json!(format!("models/{}.json", file_stem(&b.name)));
                v["seed"] = json!(n.config.seed);
                v["best_epoch"] = json!(n.summary.best_epoch);
                v["epochs_run"] = json!(n.summary.epochs_run);
                v["best_validation_mse"] = json!(n.summary.best_val_mse);
            }
            v
        })
        .collect();
    Ok(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": m.cfg.seed,
        "fit_key": m.key,
        "data": {
            "path": m.cfg.data.path,
            "skipped_returns": m.offset,
            "train": range_json(m.split.train_range()),
            "validation": range_json(m.split.val_range()),
            "test": range_json(m.split.test_range()),
        },
        "single_models": singles,
        "bank": {
            "models": bank,
            "dropped": m.bank.dropped.iter().map(|(l, e)| json!({"model": l, "error": e})).collect::<Vec<_>>(),
        },
        "selection": {
            "threshold": m.cfg.selection.threshold,
            "subsets": subsets,
        },
        "blends": blends,
        "augmentation": match m.sigma_eff {
            Some(s) => json!({
                "window": m.cfg.augment.window,
                "sigma": m.cfg.augment.sigma,
                "scale_mode": m.cfg.augment.scale_mode,
                "sigma_effective": s,
            }),
            None => serde_json::Value::Null,
        },
        "svr_garch": m.svr,
    }))
}
