//! Pipeline configuration file and its validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arch_family::{Family, ModelSpec};
use crate::augmentation::{AugmentConfig, ScaleMode};
use crate::blending::MlpConfig;
use crate::error::{Error, Result};
use crate::feature_bank::default_bank;
use crate::innovations::InnovationKind;
use crate::market_data::{load_prices, SplitSpec};
use crate::svr_baseline::{SolverOptions, SvrGrid};

/// Shortest test window the pipeline accepts.
pub const MIN_TEST_LEN: usize = 10;

/// Name of the persistence baseline, always reported.
pub const EAVESDROP: &str = "Eavesdrop";
pub const SVR_GARCH: &str = "SVR-GARCH";

/// Index of the first defined realized-proxy value.
pub(crate) const PROXY_START: usize = 4;

const FAMILIES: [Family; 4] = [Family::Arch, Family::Garch, Family::Egarch, Family::Gjr];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Master seed; every random subset and network seed is derived from it.
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub data: DataConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub bank: BankConfig,
    #[serde(default)]
    pub single: SingleConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub blend: BlendConfig,
    #[serde(default)]
    pub mlp: MlpConfig,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub svr: SvrSection,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// CSV of dated closes.
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Training length; `None` gives every observation before the tail to
    /// training. When set, only the last `train + val + test` returns are used.
    pub train: Option<usize>,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            train: None,
            val: SplitSpec::DEFAULT_VAL_LEN,
            test: SplitSpec::DEFAULT_TEST_LEN,
        }
    }
}

impl SplitConfig {
    /// `(offset, split)`: the split applies to `returns[offset..]`.
    pub fn resolve(&self, n_returns: usize) -> Result<(usize, SplitSpec)> {
        let tail = self.val + self.test;
        let train = match self.train {
            Some(t) => t,
            None if n_returns > tail => n_returns - tail,
            None => {
                return Err(Error::InsufficientData(format!(
                    "{n_returns} returns leave no training data after a {tail}-point tail"
                )))
            }
        };
        let spec = SplitSpec::new(train, self.val, self.test)?;
        if spec.total() > n_returns {
            return Err(Error::InsufficientData(format!(
                "split needs {} returns, the data has {n_returns}",
                spec.total()
            )));
        }
        Ok((n_returns - spec.total(), spec))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BankConfig {
    /// Model labels such as `GARCH-t(1,2)`; `None` selects the 90-model default.
    pub models: Option<Vec<String>>,
    /// Use the centered `|z| − E|z|` term in every EGARCH model.
    pub egarch_centered: bool,
}

impl BankConfig {
    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        let specs = match &self.models {
            None => default_bank(),
            Some(labels) => labels
                .iter()
                .map(|l| l.parse::<ModelSpec>())
                .collect::<Result<_>>()?,
        };
        Ok(specs
            .into_iter()
            .map(|s| s.centered(self.egarch_centered))
            .collect())
    }

    /// Number of configured bank models, without parsing failures.
    fn size(&self) -> usize {
        self.models.as_ref().map_or(default_bank().len(), Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleConfig {
    pub enabled: bool,
    /// ARCH orders `1..=arch_max_p` are searched.
    pub arch_max_p: usize,
    /// `(p, q)` grid for GARCH, EGARCH and GJR.
    pub orders: Vec<(usize, usize)>,
}

impl Default for SingleConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            arch_max_p: 15,
            orders: (1..=3).flat_map(|p| (1..=3).map(move |q| (p, q))).collect(),
        }
    }
}

/// One family/innovation pair and the orders searched for it.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleGroup {
    pub family: Family,
    pub innovation: InnovationKind,
    pub candidates: Vec<ModelSpec>,
}

impl SingleConfig {
    pub fn groups(&self, egarch_centered: bool) -> Result<Vec<SingleGroup>> {
        if !self.enabled {
            return Ok(vec![]);
        }
        let mut out = Vec::new();
        for family in FAMILIES {
            for innovation in InnovationKind::ALL {
                let candidates = if family == Family::Arch {
                    (1..=self.arch_max_p)
                        .map(|p| ModelSpec::arch(p, innovation))
                        .collect::<Result<Vec<_>>>()?
                } else {
                    self.orders
                        .iter()
                        .map(|&(p, q)| {
                            Ok(ModelSpec::new(family, p, q, innovation)?.centered(egarch_centered))
                        })
                        .collect::<Result<Vec<_>>>()?
                };
                out.push(SingleGroup {
                    family,
                    innovation,
                    candidates,
                });
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    /// Features whose mean cosine similarity to the others is below this are kept.
    pub threshold: f64,
    /// Sizes of the random feature subsets.
    pub random_k: Vec<usize>,
    /// Also blend the correlation-selected subset.
    pub correlation: bool,
    /// When fewer features pass the threshold, the least correlated others
    /// are added until the subset has this many.
    pub min_features: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            random_k: vec![5, 15, 35, 55, 75],
            correlation: true,
            min_features: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlendMethod {
    Uniform,
    Ols,
    Mlp,
}

impl BlendMethod {
    /// Report name of this method on a subset tag (`5`, `CO`, ...).
    pub fn model_name(self, subset: &str) -> String {
        match self {
            BlendMethod::Uniform => format!("Uniform({subset})"),
            BlendMethod::Ols => format!("BARCH({subset})"),
            BlendMethod::Mlp => format!("BARCH-NN({subset})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlendConfig {
    pub methods: Vec<BlendMethod>,
    /// Clip negative variance forecasts at zero before scoring.
    pub floor: bool,
}

impl Default for BlendConfig {
    fn default() -> Self {
        Self {
            methods: vec![BlendMethod::Ols, BlendMethod::Mlp],
            floor: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentSection {
    pub enabled: bool,
    pub window: usize,
    pub sigma: f64,
    pub scale_mode: ScaleMode,
}

impl Default for AugmentSection {
    fn default() -> Self {
        let c = AugmentConfig::default();
        Self {
            enabled: true,
            window: c.window,
            sigma: c.sigma,
            scale_mode: c.scale_mode,
        }
    }
}

impl AugmentSection {
    pub fn config(&self) -> AugmentConfig {
        AugmentConfig {
            window: self.window,
            sigma: self.sigma,
            scale_mode: self.scale_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrSection {
    pub enabled: bool,
    pub c: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub gamma: Vec<f64>,
    pub solver: SolverOptions,
}

impl Default for SvrSection {
    fn default() -> Self {
        let g = SvrGrid::default();
        Self {
            enabled: true,
            c: g.c,
            epsilon: g.epsilon,
            gamma: g.gamma,
            solver: g.solver,
        }
    }
}

impl SvrSection {
    pub fn grid(&self) -> SvrGrid {
        SvrGrid {
            c: self.c.clone(),
            epsilon: self.epsilon.clone(),
            gamma: self.gamma.clone(),
            solver: self.solver,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    /// Model every other forecast is DM-tested against.
    pub benchmark: String,
    /// Apply the small-sample correction to the DM statistic.
    pub harvey: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            benchmark: SVR_GARCH.to_string(),
            harvey: false,
        }
    }
}

impl PipelineConfig {
    /// Parses TOML text; relative paths resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), message(e))))
    }

    pub fn data_path(&self) -> PathBuf {
        self.base_dir.join(&self.data.path)
    }

    pub fn output_path(&self) -> PathBuf {
        self.base_dir.join(&self.output_dir)
    }

    /// Subset tags in report order: each random `K`, then `CO`.
    pub fn subset_tags(&self) -> Vec<String> {
        let mut tags: Vec<String> = self.selection.random_k.iter().map(|k| k.to_string()).collect();
        if self.selection.correlation {
            tags.push("CO".into());
        }
        tags
    }

    /// Blend names in report order, without the augmented variants.
    pub fn blend_names(&self) -> Vec<String> {
        let tags = self.subset_tags();
        self.blend
            .methods
            .iter()
            .flat_map(|m| tags.iter().map(move |t| m.model_name(t)))
            .collect()
    }

    /// Every reported name that does not depend on order selection.
    pub fn fixed_model_names(&self) -> Vec<String> {
        let blends = self.blend_names();
        let mut names = blends.clone();
        if self.augment.enabled {
            names.extend(blends.iter().map(|n| format!("a{n}")));
        }
        if self.svr.enabled {
            names.push(SVR_GARCH.into());
            if self.augment.enabled {
                names.push(format!("a{SVR_GARCH}"));
            }
        }
        names.push(EAVESDROP.into());
        names
    }
}

/// A configuration problem tied to the field that causes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every reason the config cannot run; empty when it can. Reads the data file
/// to check the split against the number of observations.
pub fn validate_config(cfg: &PipelineConfig) -> Vec<Problem> {
    let mut out = Vec::new();
    let mut bad = |field: &str, message: String| {
        out.push(Problem {
            field: field.to_string(),
            message,
        })
    };

    if cfg.output_dir.as_os_str().is_empty() {
        bad("output_dir", "must not be empty".into());
    }

    let data_path = cfg.data_path();
    let mut n_returns = None;
    if !data_path.is_file() {
        bad("data.path", format!("{} does not exist", data_path.display()));
    } else {
        match load_prices(&data_path) {
            Ok(p) => n_returns = Some(p.len().saturating_sub(1)),
            Err(e) => bad("data.path", format!("cannot be read: {e}")),
        }
    }

    if cfg.split.train == Some(0) {
        bad("split.train", "must be positive".into());
    }
    if cfg.split.val == 0 {
        bad("split.val", "must be positive".into());
    }
    if cfg.split.test < MIN_TEST_LEN {
        bad(
            "split.test",
            format!("must be at least {MIN_TEST_LEN}, got {}", cfg.split.test),
        );
    }

    let bank_size = cfg.bank.size();
    let mut max_params = 0;
    match &cfg.bank.models {
        Some(labels) if labels.is_empty() => bad("bank.models", "must not be empty".into()),
        Some(labels) => {
            let mut seen = BTreeSet::new();
            for (i, l) in labels.iter().enumerate() {
                match l.parse::<ModelSpec>() {
                    Ok(s) => {
                        max_params = max_params.max(s.n_params());
                        if !seen.insert(s) {
                            bad(&format!("bank.models[{i}]"), format!("duplicate model {l}"));
                        }
                    }
                    Err(e) => bad(&format!("bank.models[{i}]"), message(e)),
                }
            }
        }
        None => max_params = default_bank().iter().map(ModelSpec::n_params).max().unwrap_or(0),
    }

    if cfg.single.enabled {
        if cfg.single.arch_max_p == 0 {
            bad("single.arch_max_p", "must be at least 1".into());
        }
        if cfg.single.orders.is_empty() {
            bad("single.orders", "must not be empty".into());
        }
        for (i, &(p, q)) in cfg.single.orders.iter().enumerate() {
            if p == 0 || q == 0 {
                bad(&format!("single.orders[{i}]"), format!("orders must be positive, got ({p}, {q})"));
            }
        }
        if let Ok(groups) = cfg.single.groups(cfg.bank.egarch_centered) {
            for g in groups {
                for s in g.candidates {
                    max_params = max_params.max(s.n_params());
                }
            }
        }
    }

    let thr = cfg.selection.threshold;
    if !(thr > 0.0 && thr <= 1.0) {
        bad("selection.threshold", format!("must lie in (0, 1], got {thr}"));
    }
    let mut seen_k = BTreeSet::new();
    for (i, &k) in cfg.selection.random_k.iter().enumerate() {
        let field = format!("selection.random_k[{i}]");
        if k == 0 || k > bank_size {
            bad(&field, format!("K = {k} outside 1..={bank_size} (bank size)"));
        } else if !seen_k.insert(k) {
            bad(&field, format!("duplicate K = {k}"));
        }
    }
    if cfg.selection.correlation && cfg.selection.min_features > bank_size {
        bad(
            "selection.min_features",
            format!("{} exceeds the bank size {bank_size}", cfg.selection.min_features),
        );
    }
    let mut seen_m = BTreeSet::new();
    for (i, m) in cfg.blend.methods.iter().enumerate() {
        if !seen_m.insert(*m) {
            bad(&format!("blend.methods[{i}]"), format!("duplicate method {m:?}"));
        }
    }
    if !cfg.blend.methods.is_empty() && cfg.subset_tags().is_empty() {
        bad(
            "selection",
            "blending needs at least one random K or the correlation subset".into(),
        );
    }

    if let Err(e) = cfg.mlp.validate() {
        bad("mlp", message(e));
    }
    if cfg.augment.window == 0 {
        bad("augment.window", "must be at least 1".into());
    }
    if !(cfg.augment.sigma >= 0.0 && cfg.augment.sigma.is_finite()) {
        bad(
            "augment.sigma",
            format!("must be finite and non-negative, got {}", cfg.augment.sigma),
        );
    }
    if cfg.svr.enabled {
        if let Err(e) = cfg.svr.grid().validate() {
            bad("svr", message(e));
        }
    }

    let bench = &cfg.evaluation.benchmark;
    let fixed = cfg.fixed_model_names();
    let is_single = cfg.single.enabled
        && bench.parse::<ModelSpec>().is_ok_and(|s| {
            cfg.single
                .groups(cfg.bank.egarch_centered)
                .is_ok_and(|gs| gs.iter().any(|g| g.candidates.contains(&s)))
        });
    if !fixed.contains(bench) && !is_single {
        bad(
            "evaluation.benchmark",
            format!("{bench} is not a configured model"),
        );
    }

    if let Some(n) = n_returns {
        match cfg.split.resolve(n) {
            Err(e) => bad("split", message(e)),
            Ok((_, s)) => {
                if s.train_len <= 10 * max_params {
                    bad(
                        "split.train",
                        format!(
                            "{} training returns cannot fit a {max_params}-parameter model (needs more than {})",
                            s.train_len,
                            10 * max_params
                        ),
                    );
                } else if cfg.blend.methods.contains(&BlendMethod::Ols)
                    && s.train_len < PROXY_START + bank_size + 2
                {
                    bad(
                        "split.train",
                        format!("too short for an OLS blend over {bank_size} features"),
                    );
                }
                if cfg.augment.enabled
                    && cfg.augment.window > 0
                    && s.in_sample_len() < PROXY_START + cfg.augment.window + 1
                {
                    bad(
                        "augment.window",
                        format!(
                            "a {}-step window needs more than {} in-sample returns",
                            cfg.augment.window,
                            s.in_sample_len()
                        ),
                    );
                }
            }
        }
    }
    out
}

fn message(e: Error) -> String {
    match e {
        Error::Config(m)
        | Error::InvalidParameter(m)
        | Error::InsufficientData(m)
        | Error::Domain(m)
        | Error::Parse(m) => m,
        other => other.to_string(),
    }
}
