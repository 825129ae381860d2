use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use volblend::pipeline::{
    run_pipeline, run_pipeline_from, validate_config, PipelineConfig, RunStage, Stage, EAVESDROP,
};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn shipped(name: &str) -> PipelineConfig {
    PipelineConfig::load(repo().join("configs").join(name)).unwrap()
}

/// The smoke config cut down to a dozen bank models and short training.
fn small(out: &Path) -> PipelineConfig {
    let text = r#"
seed = 3
output_dir = "unused"

[data]
path = "data/garch_600.csv"

[split]
train = 399
val = 100
test = 100

[bank]
models = ["ARCH-N(1)", "ARCH-N(2)", "ARCH-t(1)", "ARCH-G(3)", "GARCH-N(1,1)", "GARCH-t(1,1)",
          "GARCH-N(2,1)", "EGARCH-N(1,1)", "EGARCH-G(1,1)", "GJR-N(1,1)", "GJR-st(1,1)", "GJR-N(1,2)"]

[single]
arch_max_p = 2
orders = [[1, 1]]

[selection]
random_k = [4]
min_features = 3

[blend]
methods = ["uniform", "ols", "mlp"]

[mlp]
hidden = [8, 4]
epochs = 20
patience = 5

[svr]
c = [0.1]
epsilon = [1e-4]
gamma = [1.0]
"#;
    let mut cfg = PipelineConfig::from_toml(text, repo()).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.file_name().is_some_and(|n| n == ".cache") {
                continue;
            }
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn shipped_configs_validate_clean() {
    for name in ["default.toml", "smoke.toml"] {
        let problems = validate_config(&shipped(name));
        assert!(problems.is_empty(), "{name}: {problems:?}");
    }
}

#[test]
fn oversized_k_is_one_problem() {
    let mut cfg = shipped("default.toml");
    cfg.selection.random_k = vec![5, 200];
    let problems = validate_config(&cfg);
    assert_eq!(problems.len(), 1, "{problems:?}");
    assert_eq!(problems[0].field, "selection.random_k[1]");
}

#[test]
fn negative_sigma_is_one_problem() {
    let mut cfg = shipped("default.toml");
    cfg.augment.sigma = -0.1;
    let problems = validate_config(&cfg);
    assert_eq!(problems.len(), 1, "{problems:?}");
    assert_eq!(problems[0].field, "augment.sigma");
}

#[test]
fn problems_name_their_fields() {
    let mut cfg = shipped("smoke.toml");
    cfg.split.test = 3;
    cfg.selection.threshold = 1.5;
    cfg.bank.models = Some(vec!["GARCH-N(1,1)".into(), "NOPE-N(1)".into()]);
    cfg.evaluation.benchmark = "Oracle".into();
    let fields: BTreeSet<String> = validate_config(&cfg).into_iter().map(|p| p.field).collect();
    for f in ["split.test", "selection.threshold", "bank.models[1]", "evaluation.benchmark"] {
        assert!(fields.contains(f), "missing {f} in {fields:?}");
    }
}

#[test]
fn unknown_keys_and_bad_values_are_config_errors() {
    let base = "seed = 1\n[data]\npath = \"x.csv\"\n";
    assert!(PipelineConfig::from_toml(base, ".").is_ok());
    for extra in ["[split]\nvalidation = 3\n", "[blend]\nmethods = [\"lasso\"]\n", "colour = 1\n"] {
        let text = if extra.starts_with('[') {
            format!("{base}{extra}")
        } else {
            format!("{extra}{base}")
        };
        let err = PipelineConfig::from_toml(&text, ".").unwrap_err();
        assert!(matches!(err, volblend::Error::Config(_)), "{extra}: {err}");
    }
    // the seed must be explicit
    assert!(PipelineConfig::from_toml("[data]\npath = \"x.csv\"\n", ".").is_err());
}

#[test]
fn missing_csv_fails_at_config_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.data.path = PathBuf::from("data/nowhere.csv");
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().starts_with("config stage failed"), "{err}");
    assert!(err.to_string().contains("data.path"), "{err}");
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn malformed_csv_is_reported_by_validation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "date,close\n2020-01-01,100\n2020-01-01,101\n").unwrap();
    let mut cfg = small(&dir.path().join("out"));
    cfg.data.path = csv;
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert!(err.to_string().contains("data.path"), "{err}");
}

#[test]
fn runs_are_byte_identical_and_stage_rerun_matches() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_pipeline(&small(a.path())).unwrap();
    run_pipeline(&small(b.path())).unwrap();
    let first = read_tree(a.path());
    assert!(!first.is_empty());
    assert_eq!(first, read_tree(b.path()));

    std::fs::remove_file(a.path().join("eval_report.csv")).unwrap();
    run_pipeline_from(&small(a.path()), RunStage::Blend).unwrap();
    assert_eq!(first, read_tree(a.path()));
}

#[test]
fn blend_stage_needs_a_matching_cache() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_pipeline_from(&small(dir.path()), RunStage::Blend).unwrap_err();
    assert_eq!(err.stage, Stage::Fit);
    assert_eq!(err.exit_code(), 2);

    run_pipeline(&small(dir.path())).unwrap();
    let mut other = small(dir.path());
    other.split.train = Some(398);
    let err = run_pipeline_from(&other, RunStage::Blend).unwrap_err();
    assert_eq!(err.stage, Stage::Fit);
}

#[test]
fn failed_write_removes_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    // a plain file where the forecasts directory should go
    std::fs::write(dir.path().join("forecasts"), "").unwrap();
    let err = run_pipeline(&small(dir.path())).unwrap_err();
    assert_eq!(err.stage, Stage::Write);
    assert_eq!(err.exit_code(), 3);
    let left: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != ".cache" && n != "forecasts")
        .collect();
    assert!(left.is_empty(), "left behind: {left:?}");
}

#[test]
fn smoke_config_emits_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = shipped("smoke.toml");
    cfg.output_dir = dir.path().to_path_buf();
    let out = run_pipeline(&cfg).unwrap();
    let root = dir.path();
    for f in [
        "eval_report.csv",
        "eval_report.json",
        "dm_report.csv",
        "dm_report.json",
        "correlation_matrix.csv",
        "manifest.json",
    ] {
        assert!(root.join(f).is_file(), "{f}");
    }

    // every configured model exactly once, Eavesdrop included
    let names: Vec<String> = out.report.scores.iter().map(|r| r.name.clone()).collect();
    let unique: BTreeSet<&String> = names.iter().collect();
    assert_eq!(unique.len(), names.len());
    for n in cfg.fixed_model_names() {
        assert!(names.contains(&n), "{n} missing");
    }
    assert!(names.iter().any(|n| n == EAVESDROP));
    assert_eq!(names.len(), cfg.fixed_model_names().len() + 16);
    assert_eq!(out.report.dm.len(), names.len() - 1);

    // the CSV report parses back to the same model list
    let rows = csv_rows(&root.join("eval_report.csv"));
    let csv_names: Vec<String> = rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(csv_names, names);

    // one forecast file per model, all on the same date index
    let mut dates = None;
    for n in &names {
        let path = root.join("forecasts").join(format!("{}.csv", volblend::pipeline::file_stem(n)));
        let rows = csv_rows(&path);
        assert_eq!(rows.len(), cfg.split.test);
        let d: Vec<String> = rows.iter().map(|r| r[0].clone()).collect();
        match &dates {
            None => dates = Some(d),
            Some(prev) => assert_eq!(prev, &d, "{n}"),
        }
        for r in &rows {
            let h: f64 = r[1].parse().unwrap();
            assert!(h.is_finite() && h >= 0.0, "{n}: {h}");
        }
    }

    let corr = csv_rows(&root.join("correlation_matrix.csv"));
    assert_eq!(corr.len(), 90);
    assert_eq!(corr[0].len(), 91);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["single_models"].as_array().unwrap().len(), 16);
    assert_eq!(manifest["bank"]["models"].as_array().unwrap().len(), 90);
    for m in manifest["single_models"].as_array().unwrap() {
        for part in ["train", "test"] {
            assert!(m[part]["bic"].as_f64().unwrap().is_finite());
        }
    }
}
