//! End-to-end runs of the `clickbait` binary.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn clickbait(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clickbait"))
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(cwd: &Path, args: &[&str]) -> Output {
    let out = clickbait(cwd, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Every file in `dir` except the manifest appears in the manifest, and
/// every listed hash matches the file.
fn assert_manifest_complete(dir: &Path) {
    let m = manifest(dir);
    let listed: BTreeSet<String> =
        m["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect();
    let present: BTreeSet<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    assert_eq!(listed, present, "{}", dir.display());
    for a in m["artifacts"].as_array().unwrap() {
        let bytes = fs::read(dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
}

/// A synthetic corpus written by the binary itself.
fn synth(cwd: &Path, size: usize) -> (PathBuf, PathBuf) {
    ok(cwd, &["synth", "--size", &size.to_string(), "--seed", "5", "-o", "synth"]);
    (cwd.join("synth/synth.csv"), cwd.join("synth/vocab.txt"))
}

const CONFIG: &str = r#"
k = 5

[data]
schema = "simple-csv"

[model]
backend = "hash:32:3"
max_len = 24

[train]
epochs = 3
learning_rate = 0.01
"#;

#[test]
fn crossval_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    synth(cwd, 300);
    fs::write(cwd.join("run.toml"), CONFIG).unwrap();
    let args = |out: &'static str| {
        ["-c", "run.toml", "crossval", "--train", "synth/synth.csv", "--vocab", "synth/vocab.txt", "--seed", "11", "-o", out]
    };
    ok(cwd, &args("a"));
    ok(cwd, &args("b"));

    let report = fs::read_to_string(cwd.join("a/report.csv")).unwrap();
    assert_eq!(report, fs::read_to_string(cwd.join("b/report.csv")).unwrap());
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 1 + 5 + 2);
    assert!(lines[0].starts_with("fold,accuracy"));
    assert!(lines[6].starts_with("mean,") && lines[7].starts_with("std,"));
    assert!(lines[1..6].iter().enumerate().all(|(i, l)| l.starts_with(&format!("{},", i + 1))));

    let (ma, mb) = (manifest(&cwd.join("a")), manifest(&cwd.join("b")));
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    assert_eq!(ma["seeds"], mb["seeds"]);
    let seeds: Vec<(String, u64)> = ma["seeds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["operation"].as_str().unwrap().to_string(), s["seed"].as_u64().unwrap()))
        .collect();
    assert!(seeds.contains(&("stratified_kfold".into(), 11)));
    assert!(seeds.contains(&("head_shuffle".into(), 12)));
    assert!(seeds.contains(&("head_init".into(), 13)));
    assert_eq!(ma["config"]["model"]["backend"], "hash:32:3");
    assert_eq!(ma["config"]["seeds"]["sampling"], 11);
    assert_manifest_complete(&cwd.join("a"));

    // A different seed gives a different fold assignment.
    ok(cwd, &["-c", "run.toml", "crossval", "--train", "synth/synth.csv", "--vocab", "synth/vocab.txt", "--seed", "12", "-o", "c"]);
    assert_ne!(report, fs::read_to_string(cwd.join("c/report.csv")).unwrap());
}

#[test]
fn train_then_predict_three_headlines() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    synth(cwd, 200);
    fs::write(cwd.join("run.toml"), CONFIG).unwrap();
    fs::write(cwd.join("in.txt"), "wow heboh ternyata netizen\n\nrapat anggaran menteri dewan\nviral bikin kaget warga\n")
        .unwrap();

    for model in ["head", "tfidf-gbt"] {
        let model_dir = format!("model-{model}");
        let pred_dir = format!("pred-{model}");
        ok(cwd, &["-c", "run.toml", "train", "--model", model, "--train", "synth/synth.csv", "-o", &model_dir]);
        assert_manifest_complete(&cwd.join(&model_dir));
        let out = ok(cwd, &["predict", "--model-dir", &model_dir, "--input", "in.txt", "-o", &pred_dir]);
        assert_manifest_complete(&cwd.join(&pred_dir));

        let written = fs::read_to_string(cwd.join(&pred_dir).join("predictions.csv")).unwrap();
        assert_eq!(String::from_utf8(out.stdout).unwrap(), written);
        let rows: Vec<Vec<&str>> = written.lines().map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 3, "{model}: {written}");
        assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["line-1", "line-3", "line-4"]);
        for r in &rows {
            let score: f64 = r[1].parse().unwrap();
            assert!((0.0..=1.0).contains(&score));
            assert_eq!(r[2], if score >= 0.5 { "clickbait" } else { "non-clickbait" });
        }
        assert_eq!(rows[0][2], "clickbait", "{model}");
        assert_eq!(rows[1][2], "non-clickbait", "{model}");
    }
}

#[test]
fn compare_has_one_row_per_model() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    synth(cwd, 200);
    fs::write(cwd.join("run.toml"), CONFIG).unwrap();
    ok(cwd, &["-c", "run.toml", "compare", "--train", "synth/synth.csv", "--vocab", "synth/vocab.txt", "-o", "cmp"]);
    let table = fs::read_to_string(cwd.join("cmp/compare.csv")).unwrap();
    let models: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(models, ["mbert-head", "tfidf-gbt"]);
    for l in table.lines().skip(1) {
        let acc: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(acc > 0.6, "{l}");
    }
    assert_manifest_complete(&cwd.join("cmp"));
}

fn clickid_fixture(dir: &Path) -> PathBuf {
    // 6 unanimous clickbait, 10 unanimous non-clickbait, 4 split decisions.
    let mut lines = Vec::new();
    for i in 0..6 {
        lines.push(format!(r#"{{"id":"c{i}","title":"Wow, ini dia rahasia heboh {i}!","label":"clickbait","label_score":3}}"#));
    }
    for i in 0..10 {
        lines.push(format!(r#"{{"id":"n{i}","title":"KPK periksa saksi kasus {i}","label":"non-clickbait","label_score":3}}"#));
    }
    for i in 0..4 {
        lines.push(format!(r#"{{"id":"d{i}","title":"Ini soal anggaran {i}","label":"clickbait","label_score":2}}"#));
    }
    let path = dir.join("clickid.jsonl");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

#[test]
fn ingest_and_eda_on_clickid_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    clickid_fixture(cwd);
    ok(cwd, &["ingest", "--train", "clickid.jsonl", "-o", "ing"]);
    let m = manifest(&cwd.join("ing"));
    let r = &m["results"];
    assert_eq!(r["records"], 20);
    assert_eq!(r["dropped_by_agreement"], 4);
    assert_eq!(r["filtered"]["clickbait"], 6);
    assert_eq!(r["filtered"]["non_clickbait"], 10);
    assert_eq!(r["working"]["total"], 12);
    assert!(r["fleiss_kappa"].as_f64().unwrap() > 0.0);
    assert_manifest_complete(&cwd.join("ing"));

    ok(cwd, &["eda", "--train", "clickid.jsonl", "-o", "eda"]);
    let freq = fs::read_to_string(cwd.join("eda/top_words.csv")).unwrap();
    assert!(freq.starts_with("word,count,class\n"));
    assert!(freq.contains("ini,6,clickbait"), "{freq}");
    assert!(freq.contains("kpk,6,non-clickbait"), "{freq}");
    let filtered = fs::read_to_string(cwd.join("eda/top_words_without_stopwords.csv")).unwrap();
    assert!(!filtered.contains("ini,"), "{filtered}");
    assert_manifest_complete(&cwd.join("eda"));
}

#[test]
fn evaluate_holdout_scores_every_headline() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    synth(cwd, 200);
    ok(cwd, &["synth", "--size", "40", "--seed", "99", "-o", "later"]);
    fs::write(cwd.join("run.toml"), CONFIG).unwrap();
    ok(
        cwd,
        &[
            "-c", "run.toml", "evaluate-holdout", "--model", "tfidf-gbt", "--train", "synth/synth.csv", "--holdout",
            "later/synth.csv", "-o", "ho",
        ],
    );
    let preds = fs::read_to_string(cwd.join("ho/holdout_predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 41);
    let report = fs::read_to_string(cwd.join("ho/holdout_report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().starts_with("1,"));
    let acc = manifest(&cwd.join("ho"))["results"]["metrics"]["accuracy"].as_f64().unwrap();
    assert!(acc > 0.8);
    assert_manifest_complete(&cwd.join("ho"));
}

#[test]
fn exit_codes_and_no_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cwd = tmp.path();
    synth(cwd, 100);

    // Configuration errors name the offending field.
    for (args, field) in [
        (vec!["crossval", "--train", "missing.csv", "-o", "x"], "data.train"),
        (vec!["crossval", "--train", "synth/synth.csv", "--k", "1", "-o", "x"], "k:"),
        (vec!["crossval", "--train", "synth/synth.csv", "--schema", "xml", "-o", "x"], "data.schema"),
        (vec!["crossval", "--train", "synth/synth.csv", "--schema", "simple-csv", "--backend", "hash:x", "-o", "x"], "model.backend"),
        (vec!["crossval", "-o", "x"], "data.train"),
    ] {
        let out = clickbait(cwd, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(field), "{args:?}");
        assert!(!cwd.join("x").exists());
    }

    // Wrong schema for the file: a data error, and nothing left behind.
    let out = clickbait(cwd, &["crossval", "--train", "synth/synth.csv", "-o", "x"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!cwd.join("x").exists());

    // Refuses to mix its artifacts with unrelated files.
    fs::create_dir(cwd.join("busy")).unwrap();
    fs::write(cwd.join("busy/notes.txt"), "keep").unwrap();
    let out = clickbait(cwd, &["ingest", "--schema", "simple-csv", "--train", "synth/synth.csv", "-o", "busy"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(fs::read_to_string(cwd.join("busy/notes.txt")).unwrap(), "keep");

    // Usage errors from argument parsing share the configuration code.
    assert_eq!(clickbait(cwd, &["crossval", "--model", "svm"]).status.code(), Some(2));
}
