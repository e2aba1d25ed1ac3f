use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use clickbait::baseline::{load_gbt, load_tfidf, save_gbt, save_tfidf};
use clickbait::corpus::{
    balance_undersample, filter_full_agreement, fleiss_kappa, load_dataset, rating_matrix, stratified_kfold,
    tally_words, top_k_words, write_frequency_csv, Label, LabeledDataset, Schema, SeedEntry,
};
use clickbait::embed::{open_backend, EmbedError};
use clickbait::eval::{
    cross_validate_with_split, evaluate_holdout, evaluate_scorer, write_report_csv, write_roc_csv, ExperimentReport,
    FoldReport,
};
use clickbait::head::{load_params, save_params, write_training_log};
use clickbait::pipeline::{HeadFeatures, HeadModel, HeadPipeline, Pipeline, Scorer, TfidfGbtModel, TfidfGbtPipeline};
use clickbait::preprocess::{
    load_vocab, normalize_text, split_punctuation, HeadlineEncoder, StopwordSet, Vocab, CLS, PAD, SEP, UNK,
};
use clickbait::synth::{synth_dataset, synth_vocab, SynthConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{config, data, runtime, CliError};
use crate::output::{Manifest, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Frozen-encoder features with the pooled MLP head.
    Head,
    /// TF-IDF vectors with gradient-boosted trees.
    TfidfGbt,
}

impl ModelKind {
    /// Row label in comparison tables.
    fn label(self) -> &'static str {
        match self {
            ModelKind::Head => "mbert-head",
            ModelKind::TfidfGbt => "tfidf-gbt",
        }
    }
}

/// What a finished command hands to the manifest.
pub struct Finished {
    pub config: Value,
    pub seeds: Vec<SeedEntry>,
    pub results: Value,
}

impl Finished {
    fn new(cfg: &RunConfig, seeds: Vec<SeedEntry>, results: Value) -> Self {
        Finished { config: serde_json::to_value(cfg).unwrap_or(Value::Null), seeds: dedup(seeds), results }
    }
}

fn dedup(seeds: Vec<SeedEntry>) -> Vec<SeedEntry> {
    let mut out: Vec<SeedEntry> = Vec::with_capacity(seeds.len());
    for s in seeds {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

struct Loaded {
    dataset: LabeledDataset,
    records: usize,
    dropped: usize,
    kappa: Option<f64>,
}

fn load_labeled(path: &Path, schema: Schema) -> Result<Loaded, CliError> {
    let records = load_dataset(path, schema)?;
    let n = records.len();
    match schema {
        Schema::ClickIdJson => {
            let kappa = match fleiss_kappa(&rating_matrix(&records)) {
                Ok(k) => Some(k),
                Err(e) => {
                    log::warn!("Fleiss' kappa unavailable: {e}");
                    None
                }
            };
            let filtered = filter_full_agreement(&records)?;
            Ok(Loaded { dataset: filtered.dataset, records: n, dropped: filtered.dropped, kappa })
        }
        Schema::SimpleCsv => {
            let dataset = LabeledDataset::from_labeled(records, path.display().to_string())?;
            Ok(Loaded { dataset, records: n, dropped: 0, kappa: None })
        }
    }
}

struct Corpus {
    loaded: Loaded,
    /// Balanced when `data.balance` is set, otherwise the filtered set.
    working: LabeledDataset,
}

fn load_corpus(cfg: &RunConfig) -> Result<Corpus, CliError> {
    let path = cfg.data.train.as_ref().ok_or_else(|| config("data.train: required by this command"))?;
    let loaded = load_labeled(path, cfg.schema()?)?;
    let working = if cfg.data.balance {
        balance_undersample(&loaded.dataset, cfg.seeds.sampling)?
    } else {
        loaded.dataset.clone()
    };
    log::info!("{} records, {} after agreement filtering, {} in the working set", loaded.records, loaded.dataset.len(), working.len());
    Ok(Corpus { loaded, working })
}

fn class_counts(ds: &LabeledDataset) -> Value {
    json!({
        "total": ds.len(),
        "clickbait": ds.count(Label::Clickbait),
        "non_clickbait": ds.count(Label::NonClickbait),
    })
}

fn stopwords(cfg: &RunConfig) -> Result<Option<StopwordSet>, CliError> {
    if !cfg.data.remove_stopwords {
        return Ok(None);
    }
    match &cfg.data.stopwords {
        Some(p) => StopwordSet::load(p).map(Some).map_err(|e| config(format!("data.stopwords: {e}"))),
        None => Ok(Some(StopwordSet::bundled())),
    }
}

/// Whole-word vocabulary over the given headlines, for hash backends run
/// without a WordPiece vocabulary.
fn corpus_vocab_tokens<'a>(titles: impl Iterator<Item = &'a str>) -> Vec<String> {
    let specials = [PAD, UNK, CLS, SEP];
    let mut words = BTreeSet::new();
    for t in titles {
        for w in split_punctuation(&normalize_text(t)).split_whitespace() {
            if !specials.contains(&w) {
                words.insert(w.to_string());
            }
        }
    }
    specials.iter().map(|s| s.to_string()).chain(words).collect()
}

fn vocab_text(vocab: &Vocab) -> String {
    (0..vocab.len() as u32).filter_map(|i| vocab.token(i)).map(|t| format!("{t}\n")).collect()
}

/// The configured vocabulary, or one derived from `train_set` (saved as
/// `vocab.txt`) for a hash backend.
fn resolve_vocab(cfg: &RunConfig, train_set: &LabeledDataset, out: &mut RunOutput) -> Result<Vocab, CliError> {
    if let Some(p) = &cfg.model.vocab {
        return load_vocab(p).map_err(|e| config(format!("model.vocab: {e}")));
    }
    if !cfg.is_hash_backend() {
        return Err(config("model.vocab: required with an ONNX encoder"));
    }
    let tokens = corpus_vocab_tokens(train_set.titles());
    let vocab = Vocab::from_tokens(&tokens).map_err(data)?;
    out.write_bytes("vocab.txt", vocab_text(&vocab).as_bytes())?;
    Ok(vocab)
}

fn head_pipeline(cfg: &RunConfig, vocab: Vocab) -> Result<HeadPipeline, CliError> {
    let encoder = HeadlineEncoder::new(vocab, stopwords(cfg)?, cfg.model.max_len).map_err(config)?;
    let backend = open_backend(&cfg.model.backend).map_err(|e| match e {
        EmbedError::BadSpec(_) => config(format!("model.backend: {e}")),
        other => runtime(other),
    })?;
    if let Some(dir) = &cfg.model.cache_dir {
        std::fs::create_dir_all(dir).map_err(|e| runtime(format!("creating cache dir {}: {e}", dir.display())))?;
    }
    log::info!("encoder backend {} (width {})", backend.name(), backend.hidden_width());
    Ok(HeadPipeline::new(HeadFeatures::new(encoder, backend, cfg.model.cache_dir.clone()), cfg.train_config()))
}

fn tfidf_pipeline(cfg: &RunConfig) -> Result<TfidfGbtPipeline, CliError> {
    Ok(TfidfGbtPipeline { stopwords: stopwords(cfg)?, config: cfg.baseline.clone() })
}

fn head_seeds(cfg: &RunConfig) -> [SeedEntry; 2] {
    [
        SeedEntry { operation: "head_init".into(), seed: cfg.seeds.init },
        SeedEntry { operation: "head_shuffle".into(), seed: cfg.seeds.shuffle },
    ]
}

fn write_report(out: &mut RunOutput, name: &str, report: &ExperimentReport) -> Result<(), CliError> {
    out.write_with(name, |w| write_report_csv(report, w))
}

fn summary(report: &ExperimentReport) -> Value {
    json!({ "pipeline": report.pipeline, "folds": report.folds.len(), "mean": report.mean, "std": report.std })
}

pub fn ingest(cfg: &RunConfig, out: &mut RunOutput) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    out.write_bytes("filtered.json", c.loaded.dataset.to_json().map_err(runtime)?.as_bytes())?;
    if cfg.data.balance {
        out.write_bytes("balanced.json", c.working.to_json().map_err(runtime)?.as_bytes())?;
    }
    let results = json!({
        "records": c.loaded.records,
        "dropped_by_agreement": c.loaded.dropped,
        "fleiss_kappa": c.loaded.kappa,
        "filtered": class_counts(&c.loaded.dataset),
        "working": class_counts(&c.working),
    });
    Ok(Finished::new(cfg, c.working.seed_log.clone(), results))
}

pub fn eda(cfg: &RunConfig, out: &mut RunOutput) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    let ds = &c.working;
    let sw = stopwords(cfg)?;

    // Raw counts (no stopword removal) plus a stopword-filtered top list.
    let mut all = Vec::new();
    let mut top = Vec::new();
    let mut top_filtered = Vec::new();
    let mut per_class = serde_json::Map::new();
    for class in Label::ALL {
        let raw = tally_words(ds, class, None, true);
        let ranked = top_k_words(&raw.frequencies, usize::MAX);
        all.extend(ranked.iter().map(|(w, n)| (w.clone(), *n, class)));
        let head: Vec<(String, usize)> = ranked.iter().take(cfg.top_words).cloned().collect();
        top.extend(head.iter().map(|(w, n)| (w.clone(), *n, class)));

        let mut entry = json!({
            "tokens": raw.total_tokens,
            "punctuation_only": raw.punctuation_only,
            "distinct_words": raw.frequencies.len(),
            "top": head,
        });
        if let Some(sw) = &sw {
            let filtered = tally_words(ds, class, Some(sw), true);
            let head = top_k_words(&filtered.frequencies, cfg.top_words);
            top_filtered.extend(head.iter().map(|(w, n)| (w.clone(), *n, class)));
            entry["stopword_hits"] = json!(filtered.stopword_hits);
            entry["top_without_stopwords"] = json!(head);
        }
        per_class.insert(class.as_str().into(), entry);
    }
    out.write_with("frequencies.csv", |w| write_frequency_csv(w, &all))?;
    out.write_with("top_words.csv", |w| write_frequency_csv(w, &top))?;
    if sw.is_some() {
        out.write_with("top_words_without_stopwords.csv", |w| write_frequency_csv(w, &top_filtered))?;
    }
    let results = json!({
        "fleiss_kappa": c.loaded.kappa,
        "working": class_counts(ds),
        "classes": per_class,
    });
    Ok(Finished::new(cfg, ds.seed_log.clone(), results))
}

pub fn train(cfg: &RunConfig, out: &mut RunOutput, model: ModelKind) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    let ds = &c.working;
    let mut seeds = ds.seed_log.clone();
    let results = match model {
        ModelKind::Head => {
            let pipeline = head_pipeline(cfg, resolve_vocab(cfg, ds, out)?)?;
            let (fitted, log) = pipeline.fit_model(ds).map_err(runtime)?;
            out.record("head.params")?;
            save_params(fitted.params(), out.path("head.params")).map_err(runtime)?;
            out.write_with("training_log.csv", |w| write_training_log(&log, w))?;
            seeds.extend(head_seeds(cfg));
            let fit = evaluate_scorer(&fitted, ds, 1)?;
            json!({
                "model": model,
                "records": ds.len(),
                "initial_loss": log.initial_loss,
                "epoch_losses": log.epochs.iter().map(|e| e.mean_loss).collect::<Vec<_>>(),
                "training_accuracy": fit.metrics.accuracy,
            })
        }
        ModelKind::TfidfGbt => {
            let fitted = tfidf_pipeline(cfg)?.fit_model(ds).map_err(runtime)?;
            out.record("tfidf.bin")?;
            save_tfidf(&fitted.tfidf, out.path("tfidf.bin")).map_err(runtime)?;
            out.record("gbt.bin")?;
            save_gbt(&fitted.gbt, out.path("gbt.bin")).map_err(runtime)?;
            let fit = evaluate_scorer(&fitted, ds, 1)?;
            json!({
                "model": model,
                "records": ds.len(),
                "features": fitted.tfidf.n_features(),
                "trees": fitted.gbt.trees.len(),
                "training_accuracy": fit.metrics.accuracy,
            })
        }
    };
    Ok(Finished::new(cfg, seeds, results))
}

fn pipeline_for(cfg: &RunConfig, model: ModelKind, ds: &LabeledDataset, out: &mut RunOutput) -> Result<Box<dyn Pipeline>, CliError> {
    Ok(match model {
        ModelKind::Head => Box::new(head_pipeline(cfg, resolve_vocab(cfg, ds, out)?)?),
        ModelKind::TfidfGbt => Box::new(tfidf_pipeline(cfg)?),
    })
}

pub fn crossval(cfg: &RunConfig, out: &mut RunOutput, model: ModelKind) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    let ds = &c.working;
    let split = stratified_kfold(ds, cfg.k, cfg.seeds.sampling)?;
    let pipeline = pipeline_for(cfg, model, ds, out)?;
    let mut report = cross_validate_with_split(ds, pipeline.as_ref(), &split, true)?;
    report.seeds.push(SeedEntry { operation: "stratified_kfold".into(), seed: cfg.seeds.sampling });
    if model == ModelKind::Head {
        report.seeds.extend(head_seeds(cfg));
    }
    // Where the report lands is not part of the experiment.
    report.config = serde_json::to_value(cfg).map_err(runtime)?;
    if let Some(obj) = report.config.as_object_mut() {
        obj.remove("output_dir");
    }

    write_report(out, "report.csv", &report)?;
    out.write_with("roc.csv", |w| write_roc_csv(&report.folds, w))?;
    out.write_bytes("report.json", serde_json::to_string_pretty(&report).map_err(runtime)?.as_bytes())?;
    log::info!("{}: mean accuracy {:.4}, mean auc {:.4}", report.pipeline, report.mean.accuracy, report.mean.auc);
    Ok(Finished::new(cfg, report.seeds.clone(), summary(&report)))
}

pub fn compare(cfg: &RunConfig, out: &mut RunOutput) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    let ds = &c.working;
    let split = stratified_kfold(ds, cfg.k, cfg.seeds.sampling)?;
    let mut seeds = ds.seed_log.clone();
    seeds.push(SeedEntry { operation: "stratified_kfold".into(), seed: cfg.seeds.sampling });
    seeds.extend(head_seeds(cfg));

    let mut reports = Vec::new();
    for model in [ModelKind::Head, ModelKind::TfidfGbt] {
        let pipeline = pipeline_for(cfg, model, ds, out)?;
        let report = cross_validate_with_split(ds, pipeline.as_ref(), &split, true)?;
        write_report(out, &format!("report_{}.csv", model.label()), &report)?;
        reports.push((model, report));
    }

    let wins = |a: &ExperimentReport, b: &ExperimentReport| {
        a.folds.iter().zip(&b.folds).filter(|(x, y)| x.metrics.accuracy > y.metrics.accuracy).count()
    };
    let (head, gbt) = (&reports[0].1, &reports[1].1);
    let won = [wins(head, gbt), wins(gbt, head)];
    out.write_with("compare.csv", |w| -> Result<(), csv::Error> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record([
            "model", "pipeline", "folds", "mean_accuracy", "std_accuracy", "mean_precision", "mean_recall", "mean_f1",
            "mean_auc", "folds_won",
        ])?;
        for ((model, r), won) in reports.iter().zip(won) {
            csv.write_record([
                model.label().to_string(),
                r.pipeline.clone(),
                r.folds.len().to_string(),
                format!("{:.6}", r.mean.accuracy),
                format!("{:.6}", r.std.accuracy),
                format!("{:.6}", r.mean.precision),
                format!("{:.6}", r.mean.recall),
                format!("{:.6}", r.mean.f1),
                format!("{:.6}", r.mean.auc),
                won.to_string(),
            ])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    let results = json!({
        "models": reports.iter().map(|(m, r)| json!({ "model": m.label(), "summary": summary(r) })).collect::<Vec<_>>(),
        "paired_fold_wins": { "mbert-head": won[0], "tfidf-gbt": won[1] },
    });
    Ok(Finished::new(cfg, seeds, results))
}

fn write_predictions(
    out: &mut RunOutput,
    name: &str,
    ids: &[String],
    scored: &[(f64, Label)],
    truth: Option<&[Label]>,
) -> Result<(), CliError> {
    out.write_with(name, |w| -> Result<(), csv::Error> {
        let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        if truth.is_some() {
            csv.write_record(["id", "score", "label", "truth"])?;
        }
        for (i, (id, (score, label))) in ids.iter().zip(scored).enumerate() {
            let mut row = vec![id.clone(), format!("{score:.6}"), label.as_str().to_string()];
            if let Some(t) = truth {
                row.push(t[i].as_str().to_string());
            }
            csv.write_record(&row)?;
        }
        csv.flush()?;
        Ok(())
    })
}

pub fn evaluate_holdout_cmd(cfg: &RunConfig, out: &mut RunOutput, model: ModelKind) -> Result<Finished, CliError> {
    let c = load_corpus(cfg)?;
    let ds = &c.working;
    let path = cfg.data.holdout.as_ref().ok_or_else(|| config("data.holdout: required by this command"))?;
    let holdout = load_labeled(path, cfg.holdout_schema()?)?;
    let mut seeds = ds.seed_log.clone();

    let scorer: Box<dyn Scorer> = match model {
        ModelKind::Head => {
            let pipeline = head_pipeline(cfg, resolve_vocab(cfg, ds, out)?)?;
            seeds.extend(head_seeds(cfg));
            Box::new(pipeline.fit_model(ds).map_err(runtime)?.0)
        }
        ModelKind::TfidfGbt => Box::new(tfidf_pipeline(cfg)?.fit_model(ds).map_err(runtime)?),
    };
    let hd = &holdout.dataset;
    let fold: FoldReport = evaluate_holdout(scorer.as_ref(), hd)?;
    let titles: Vec<&str> = hd.titles().collect();
    let scored = scorer.classify(&titles).map_err(runtime)?;
    let ids: Vec<String> = hd.records().iter().map(|r| r.id.clone()).collect();

    let report = ExperimentReport::new(model.label(), vec![fold], seeds.clone());
    write_report(out, "holdout_report.csv", &report)?;
    out.write_with("holdout_roc.csv", |w| write_roc_csv(&report.folds, w))?;
    write_predictions(out, "holdout_predictions.csv", &ids, &scored, Some(&hd.labels()))?;
    let f = &report.folds[0];
    let results = json!({
        "model": model.label(),
        "train": class_counts(ds),
        "holdout": class_counts(hd),
        "holdout_records": holdout.records,
        "metrics": f.metrics,
        "auc": f.auc,
        "confusion": f.confusion,
    });
    Ok(Finished::new(cfg, seeds, results))
}

/// Headlines to score: a CSV with a `title` column (and optionally `id`),
/// or plain text with one headline per line.
fn read_headlines(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let mut reader = csv::Reader::from_path(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
        let headers = reader.headers().map_err(data)?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim() == name);
        let title = col("title").ok_or_else(|| data(format!("{}: no title column", path.display())))?;
        let id = col("id");
        let mut rows = Vec::new();
        for (n, rec) in reader.records().enumerate() {
            let rec = rec.map_err(data)?;
            let t = rec.get(title).unwrap_or_default().to_string();
            let i = id.and_then(|c| rec.get(c)).map(str::to_string).unwrap_or_else(|| format!("row-{}", n + 1));
            rows.push((i, t));
        }
        Ok(rows)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
        Ok(text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| (format!("line-{}", n + 1), l.trim().to_string()))
            .collect())
    }
}

/// Scores headlines with a model written by `train`. Model settings come
/// from the training run's manifest; only the cache directory is taken from
/// the current configuration.
pub fn predict(cfg: &RunConfig, out: &mut RunOutput, model_dir: &Path, input: &Path) -> Result<Finished, CliError> {
    if !input.exists() {
        return Err(config(format!("--input: {} does not exist", input.display())));
    }
    let manifest = Manifest::read(model_dir)?;
    if manifest.command != "train" {
        return Err(config(format!("--model-dir: {} holds a {} run, not train", model_dir.display(), manifest.command)));
    }
    let mut trained: RunConfig = serde_json::from_value(manifest.config.clone())
        .map_err(|e| config(format!("--model-dir: unreadable training config: {e}")))?;
    trained.model.cache_dir = cfg.model.cache_dir.clone();
    let has = |name: &str| manifest.artifacts.iter().any(|a| a.path == name);

    let (kind, scorer): (ModelKind, Box<dyn Scorer>) = if has("head.params") {
        let vocab = match &trained.model.vocab {
            Some(p) => load_vocab(p),
            None => load_vocab(model_dir.join("vocab.txt")),
        }
        .map_err(|e| config(format!("model vocabulary: {e}")))?;
        let pipeline = head_pipeline(&trained, vocab)?;
        let features = Arc::clone(pipeline.features());
        let params = load_params(model_dir.join("head.params"), Some(features.width())).map_err(data)?;
        (ModelKind::Head, Box::new(HeadModel::new(features, params, trained.train.threshold).map_err(data)?))
    } else if has("gbt.bin") && has("tfidf.bin") {
        let tfidf = load_tfidf(model_dir.join("tfidf.bin")).map_err(data)?;
        let gbt = load_gbt(model_dir.join("gbt.bin")).map_err(data)?;
        (ModelKind::TfidfGbt, Box::new(TfidfGbtModel { tfidf, gbt, stopwords: stopwords(&trained)? }))
    } else {
        return Err(config(format!("--model-dir: {} holds no trained model", model_dir.display())));
    };

    let rows = read_headlines(input)?;
    if rows.is_empty() {
        return Err(data(format!("{}: no headlines", input.display())));
    }
    let titles: Vec<&str> = rows.iter().map(|(_, t)| t.as_str()).collect();
    let scored = scorer.classify(&titles).map_err(runtime)?;
    let ids: Vec<String> = rows.iter().map(|(i, _)| i.clone()).collect();
    write_predictions(out, "predictions.csv", &ids, &scored, None)?;
    let text = std::fs::read_to_string(out.path("predictions.csv")).map_err(runtime)?;
    print!("{text}");

    let results = json!({
        "model": kind,
        "headlines": rows.len(),
        "clickbait": scored.iter().filter(|(_, l)| l.is_positive()).count(),
    });
    let config = json!({
        "model_dir": model_dir,
        "input": input,
        "model_manifest": manifest.artifacts,
        "model_config": trained,
    });
    Ok(Finished { config, seeds: manifest.seeds, results })
}

/// Writes a synthetic corpus in the `simple-csv` schema with a matching
/// vocabulary.
pub fn synth(cfg: &RunConfig, out: &mut RunOutput, size: usize) -> Result<Finished, CliError> {
    let synth_cfg = SynthConfig { size, seed: cfg.seeds.sampling, ..SynthConfig::default() };
    let ds = synth_dataset(&synth_cfg);
    out.write_with("synth.csv", |w| -> Result<(), csv::Error> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["id", "title", "label"])?;
        for (i, r) in ds.records().iter().enumerate() {
            csv.write_record([r.id.as_str(), r.title.as_str(), ds.label(i).as_str()])?;
        }
        csv.flush()?;
        Ok(())
    })?;
    out.write_bytes("vocab.txt", vocab_text(&synth_vocab()).as_bytes())?;
    let results = json!({ "synth": synth_cfg, "counts": class_counts(&ds) });
    Ok(Finished::new(cfg, ds.seed_log.clone(), results))
}
