//! Run configuration: a TOML file merged with command-line overrides.

use std::path::{Path, PathBuf};

use clickbait::baseline::GbtConfig;
use clickbait::corpus::Schema;
use clickbait::head::{TrainConfig, HIDDEN_UNITS};
use clickbait::preprocess::DEFAULT_MAX_LEN;
use serde::{Deserialize, Serialize};

use crate::error::{config, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Folds for `crossval` and `compare`.
    pub k: usize,
    /// Words per class in `eda`'s top list.
    pub top_words: usize,
    pub data: DataConfig,
    pub model: ModelConfig,
    pub train: HeadConfig,
    pub baseline: GbtConfig,
    pub seeds: Seeds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub train: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
    /// `clickid-json` or `simple-csv`.
    pub schema: String,
    /// Defaults to `schema`.
    pub holdout_schema: Option<String>,
    /// Undersample the majority class after agreement filtering.
    pub balance: bool,
    pub remove_stopwords: bool,
    /// Replaces the bundled Indonesian list.
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Path to an ONNX encoder export, or `hash:<width>:<seed>`.
    pub backend: String,
    /// WordPiece vocabulary. With a hash backend and no vocabulary, one is
    /// built from the training headlines.
    pub vocab: Option<PathBuf>,
    pub max_len: usize,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub threshold: f64,
    pub hidden: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Balancing, fold assignment and synthetic corpora.
    pub sampling: u64,
    pub shuffle: u64,
    pub init: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_dir: PathBuf::from("out"),
            k: 5,
            top_words: 10,
            data: DataConfig::default(),
            model: ModelConfig::default(),
            train: HeadConfig::default(),
            baseline: GbtConfig::default(),
            seeds: Seeds::default(),
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            train: None,
            holdout: None,
            schema: Schema::ClickIdJson.id().into(),
            holdout_schema: None,
            balance: true,
            remove_stopwords: true,
            stopwords: None,
        }
    }
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { backend: "hash:64:0".into(), vocab: None, max_len: DEFAULT_MAX_LEN, cache_dir: None }
    }
}

impl Default for HeadConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        HeadConfig {
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            threshold: t.threshold,
            hidden: HIDDEN_UNITS,
        }
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::from_base(42)
    }
}

impl Seeds {
    /// `--seed s` sets sampling `s`, shuffling `s + 1`, initialization `s + 2`.
    pub fn from_base(s: u64) -> Self {
        Seeds { sampling: s, shuffle: s.wrapping_add(1), init: s.wrapping_add(2) }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub max_len: Option<usize>,
    pub epochs: Option<usize>,
    pub backend: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub holdout: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub schema: Option<String>,
}

/// What a command needs from the configuration beyond the basic checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Needs {
    pub train: bool,
    pub holdout: bool,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("reading {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds = Seeds::from_base(s);
        }
        if let Some(k) = o.k {
            self.k = k;
        }
        if let Some(m) = o.max_len {
            self.model.max_len = m;
        }
        if let Some(e) = o.epochs {
            self.train.epochs = e;
        }
        if let Some(b) = &o.backend {
            self.model.backend = b.clone();
        }
        if let Some(c) = &o.cache_dir {
            self.model.cache_dir = Some(c.clone());
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(t) = &o.train {
            self.data.train = Some(t.clone());
        }
        if let Some(h) = &o.holdout {
            self.data.holdout = Some(h.clone());
        }
        if let Some(v) = &o.vocab {
            self.model.vocab = Some(v.clone());
        }
        if let Some(s) = &o.schema {
            self.data.schema = s.clone();
        }
    }

    pub fn schema(&self) -> Result<Schema, CliError> {
        self.data.schema.parse().map_err(|e| config(format!("data.schema: {e}")))
    }

    pub fn holdout_schema(&self) -> Result<Schema, CliError> {
        match &self.data.holdout_schema {
            Some(s) => s.parse().map_err(|e| config(format!("data.holdout_schema: {e}"))),
            None => self.schema(),
        }
    }

    pub fn is_hash_backend(&self) -> bool {
        self.model.backend.starts_with("hash:")
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.train.epochs,
            batch_size: self.train.batch_size,
            seed: self.seeds.init,
            shuffle_seed: Some(self.seeds.shuffle),
            learning_rate: self.train.learning_rate,
            threshold: self.train.threshold,
            hidden: self.train.hidden,
        }
    }

    pub fn validate(&self, needs: Needs) -> Result<(), CliError> {
        if self.k < 2 {
            return Err(config(format!("k: must be at least 2, got {}", self.k)));
        }
        if self.model.max_len < 3 {
            return Err(config(format!("model.max_len: must be at least 3, got {}", self.model.max_len)));
        }
        self.schema()?;
        self.holdout_schema()?;
        self.train_config().validate().map_err(|e| config(format!("train: {e}")))?;
        self.baseline.validate().map_err(|e| config(format!("baseline: {e}")))?;
        if self.output_dir.as_os_str().is_empty() {
            return Err(config("output_dir: must not be empty"));
        }

        if needs.train && self.data.train.is_none() {
            return Err(config("data.train: required by this command"));
        }
        if needs.holdout && self.data.holdout.is_none() {
            return Err(config("data.holdout: required by this command"));
        }
        let paths = [
            ("data.train", self.data.train.as_ref()),
            ("data.holdout", self.data.holdout.as_ref()),
            ("data.stopwords", self.data.stopwords.as_ref()),
            ("model.vocab", self.model.vocab.as_ref()),
        ];
        for (field, path) in paths {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(config(format!("{field}: {} does not exist", p.display())));
                }
            }
        }
        if !self.is_hash_backend() {
            let model = self.model.backend.strip_prefix("onnx:").unwrap_or(&self.model.backend);
            if !Path::new(model).exists() {
                return Err(config(format!("model.backend: {model} does not exist")));
            }
            if self.model.vocab.is_none() {
                return Err(config("model.vocab: required with an ONNX encoder"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_then_flags() {
        let mut cfg: RunConfig = toml::from_str(
            r#"
            k = 10
            [model]
            max_len = 32
            [train]
            epochs = 7
            learning_rate = 0.001
            [seeds]
            sampling = 1
            "#,
        )
        .unwrap();
        assert_eq!((cfg.k, cfg.model.max_len, cfg.train.epochs), (10, 32, 7));
        assert_eq!(cfg.train.batch_size, 32);
        assert_eq!(cfg.seeds, Seeds { sampling: 1, shuffle: 43, init: 44 });

        cfg.apply(&Overrides { seed: Some(7), k: Some(3), epochs: Some(2), ..Overrides::default() });
        assert_eq!(cfg.seeds, Seeds { sampling: 7, shuffle: 8, init: 9 });
        assert_eq!((cfg.k, cfg.train.epochs, cfg.model.max_len), (3, 2, 32));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("kk = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[model]\nmaxlen = 3").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            (RunConfig { k: 1, ..RunConfig::default() }, "k:"),
            (
                RunConfig { model: ModelConfig { max_len: 2, ..ModelConfig::default() }, ..RunConfig::default() },
                "model.max_len",
            ),
            (
                RunConfig { data: DataConfig { schema: "xml".into(), ..DataConfig::default() }, ..RunConfig::default() },
                "data.schema",
            ),
            (
                RunConfig {
                    data: DataConfig { train: Some("/no/such/file".into()), ..DataConfig::default() },
                    ..RunConfig::default()
                },
                "data.train",
            ),
            (
                RunConfig { train: HeadConfig { learning_rate: -1.0, ..HeadConfig::default() }, ..RunConfig::default() },
                "train:",
            ),
        ];
        for (cfg, field) in cases {
            let err = cfg.validate(Needs::default()).unwrap_err();
            assert!(matches!(err, CliError::Config(_)));
            assert!(err.to_string().contains(field), "{err}");
        }
        let err = RunConfig::default().validate(Needs { train: true, holdout: false }).unwrap_err();
        assert!(err.to_string().contains("data.train"));
    }

    #[test]
    fn onnx_backend_needs_a_vocab() {
        let dir = tempfile::tempdir().unwrap();
        let model = dir.path().join("encoder.onnx");
        std::fs::write(&model, b"").unwrap();
        let cfg = RunConfig {
            model: ModelConfig { backend: model.display().to_string(), ..ModelConfig::default() },
            ..RunConfig::default()
        };
        assert!(cfg.validate(Needs::default()).unwrap_err().to_string().contains("model.vocab"));
    }
}
