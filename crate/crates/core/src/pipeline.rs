//! Trainable classifiers that map raw headlines to clickbait scores.
//!
//! A [`Pipeline`] is a recipe: [`Pipeline::fit`] turns a training set into a
//! [`Scorer`]. Cross-validation fits one scorer per fold from the same
//! recipe.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use crate::baseline::{gbt_predict, gbt_train, tfidf_fit, BaselineError, GbtConfig, GbtModel, TfidfModel};
use crate::corpus::{Label, LabeledDataset};
use crate::embed::{cached_embed, embed_batch, EmbedError, EmbeddingBackend};
use crate::head::{masked_mean_pool, predict, train, HeadError, HeadParams, TrainConfig, TrainingLog};
use crate::preprocess::{normalize_text, remove_stopwords, HeadlineEncoder, StopwordSet};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Head(#[from] HeadError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("embedding of headline {index} has no active position")]
    EmptySequence { index: usize },
    #[error("{0}")]
    Other(String),
}

/// A fitted classifier.
pub trait Scorer: Send + Sync {
    /// Clickbait probability per headline.
    fn score(&self, titles: &[&str]) -> Result<Vec<f64>, PipelineError>;

    /// Scores at or above this are labelled clickbait.
    fn threshold(&self) -> f64 {
        0.5
    }

    fn classify(&self, titles: &[&str]) -> Result<Vec<(f64, Label)>, PipelineError> {
        let t = self.threshold();
        Ok(self
            .score(titles)?
            .into_iter()
            .map(|s| (s, if s >= t { Label::Clickbait } else { Label::NonClickbait }))
            .collect())
    }
}

pub trait Pipeline: Sync {
    fn name(&self) -> String;

    /// Called once with every headline an experiment will touch, before any
    /// fold is fitted. Lets expensive per-headline work happen in bulk.
    fn prepare(&self, _titles: &[&str]) -> Result<(), PipelineError> {
        Ok(())
    }

    fn fit(&self, train: &LabeledDataset) -> Result<Box<dyn Scorer>, PipelineError>;
}

/// Headlines embedded per call while pooling, bounding peak memory to
/// `POOL_CHUNK × L × H` floats.
const POOL_CHUNK: usize = 256;

/// Headline → pooled encoder features, memoized by headline text.
pub struct HeadFeatures {
    encoder: HeadlineEncoder,
    backend: Box<dyn EmbeddingBackend>,
    cache_dir: Option<PathBuf>,
    memo: Mutex<HashMap<String, Arc<Vec<f64>>>>,
}

impl HeadFeatures {
    pub fn new(encoder: HeadlineEncoder, backend: Box<dyn EmbeddingBackend>, cache_dir: Option<PathBuf>) -> Self {
        HeadFeatures { encoder, backend, cache_dir, memo: Mutex::new(HashMap::new()) }
    }

    pub fn backend(&self) -> &dyn EmbeddingBackend {
        self.backend.as_ref()
    }

    pub fn width(&self) -> usize {
        self.backend.hidden_width()
    }

    /// Pooled feature vector per headline, in input order.
    pub fn pooled(&self, titles: &[&str]) -> Result<Vec<Arc<Vec<f64>>>, PipelineError> {
        let missing: Vec<&str> = {
            let memo = self.memo.lock().unwrap_or_else(|p| p.into_inner());
            let mut seen = std::collections::HashSet::new();
            titles.iter().copied().filter(|t| !memo.contains_key(*t) && seen.insert(*t)).collect()
        };
        for chunk in missing.chunks(POOL_CHUNK) {
            let sequences: Vec<_> = chunk.iter().map(|t| self.encoder.encode(t)).collect();
            let embedded = match &self.cache_dir {
                Some(dir) => cached_embed(self.backend.as_ref(), dir, &sequences)?,
                None => embed_batch(self.backend.as_ref(), &sequences)?,
            };
            let mut pooled = Vec::with_capacity(chunk.len());
            for (i, e) in embedded.iter().enumerate() {
                pooled.push(Arc::new(masked_mean_pool(e).map_err(|_| PipelineError::EmptySequence { index: i })?));
            }
            let mut memo = self.memo.lock().unwrap_or_else(|p| p.into_inner());
            for (t, p) in chunk.iter().zip(pooled) {
                memo.insert((*t).to_string(), p);
            }
        }
        let memo = self.memo.lock().unwrap_or_else(|p| p.into_inner());
        Ok(titles.iter().map(|t| memo[*t].clone()).collect())
    }
}

/// Frozen encoder + masked mean pooling + trained head.
pub struct HeadPipeline {
    features: Arc<HeadFeatures>,
    config: TrainConfig,
}

impl HeadPipeline {
    pub fn new(features: HeadFeatures, config: TrainConfig) -> Self {
        HeadPipeline { features: Arc::new(features), config }
    }

    pub fn features(&self) -> &Arc<HeadFeatures> {
        &self.features
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn fit_model(&self, train_set: &LabeledDataset) -> Result<(HeadModel, TrainingLog), PipelineError> {
        let titles: Vec<&str> = train_set.titles().collect();
        let pooled = self.features.pooled(&titles)?;
        let data: Vec<(Vec<f64>, Label)> =
            pooled.iter().zip(train_set.labels()).map(|(x, y)| (x.as_ref().clone(), y)).collect();
        let (params, log) = train(&data, &self.config)?;
        Ok((HeadModel { features: self.features.clone(), params, threshold: self.config.threshold }, log))
    }
}

impl Pipeline for HeadPipeline {
    fn name(&self) -> String {
        format!("head[{}]", self.features.backend.name())
    }

    fn prepare(&self, titles: &[&str]) -> Result<(), PipelineError> {
        self.features.pooled(titles).map(|_| ())
    }

    fn fit(&self, train_set: &LabeledDataset) -> Result<Box<dyn Scorer>, PipelineError> {
        Ok(Box::new(self.fit_model(train_set)?.0))
    }
}

pub struct HeadModel {
    features: Arc<HeadFeatures>,
    params: HeadParams,
    threshold: f64,
}

impl HeadModel {
    pub fn new(features: Arc<HeadFeatures>, params: HeadParams, threshold: f64) -> Result<Self, PipelineError> {
        if params.input_width() != features.width() {
            return Err(HeadError::Dimension { expected: features.width(), found: params.input_width() }.into());
        }
        Ok(HeadModel { features, params, threshold })
    }

    pub fn params(&self) -> &HeadParams {
        &self.params
    }
}

impl Scorer for HeadModel {
    fn score(&self, titles: &[&str]) -> Result<Vec<f64>, PipelineError> {
        let pooled = self.features.pooled(titles)?;
        let feats: Vec<Vec<f64>> = pooled.iter().map(|p| p.as_ref().clone()).collect();
        Ok(predict(&self.params, &feats, self.threshold)?.into_iter().map(|(s, _)| s).collect())
    }

    fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// TF-IDF vectors fed to gradient-boosted trees.
#[derive(Debug, Clone, Default)]
pub struct TfidfGbtPipeline {
    pub stopwords: Option<StopwordSet>,
    pub config: GbtConfig,
}

fn clean(text: &str, stopwords: Option<&StopwordSet>) -> String {
    let text = normalize_text(text);
    match stopwords {
        Some(s) => remove_stopwords(&text, s),
        None => text,
    }
}

impl TfidfGbtPipeline {
    pub fn fit_model(&self, train_set: &LabeledDataset) -> Result<TfidfGbtModel, PipelineError> {
        let docs: Vec<String> = train_set.titles().map(|t| clean(t, self.stopwords.as_ref())).collect();
        let tfidf = tfidf_fit(&docs)?;
        let x = tfidf.transform_all(&docs);
        let gbt = gbt_train(&x, &train_set.labels(), &self.config)?;
        Ok(TfidfGbtModel { tfidf, gbt, stopwords: self.stopwords.clone() })
    }
}

impl Pipeline for TfidfGbtPipeline {
    fn name(&self) -> String {
        "tfidf-gbt".into()
    }

    fn fit(&self, train_set: &LabeledDataset) -> Result<Box<dyn Scorer>, PipelineError> {
        Ok(Box::new(self.fit_model(train_set)?))
    }
}

#[derive(Debug, Clone)]
pub struct TfidfGbtModel {
    pub tfidf: TfidfModel,
    pub gbt: GbtModel,
    pub stopwords: Option<StopwordSet>,
}

impl Scorer for TfidfGbtModel {
    fn score(&self, titles: &[&str]) -> Result<Vec<f64>, PipelineError> {
        let docs: Vec<String> = titles.iter().map(|t| clean(t, self.stopwords.as_ref())).collect();
        Ok(gbt_predict(&self.gbt, &self.tfidf.transform_all(&docs)))
    }
}

/// Scores every headline with the same fixed probability.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPipeline(pub f64);

impl Pipeline for ConstantPipeline {
    fn name(&self) -> String {
        format!("constant[{}]", self.0)
    }

    fn fit(&self, _train: &LabeledDataset) -> Result<Box<dyn Scorer>, PipelineError> {
        Ok(Box::new(*self))
    }
}

impl Scorer for ConstantPipeline {
    fn score(&self, titles: &[&str]) -> Result<Vec<f64>, PipelineError> {
        Ok(vec![self.0; titles.len()])
    }
}
