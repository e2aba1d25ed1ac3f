use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, batch_loss, forward, gradients, AdamHyper, AdamState, HeadError, HeadParams, HIDDEN_UNITS};
use crate::corpus::Label;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds weight initialization.
    pub seed: u64,
    /// Seeds per-epoch shuffling. Falls back to `seed + 1` when unset.
    pub shuffle_seed: Option<u64>,
    pub learning_rate: f64,
    pub threshold: f64,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3,
            batch_size: 32,
            seed: 0,
            shuffle_seed: None,
            learning_rate: 1e-5,
            threshold: 0.5,
            hidden: HIDDEN_UNITS,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), HeadError> {
        if self.epochs == 0 {
            return Err(HeadError::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(HeadError::Config("batch_size must be at least 1".into()));
        }
        if self.hidden == 0 {
            return Err(HeadError::Config("hidden must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(HeadError::Config(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(HeadError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        Ok(())
    }

    pub fn effective_shuffle_seed(&self) -> u64 {
        self.shuffle_seed.unwrap_or(self.seed.wrapping_add(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub seconds: f64,
}

/// Per-epoch record of a training run. `initial_loss` is the loss of the
/// freshly initialized head over the whole training set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub initial_loss: f64,
    pub epochs: Vec<EpochLog>,
}

fn init_params(width: usize, hidden: usize, seed: u64) -> HeadParams {
    let mut params = HeadParams::zeros(width, hidden);
    let bound = 1.0 / (width as f64).sqrt();
    let mut rng = seeded(seed);
    for w in params.w1_mut() {
        *w = rng.random_range(-bound..bound);
    }
    params
}

/// Trains a fresh head on pooled features.
///
/// The per-epoch `mean_loss` is the full-training-set loss evaluated after
/// the epoch's last update, so successive entries are directly comparable.
pub fn train(data: &[(Vec<f64>, Label)], config: &TrainConfig) -> Result<(HeadParams, TrainingLog), HeadError> {
    config.validate()?;
    if data.len() < 2 {
        return Err(HeadError::TooFewExamples(data.len()));
    }
    let first = data[0].1;
    if data.iter().all(|(_, y)| *y == first) {
        return Err(HeadError::SingleClass(first));
    }
    let width = data[0].0.len();
    if width == 0 {
        return Err(HeadError::Dimension { expected: 1, found: 0 });
    }

    let mut params = init_params(width, config.hidden, config.seed);
    let mut state = AdamState::new(&params, AdamHyper::with_learning_rate(config.learning_rate));
    let mut log = TrainingLog { initial_loss: batch_loss(&params, data)?, epochs: Vec::with_capacity(config.epochs) };
    let mut rng = seeded(config.effective_shuffle_seed());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| data[i].clone()));
            let grads = gradients(&params, &batch)?;
            adam_step(&mut params, &grads, &mut state);
        }
        let mean_loss = batch_loss(&params, data)?;
        log::debug!("epoch {epoch}: mean loss {mean_loss:.6}");
        log.epochs.push(EpochLog { epoch, mean_loss, seconds: started.elapsed().as_secs_f64() });
    }
    Ok((params, log))
}

/// Scores each feature vector and labels it clickbait when `score >= threshold`.
pub fn predict(params: &HeadParams, features: &[Vec<f64>], threshold: f64) -> Result<Vec<(f64, Label)>, HeadError> {
    features
        .iter()
        .map(|x| {
            let score = forward(params, x)?;
            let label = if score >= threshold { Label::Clickbait } else { Label::NonClickbait };
            Ok((score, label))
        })
        .collect()
}

pub fn write_training_log<W: Write>(log: &TrainingLog, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["epoch", "mean_loss", "seconds"])?;
    for e in &log.epochs {
        w.write_record([e.epoch.to_string(), format!("{:.6}", e.mean_loss), format!("{:.3}", e.seconds)])?;
    }
    w.flush()?;
    Ok(())
}
