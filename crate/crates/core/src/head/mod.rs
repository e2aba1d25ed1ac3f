//! Trainable classifier head over pooled token embeddings.
//!
//! `masked mean pool → dense(100, ReLU) → dense(1, sigmoid)`, trained with
//! binary cross-entropy and Adam. Gradients are derived by hand.

mod adam;
mod io;
mod train;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::embed::EmbeddingSequence;

pub use adam::{adam_step, AdamHyper, AdamState};
pub use io::{load_params, params_from_bytes, params_to_bytes, save_params};
pub use train::{predict, train, write_training_log, EpochLog, TrainConfig, TrainingLog};

/// Width of the hidden ReLU layer.
pub const HIDDEN_UNITS: usize = 100;

/// Probability clamp used by [`bce_loss`].
pub const BCE_EPS: f64 = 1e-7;

#[derive(Debug, thiserror::Error)]
pub enum HeadError {
    #[error("attention mask has no active position")]
    EmptyMask,
    #[error("feature vector has width {found}, head expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite input feature at index {0}")]
    NonFinite(usize),
    #[error("training needs both classes, found only {0}")]
    SingleClass(Label),
    #[error("training needs at least 2 examples, got {0}")]
    TooFewExamples(usize),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("params file: {0}")]
    Decode(#[from] crate::codec::DecodeError),
}

/// Weights of the head, stored flat as `[W1 | b1 | w2 | b2]` with `W1`
/// row-major (`hidden × input`). Gradients and Adam moments share this
/// layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    input_width: usize,
    hidden: usize,
    data: Vec<f64>,
}

impl HeadParams {
    pub fn zeros(input_width: usize, hidden: usize) -> Self {
        HeadParams { input_width, hidden, data: vec![0.0; hidden * input_width + 2 * hidden + 1] }
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn w1_len(&self) -> usize {
        self.hidden * self.input_width
    }

    pub fn w1(&self) -> &[f64] {
        &self.data[..self.w1_len()]
    }

    pub fn w1_mut(&mut self) -> &mut [f64] {
        let n = self.w1_len();
        &mut self.data[..n]
    }

    pub fn b1(&self) -> &[f64] {
        let s = self.w1_len();
        &self.data[s..s + self.hidden]
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        let s = self.w1_len();
        &mut self.data[s..s + self.hidden]
    }

    pub fn w2(&self) -> &[f64] {
        let s = self.w1_len() + self.hidden;
        &self.data[s..s + self.hidden]
    }

    pub fn w2_mut(&mut self) -> &mut [f64] {
        let s = self.w1_len() + self.hidden;
        &mut self.data[s..s + self.hidden]
    }

    pub fn b2(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    pub fn set_b2(&mut self, v: f64) {
        let n = self.data.len();
        self.data[n - 1] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub(crate) fn from_parts(input_width: usize, hidden: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), hidden * input_width + 2 * hidden + 1);
        HeadParams { input_width, hidden, data }
    }
}

/// Mean of the vectors at mask-1 positions.
pub fn masked_mean_pool(emb: &EmbeddingSequence) -> Result<Vec<f64>, HeadError> {
    let mut sum = vec![0.0f64; emb.width];
    let mut count = 0usize;
    for (pos, &m) in emb.mask.iter().enumerate().take(emb.len) {
        if m == 1 {
            for (s, &v) in sum.iter_mut().zip(emb.row(pos)) {
                *s += v as f64;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(HeadError::EmptyMask);
    }
    let n = count as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}

/// Logistic function, evaluated without overflow for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

struct Activations {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    logit: f64,
}

fn activations(params: &HeadParams, x: &[f64]) -> Activations {
    let h = params.input_width;
    let w1 = params.w1();
    let pre: Vec<f64> = params
        .b1()
        .iter()
        .enumerate()
        .map(|(i, &b)| b + w1[i * h..(i + 1) * h].iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
        .collect();
    let hidden: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
    let logit = params.b2() + params.w2().iter().zip(&hidden).map(|(w, a)| w * a).sum::<f64>();
    Activations { pre, hidden, logit }
}

fn check_input(params: &HeadParams, x: &[f64]) -> Result<(), HeadError> {
    if x.len() != params.input_width {
        return Err(HeadError::Dimension { expected: params.input_width, found: x.len() });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(HeadError::NonFinite(i));
    }
    Ok(())
}

/// Pre-sigmoid output `w2 · relu(W1 x + b1) + b2`.
pub fn logit(params: &HeadParams, x: &[f64]) -> Result<f64, HeadError> {
    check_input(params, x)?;
    Ok(activations(params, x).logit)
}

/// Probability of the clickbait class.
pub fn forward(params: &HeadParams, x: &[f64]) -> Result<f64, HeadError> {
    logit(params, x).map(sigmoid)
}

/// Binary cross-entropy with `p` clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub fn bce_loss(p: f64, y: f64) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean loss of the head over a batch.
pub fn batch_loss(params: &HeadParams, batch: &[(Vec<f64>, Label)]) -> Result<f64, HeadError> {
    let mut total = 0.0;
    for (x, y) in batch {
        total += bce_loss(forward(params, x)?, y.target());
    }
    Ok(total / batch.len() as f64)
}

/// Mean-over-batch gradient of the cross-entropy loss.
///
/// Through the sigmoid the loss gradient with respect to the logit is
/// `p - y`; this is exact wherever the probability clamp is inactive. The
/// ReLU derivative at 0 is taken as 0.
pub fn gradients(params: &HeadParams, batch: &[(Vec<f64>, Label)]) -> Result<HeadParams, HeadError> {
    let h = params.input_width;
    let mut grad = HeadParams::zeros(h, params.hidden);
    if batch.is_empty() {
        return Ok(grad);
    }
    let scale = 1.0 / batch.len() as f64;
    let mut d_pre = vec![0.0; params.hidden];
    for (x, y) in batch {
        check_input(params, x)?;
        let act = activations(params, x);
        let d_logit = (sigmoid(act.logit) - y.target()) * scale;

        for (i, d) in d_pre.iter_mut().enumerate() {
            *d = if act.pre[i] > 0.0 { d_logit * params.w2()[i] } else { 0.0 };
        }
        for (g, a) in grad.w2_mut().iter_mut().zip(&act.hidden) {
            *g += d_logit * a;
        }
        grad.set_b2(grad.b2() + d_logit);
        for (g, d) in grad.b1_mut().iter_mut().zip(&d_pre) {
            *g += d;
        }
        let gw1 = grad.w1_mut();
        for (i, &d) in d_pre.iter().enumerate() {
            if d != 0.0 {
                for (g, v) in gw1[i * h..(i + 1) * h].iter_mut().zip(x) {
                    *g += d * v;
                }
            }
        }
    }
    Ok(grad)
}
