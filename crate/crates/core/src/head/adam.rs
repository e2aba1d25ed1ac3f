use serde::{Deserialize, Serialize};

use super::HeadParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamHyper {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamHyper { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self::with_learning_rate(1e-5)
    }
}

/// First and second moment estimates, shaped like the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: HeadParams,
    pub v: HeadParams,
    pub t: u64,
    pub hyper: AdamHyper,
}

impl AdamState {
    pub fn new(like: &HeadParams, hyper: AdamHyper) -> Self {
        let zeros = HeadParams::zeros(like.input_width(), like.hidden());
        AdamState { m: zeros.clone(), v: zeros, t: 0, hyper }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(params: &mut HeadParams, grads: &HeadParams, state: &mut AdamState) {
    assert_eq!(params.len(), grads.len(), "gradient shape mismatch");
    assert_eq!(params.len(), state.m.len(), "optimizer state shape mismatch");
    state.t += 1;
    let AdamHyper { learning_rate, beta1, beta2, epsilon } = state.hyper;
    let c1 = 1.0 - beta1.powf(state.t as f64);
    let c2 = 1.0 - beta2.powf(state.t as f64);
    let m = state.m.as_mut_slice();
    let v = state.v.as_mut_slice();
    for (i, (p, &g)) in params.as_mut_slice().iter_mut().zip(grads.as_slice()).enumerate() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
}
