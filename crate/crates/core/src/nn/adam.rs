use serde::{Deserialize, Serialize};

use super::params::ModelParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|t| vec![0.0; t.values.len()])
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One Adam update at step `t` (1-based) with bias-corrected moments.
/// Rejects non-finite gradients before touching any state.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamState,
    t: u64,
    cfg: &AdamConfig,
) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidInput("adam step index starts at 1".into()));
    }
    let grad_tensors = grads.tensors();
    if grad_tensors.len() != state.m.len()
        || grad_tensors
            .iter()
            .zip(&state.m)
            .any(|(g, m)| g.values.len() != m.len())
    {
        return Err(Error::Shape(
            "gradient and optimizer state shapes differ".into(),
        ));
    }
    if let Some(bad) = grad_tensors
        .iter()
        .find(|g| g.values.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::NonFiniteGradient(bad.name.clone()));
    }

    let bias1 = 1.0 - cfg.beta1.powi(t as i32);
    let bias2 = 1.0 - cfg.beta2.powi(t as i32);
    for (((theta, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(&grad_tensors)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        if theta.len() != g.values.len() {
            return Err(Error::Shape(format!("parameter {} shape differs", g.name)));
        }
        for i in 0..theta.len() {
            let gi = g.values[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            theta[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
    Ok(())
}

/// Rescales all gradients so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm(grads: &mut ModelParams, max_norm: f64) -> f64 {
    let norm = grads.l2_norm();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for t in grads.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= scale);
        }
    }
    norm
}
