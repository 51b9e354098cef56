//! Attention BiLSTM classifier: forward pass, weighted cross-entropy,
//! exact gradients, Adam and the model file format.

mod adam;
mod attention;
mod loss;
mod lstm;
mod model;
mod params;
mod serialize;

pub use adam::{adam_step, clip_global_norm, AdamConfig, AdamState};
pub use attention::{attention_forward, softmax, AttentionGrads, AttentionTrace};
pub use loss::{weighted_bce, weighted_bce_logit_grad, PROB_CLIP};
pub use lstm::{
    lstm_cell_forward, lstm_cell_with_gates, CellState, GateValues, LstmGrads, LstmTrace,
};
pub use model::{
    attention_weights, backward_pass, batch_loss, bilstm_forward, predict_probability, Prediction,
    Verdict, WeightedExample, DECISION_THRESHOLD,
};
pub use params::{
    AttentionParams, Gate, LstmParams, ModelMeta, ModelParams, OutputParams, TensorRef, Variant,
};
pub use serialize::{deserialize_model, serialize_model, FORMAT_VERSION, MAGIC};

use ndarray::{s, Array2};

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Stacks equal-width matrices vertically.
pub(crate) fn stack_rows(parts: &[Array2<f64>]) -> Array2<f64> {
    let rows: usize = parts.iter().map(Array2::nrows).sum();
    let cols = parts[0].ncols();
    let mut out = Array2::zeros((rows, cols));
    let mut at = 0;
    for p in parts {
        out.slice_mut(s![at..at + p.nrows(), ..]).assign(p);
        at += p.nrows();
    }
    out
}
