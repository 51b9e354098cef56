//! Forward scoring and exact gradients for the BiLSTM classifiers.

use std::collections::BTreeMap;

use ndarray::{concatenate, s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::attention::AttentionTrace;
use super::loss::{weighted_bce, weighted_bce_logit_grad};
use super::lstm::{lstm_cell_forward, CellState, LstmTrace};
use super::params::{LstmParams, ModelParams, Variant};
use super::sigmoid;
use crate::dsp::MfccMatrix;
use crate::error::{Error, Result};

/// Decision threshold on p: at or above it the attempt is flagged.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Mispronounced,
}

impl Verdict {
    pub fn from_probability(p: f64) -> Self {
        if p >= DECISION_THRESHOLD {
            Verdict::Mispronounced
        } else {
            Verdict::Correct
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::Mispronounced => "mispronounced",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub verdict: Verdict,
}

/// Per-step concatenated states `[h_fwd_t, h_bwd_t]`, computed step by
/// step with the single-vector cell.
pub fn bilstm_forward(
    x_seq: &MfccMatrix,
    fwd: &LstmParams,
    bwd: &LstmParams,
) -> Result<Vec<Array1<f64>>> {
    if fwd.hidden_dim() != bwd.hidden_dim() {
        return Err(Error::Shape("directions differ in hidden size".into()));
    }
    let frames = x_seq.frames();
    let steps = frames.nrows();
    let mut forward = Vec::with_capacity(steps);
    let mut state = CellState::zeros(fwd.hidden_dim());
    for x in frames.rows() {
        state = lstm_cell_forward(x, &state, fwd)?;
        forward.push(state.h.clone());
    }
    let mut backward = vec![Array1::zeros(0); steps];
    let mut state = CellState::zeros(bwd.hidden_dim());
    for t in (0..steps).rev() {
        state = lstm_cell_forward(frames.row(t), &state, bwd)?;
        backward[t] = state.h.clone();
    }
    Ok(forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| concatenate![Axis(0), f, b])
        .collect())
}

/// Activations of one equal-length group of sequences.
struct ForwardTrace {
    steps: usize,
    forward: LstmTrace,
    backward: LstmTrace,
    attention: Option<AttentionTrace>,
    /// batch x 2H classifier input
    pooled: Array2<f64>,
    probs: Array1<f64>,
}

fn check_inputs(seqs: &[&MfccMatrix], m: &ModelParams) -> Result<usize> {
    let steps = seqs[0].n_frames();
    for s in seqs {
        if s.n_coeffs() != m.input_dim() {
            return Err(Error::Shape(format!(
                "model expects {} features per frame, got {}",
                m.input_dim(),
                s.n_coeffs()
            )));
        }
        if s.n_frames() != steps {
            return Err(Error::Shape("sequences in a group differ in length".into()));
        }
    }
    Ok(steps)
}

fn forward_group(seqs: &[&MfccMatrix], m: &ModelParams) -> Result<ForwardTrace> {
    let steps = check_inputs(seqs, m)?;
    let batch = seqs.len();
    let hid = m.hidden_dim();
    let step_input = |t: usize| {
        let mut x = Array2::zeros((batch, m.input_dim()));
        for (b, s) in seqs.iter().enumerate() {
            x.row_mut(b).assign(&s.frames().row(t));
        }
        x
    };
    let fwd_inputs: Vec<Array2<f64>> = (0..steps).map(step_input).collect();
    let bwd_inputs: Vec<Array2<f64>> = fwd_inputs.iter().rev().cloned().collect();
    let forward = LstmTrace::run(&fwd_inputs, &m.forward)?;
    let backward = LstmTrace::run(&bwd_inputs, &m.backward)?;

    let (attention, pooled) = match (&m.attention, m.variant) {
        (Some(a), Variant::AttentionBilstm) => {
            let states: Vec<Array2<f64>> = (0..steps)
                .map(|t| {
                    concatenate![
                        Axis(1),
                        forward.hidden_states()[t],
                        backward.hidden_states()[steps - 1 - t]
                    ]
                })
                .collect();
            let trace = AttentionTrace::run(&states, a);
            let pooled = trace.pooled().clone();
            (Some(trace), pooled)
        }
        (None, Variant::Bilstm) => {
            // last state of each direction: h_fwd at T, h_bwd at 1
            let pooled = concatenate![
                Axis(1),
                forward.hidden_states()[steps - 1],
                backward.hidden_states()[steps - 1]
            ];
            (None, pooled)
        }
        _ => {
            return Err(Error::Shape(
                "attention parameters do not match variant".into(),
            ))
        }
    };
    debug_assert_eq!(pooled.ncols(), 2 * hid);
    let probs = (pooled.dot(&m.output.w) + m.output.b).mapv(sigmoid);
    Ok(ForwardTrace {
        steps,
        forward,
        backward,
        attention,
        pooled,
        probs,
    })
}

/// Mispronunciation probability for one utterance.
pub fn predict_probability(x_seq: &MfccMatrix, m: &ModelParams) -> Result<Prediction> {
    let trace = forward_group(&[x_seq], m)?;
    let probability = trace.probs[0];
    Ok(Prediction {
        probability,
        verdict: Verdict::from_probability(probability),
    })
}

/// Attention weights over frames for one utterance (attention variant only).
pub fn attention_weights(x_seq: &MfccMatrix, m: &ModelParams) -> Result<Option<Array1<f64>>> {
    let trace = forward_group(&[x_seq], m)?;
    Ok(trace.attention.map(|a| a.alpha().column(0).to_owned()))
}

/// One training example: features, target y in {0, 1} and loss weight.
#[derive(Debug, Clone, Copy)]
pub struct WeightedExample<'a> {
    pub features: &'a MfccMatrix,
    pub target: f64,
    pub weight: f64,
}

/// Mean weighted loss over `batch` without gradients.
pub fn batch_loss(batch: &[WeightedExample<'_>], m: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for (_, idx) in group_by_length(batch)? {
        let seqs: Vec<&MfccMatrix> = idx.iter().map(|&i| batch[i].features).collect();
        let trace = forward_group(&seqs, m)?;
        for (k, &i) in idx.iter().enumerate() {
            total += weighted_bce(trace.probs[k], batch[i].target, batch[i].weight);
        }
    }
    Ok(total / batch.len() as f64)
}

fn group_by_length(batch: &[WeightedExample<'_>]) -> Result<BTreeMap<usize, Vec<usize>>> {
    if batch.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, ex) in batch.iter().enumerate() {
        if ex.weight.is_nan() || ex.weight <= 0.0 || (ex.target != 0.0 && ex.target != 1.0) {
            return Err(Error::InvalidInput(format!(
                "example {i}: target must be 0 or 1 and weight positive"
            )));
        }
        groups.entry(ex.features.n_frames()).or_default().push(i);
    }
    Ok(groups)
}

/// Mean weighted loss over the batch and its exact gradient with respect
/// to every parameter, by reverse accumulation through the output head,
/// attention pooling and both LSTM directions.
pub fn backward_pass(batch: &[WeightedExample<'_>], m: &ModelParams) -> Result<(f64, ModelParams)> {
    m.validate()?;
    let groups = group_by_length(batch)?;
    let n = batch.len() as f64;
    let hid = m.hidden_dim();
    let mut grads = m.zeros_like();
    let mut total_loss = 0.0;

    for (_, idx) in groups {
        let seqs: Vec<&MfccMatrix> = idx.iter().map(|&i| batch[i].features).collect();
        let trace = forward_group(&seqs, m)?;
        let steps = trace.steps;

        let mut d_logit = Array1::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let ex = &batch[i];
            let p = trace.probs[k];
            total_loss += weighted_bce(p, ex.target, ex.weight);
            d_logit[k] = weighted_bce_logit_grad(p, ex.target, ex.weight) / n;
        }

        grads.output.w += &trace.pooled.t().dot(&d_logit);
        grads.output.b += d_logit.sum();
        // outer product: batch x 2H
        let d_pooled = d_logit
            .view()
            .insert_axis(Axis(1))
            .dot(&m.output.w.view().insert_axis(Axis(0)));

        let zeros = || Array2::<f64>::zeros((idx.len(), hid));
        let mut d_fwd: Vec<Array2<f64>> = (0..steps).map(|_| zeros()).collect();
        let mut d_bwd: Vec<Array2<f64>> = (0..steps).map(|_| zeros()).collect();
        match (&trace.attention, &m.attention) {
            (Some(at), Some(a)) => {
                let (ag, d_states) = at.backward(&d_pooled, a);
                let g = grads.attention.as_mut().expect("attention grads present");
                g.w += &ag.w;
                g.b += &ag.b;
                g.context += &ag.context;
                for (t, ds) in d_states.into_iter().enumerate() {
                    d_fwd[t].assign(&ds.slice(s![.., ..hid]));
                    d_bwd[steps - 1 - t].assign(&ds.slice(s![.., hid..]));
                }
            }
            _ => {
                d_fwd[steps - 1].assign(&d_pooled.slice(s![.., ..hid]));
                d_bwd[steps - 1].assign(&d_pooled.slice(s![.., hid..]));
            }
        }

        let gf = trace.forward.backward(&d_fwd, &m.forward);
        grads.forward.w_input += &gf.w_input;
        grads.forward.w_recurrent += &gf.w_recurrent;
        grads.forward.bias += &gf.bias;
        let gb = trace.backward.backward(&d_bwd, &m.backward);
        grads.backward.w_input += &gb.w_input;
        grads.backward.w_recurrent += &gb.w_recurrent;
        grads.backward.bias += &gb.bias;
    }
    Ok((total_loss / n, grads))
}
