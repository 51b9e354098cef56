use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::MfccConfig;
use crate::error::{Error, Result};

/// Gate blocks are stacked in this order along the first axis of the
/// LSTM weight matrices and bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Cell = 2,
    Output = 3,
}

/// Weights for one LSTM direction. `w_input` maps x_t, `w_recurrent`
/// maps h_{t-1}; both stack the four gates row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_input: Array2<f64>,
    pub w_recurrent: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            w_input: Array2::zeros((4 * hidden_dim, input_dim)),
            w_recurrent: Array2::zeros((4 * hidden_dim, hidden_dim)),
            bias: Array1::zeros(4 * hidden_dim),
        }
    }

    /// Glorot-uniform per gate block, zero biases except forget gate at 1.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim);
        glorot_fill(
            p.w_input.as_slice_mut().unwrap(),
            input_dim,
            hidden_dim,
            rng,
        );
        glorot_fill(
            p.w_recurrent.as_slice_mut().unwrap(),
            hidden_dim,
            hidden_dim,
            rng,
        );
        p.bias.slice_mut(s![hidden_dim..2 * hidden_dim]).fill(1.0);
        p
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.ncols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_recurrent.ncols()
    }

    pub fn w(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.hidden_dim();
        let g = gate as usize;
        self.w_input.slice(s![g * h..(g + 1) * h, ..])
    }

    pub fn u(&self, gate: Gate) -> ArrayView2<'_, f64> {
        let h = self.hidden_dim();
        let g = gate as usize;
        self.w_recurrent.slice(s![g * h..(g + 1) * h, ..])
    }

    pub fn b(&self, gate: Gate) -> ArrayView1<'_, f64> {
        let h = self.hidden_dim();
        let g = gate as usize;
        self.bias.slice(s![g * h..(g + 1) * h])
    }

    fn check(&self, name: &str) -> Result<()> {
        let h = self.w_recurrent.ncols();
        if self.w_recurrent.nrows() != 4 * h
            || self.w_input.nrows() != 4 * h
            || self.bias.len() != 4 * h
            || h == 0
            || self.w_input.ncols() == 0
        {
            return Err(Error::Shape(format!(
                "{name} LSTM tensors are inconsistent"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams {
    /// d_a x 2H projection
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    /// context vector
    pub context: Array1<f64>,
}

impl AttentionParams {
    pub fn zeros(state_dim: usize, attention_dim: usize) -> Self {
        Self {
            w: Array2::zeros((attention_dim, state_dim)),
            b: Array1::zeros(attention_dim),
            context: Array1::zeros(attention_dim),
        }
    }

    pub fn init<R: Rng>(state_dim: usize, attention_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(state_dim, attention_dim);
        glorot_fill(p.w.as_slice_mut().unwrap(), state_dim, attention_dim, rng);
        glorot_fill(p.context.as_slice_mut().unwrap(), attention_dim, 1, rng);
        p
    }

    pub fn attention_dim(&self) -> usize {
        self.w.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputParams {
    /// 1 x 2H, stored flat
    pub w: Array1<f64>,
    pub b: f64,
}

impl OutputParams {
    pub fn zeros(state_dim: usize) -> Self {
        Self {
            w: Array1::zeros(state_dim),
            b: 0.0,
        }
    }

    pub fn init<R: Rng>(state_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(state_dim);
        glorot_fill(p.w.as_slice_mut().unwrap(), state_dim, 1, rng);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Bilstm,
    AttentionBilstm,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::Bilstm, Variant::AttentionBilstm];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Bilstm => "bilstm",
            Variant::AttentionBilstm => "attention_bilstm",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Variant::Bilstm => "BiLSTM",
            Variant::AttentionBilstm => "Attention BiLSTM",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilstm" => Ok(Variant::Bilstm),
            "attention_bilstm" | "attention" => Ok(Variant::AttentionBilstm),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

/// Non-tensor model metadata carried through serialization.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub feature_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mfcc_config: Option<MfccConfig>,
    /// Waveform length (samples) that clips are zero-padded up to before
    /// featurization.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub forward: LstmParams,
    pub backward: LstmParams,
    pub attention: Option<AttentionParams>,
    pub output: OutputParams,
    pub variant: Variant,
    pub meta: ModelMeta,
}

impl ModelParams {
    pub fn zeros(
        variant: Variant,
        input_dim: usize,
        hidden_dim: usize,
        attention_dim: usize,
    ) -> Self {
        let state = 2 * hidden_dim;
        Self {
            forward: LstmParams::zeros(input_dim, hidden_dim),
            backward: LstmParams::zeros(input_dim, hidden_dim),
            attention: (variant == Variant::AttentionBilstm)
                .then(|| AttentionParams::zeros(state, attention_dim)),
            output: OutputParams::zeros(state),
            variant,
            meta: ModelMeta::default(),
        }
    }

    pub fn init<R: Rng>(
        variant: Variant,
        input_dim: usize,
        hidden_dim: usize,
        attention_dim: usize,
        rng: &mut R,
    ) -> Self {
        let state = 2 * hidden_dim;
        Self {
            forward: LstmParams::init(input_dim, hidden_dim, rng),
            backward: LstmParams::init(input_dim, hidden_dim, rng),
            attention: (variant == Variant::AttentionBilstm)
                .then(|| AttentionParams::init(state, attention_dim, rng)),
            output: OutputParams::init(state, rng),
            variant,
            meta: ModelMeta::default(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.forward.input_dim()
    }

    pub fn hidden_dim(&self) -> usize {
        self.forward.hidden_dim()
    }

    pub fn attention_dim(&self) -> Option<usize> {
        self.attention.as_ref().map(AttentionParams::attention_dim)
    }

    /// Same structure, every tensor zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = Self::zeros(
            self.variant,
            self.input_dim(),
            self.hidden_dim(),
            self.attention_dim().unwrap_or(0),
        );
        z.meta = self.meta.clone();
        z
    }

    pub fn validate(&self) -> Result<()> {
        self.forward.check("forward")?;
        self.backward.check("backward")?;
        if self.forward.hidden_dim() != self.backward.hidden_dim()
            || self.forward.input_dim() != self.backward.input_dim()
        {
            return Err(Error::Shape(
                "LSTM directions disagree on dimensions".into(),
            ));
        }
        let state = 2 * self.hidden_dim();
        match (&self.attention, self.variant) {
            (Some(a), Variant::AttentionBilstm) => {
                let d = a.w.nrows();
                if d == 0 || a.w.ncols() != state || a.b.len() != d || a.context.len() != d {
                    return Err(Error::Shape("attention tensors are inconsistent".into()));
                }
            }
            (None, Variant::Bilstm) => {}
            _ => {
                return Err(Error::Shape(
                    "attention parameters must be present exactly for the attention variant".into(),
                ))
            }
        }
        if self.output.w.len() != state {
            return Err(Error::Shape(format!(
                "output weights have {} entries, expected {state}",
                self.output.w.len()
            )));
        }
        if self
            .tensors()
            .iter()
            .any(|t| t.values.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Shape("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Every trainable tensor, in a fixed order shared with [`Self::tensors_mut`].
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::with_capacity(11);
        for (prefix, p) in [("forward", &self.forward), ("backward", &self.backward)] {
            out.push(TensorRef::matrix(format!("{prefix}.w_input"), &p.w_input));
            out.push(TensorRef::matrix(
                format!("{prefix}.w_recurrent"),
                &p.w_recurrent,
            ));
            out.push(TensorRef::vector(format!("{prefix}.bias"), &p.bias));
        }
        if let Some(a) = &self.attention {
            out.push(TensorRef::matrix("attention.w".into(), &a.w));
            out.push(TensorRef::vector("attention.b".into(), &a.b));
            out.push(TensorRef::vector("attention.context".into(), &a.context));
        }
        out.push(TensorRef {
            name: "output.w".into(),
            dims: vec![1, self.output.w.len()],
            values: self.output.w.as_slice().unwrap(),
        });
        out.push(TensorRef {
            name: "output.b".into(),
            dims: vec![],
            values: std::slice::from_ref(&self.output.b),
        });
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(11);
        for p in [&mut self.forward, &mut self.backward] {
            out.push(p.w_input.as_slice_mut().unwrap());
            out.push(p.w_recurrent.as_slice_mut().unwrap());
            out.push(p.bias.as_slice_mut().unwrap());
        }
        if let Some(a) = &mut self.attention {
            out.push(a.w.as_slice_mut().unwrap());
            out.push(a.b.as_slice_mut().unwrap());
            out.push(a.context.as_slice_mut().unwrap());
        }
        out.push(self.output.w.as_slice_mut().unwrap());
        out.push(std::slice::from_mut(&mut self.output.b));
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.values.len()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.values.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug)]
pub struct TensorRef<'a> {
    pub name: String,
    pub dims: Vec<usize>,
    pub values: &'a [f64],
}

impl<'a> TensorRef<'a> {
    fn matrix(name: String, m: &'a Array2<f64>) -> Self {
        Self {
            name,
            dims: m.shape().to_vec(),
            values: m.as_slice().expect("standard layout"),
        }
    }

    fn vector(name: String, v: &'a Array1<f64>) -> Self {
        Self {
            name,
            dims: vec![v.len()],
            values: v.as_slice().expect("standard layout"),
        }
    }
}

fn glorot_fill<R: Rng>(values: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut R) {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    for v in values {
        *v = rng.random_range(-limit..=limit);
    }
}
