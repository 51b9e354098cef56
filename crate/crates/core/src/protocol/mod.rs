//! Per-word experiment protocol: 50/50 splits, augmentation with other
//! words' correct recordings, class weights and the training loop.

mod assemble;
mod split;
mod train;

pub use assemble::{assemble_training_set, ExperimentData, LabeledExample};
pub use split::{split_per_word, WordSplit};
pub use train::{
    format_significant, train_word_model, EarlyStopping, EpochRecord, LabeledClip, TrainingLog,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::Label;
use crate::error::{Error, Result};
use crate::nn::Variant;

/// Seeds used for the five-run protocol.
pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Deterministic generator for one purpose under one seed. Every random
/// draw in the protocol goes through here.
pub fn seeded_rng(seed: u64, purpose: &str) -> ChaCha8Rng {
    let digest = Sha256::digest(purpose.as_bytes());
    let stream = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_dim: usize,
    /// Attention projection width; `None` means twice the hidden size.
    #[serde(default)]
    pub attention_dim: Option<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub clip_norm: f64,
    pub seed: u64,
    pub variant: Variant,
    /// Inverse-frequency class weights; off trains with unit weights.
    #[serde(default = "default_true")]
    pub class_weighting: bool,
}

fn default_true() -> bool {
    true
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 128,
            attention_dim: None,
            batch_size: 64,
            learning_rate: 1e-3,
            max_epochs: 100,
            patience: 5,
            min_delta: 1e-4,
            clip_norm: 5.0,
            seed: 0,
            variant: Variant::AttentionBilstm,
            class_weighting: true,
        }
    }
}

impl TrainConfig {
    pub fn attention_dim(&self) -> usize {
        self.attention_dim.unwrap_or(2 * self.hidden_dim)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("hidden_dim", self.hidden_dim as f64),
            ("attention_dim", self.attention_dim() as f64),
            ("batch_size", self.batch_size as f64),
            ("learning_rate", self.learning_rate),
            ("max_epochs", self.max_epochs as f64),
            ("patience", self.patience as f64),
            ("clip_norm", self.clip_norm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.min_delta.is_nan() || self.min_delta < 0.0 {
            return Err(Error::Config("min_delta must be non-negative".into()));
        }
        Ok(())
    }

    /// Applies one `key=value` override. Returns false for unknown keys.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "hidden_dim" => self.hidden_dim = parse(key, value)?,
            "attention_dim" => self.attention_dim = Some(parse(key, value)?),
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "max_epochs" => self.max_epochs = parse(key, value)?,
            "patience" => self.patience = parse(key, value)?,
            "min_delta" => self.min_delta = parse(key, value)?,
            "clip_norm" => self.clip_norm = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "variant" => self.variant = value.parse()?,
            "class_weighting" => self.class_weighting = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassWeights {
    pub w_pos: f64,
    pub w_neg: f64,
}

impl ClassWeights {
    pub fn uniform() -> Self {
        Self {
            w_pos: 1.0,
            w_neg: 1.0,
        }
    }

    pub fn for_label(&self, label: Label) -> f64 {
        match label {
            Label::Mispronounced => self.w_pos,
            Label::Correct => self.w_neg,
        }
    }
}

/// Balanced inverse-frequency weights: `w_c = N / (2 n_c)`, so both
/// classes carry the same total weight N/2.
pub fn compute_class_weights(n_pos: usize, n_neg: usize) -> Result<ClassWeights> {
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput(format!(
            "class weights need both classes (n_pos {n_pos}, n_neg {n_neg})"
        )));
    }
    let total = (n_pos + n_neg) as f64;
    Ok(ClassWeights {
        w_pos: total / (2.0 * n_pos as f64),
        w_neg: total / (2.0 * n_neg as f64),
    })
}

#[cfg(test)]
pub(crate) fn test_manifest(words: &[(&str, usize, usize)]) -> crate::audio::DatasetManifest {
    use crate::audio::{DatasetManifest, ManifestEntry};
    let mut entries = Vec::new();
    for (w, correct, wrong) in words {
        for (label, n) in [(Label::Correct, correct), (Label::Mispronounced, wrong)] {
            for i in 0..*n {
                entries.push(ManifestEntry {
                    path: format!("{w}/{label}_{i}.wav"),
                    word_id: w.to_string(),
                    label,
                    speaker_id: format!("s{}", i % 3),
                });
            }
        }
    }
    DatasetManifest::new(entries).unwrap()
}
