//! Seeded mini-batch training of one word model.

use rand::seq::SliceRandom;

use super::{seeded_rng, ClassWeights, TrainConfig};
use crate::audio::{pad_clips, AudioClip, Label};
use crate::dsp::{MfccConfig, MfccExtractor, MfccMatrix};
use crate::error::{Error, Result};
use crate::nn::{
    adam_step, backward_pass, clip_global_norm, AdamConfig, AdamState, ModelMeta, ModelParams,
    WeightedExample,
};

#[derive(Debug, Clone)]
pub struct LabeledClip {
    pub clip: AudioClip,
    pub target: Label,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochRecord>,
    pub stopped_early: bool,
}

impl TrainingLog {
    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.mean_loss)
    }

    /// `epoch,mean_loss` header then one line per epoch.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mean_loss\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{}\n",
                e.epoch,
                format_significant(e.mean_loss, 12)
            ));
        }
        out
    }
}

/// Fixed-point decimal with at least `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.*}", digits - 1);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Stops once the epoch loss has failed to beat the best loss so far by at
/// least `min_delta` for `patience` consecutive epochs.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    min_delta: f64,
    patience: usize,
    best: f64,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(min_delta: f64, patience: usize) -> Self {
        Self {
            min_delta,
            patience,
            best: f64::INFINITY,
            stale: 0,
        }
    }

    /// Records one epoch loss; true means stop now.
    pub fn update(&mut self, loss: f64) -> bool {
        if loss < self.best - self.min_delta {
            self.best = loss;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= self.patience
    }
}

/// Pads the clips to the longest one, extracts features once, then runs
/// shuffled mini-batch Adam with per-sample class weights and global-norm
/// clipping until `max_epochs` or early stopping.
pub fn train_word_model(
    train: &[LabeledClip],
    cfg: &TrainConfig,
    mfcc_cfg: &MfccConfig,
) -> Result<(ModelParams, TrainingLog)> {
    cfg.validate()?;
    let n_pos = train
        .iter()
        .filter(|c| c.target == Label::Mispronounced)
        .count();
    let n_neg = train.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClassTrainingSet);
    }
    let weights = if cfg.class_weighting {
        super::compute_class_weights(n_pos, n_neg)?
    } else {
        ClassWeights::uniform()
    };

    let clips: Vec<AudioClip> = train.iter().map(|c| c.clip.clone()).collect();
    let padded = pad_clips(&clips, None)?;
    let pad_len = padded[0].len();
    let extractor = MfccExtractor::new(mfcc_cfg.clone())?;
    let features: Vec<MfccMatrix> = padded
        .iter()
        .map(|c| extractor.extract(c))
        .collect::<Result<_>>()?;
    let targets: Vec<(f64, f64)> = train
        .iter()
        .map(|c| (c.target.target(), weights.for_label(c.target)))
        .collect();

    let mut init_rng = seeded_rng(cfg.seed, "init");
    let mut model = ModelParams::init(
        cfg.variant,
        mfcc_cfg.n_coeffs,
        cfg.hidden_dim,
        cfg.attention_dim(),
        &mut init_rng,
    );
    model.meta = ModelMeta {
        feature_fingerprint: mfcc_cfg.fingerprint(),
        word_id: None,
        mfcc_config: Some(mfcc_cfg.clone()),
        pad_len: Some(pad_len),
        train_config: Some(serde_json::to_value(cfg).expect("config serializes")),
    };

    let adam = AdamConfig {
        learning_rate: cfg.learning_rate,
        ..AdamConfig::default()
    };
    let mut state = AdamState::new(&model);
    let mut shuffle_rng = seeded_rng(cfg.seed, "batches");
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopper = EarlyStopping::new(cfg.min_delta, cfg.patience);
    let mut log = TrainingLog::default();
    let mut step = 0u64;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<WeightedExample<'_>> = chunk
                .iter()
                .map(|&i| WeightedExample {
                    features: &features[i],
                    target: targets[i].0,
                    weight: targets[i].1,
                })
                .collect();
            let (loss, mut grads) = backward_pass(&batch, &model)?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss(epoch));
            }
            loss_sum += loss * chunk.len() as f64;
            clip_global_norm(&mut grads, cfg.clip_norm);
            step += 1;
            adam_step(&mut model, &grads, &mut state, step, &adam)?;
        }
        let mean_loss = loss_sum / train.len() as f64;
        log.epochs.push(EpochRecord { epoch, mean_loss });
        if stopper.update(mean_loss) {
            log.stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }
    Ok((model, log))
}
