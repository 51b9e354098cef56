//! Single scoring path shared by evaluation, the CLI and the HTTP service.

use crate::audio::{parse_wav, resample_to_16k, AudioClip};
use crate::dsp::{MfccConfig, MfccExtractor};
use crate::error::{Error, Result};
use crate::nn::{predict_probability, ModelParams, Prediction};

#[derive(Debug, Clone)]
pub struct Scorer {
    model: ModelParams,
    extractor: MfccExtractor,
}

impl Scorer {
    /// Binds a model to the current feature configuration. The model's
    /// recorded fingerprint must match `mfcc_cfg`.
    pub fn new(model: ModelParams, mfcc_cfg: &MfccConfig) -> Result<Self> {
        model.validate()?;
        let current = mfcc_cfg.fingerprint();
        if model.meta.feature_fingerprint != current {
            return Err(Error::FingerprintMismatch {
                model: model.meta.feature_fingerprint.clone(),
                current,
            });
        }
        if model.input_dim() != mfcc_cfg.n_coeffs {
            return Err(Error::Shape(format!(
                "model expects {} coefficients, config yields {}",
                model.input_dim(),
                mfcc_cfg.n_coeffs
            )));
        }
        Ok(Self {
            extractor: MfccExtractor::new(mfcc_cfg.clone())?,
            model,
        })
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    /// Resamples to 16 kHz, zero-pads up to the model's training length
    /// (longer clips keep their own length), featurizes and scores.
    pub fn score_clip(&self, clip: &AudioClip) -> Result<Prediction> {
        let clip = resample_to_16k(clip)?;
        let target = self.model.meta.pad_len.unwrap_or(0).max(clip.len());
        let clip = clip.padded_to(target)?;
        let features = self.extractor.extract(&clip)?;
        predict_probability(&features, &self.model)
    }

    pub fn score_wav(&self, bytes: &[u8]) -> Result<Prediction> {
        self.score_clip(&parse_wav(bytes)?)
    }
}
