//! Noisy pure-tone recordings used as a stand-in corpus for demos and
//! end-to-end tests.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::{AudioClip, DatasetManifest, Label, ManifestEntry, CANONICAL_SAMPLE_RATE_HZ};
use crate::error::Result;
use crate::protocol::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub freq_hz: f64,
    /// Each clip draws its frequency uniformly from `freq_hz ± freq_jitter_hz`.
    pub freq_jitter_hz: f64,
    pub duration_secs: f64,
    pub amplitude: f64,
    pub noise_std: f64,
}

impl ToneSpec {
    pub fn new(freq_hz: f64) -> Self {
        Self {
            freq_hz,
            freq_jitter_hz: 0.0,
            duration_secs: 0.5,
            amplitude: 0.5,
            noise_std: 0.1,
        }
    }
}

/// One 16 kHz tone with random phase, amplitude jitter of up to ±20 % and
/// additive Gaussian noise, clamped to [-1, 1].
pub fn tone_clip<R: Rng + ?Sized>(spec: &ToneSpec, rng: &mut R) -> Result<AudioClip> {
    let sr = CANONICAL_SAMPLE_RATE_HZ as f64;
    let len = (spec.duration_secs * sr).round() as usize;
    let freq = if spec.freq_jitter_hz > 0.0 {
        rng.random_range(spec.freq_hz - spec.freq_jitter_hz..spec.freq_hz + spec.freq_jitter_hz)
    } else {
        spec.freq_hz
    };
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let amp = spec.amplitude * rng.random_range(0.8..1.2);
    let noise = Normal::new(0.0, spec.noise_std)
        .map_err(|e| crate::Error::InvalidInput(format!("noise std: {e}")))?;
    let samples = (0..len)
        .map(|n| {
            let t = n as f64 / sr;
            let v = amp * (std::f64::consts::TAU * freq * t + phase).sin() + noise.sample(rng);
            v.clamp(-1.0, 1.0)
        })
        .collect();
    AudioClip::new(samples, CANONICAL_SAMPLE_RATE_HZ)
}

/// One word of a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticWord {
    pub word_id: String,
    pub correct: ToneSpec,
    pub mispronounced: ToneSpec,
    pub n_correct: usize,
    pub n_mispronounced: usize,
}

/// Generates clips for every word and a manifest whose paths are
/// `<word_id>/<label>_<index>.wav`. Speakers cycle through four ids.
pub fn synthetic_corpus(
    words: &[SyntheticWord],
    seed: u64,
) -> Result<(DatasetManifest, Vec<(String, AudioClip)>)> {
    let mut rng = seeded_rng(seed, "synth");
    let mut entries = Vec::new();
    let mut clips = Vec::new();
    for w in words {
        for (label, spec, n) in [
            (Label::Correct, &w.correct, w.n_correct),
            (Label::Mispronounced, &w.mispronounced, w.n_mispronounced),
        ] {
            for i in 0..n {
                let path = format!("{}/{}_{i:04}.wav", w.word_id, label);
                clips.push((path.clone(), tone_clip(spec, &mut rng)?));
                entries.push(ManifestEntry {
                    path,
                    word_id: w.word_id.clone(),
                    label,
                    speaker_id: format!("spk{}", i % 4),
                });
            }
        }
    }
    Ok((DatasetManifest::new(entries)?, clips))
}
