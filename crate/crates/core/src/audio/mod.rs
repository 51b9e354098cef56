//! Audio ingestion: WAV decoding, rate normalization, padding and dataset manifests.

mod manifest;
mod resample;
mod wav;

pub use manifest::{load_manifest, parse_manifest, DatasetManifest, Label, ManifestEntry};
pub use resample::{resample_to_16k, MIN_SAMPLE_RATE_HZ};
pub use wav::{parse_wav, write_wav};

use std::path::Path;

use crate::error::{Error, Result};

/// Every clip is brought to this rate before feature extraction.
pub const CANONICAL_SAMPLE_RATE_HZ: u32 = 16_000;

/// Mono waveform, nominal amplitude range [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidClip("no samples".into()));
        }
        if sample_rate_hz == 0 {
            return Err(Error::InvalidClip("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidClip(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Zero-pads the tail up to `target_len`. Never truncates.
    pub fn padded_to(&self, target_len: usize) -> Result<AudioClip> {
        if target_len < self.samples.len() {
            return Err(Error::PadTargetTooShort {
                target: target_len,
                longest: self.samples.len(),
            });
        }
        let mut samples = self.samples.clone();
        samples.resize(target_len, 0.0);
        Ok(AudioClip {
            samples,
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}

/// Pads every clip with trailing zeros to `target_len`, or to the longest
/// clip in the list when no target is given.
pub fn pad_clips(clips: &[AudioClip], target_len: Option<usize>) -> Result<Vec<AudioClip>> {
    if let Some(clip) = clips
        .iter()
        .find(|c| c.sample_rate_hz != CANONICAL_SAMPLE_RATE_HZ)
    {
        return Err(Error::InvalidClip(format!(
            "padding expects {CANONICAL_SAMPLE_RATE_HZ} Hz clips, got {} Hz",
            clip.sample_rate_hz
        )));
    }
    let longest = clips.iter().map(AudioClip::len).max().unwrap_or(0);
    let target = match target_len {
        Some(t) if t < longest => return Err(Error::PadTargetTooShort { target: t, longest }),
        Some(t) => t,
        None => longest,
    };
    clips.iter().map(|c| c.padded_to(target)).collect()
}

/// Reads a WAV file and normalizes it to the canonical rate.
pub fn load_wav_16k(path: &Path) -> Result<AudioClip> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let clip = parse_wav(&bytes).map_err(|e| e.context(path.display().to_string()))?;
    resample_to_16k(&clip)
}

/// Where training and evaluation code fetch audio for a manifest path.
pub trait AudioSource {
    fn load(&self, path: &str) -> Result<AudioClip>;
}

/// Resolves manifest paths against a base directory and decodes WAV files.
#[derive(Debug, Clone)]
pub struct WavDirectory {
    base: std::path::PathBuf,
}

impl WavDirectory {
    pub fn new(base: impl Into<std::path::PathBuf>) -> Self {
        Self { base: base.into() }
    }
}

impl AudioSource for WavDirectory {
    fn load(&self, path: &str) -> Result<AudioClip> {
        load_wav_16k(&self.base.join(path))
    }
}

impl<S: AudioSource + ?Sized> AudioSource for &S {
    fn load(&self, path: &str) -> Result<AudioClip> {
        (**self).load(path)
    }
}

/// In-memory clips keyed by manifest path; used for synthetic datasets.
impl AudioSource for std::collections::HashMap<String, AudioClip> {
    fn load(&self, path: &str) -> Result<AudioClip> {
        let clip = self
            .get(path)
            .ok_or_else(|| Error::InvalidInput(format!("no audio registered for {path}")))?;
        resample_to_16k(clip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(len: usize, value: f64) -> AudioClip {
        AudioClip::new(vec![value; len], CANONICAL_SAMPLE_RATE_HZ).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(AudioClip::new(vec![], 16_000).is_err());
        assert!(AudioClip::new(vec![0.0, f64::NAN], 16_000).is_err());
        assert!(AudioClip::new(vec![0.0], 0).is_err());
    }

    #[test]
    fn pads_to_longest() {
        let out = pad_clips(&[clip(300, 0.25), clip(500, -0.5)], None).unwrap();
        assert!(out.iter().all(|c| c.len() == 500));
        assert!(out[0].samples()[..300].iter().all(|&s| s == 0.25));
        assert!(out[0].samples()[300..].iter().all(|&s| s == 0.0));
        assert_eq!(out[1], clip(500, -0.5));
    }

    #[test]
    fn single_clip_unchanged() {
        let c = clip(123, 0.1);
        assert_eq!(pad_clips(std::slice::from_ref(&c), None).unwrap(), vec![c]);
    }

    #[test]
    fn refuses_to_truncate() {
        let err = pad_clips(&[clip(100, 0.0), clip(200, 0.0)], Some(50)).unwrap_err();
        assert!(matches!(
            err,
            Error::PadTargetTooShort {
                target: 50,
                longest: 200
            }
        ));
    }

    #[test]
    fn explicit_target() {
        let out = pad_clips(&[clip(100, 1.0)], Some(160)).unwrap();
        assert_eq!(out[0].len(), 160);
    }
}
