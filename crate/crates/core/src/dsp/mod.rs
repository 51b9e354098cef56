//! MFCC front end: pre-emphasis, Hamming-windowed framing, power spectrum,
//! mel filterbank, log compression and DCT-II.

mod dct;
mod fft;
mod mel;

pub use dct::{dct_ii, idct_ii, DctBasis};
pub use fft::{fft_in_place, power_spectrum};
pub use mel::{build_mel_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub pre_emphasis_alpha: f64,
    pub frame_len_ms: u32,
    pub hop_ms: u32,
    pub fft_size: usize,
    pub n_mels: usize,
    pub n_coeffs: usize,
    pub log_floor: f64,
    pub sample_rate_hz: u32,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            pre_emphasis_alpha: 0.97,
            frame_len_ms: 25,
            hop_ms: 10,
            fft_size: 512,
            n_mels: 26,
            n_coeffs: 20,
            log_floor: 1e-10,
            sample_rate_hz: 16_000,
        }
    }
}

impl MfccConfig {
    pub fn frame_len(&self) -> usize {
        (self.sample_rate_hz as usize * self.frame_len_ms as usize) / 1000
    }

    pub fn hop_len(&self) -> usize {
        (self.sample_rate_hz as usize * self.hop_ms as usize) / 1000
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(0.0..1.0).contains(&self.pre_emphasis_alpha) {
            return bad(format!(
                "pre_emphasis_alpha {} outside [0, 1)",
                self.pre_emphasis_alpha
            ));
        }
        if self.sample_rate_hz == 0 || self.frame_len() == 0 || self.hop_len() == 0 {
            return bad("frame, hop and sample rate must be positive".into());
        }
        if !self.fft_size.is_power_of_two() || self.fft_size < self.frame_len() {
            return bad(format!(
                "fft_size {} must be a power of two >= frame length {}",
                self.fft_size,
                self.frame_len()
            ));
        }
        if self.n_coeffs == 0 || self.n_coeffs > self.n_mels {
            return bad(format!(
                "n_coeffs {} outside 1..={}",
                self.n_coeffs, self.n_mels
            ));
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return bad(format!("log_floor {} must be positive", self.log_floor));
        }
        Ok(())
    }

    /// Short digest identifying every setting that affects feature values.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        format!("mfcc-{}", &hex::encode(digest)[..16])
    }

    /// Applies one `key=value` override. Returns false for keys this
    /// config does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "pre_emphasis_alpha" => self.pre_emphasis_alpha = parse(key, value)?,
            "frame_len_ms" => self.frame_len_ms = parse(key, value)?,
            "hop_ms" => self.hop_ms = parse(key, value)?,
            "fft_size" => self.fft_size = parse(key, value)?,
            "n_mels" => self.n_mels = parse(key, value)?,
            "n_coeffs" => self.n_coeffs = parse(key, value)?,
            "log_floor" => self.log_floor = parse(key, value)?,
            "sample_rate_hz" => self.sample_rate_hz = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

/// T x n_coeffs feature matrix, one row per analysis frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccMatrix {
    frames: Array2<f64>,
}

impl MfccMatrix {
    pub fn new(frames: Array2<f64>) -> Result<Self> {
        if frames.nrows() == 0 || frames.ncols() == 0 {
            return Err(Error::Shape("feature matrix must be non-empty".into()));
        }
        if frames.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("feature matrix has non-finite entries".into()));
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &Array2<f64> {
        &self.frames
    }

    pub fn n_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn n_coeffs(&self) -> usize {
        self.frames.ncols()
    }

    /// One frame per line, comma-separated shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.frames.rows() {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// `y[0] = x[0]`, `y[n] = x[n] - alpha * x[n-1]`.
pub fn pre_emphasize(samples: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let Some(&first) = samples.first() else {
        return Err(Error::InvalidInput("pre-emphasis of empty signal".into()));
    };
    let mut out = Vec::with_capacity(samples.len());
    out.push(first);
    out.extend(samples.windows(2).map(|w| w[1] - alpha * w[0]));
    Ok(out)
}

pub fn hamming_window(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Number of full frames: `1 + (len - window) / hop`, or zero when the
/// signal is shorter than one window.
pub fn frame_count(len: usize, window: usize, hop: usize) -> usize {
    if len < window {
        0
    } else {
        1 + (len - window) / hop
    }
}

/// Hamming-windowed frames; a trailing partial frame is dropped.
pub fn frame_and_window(samples: &[f64], cfg: &MfccConfig) -> Result<Vec<Vec<f64>>> {
    let window = hamming_window(cfg.frame_len());
    frames_with_window(samples, &window, cfg.hop_len())
}

fn frames_with_window(samples: &[f64], window: &[f64], hop: usize) -> Result<Vec<Vec<f64>>> {
    let w = window.len();
    if samples.len() < w {
        return Err(Error::ClipTooShort {
            len: samples.len(),
            window: w,
        });
    }
    Ok((0..frame_count(samples.len(), w, hop))
        .map(|t| {
            samples[t * hop..t * hop + w]
                .iter()
                .zip(window)
                .map(|(s, h)| s * h)
                .collect()
        })
        .collect())
}

/// `ln(max(e, floor))` per energy.
pub fn log_mel(mel_energies: &[f64], log_floor: f64) -> Vec<f64> {
    mel_energies
        .iter()
        .map(|&e| e.max(log_floor).ln())
        .collect()
}

/// MFCC pipeline with the filterbank, window and DCT basis precomputed.
/// Immutable once built, so one instance can be shared across threads.
#[derive(Debug, Clone)]
pub struct MfccExtractor {
    cfg: MfccConfig,
    window: Vec<f64>,
    filterbank: MelFilterbank,
    dct: DctBasis,
}

impl MfccExtractor {
    pub fn new(cfg: MfccConfig) -> Result<Self> {
        cfg.validate()?;
        let filterbank = build_mel_filterbank(&cfg)?;
        let dct = DctBasis::new(cfg.n_mels, cfg.n_coeffs)?;
        Ok(Self {
            window: hamming_window(cfg.frame_len()),
            filterbank,
            dct,
            cfg,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<MfccMatrix> {
        if clip.sample_rate_hz() != self.cfg.sample_rate_hz {
            return Err(Error::InvalidClip(format!(
                "clip at {} Hz, extractor expects {} Hz",
                clip.sample_rate_hz(),
                self.cfg.sample_rate_hz
            )));
        }
        let emphasized = pre_emphasize(clip.samples(), self.cfg.pre_emphasis_alpha)?;
        let frames = frames_with_window(&emphasized, &self.window, self.cfg.hop_len())?;

        let n_coeffs = self.cfg.n_coeffs;
        let mut out = Array2::zeros((frames.len(), n_coeffs));
        let mut energies = vec![0.0; self.cfg.n_mels];
        for (t, frame) in frames.iter().enumerate() {
            let power = power_spectrum(frame, self.cfg.fft_size)?;
            self.filterbank.apply(&power, &mut energies);
            let logs = log_mel(&energies, self.cfg.log_floor);
            let row = out.row_mut(t).into_slice().expect("standard layout");
            self.dct.apply(&logs, row);
        }
        MfccMatrix::new(out)
    }
}

/// One-shot extraction; prefer [`MfccExtractor`] for repeated use.
pub fn extract_mfcc(clip: &AudioClip, cfg: &MfccConfig) -> Result<MfccMatrix> {
    MfccExtractor::new(cfg.clone())?.extract(clip)
}
