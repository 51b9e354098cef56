use crate::error::{Error, Result};

use super::MfccConfig;

pub fn hz_to_mel(hz: f64) -> Result<f64> {
    if hz.is_nan() || hz < 0.0 {
        return Err(Error::InvalidInput(format!("negative frequency {hz} Hz")));
    }
    Ok(2595.0 * (1.0 + hz / 700.0).log10())
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank, `n_mels` rows by `fft_size / 2 + 1` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    n_mels: usize,
    n_bins: usize,
    weights: Vec<f64>,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    pub fn weight(&self, m: usize, bin: usize) -> f64 {
        self.weights[m * self.n_bins + bin]
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    /// Filter energies for one power spectrum.
    pub fn apply(&self, power: &[f64], out: &mut [f64]) {
        debug_assert_eq!(power.len(), self.n_bins);
        for (o, row) in out.iter_mut().zip(self.weights.chunks_exact(self.n_bins)) {
            *o = row.iter().zip(power).map(|(w, p)| w * p).sum();
        }
    }
}

/// Filters are equally spaced on the mel scale between 0 Hz and Nyquist.
/// Filter `m` rises from boundary `m-1` to its center `m` and falls to
/// boundary `m+1`, evaluated at each FFT bin frequency `k * sr / fft_size`.
pub fn build_mel_filterbank(cfg: &MfccConfig) -> Result<MelFilterbank> {
    cfg.validate()?;
    let n_bins = cfg.fft_size / 2 + 1;
    let nyquist = cfg.sample_rate_hz as f64 / 2.0;
    let top = hz_to_mel(nyquist)?;
    let edges: Vec<f64> = (0..cfg.n_mels + 2)
        .map(|i| mel_to_hz(top * i as f64 / (cfg.n_mels + 1) as f64))
        .collect();
    let bin_hz = cfg.sample_rate_hz as f64 / cfg.fft_size as f64;

    let mut weights = vec![0.0; cfg.n_mels * n_bins];
    for m in 0..cfg.n_mels {
        let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let row = &mut weights[m * n_bins..(m + 1) * n_bins];
        for (k, w) in row.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            *w = if f > lo && f <= center {
                (f - lo) / (center - lo)
            } else if f > center && f < hi {
                (hi - f) / (hi - center)
            } else {
                0.0
            };
        }
        if row.iter().all(|&w| w <= 0.0) {
            return Err(Error::Config(format!(
                "mel filter {m} ({lo:.1}-{hi:.1} Hz) covers no FFT bin; \
                 too many filters for fft size {}",
                cfg.fft_size
            )));
        }
    }
    Ok(MelFilterbank {
        n_mels: cfg.n_mels,
        n_bins,
        weights,
        centers_hz: edges[1..=cfg.n_mels].to_vec(),
    })
}
