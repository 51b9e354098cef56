use super::{AudioClip, CANONICAL_SAMPLE_RATE_HZ};
use crate::error::{Error, Result};

pub const MIN_SAMPLE_RATE_HZ: u32 = 8_000;

/// Linear-interpolation resampling to 16 kHz. Output length is
/// `round(len * 16000 / rate)`; clips already at 16 kHz are returned as-is.
pub fn resample_to_16k(clip: &AudioClip) -> Result<AudioClip> {
    let rate = clip.sample_rate_hz();
    if rate < MIN_SAMPLE_RATE_HZ {
        return Err(Error::SampleRateTooLow(rate));
    }
    if rate == CANONICAL_SAMPLE_RATE_HZ {
        return Ok(clip.clone());
    }
    let input = clip.samples();
    let out_len = ((input.len() as f64 * CANONICAL_SAMPLE_RATE_HZ as f64 / rate as f64).round()
        as usize)
        .max(1);
    let last = input.len() - 1;
    let out = (0..out_len)
        .map(|j| {
            // exact rational position j * rate / 16000
            let num = j as u64 * rate as u64;
            let den = CANONICAL_SAMPLE_RATE_HZ as u64;
            let idx = (num / den) as usize;
            if idx >= last {
                return input[last];
            }
            let frac = (num % den) as f64 / den as f64;
            input[idx] + (input[idx + 1] - input[idx]) * frac
        })
        .collect();
    AudioClip::new(out, CANONICAL_SAMPLE_RATE_HZ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(freq: f64, rate: u32, len: usize) -> Vec<f64> {
        (0..len)
            .map(|n| (2.0 * PI * freq * n as f64 / rate as f64).sin())
            .collect()
    }

    #[test]
    fn constant_survives() {
        let clip = AudioClip::new(vec![0.5; 4800], 48_000).unwrap();
        let out = resample_to_16k(&clip).unwrap();
        assert_eq!(out.sample_rate_hz(), 16_000);
        assert_eq!(out.len(), 1600);
        assert!(out.samples().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn identity_at_16k() {
        let clip = AudioClip::new(sine(300.0, 16_000, 777), 16_000).unwrap();
        assert_eq!(resample_to_16k(&clip).unwrap(), clip);
    }

    #[test]
    fn sine_48k_matches_analytic() {
        let clip = AudioClip::new(sine(440.0, 48_000, 48_000), 48_000).unwrap();
        let out = resample_to_16k(&clip).unwrap();
        let target = sine(440.0, 16_000, 16_000);
        assert_eq!(out.len(), target.len());
        let max_err = out
            .samples()
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 0.01, "max error {max_err}");
    }

    #[test]
    fn sine_44k1_matches_analytic() {
        let clip = AudioClip::new(sine(440.0, 44_100, 22_050), 44_100).unwrap();
        let out = resample_to_16k(&clip).unwrap();
        assert_eq!(out.len(), 8000);
        let target = sine(440.0, 16_000, 8000);
        // the final sample holds the last input value
        let max_err = out.samples()[..7999]
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 0.01, "max error {max_err}");
    }

    #[test]
    fn upsamples_8k() {
        let clip = AudioClip::new(vec![0.0, 1.0, 0.0], 8_000).unwrap();
        let out = resample_to_16k(&clip).unwrap();
        assert_eq!(out.samples(), &[0.0, 0.5, 1.0, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn rejects_low_rates() {
        let clip = AudioClip::new(vec![0.0; 10], 7_999).unwrap();
        assert!(matches!(
            resample_to_16k(&clip),
            Err(Error::SampleRateTooLow(7_999))
        ));
    }
}
