//! Iterative radix-2 FFT and the per-frame power spectrum built on it.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// In-place decimation-in-time FFT over split real/imaginary buffers.
/// Length must be a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) -> Result<()> {
    let n = re.len();
    if im.len() != n {
        return Err(Error::Shape(format!(
            "fft real/imag lengths differ ({n} vs {})",
            im.len()
        )));
    }
    if !n.is_power_of_two() {
        return Err(Error::Config(format!("fft size {n} is not a power of two")));
    }
    if n == 1 {
        return Ok(());
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = -2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // direct twiddles keep the error independent of n
                let (s, c) = (step * k as f64).sin_cos();
                let a = start + k;
                let b = a + half;
                let tr = re[b] * c - im[b] * s;
                let ti = re[b] * s + im[b] * c;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len *= 2;
    }
    Ok(())
}

/// `|X[k]|^2 / fft_size` for `k = 0..=fft_size/2` of the zero-padded frame.
pub fn power_spectrum(frame: &[f64], fft_size: usize) -> Result<Vec<f64>> {
    if !fft_size.is_power_of_two() {
        return Err(Error::Config(format!(
            "fft size {fft_size} is not a power of two"
        )));
    }
    if frame.len() > fft_size {
        return Err(Error::Shape(format!(
            "frame of {} samples exceeds fft size {fft_size}",
            frame.len()
        )));
    }
    let mut re = vec![0.0; fft_size];
    re[..frame.len()].copy_from_slice(frame);
    let mut im = vec![0.0; fft_size];
    fft_in_place(&mut re, &mut im)?;
    let scale = 1.0 / fft_size as f64;
    Ok(re[..=fft_size / 2]
        .iter()
        .zip(&im[..=fft_size / 2])
        .map(|(r, i)| (r * r + i * i) * scale)
        .collect())
}
