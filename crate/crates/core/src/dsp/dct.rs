use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Orthonormal DCT-II, first `n_out` coefficients (c0 included).
pub fn dct_ii(values: &[f64], n_out: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n_out == 0 || n_out > n {
        return Err(Error::Config(format!(
            "dct output size {n_out} outside 1..={n}"
        )));
    }
    let nf = n as f64;
    Ok((0..n_out)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            let sum: f64 = values
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos())
                .sum();
            scale * sum
        })
        .collect())
}

/// Inverse of the full orthonormal DCT-II (i.e. DCT-III).
pub fn idct_ii(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let nf = n as f64;
    (0..n)
        .map(|i| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let scale = if k == 0 {
                        (1.0 / nf).sqrt()
                    } else {
                        (2.0 / nf).sqrt()
                    };
                    scale * c * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos()
                })
                .sum()
        })
        .collect()
}

/// Precomputed DCT-II basis for repeated transforms of a fixed size.
#[derive(Debug, Clone)]
pub struct DctBasis {
    n_in: usize,
    // row-major n_out x n_in
    basis: Vec<f64>,
}

impl DctBasis {
    pub fn new(n_in: usize, n_out: usize) -> Result<Self> {
        let mut basis = Vec::with_capacity(n_in * n_out);
        for i in 0..n_in {
            let mut unit = vec![0.0; n_in];
            unit[i] = 1.0;
            basis.push(dct_ii(&unit, n_out)?);
        }
        // transpose columns (per input unit) into rows (per coefficient)
        let rows = (0..n_out)
            .flat_map(|k| basis.iter().map(move |col| col[k]))
            .collect();
        Ok(Self { n_in, basis: rows })
    }

    pub fn apply(&self, values: &[f64], out: &mut [f64]) {
        debug_assert_eq!(values.len(), self.n_in);
        for (o, row) in out.iter_mut().zip(self.basis.chunks_exact(self.n_in)) {
            *o = row.iter().zip(values).map(|(b, v)| b * v).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input() {
        let c = dct_ii(&[1.0; 4], 4).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_input() {
        assert!(dct_ii(&[0.0; 7], 5).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_bad_n_out() {
        assert!(dct_ii(&[1.0; 4], 0).is_err());
        assert!(dct_ii(&[1.0; 4], 5).is_err());
    }

    #[test]
    fn inverse_recovers_input() {
        let x = [0.3, -1.2, 2.5, 0.0, 4.4, -0.7, 1.1, 9.0];
        let back = idct_ii(&dct_ii(&x, 8).unwrap());
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn basis_matches_direct() {
        let x: Vec<f64> = (0..26).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let basis = DctBasis::new(26, 20).unwrap();
        let mut out = vec![0.0; 20];
        basis.apply(&x, &mut out);
        for (a, b) in out.iter().zip(dct_ii(&x, 20).unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
