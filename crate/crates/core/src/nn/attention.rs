//! Additive attention pooling over BiLSTM states with a learned context
//! vector.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::params::AttentionParams;
use super::stack_rows;
use crate::error::{Error, Result};

/// Softmax with max subtraction.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Pools one sequence of states (T x 2H). Returns the pooled vector and
/// the per-step weights.
pub fn attention_forward(
    states: ArrayView2<'_, f64>,
    a: &AttentionParams,
) -> Result<(Array1<f64>, Array1<f64>)> {
    if states.nrows() == 0 {
        return Err(Error::Shape("attention over empty sequence".into()));
    }
    if states.ncols() != a.w.ncols() {
        return Err(Error::Shape(format!(
            "attention expects state width {}, got {}",
            a.w.ncols(),
            states.ncols()
        )));
    }
    let hidden = (states.dot(&a.w.t()) + &a.b).mapv(f64::tanh);
    let scores: Vec<f64> = hidden
        .rows()
        .into_iter()
        .map(|u| u.dot(&a.context))
        .collect();
    let alpha = Array1::from(softmax(&scores));
    let pooled = alpha.dot(&states);
    Ok((pooled, alpha))
}

/// Batched attention activations, kept for the reverse pass.
#[derive(Debug, Clone)]
pub struct AttentionTrace {
    batch: usize,
    /// (steps * batch) x 2H, step-major
    states: Array2<f64>,
    /// (steps * batch) x d_a
    hidden: Array2<f64>,
    /// steps x batch
    alpha: Array2<f64>,
    pooled: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionGrads {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub context: Array1<f64>,
}

impl AttentionTrace {
    /// `states[t]` is batch x 2H.
    pub fn run(states: &[Array2<f64>], a: &AttentionParams) -> Self {
        let steps = states.len();
        let batch = states[0].nrows();
        let stacked = stack_rows(states);
        let hidden = (stacked.dot(&a.w.t()) + &a.b).mapv(f64::tanh);
        let scores = hidden.dot(&a.context);

        let mut alpha = Array2::zeros((steps, batch));
        let mut pooled = Array2::zeros((batch, stacked.ncols()));
        for b in 0..batch {
            let column: Vec<f64> = (0..steps).map(|t| scores[t * batch + b]).collect();
            for (t, w) in softmax(&column).into_iter().enumerate() {
                alpha[[t, b]] = w;
                pooled.row_mut(b).scaled_add(w, &stacked.row(t * batch + b));
            }
        }
        Self {
            batch,
            states: stacked,
            hidden,
            alpha,
            pooled,
        }
    }

    /// batch x 2H pooled vectors.
    pub fn pooled(&self) -> &Array2<f64> {
        &self.pooled
    }

    /// steps x batch weights.
    pub fn alpha(&self) -> &Array2<f64> {
        &self.alpha
    }

    /// Given dL/dv (batch x 2H), returns parameter gradients and dL/dh'
    /// per step (batch x 2H).
    pub fn backward(
        &self,
        d_pooled: &Array2<f64>,
        a: &AttentionParams,
    ) -> (AttentionGrads, Vec<Array2<f64>>) {
        let steps = self.alpha.nrows();
        let batch = self.batch;
        let mut d_states = Array2::<f64>::zeros(self.states.raw_dim());
        let mut d_scores = Array1::<f64>::zeros(steps * batch);

        for b in 0..batch {
            let dv = d_pooled.row(b);
            let d_alpha: Vec<f64> = (0..steps)
                .map(|t| dv.dot(&self.states.row(t * batch + b)))
                .collect();
            let mean: f64 = (0..steps).map(|t| self.alpha[[t, b]] * d_alpha[t]).sum();
            for (t, da) in d_alpha.iter().enumerate() {
                let w = self.alpha[[t, b]];
                d_states.row_mut(t * batch + b).scaled_add(w, &dv);
                d_scores[t * batch + b] = w * (da - mean);
            }
        }

        let d_context = self.hidden.t().dot(&d_scores);
        // through tanh: d_pre = d_score * context * (1 - u^2)
        let mut d_pre = self.hidden.mapv(|u| 1.0 - u * u);
        for (mut row, ds) in d_pre.axis_iter_mut(Axis(0)).zip(&d_scores) {
            row *= &(&a.context * *ds);
        }
        let grads = AttentionGrads {
            w: d_pre.t().dot(&self.states),
            b: d_pre.sum_axis(Axis(0)),
            context: d_context,
        };
        d_states += &d_pre.dot(&a.w);

        let per_step = (0..steps)
            .map(|t| {
                d_states
                    .slice(s![t * batch..(t + 1) * batch, ..])
                    .to_owned()
            })
            .collect();
        (grads, per_step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, width: usize, d_a: usize) -> AttentionParams {
        let mut a = AttentionParams::init(width, d_a, rng);
        a.b.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        a.context.mapv_inplace(|_| rng.random_range(-3.0..3.0));
        a
    }

    #[test]
    fn identical_states_get_uniform_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_params(&mut rng, 4, 5);
        let row = [0.2, -0.7, 0.9, 0.1];
        let states = Array2::from_shape_fn((6, 4), |(_, j)| row[j]);
        let (v, alpha) = attention_forward(states.view(), &a).unwrap();
        for w in &alpha {
            assert!((w - 1.0 / 6.0).abs() < 1e-15);
        }
        for (x, e) in v.iter().zip(row) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn single_step_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_params(&mut rng, 4, 3);
        let states = Array2::from_shape_fn((1, 4), |_| rng.random_range(-1.0..1.0));
        let (v, alpha) = attention_forward(states.view(), &a).unwrap();
        assert_eq!(alpha.to_vec(), vec![1.0]);
        assert_eq!(v, states.row(0));
    }

    #[test]
    fn softmax_scores() {
        let alpha = softmax(&[10.0, 0.0, 0.0]);
        let tail = (-10f64).exp() / (1.0 + 2.0 * (-10f64).exp());
        assert!((alpha[0] - 0.99991).abs() < 1e-5);
        assert!((alpha[1] - tail).abs() < 1e-15 && (tail - 0.0000454).abs() < 1e-7);
        assert_eq!(alpha[1], alpha[2]);
        let huge = softmax(&[1000.0, 999.0]);
        assert!(huge.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn weights_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_params(&mut rng, 6, 6);
        for t in 1..=50 {
            let states = Array2::from_shape_fn((t, 6), |_| rng.random_range(-1.0..1.0));
            let (_, alpha) = attention_forward(states.view(), &a).unwrap();
            assert!((alpha.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn batched_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_params(&mut rng, 6, 4);
        let steps: Vec<Array2<f64>> = (0..5)
            .map(|_| Array2::from_shape_fn((3, 6), |_| rng.random_range(-1.0..1.0)))
            .collect();
        let trace = AttentionTrace::run(&steps, &a);
        for b in 0..3 {
            let seq = Array2::from_shape_fn((5, 6), |(t, j)| steps[t][[b, j]]);
            let (v, alpha) = attention_forward(seq.view(), &a).unwrap();
            for (x, y) in v.iter().zip(trace.pooled().row(b)) {
                assert!((x - y).abs() < 1e-14);
            }
            for t in 0..5 {
                assert!((alpha[t] - trace.alpha()[[t, b]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn permutation_invariant_for_identical_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_params(&mut rng, 4, 4);
        let states = Array2::from_shape_fn((5, 4), |(_, j)| j as f64 * 0.3 - 0.5);
        let (v, _) = attention_forward(states.view(), &a).unwrap();
        let reversed = states.slice(s![..;-1, ..]).to_owned();
        let (v2, _) = attention_forward(reversed.view(), &a).unwrap();
        assert_eq!(v, v2);
    }

    #[test]
    fn rejects_empty_and_wrong_width() {
        let a = AttentionParams::zeros(4, 2);
        assert!(attention_forward(Array2::zeros((0, 4)).view(), &a).is_err());
        assert!(attention_forward(Array2::zeros((2, 3)).view(), &a).is_err());
    }
}
