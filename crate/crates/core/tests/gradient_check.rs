//! Analytic gradients against central finite differences of the loss.

use capt_core::dsp::MfccMatrix;
use capt_core::nn::{backward_pass, batch_loss, ModelParams, Variant, WeightedExample};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;
const MAX_REL_ERROR: f64 = 1e-4;
/// Denominator floor: entries whose analytic and numeric values are both
/// below this are compared on absolute error instead.
const MAGNITUDE_FLOOR: f64 = 1e-7;

struct Instance {
    model: ModelParams,
    inputs: Vec<MfccMatrix>,
    targets: Vec<f64>,
    weights: Vec<f64>,
}

impl Instance {
    fn random(seed: u64, variant: Variant) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = ModelParams::init(variant, 4, 3, 6, &mut rng);
        for t in model.tensors_mut() {
            for v in t.iter_mut() {
                *v += rng.random_range(-0.3..0.3);
            }
        }
        let inputs = (0..2)
            .map(|_| {
                MfccMatrix::new(Array2::from_shape_fn((6, 4), |_| {
                    rng.random_range(-1.5..1.5)
                }))
                .unwrap()
            })
            .collect();
        Self {
            model,
            inputs,
            targets: vec![1.0, 0.0],
            weights: vec![rng.random_range(0.5..3.0), rng.random_range(0.5..3.0)],
        }
    }

    fn batch(&self) -> Vec<WeightedExample<'_>> {
        self.inputs
            .iter()
            .zip(&self.targets)
            .zip(&self.weights)
            .map(|((features, &target), &weight)| WeightedExample {
                features,
                target,
                weight,
            })
            .collect()
    }
}

/// Central differences for every scalar parameter, in `tensors()` order.
fn numeric_gradient(inst: &Instance) -> Vec<Vec<f64>> {
    let batch = inst.batch();
    let shapes: Vec<usize> = inst
        .model
        .tensors()
        .iter()
        .map(|t| t.values.len())
        .collect();
    let mut probe = inst.model.clone();
    let mut out = Vec::new();
    for (ti, &len) in shapes.iter().enumerate() {
        let mut grad = vec![0.0; len];
        for (i, g) in grad.iter_mut().enumerate() {
            let original = probe.tensors_mut()[ti][i];
            probe.tensors_mut()[ti][i] = original + STEP;
            let up = batch_loss(&batch, &probe).unwrap();
            probe.tensors_mut()[ti][i] = original - STEP;
            let down = batch_loss(&batch, &probe).unwrap();
            probe.tensors_mut()[ti][i] = original;
            *g = (up - down) / (2.0 * STEP);
        }
        out.push(grad);
    }
    out
}

fn max_relative_error(analytic: &ModelParams, numeric: &[Vec<f64>]) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for (t, num) in analytic.tensors().iter().zip(numeric) {
        for (i, (a, n)) in t.values.iter().zip(num).enumerate() {
            let denom = a.abs().max(n.abs()).max(MAGNITUDE_FLOOR);
            let rel = (a - n).abs() / denom;
            if rel > worst.0 {
                worst = (
                    rel,
                    format!("{}[{i}]: analytic {a:e} numeric {n:e}", t.name),
                );
            }
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    for variant in Variant::ALL {
        let mut overall: f64 = 0.0;
        for seed in 0..20 {
            let inst = Instance::random(seed, variant);
            let (_, grads) = backward_pass(&inst.batch(), &inst.model).unwrap();
            let numeric = numeric_gradient(&inst);
            let (err, at) = max_relative_error(&grads, &numeric);
            assert!(
                err < MAX_REL_ERROR,
                "{variant} seed {seed}: {err:e} at {at}"
            );
            overall = overall.max(err);
        }
        println!("{variant}: max relative error over 20 draws {overall:e}");
    }
}

#[test]
fn corrupted_gradient_is_detected() {
    let inst = Instance::random(99, Variant::AttentionBilstm);
    let (_, mut grads) = backward_pass(&inst.batch(), &inst.model).unwrap();
    let numeric = numeric_gradient(&inst);
    assert!(max_relative_error(&grads, &numeric).0 < MAX_REL_ERROR);
    grads.forward.w_recurrent[[2, 1]] += 0.1;
    assert!(max_relative_error(&grads, &numeric).0 > MAX_REL_ERROR);
}

#[test]
fn gradient_vanishes_at_saturated_correct_predictions() {
    for variant in Variant::ALL {
        let mut inst = Instance::random(7, variant);
        // push the head far enough that p clips to 1 for every sample
        inst.model.output.w.fill(0.0);
        inst.model.output.b = 40.0;
        inst.targets = vec![1.0, 1.0];
        let (loss, grads) = backward_pass(&inst.batch(), &inst.model).unwrap();
        assert!(grads.l2_norm() < 1e-6, "{variant}: {}", grads.l2_norm());
        assert!(loss < 1e-6);
    }
}
