//! LSTM cell, single-step and batched over a whole sequence, with the
//! reverse pass for backpropagation through time.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use super::params::{Gate, LstmParams};
use super::{sigmoid, stack_rows};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    /// cell state C
    pub c: Array1<f64>,
    /// hidden state h
    pub h: Array1<f64>,
}

impl CellState {
    pub fn zeros(hidden_dim: usize) -> Self {
        Self {
            c: Array1::zeros(hidden_dim),
            h: Array1::zeros(hidden_dim),
        }
    }
}

/// Gate activations of one step, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct GateValues {
    pub input: Array1<f64>,
    pub forget: Array1<f64>,
    pub cell: Array1<f64>,
    pub output: Array1<f64>,
}

/// One LSTM step on a single vector.
pub fn lstm_cell_forward(
    x: ArrayView1<'_, f64>,
    prev: &CellState,
    p: &LstmParams,
) -> Result<CellState> {
    lstm_cell_with_gates(x, prev, p).map(|(state, _)| state)
}

pub fn lstm_cell_with_gates(
    x: ArrayView1<'_, f64>,
    prev: &CellState,
    p: &LstmParams,
) -> Result<(CellState, GateValues)> {
    let h = p.hidden_dim();
    if x.len() != p.input_dim() || prev.h.len() != h || prev.c.len() != h {
        return Err(Error::Shape(format!(
            "cell expects input {} / hidden {h}, got input {} / state {},{}",
            p.input_dim(),
            x.len(),
            prev.h.len(),
            prev.c.len()
        )));
    }
    let pre = |g: Gate| p.w(g).dot(&x) + p.u(g).dot(&prev.h) + p.b(g);
    let input = pre(Gate::Input).mapv(sigmoid);
    let forget = pre(Gate::Forget).mapv(sigmoid);
    let cell = pre(Gate::Cell).mapv(f64::tanh);
    let output = pre(Gate::Output).mapv(sigmoid);
    let c = &forget * &prev.c + &input * &cell;
    let h_new = &output * &c.mapv(f64::tanh);
    Ok((
        CellState { c, h: h_new },
        GateValues {
            input,
            forget,
            cell,
            output,
        },
    ))
}

/// Activations recorded by [`LstmTrace::run`], indexed by processing step.
#[derive(Debug, Clone)]
pub struct LstmTrace {
    batch: usize,
    hidden: usize,
    /// (steps * batch) x input, step-major
    inputs: Array2<f64>,
    /// per step, batch x 4H post-activation gates [i | f | g | o]
    gates: Vec<Array2<f64>>,
    cells: Vec<Array2<f64>>,
    tanh_cells: Vec<Array2<f64>>,
    hidden_states: Vec<Array2<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub w_input: Array2<f64>,
    pub w_recurrent: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LstmTrace {
    /// Runs the LSTM over `steps`, each a batch x input matrix, from zero
    /// initial state.
    pub fn run(steps: &[Array2<f64>], p: &LstmParams) -> Result<Self> {
        let Some(first) = steps.first() else {
            return Err(Error::Shape("empty sequence".into()));
        };
        let batch = first.nrows();
        let hid = p.hidden_dim();
        if steps
            .iter()
            .any(|x| x.nrows() != batch || x.ncols() != p.input_dim())
        {
            return Err(Error::Shape(format!(
                "sequence steps must be {batch} x {}",
                p.input_dim()
            )));
        }
        let inputs = stack_rows(steps);
        // input projections for every step at once
        let mut projected = inputs.dot(&p.w_input.t());
        projected += &p.bias;

        let mut trace = Self {
            batch,
            hidden: hid,
            inputs,
            gates: Vec::with_capacity(steps.len()),
            cells: Vec::with_capacity(steps.len()),
            tanh_cells: Vec::with_capacity(steps.len()),
            hidden_states: Vec::with_capacity(steps.len()),
        };
        let u_t = p.w_recurrent.t();
        for k in 0..steps.len() {
            let mut z = projected
                .slice(s![k * batch..(k + 1) * batch, ..])
                .to_owned();
            if k > 0 {
                z += &trace.hidden_states[k - 1].dot(&u_t);
            }
            let mut c = Array2::zeros((batch, hid));
            let mut tc = Array2::zeros((batch, hid));
            let mut hs = Array2::zeros((batch, hid));
            for b in 0..batch {
                let zr = z.row_mut(b).into_slice().unwrap();
                for v in &mut zr[..2 * hid] {
                    *v = sigmoid(*v);
                }
                for v in &mut zr[2 * hid..3 * hid] {
                    *v = v.tanh();
                }
                for v in &mut zr[3 * hid..] {
                    *v = sigmoid(*v);
                }
                let (i, rest) = zr.split_at(hid);
                let (f, rest) = rest.split_at(hid);
                let (g, o) = rest.split_at(hid);
                for j in 0..hid {
                    let c_prev = if k > 0 {
                        trace.cells[k - 1][[b, j]]
                    } else {
                        0.0
                    };
                    let cv = f[j] * c_prev + i[j] * g[j];
                    let t = cv.tanh();
                    c[[b, j]] = cv;
                    tc[[b, j]] = t;
                    hs[[b, j]] = o[j] * t;
                }
            }
            trace.gates.push(z);
            trace.cells.push(c);
            trace.tanh_cells.push(tc);
            trace.hidden_states.push(hs);
        }
        Ok(trace)
    }

    pub fn steps(&self) -> usize {
        self.hidden_states.len()
    }

    /// Hidden states (batch x H) at each processing step.
    pub fn hidden_states(&self) -> &[Array2<f64>] {
        &self.hidden_states
    }

    /// Reverse pass given dL/dh at each processing step (batch x H).
    pub fn backward(&self, d_hidden: &[Array2<f64>], p: &LstmParams) -> LstmGrads {
        let (batch, hid, steps) = (self.batch, self.hidden, self.steps());
        debug_assert_eq!(d_hidden.len(), steps);
        let mut dz_all = Array2::<f64>::zeros((steps * batch, 4 * hid));
        let mut dh_next = Array2::<f64>::zeros((batch, hid));
        let mut dc_next = Array2::<f64>::zeros((batch, hid));

        for k in (0..steps).rev() {
            let gates = &self.gates[k];
            let tc = &self.tanh_cells[k];
            let mut dz = dz_all.slice_mut(s![k * batch..(k + 1) * batch, ..]);
            for b in 0..batch {
                let gr = gates.row(b);
                let gr = gr.as_slice().unwrap();
                let (i, rest) = gr.split_at(hid);
                let (f, rest) = rest.split_at(hid);
                let (g, o) = rest.split_at(hid);
                for j in 0..hid {
                    let dh = d_hidden[k][[b, j]] + dh_next[[b, j]];
                    let t = tc[[b, j]];
                    let dc = dc_next[[b, j]] + dh * o[j] * (1.0 - t * t);
                    let c_prev = if k > 0 {
                        self.cells[k - 1][[b, j]]
                    } else {
                        0.0
                    };
                    dz[[b, j]] = dc * g[j] * i[j] * (1.0 - i[j]);
                    dz[[b, hid + j]] = dc * c_prev * f[j] * (1.0 - f[j]);
                    dz[[b, 2 * hid + j]] = dc * i[j] * (1.0 - g[j] * g[j]);
                    dz[[b, 3 * hid + j]] = dh * t * o[j] * (1.0 - o[j]);
                    dc_next[[b, j]] = dc * f[j];
                }
            }
            if k > 0 {
                dh_next = dz.dot(&p.w_recurrent);
            }
        }

        // h_{k-1} for every step, zeros before the first
        let mut prev_h = Array2::zeros((steps * batch, hid));
        for k in 1..steps {
            prev_h
                .slice_mut(s![k * batch..(k + 1) * batch, ..])
                .assign(&self.hidden_states[k - 1]);
        }
        let dz_t = dz_all.t();
        LstmGrads {
            w_input: dz_t.dot(&self.inputs),
            w_recurrent: dz_t.dot(&prev_h),
            bias: dz_all.sum_axis(Axis(0)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{arr1, Array1};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_params() -> LstmParams {
        LstmParams::zeros(1, 1)
    }

    #[test]
    fn zero_params() {
        let p = LstmParams::zeros(3, 2);
        let (state, gates) =
            lstm_cell_with_gates(arr1(&[0.3, -1.0, 2.0]).view(), &CellState::zeros(2), &p).unwrap();
        assert!(gates.input.iter().all(|&v| v == 0.5));
        assert!(gates.forget.iter().all(|&v| v == 0.5));
        assert!(gates.output.iter().all(|&v| v == 0.5));
        assert!(gates.cell.iter().all(|&v| v == 0.0));
        assert_eq!(state, CellState::zeros(2));
    }

    #[test]
    fn scalar_cell_bias() {
        let mut p = scalar_params();
        p.bias[2] = 1.0;
        let state = lstm_cell_forward(arr1(&[0.0]).view(), &CellState::zeros(1), &p).unwrap();
        let g = 1f64.tanh();
        let c = 0.5 * g;
        assert!((g - 0.76159).abs() < 1e-5);
        assert!((state.c[0] - c).abs() < 1e-15 && (c - 0.38080).abs() < 1e-5);
        assert!((state.h[0] - 0.5 * c.tanh()).abs() < 1e-15);
        assert!((state.h[0] - 0.18170).abs() < 1e-5);
    }

    #[test]
    fn saturated_forget_keeps_memory() {
        let mut p = scalar_params();
        p.bias[0] = -1e3;
        p.bias[1] = 1e3;
        let prev = CellState {
            c: arr1(&[0.42]),
            h: arr1(&[0.1]),
        };
        let state = lstm_cell_forward(arr1(&[5.0]).view(), &prev, &p).unwrap();
        assert_eq!(state.c[0], 0.42);
    }

    #[test]
    fn rejects_shape_mismatch() {
        let p = LstmParams::zeros(3, 2);
        assert!(lstm_cell_forward(arr1(&[1.0]).view(), &CellState::zeros(2), &p).is_err());
        assert!(lstm_cell_forward(arr1(&[1.0; 3]).view(), &CellState::zeros(3), &p).is_err());
    }

    #[test]
    fn batched_trace_matches_cell_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = LstmParams::init(4, 3, &mut rng);
        let steps: Vec<Array2<f64>> = (0..7)
            .map(|_| Array2::from_shape_fn((2, 4), |_| rng.random_range(-2.0..2.0)))
            .collect();
        let trace = LstmTrace::run(&steps, &p).unwrap();
        for b in 0..2 {
            let mut state = CellState::zeros(3);
            for (k, x) in steps.iter().enumerate() {
                state = lstm_cell_forward(x.row(b), &state, &p).unwrap();
                let batched: Array1<f64> = trace.hidden_states()[k].row(b).to_owned();
                for (a, e) in batched.iter().zip(&state.h) {
                    assert!((a - e).abs() < 1e-14);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn gate_ranges(seed in any::<u64>(), scale in 0.1f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p = LstmParams::init(5, 4, &mut rng);
            p.bias.mapv_inplace(|_| rng.random_range(-3.0..3.0));
            let x = Array1::from_shape_fn(5, |_| rng.random_range(-scale..scale));
            let prev = CellState {
                c: Array1::from_shape_fn(4, |_| rng.random_range(-2.0..2.0)),
                h: Array1::from_shape_fn(4, |_| rng.random_range(-1.0..1.0)),
            };
            let (_, g) = lstm_cell_with_gates(x.view(), &prev, &p).unwrap();
            for v in g.input.iter().chain(&g.forget).chain(&g.output) {
                prop_assert!(*v > 0.0 && *v < 1.0);
            }
            for v in &g.cell {
                prop_assert!(*v > -1.0 && *v < 1.0);
            }
        }
    }
}
