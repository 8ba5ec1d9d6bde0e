//! Two-hidden-layer tanh perceptron with manual forward and backward passes.
//!
//! Parameters live in one flat vector laid out row-major as
//! `w1 (h×in), b1 (h), w2 (h×h), b2 (h), w3 (out×h), b3 (out)` — the order
//! the checkpoint format serializes.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub n_in: usize,
    pub n_hidden: usize,
    pub n_out: usize,
    pub params: Vec<f64>,
}

/// Activations recorded by [`Mlp::forward_cached`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Vec<f64>,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub output: Vec<f64>,
}

impl Mlp {
    pub fn zeros(n_in: usize, n_hidden: usize, n_out: usize) -> Mlp {
        let n = Mlp::param_count(n_in, n_hidden, n_out);
        Mlp {
            n_in,
            n_hidden,
            n_out,
            params: vec![0.0; n],
        }
    }

    pub fn param_count(n_in: usize, n_hidden: usize, n_out: usize) -> usize {
        n_hidden * n_in + n_hidden + n_hidden * n_hidden + n_hidden + n_out * n_hidden + n_out
    }

    /// Offsets of the six parameter blocks within `params`.
    fn blocks(&self) -> [usize; 7] {
        let (i, h, o) = (self.n_in, self.n_hidden, self.n_out);
        let w1 = 0;
        let b1 = w1 + h * i;
        let w2 = b1 + h;
        let b2 = w2 + h * h;
        let w3 = b2 + h;
        let b3 = w3 + o * h;
        [w1, b1, w2, b2, w3, b3, b3 + o]
    }

    /// Replace the weight matrices with orthogonal-column initializations:
    /// gain √2 on the two hidden layers and `head_gain` on the output layer.
    /// Biases stay zero.
    pub fn init_orthogonal(&mut self, head_gain: f64, rng: &mut ChaCha20Rng) {
        let [w1, b1, w2, b2, w3, b3, _] = self.blocks();
        let gain_h = 2f64.sqrt();
        orthogonal(&mut self.params[w1..b1], self.n_hidden, self.n_in, gain_h, rng);
        orthogonal(&mut self.params[w2..b2], self.n_hidden, self.n_hidden, gain_h, rng);
        orthogonal(&mut self.params[w3..b3], self.n_out, self.n_hidden, head_gain, rng);
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).output
    }

    /// Forward pass keeping the hidden activations so [`Mlp::backward`] can
    /// run without recomputation.
    pub fn forward_cached(&self, input: &[f64]) -> ForwardCache {
        assert_eq!(input.len(), self.n_in, "input width mismatch");
        let [w1, b1, w2, b2, w3, b3, _] = self.blocks();
        let h = self.n_hidden;

        let mut h1 = vec![0.0; h];
        for r in 0..h {
            let row = &self.params[w1 + r * self.n_in..w1 + (r + 1) * self.n_in];
            let mut z = self.params[b1 + r];
            for (w, x) in row.iter().zip(input) {
                z += w * x;
            }
            h1[r] = z.tanh();
        }

        let mut h2 = vec![0.0; h];
        for r in 0..h {
            let row = &self.params[w2 + r * h..w2 + (r + 1) * h];
            let mut z = self.params[b2 + r];
            for (w, x) in row.iter().zip(&h1) {
                z += w * x;
            }
            h2[r] = z.tanh();
        }

        let mut output = vec![0.0; self.n_out];
        for r in 0..self.n_out {
            let row = &self.params[w3 + r * h..w3 + (r + 1) * h];
            let mut z = self.params[b3 + r];
            for (w, x) in row.iter().zip(&h2) {
                z += w * x;
            }
            output[r] = z;
        }

        ForwardCache {
            input: input.to_vec(),
            h1,
            h2,
            output,
        }
    }

    /// Accumulate `∂L/∂params` into `grad` (same layout as `params`) given
    /// `d_out = ∂L/∂output`, and return `∂L/∂input`.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64], grad: &mut [f64]) -> Vec<f64> {
        assert_eq!(d_out.len(), self.n_out, "output gradient width mismatch");
        assert_eq!(grad.len(), self.params.len(), "gradient buffer size mismatch");
        let [w1, b1, w2, b2, w3, b3, _] = self.blocks();
        let h = self.n_hidden;

        // Output layer: z3 = w3·h2 + b3.
        let mut d_h2 = vec![0.0; h];
        for r in 0..self.n_out {
            let g = d_out[r];
            grad[b3 + r] += g;
            let row = w3 + r * h;
            for c in 0..h {
                grad[row + c] += g * cache.h2[c];
                d_h2[c] += g * self.params[row + c];
            }
        }

        // Second hidden layer: h2 = tanh(w2·h1 + b2).
        let mut d_h1 = vec![0.0; h];
        for r in 0..h {
            let g = d_h2[r] * (1.0 - cache.h2[r] * cache.h2[r]);
            grad[b2 + r] += g;
            let row = w2 + r * h;
            for c in 0..h {
                grad[row + c] += g * cache.h1[c];
                d_h1[c] += g * self.params[row + c];
            }
        }

        // First hidden layer: h1 = tanh(w1·x + b1).
        let mut d_in = vec![0.0; self.n_in];
        for r in 0..h {
            let g = d_h1[r] * (1.0 - cache.h1[r] * cache.h1[r]);
            grad[b1 + r] += g;
            let row = w1 + r * self.n_in;
            for c in 0..self.n_in {
                grad[row + c] += g * cache.input[c];
                d_in[c] += g * self.params[row + c];
            }
        }

        d_in
    }
}

/// Fill `w` (a `rows × cols` row-major matrix) with an orthogonal-set
/// initialization scaled by `gain`: Gaussian draws orthogonalized by
/// Gram–Schmidt along whichever dimension fits (rows when `rows ≤ cols`,
/// columns otherwise).
fn orthogonal(w: &mut [f64], rows: usize, cols: usize, gain: f64, rng: &mut ChaCha20Rng) {
    assert_eq!(w.len(), rows * cols);
    for v in w.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let (vectors, len, stride, base_stride) = if rows <= cols {
        (rows, cols, 1, cols)
    } else {
        (cols, rows, cols, 1)
    };
    let at = |i: usize, k: usize| i * base_stride + k * stride;
    for i in 0..vectors {
        // Projections are valid because every earlier vector is unit norm;
        // the gain is applied only after the whole set is orthonormal.
        for j in 0..i {
            let mut dot = 0.0;
            for k in 0..len {
                dot += w[at(i, k)] * w[at(j, k)];
            }
            for k in 0..len {
                w[at(i, k)] -= dot * w[at(j, k)];
            }
        }
        let mut norm = 0.0;
        for k in 0..len {
            norm += w[at(i, k)].powi(2);
        }
        let norm = norm.sqrt().max(1e-12);
        for k in 0..len {
            w[at(i, k)] /= norm;
        }
    }
    for v in w.iter_mut() {
        *v *= gain;
    }
}
