//! Small fully connected networks with hand-written backpropagation and the
//! Adam optimizer.
//!
//! Parameters live in one flat vector. For each layer the weights come first,
//! row-major as `[out][in]`, followed by the `out` biases. Hidden layers use
//! ReLU, the output layer is linear.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{what}: expected length {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("a network needs at least an input and an output layer")]
    TooFewLayers,
}

fn check(what: &'static str, expected: usize, got: usize) -> Result<(), NeuralError> {
    if expected == got {
        Ok(())
    } else {
        Err(NeuralError::Dimension {
            what,
            expected,
            got,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Layer outputs, starting with the input itself. Hidden entries are
    /// post-ReLU; the last entry is the network output.
    pub activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache has an output")
    }
}

impl Mlp {
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self, NeuralError> {
        if sizes.len() < 2 {
            return Err(NeuralError::TooFewLayers);
        }
        Ok(Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; Self::param_count(sizes)],
        })
    }

    /// Uniform fan-in initialization, `U(-1/sqrt(n_in), 1/sqrt(n_in))` for
    /// weights and biases alike.
    pub fn init<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self, NeuralError> {
        let mut net = Self::zeros(sizes)?;
        let mut offset = 0;
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            let n = w[0] * w[1] + w[1];
            for p in &mut net.params[offset..offset + n] {
                *p = rng.random_range(-bound..bound);
            }
            offset += n;
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self, NeuralError> {
        let net = Self::zeros(sizes)?;
        check("parameters", net.params.len(), params.len())?;
        Ok(Self {
            sizes: sizes.to_vec(),
            params,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("at least two layers")
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Offset of the bias block of layer `l` (0-based) in the flat vector.
    pub fn bias_offset(&self, layer: usize) -> usize {
        let before: usize = self.sizes[..=layer]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum();
        before + self.sizes[layer] * self.sizes[layer + 1]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NeuralError> {
        Ok(self.forward_cached(x)?.activations.pop().expect("output"))
    }

    pub fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache, NeuralError> {
        check("input", self.input_dim(), x.len())?;
        let n_layers = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(n_layers + 1);
        activations.push(x.to_vec());
        let mut offset = 0;
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let bias = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let input = &activations[l];
            let hidden = l + 1 < n_layers;
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    let z = bias[o] + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if hidden {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
            activations.push(out);
            offset += n_in * n_out + n_out;
        }
        Ok(ForwardCache { activations })
    }

    /// Backpropagate `upstream = dL/d(output)` through the cached pass.
    ///
    /// Parameter gradients are added into `grad`; the gradient with respect
    /// to the input is returned.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>, NeuralError> {
        check("upstream gradient", self.output_dim(), upstream.len())?;
        check("gradient buffer", self.params.len(), grad.len())?;
        let n_layers = self.sizes.len() - 1;
        let mut offsets = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }
        let mut delta = upstream.to_vec();
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let input = &cache.activations[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                grad[off + n_in * n_out + o] += d;
            }
            let weights = &self.params[off..off + n_in * n_out];
            let mut next = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (nx, w) in next.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                    *nx += d * w;
                }
            }
            if l > 0 {
                // ReLU mask of the layer feeding this one
                for (nx, a) in next.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *nx = 0.0;
                    }
                }
            }
            delta = next;
        }
        Ok(delta)
    }
}

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NeuralError> {
        check("parameters", self.m.len(), params.len())?;
        check("gradients", self.m.len(), grads.len())?;
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
