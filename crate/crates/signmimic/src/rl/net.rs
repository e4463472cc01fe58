//! Plain fully connected networks on f64, with explicit backprop.
//!
//! Parameters live in one flat vector (per layer: row-major weight
//! matrix, then biases) so the optimizer and checkpoints treat a network
//! as a single array.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => y.tanh(),
            Activation::Relu => y.max(0.0),
        }
    }

    /// Derivative expressed through the post-activation value.
    fn derivative(self, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Relu => {
                if h > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Orthogonal init gain recommended for the nonlinearity.
    pub fn gain(self) -> f64 {
        match self {
            Activation::Tanh => 5.0 / 3.0,
            Activation::Relu => std::f64::consts::SQRT_2,
        }
    }
}

pub fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct Mlp {
    /// Layer widths, input first. At least two entries.
    pub sizes: Vec<usize>,
    pub activation: Activation,
    pub params: Vec<f64>,
}

/// Per-sample forward pass record: layer inputs and post-activation
/// outputs, needed to run the backward pass.
pub struct Cache {
    inputs: Vec<Vec<f64>>,
    outputs: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("cache holds at least one layer")
    }
}

impl Mlp {
    /// Orthogonal initialization: hidden layers use the activation's
    /// gain, the output layer uses `out_gain` (small for policy heads so
    /// initial actions stay near zero). Biases start at zero.
    pub fn new(
        sizes: &[usize],
        activation: Activation,
        out_gain: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|s| *s == 0) {
            return Err(Error::contract(format!("bad layer sizes {sizes:?}")));
        }
        let mut params = Vec::with_capacity(param_count(sizes));
        let last = sizes.len() - 2;
        for (l, w) in sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let gain = if l == last { out_gain } else { activation.gain() };
            let m = orthogonal(nout, nin, gain, rng);
            params.extend(m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()));
            params.extend(std::iter::repeat(0.0).take(nout));
        }
        Ok(Mlp { sizes: sizes.to_vec(), activation, params })
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_layers());
        let mut at = 0;
        for w in self.sizes.windows(2) {
            out.push((at, at + w[0] * w[1]));
            at += w[0] * w[1] + w[1];
        }
        out
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).output().to_vec()
    }

    /// Four-accumulator dot product. Fixed summation order (so results
    /// are reproducible) that still leaves the FP units independent
    /// work per cycle; the plain sequential chain halves throughput.
    fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut ca = a.chunks_exact(4);
        let mut cb = b.chunks_exact(4);
        let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
        for (xa, xb) in (&mut ca).zip(&mut cb) {
            s0 += xa[0] * xb[0];
            s1 += xa[1] * xb[1];
            s2 += xa[2] * xb[2];
            s3 += xa[3] * xb[3];
        }
        let mut tail = 0.0;
        for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
            tail += x * y;
        }
        (s0 + s2) + (s1 + s3) + tail
    }

    fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += a * xi;
        }
    }

    pub fn forward_cached(&self, x: &[f64]) -> Cache {
        assert_eq!(x.len(), self.sizes[0], "input width");
        let offsets = self.offsets();
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut outputs = Vec::with_capacity(self.n_layers());
        let mut cur = x.to_vec();
        for (l, w) in self.sizes.windows(2).enumerate() {
            let (nin, nout) = (w[0], w[1]);
            let (woff, boff) = offsets[l];
            let mut y = vec![0.0; nout];
            for j in 0..nout {
                let row = &self.params[woff + j * nin..woff + (j + 1) * nin];
                y[j] = self.params[boff + j] + Self::dot(row, &cur);
            }
            if l != self.n_layers() - 1 {
                for v in y.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            inputs.push(cur);
            cur = y.clone();
            outputs.push(y);
        }
        Cache { inputs, outputs }
    }

    /// Accumulates parameter gradients for one sample into `grad`
    /// (same layout as `params`), given the loss gradient with respect
    /// to the network output.
    pub fn backward(&self, cache: &Cache, d_out: &[f64], grad: &mut [f64]) {
        assert_eq!(d_out.len(), *self.sizes.last().unwrap(), "output width");
        assert_eq!(grad.len(), self.params.len(), "gradient buffer size");
        let offsets = self.offsets();
        let mut dy = d_out.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (nin, nout) = (self.sizes[l], self.sizes[l + 1]);
            let (woff, boff) = offsets[l];
            if l != self.n_layers() - 1 {
                for (v, h) in dy.iter_mut().zip(&cache.outputs[l]) {
                    *v *= self.activation.derivative(*h);
                }
            }
            let x = &cache.inputs[l];
            for j in 0..nout {
                grad[boff + j] += dy[j];
                Self::axpy(&mut grad[woff + j * nin..woff + (j + 1) * nin], dy[j], x);
            }
            if l > 0 {
                let mut dx = vec![0.0; nin];
                for j in 0..nout {
                    let row = &self.params[woff + j * nin..woff + (j + 1) * nin];
                    Self::axpy(&mut dx, dy[j], row);
                }
                dy = dx;
            }
        }
    }
}

/// Orthogonal matrix of the requested shape scaled by `gain`: QR of a
/// Gaussian draw, with column signs fixed to the R diagonal so the
/// result is unique for a given draw.
fn orthogonal(rows: usize, cols: usize, gain: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (m, n, transpose) = if rows >= cols { (rows, cols, false) } else { (cols, rows, true) };
    let a = DMatrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    let q = if transpose { q.transpose() } else { q };
    q * gain
}
