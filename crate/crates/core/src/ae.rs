//! Stacked tied-weight autoencoder.
//!
//! Each layer `n` owns one encoder matrix `W_n` (row-major, `output_size x
//! input_size`), an encoder bias `b_n` and a reconstruction bias `b_rn`.
//! The decoder of layer `n` is always `W_n` transposed; there is no separate
//! decoder matrix to drift out of sync.
//!
//! - encode: `h_n = f(W_n h_{n-1} + b_n)`
//! - decode: `r_{n-1} = f(W_n^T r_n + b_rn)`
//!
//! Training is online gradient descent on the mean squared reconstruction
//! error of a single example, through the full depth of the network.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Element-wise nonlinearity shared by every encoder and decoder layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed in terms of the activation's output `y = f(z)`.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
        }
    }

    /// Closed range containing every output value.
    pub fn range(self) -> (f64, f64) {
        match self {
            Activation::Tanh => (-1.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_size: usize,
    pub output_size: usize,
}

impl LayerSpec {
    pub fn new(input_size: usize, output_size: usize) -> Result<Self> {
        if input_size == 0 {
            return Err(Error::ZeroSize { what: "layer input size" });
        }
        if output_size == 0 {
            return Err(Error::ZeroSize { what: "layer output size" });
        }
        Ok(Self {
            input_size,
            output_size,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    spec: LayerSpec,
    /// Row-major, `output_size x input_size`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    recon_bias: Vec<f64>,
}

impl Layer {
    fn random<R: Rng + ?Sized>(spec: LayerSpec, rng: &mut R) -> Self {
        let limit = 1.0 / (spec.input_size as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        let weights = (0..spec.input_size * spec.output_size)
            .map(|_| dist.sample(rng))
            .collect();
        Self {
            spec,
            weights,
            bias: vec![0.0; spec.output_size],
            recon_bias: vec![0.0; spec.input_size],
        }
    }

    fn zeros(spec: LayerSpec) -> Self {
        Self {
            spec,
            weights: vec![0.0; spec.input_size * spec.output_size],
            bias: vec![0.0; spec.output_size],
            recon_bias: vec![0.0; spec.input_size],
        }
    }

    pub fn spec(&self) -> LayerSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    #[inline]
    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.spec.input_size + col]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn recon_bias(&self) -> &[f64] {
        &self.recon_bias
    }

    pub fn recon_bias_mut(&mut self) -> &mut [f64] {
        &mut self.recon_bias
    }

    /// Pre-activation of the encoder: `W x + b`.
    fn encode_pre(&self, input: &[f64], out: &mut Vec<f64>) {
        let n_in = self.spec.input_size;
        out.clear();
        out.extend(self.weights.chunks_exact(n_in).zip(&self.bias).map(|(row, b)| {
            row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b
        }));
    }

    /// Pre-activation of the decoder: `W^T h + b_r`.
    fn decode_pre(&self, hidden: &[f64], out: &mut Vec<f64>) {
        let n_in = self.spec.input_size;
        out.clear();
        out.extend_from_slice(&self.recon_bias);
        for (row, &h) in self.weights.chunks_exact(n_in).zip(hidden) {
            if h == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * h;
            }
        }
    }
}

/// Cached forward pass for one example, used by backpropagation.
///
/// `encode_post[0]` is the visible input; `encode_post[n]` is `H_n`.
/// `decode_post[n]` is the reconstruction of layer `n` (so `decode_post[0]`
/// is the visible reconstruction and `decode_post[depth]` aliases `H_depth`).
#[derive(Debug, Clone, Default)]
pub struct ActivationRecord {
    pub encode_pre: Vec<Vec<f64>>,
    pub encode_post: Vec<Vec<f64>>,
    pub decode_pre: Vec<Vec<f64>>,
    pub decode_post: Vec<Vec<f64>>,
}

impl ActivationRecord {
    pub fn reconstruction(&self) -> &[f64] {
        &self.decode_post[0]
    }
}

/// Loss gradient with respect to every parameter of the model, laid out like
/// the layers themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub recon_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    visible_size: usize,
    activation: Activation,
    layers: Vec<Layer>,
}

impl Autoencoder {
    /// Depth-1 model with small uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(
        visible_size: usize,
        first_hidden_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let spec = LayerSpec::new(visible_size, first_hidden_size)?;
        Ok(Self {
            visible_size,
            activation: Activation::Tanh,
            layers: vec![Layer::random(spec, rng)],
        })
    }

    /// Builds a model with every hidden layer present from the start.
    pub fn with_layers<R: Rng + ?Sized>(
        visible_size: usize,
        hidden_sizes: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        let (&first, rest) = hidden_sizes
            .split_first()
            .ok_or(Error::ZeroSize { what: "hidden layer count" })?;
        let mut model = Self::new(visible_size, first, rng)?;
        for &size in rest {
            model.add_layer(size, rng)?;
        }
        Ok(model)
    }

    /// All-zero parameters; mostly useful for tests.
    pub fn zeros(visible_size: usize, hidden_sizes: &[usize]) -> Result<Self> {
        if hidden_sizes.is_empty() {
            return Err(Error::ZeroSize { what: "hidden layer count" });
        }
        let mut layers = Vec::with_capacity(hidden_sizes.len());
        let mut input = visible_size;
        for &size in hidden_sizes {
            layers.push(Layer::zeros(LayerSpec::new(input, size)?));
            input = size;
        }
        Ok(Self {
            visible_size,
            activation: Activation::Tanh,
            layers,
        })
    }

    pub fn visible_size(&self) -> usize {
        self.visible_size
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut Layer {
        &mut self.layers[index]
    }

    /// Width of hidden layer `depth` (1-based); depth 0 is the visible layer.
    pub fn hidden_size(&self, depth: usize) -> Result<usize> {
        match depth {
            0 => Ok(self.visible_size),
            d if d <= self.depth() => Ok(self.layers[d - 1].spec.output_size),
            d => Err(Error::DepthOutOfRange {
                depth: d,
                max: self.depth(),
            }),
        }
    }

    /// Appends a freshly initialised hidden layer on top of the existing
    /// stack. Existing parameters are left untouched.
    pub fn add_layer<R: Rng + ?Sized>(&mut self, new_hidden_size: usize, rng: &mut R) -> Result<()> {
        let input = self.hidden_size(self.depth())?;
        let spec = LayerSpec::new(input, new_hidden_size)?;
        self.layers.push(Layer::random(spec, rng));
        Ok(())
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth == 0 || depth > self.depth() {
            return Err(Error::DepthOutOfRange {
                depth,
                max: self.depth(),
            });
        }
        Ok(())
    }

    pub fn encode(&self, x: &[f64], to_depth: usize) -> Result<Vec<f64>> {
        self.check_depth(to_depth)?;
        if x.len() != self.visible_size {
            return Err(Error::LengthMismatch {
                expected: self.visible_size,
                got: x.len(),
            });
        }
        let mut current = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers[..to_depth] {
            layer.encode_pre(&current, &mut next);
            next.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    pub fn decode(&self, h: &[f64], from_depth: usize) -> Result<Vec<f64>> {
        self.check_depth(from_depth)?;
        let expected = self.hidden_size(from_depth)?;
        if h.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: h.len(),
            });
        }
        let mut current = h.to_vec();
        let mut next = Vec::new();
        for layer in self.layers[..from_depth].iter().rev() {
            layer.decode_pre(&current, &mut next);
            next.iter_mut().for_each(|v| *v = self.activation.apply(*v));
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Full forward pass: encode to the top layer, then decode back down.
    pub fn forward(&self, x: &[f64]) -> Result<ActivationRecord> {
        if x.len() != self.visible_size {
            return Err(Error::LengthMismatch {
                expected: self.visible_size,
                got: x.len(),
            });
        }
        let depth = self.depth();
        let f = self.activation;
        let mut rec = ActivationRecord {
            encode_pre: Vec::with_capacity(depth),
            encode_post: Vec::with_capacity(depth + 1),
            decode_pre: vec![Vec::new(); depth],
            decode_post: vec![Vec::new(); depth + 1],
        };
        rec.encode_post.push(x.to_vec());
        for layer in &self.layers {
            let mut pre = Vec::new();
            layer.encode_pre(rec.encode_post.last().expect("input present"), &mut pre);
            let post = pre.iter().map(|&z| f.apply(z)).collect();
            rec.encode_pre.push(pre);
            rec.encode_post.push(post);
        }
        rec.decode_post[depth] = rec.encode_post[depth].clone();
        for n in (0..depth).rev() {
            let mut pre = Vec::new();
            self.layers[n].decode_pre(&rec.decode_post[n + 1], &mut pre);
            rec.decode_post[n] = pre.iter().map(|&z| f.apply(z)).collect();
            rec.decode_pre[n] = pre;
        }
        Ok(rec)
    }

    /// Mean squared reconstruction error of `x`.
    pub fn loss(&self, x: &[f64]) -> Result<f64> {
        let rec = self.forward(x)?;
        Ok(mse(rec.reconstruction(), x))
    }

    /// Loss and its gradient for a single example. Tied matrices receive the
    /// sum of their encoder-path and decoder-path contributions.
    pub fn gradients(&self, x: &[f64]) -> Result<(f64, Gradients)> {
        let rec = self.forward(x)?;
        let depth = self.depth();
        let f = self.activation;
        let recon = rec.reconstruction();
        let loss = mse(recon, x);

        let mut grads: Vec<LayerGradient> = self
            .layers
            .iter()
            .map(|l| LayerGradient {
                weights: vec![0.0; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
                recon_bias: vec![0.0; l.recon_bias.len()],
            })
            .collect();

        let scale = 2.0 / self.visible_size as f64;
        // dL/d(decode_post[0])
        let mut delta: Vec<f64> = recon.iter().zip(x).map(|(r, t)| scale * (r - t)).collect();

        // Decoder path, visible side upward.
        for n in 0..depth {
            let layer = &self.layers[n];
            let n_in = layer.spec.input_size;
            let out = &rec.decode_post[n];
            let g_pre: Vec<f64> = delta
                .iter()
                .zip(out)
                .map(|(d, &y)| d * f.derivative_from_output(y))
                .collect();
            let upper = &rec.decode_post[n + 1];
            let grad = &mut grads[n];
            for (gb, g) in grad.recon_bias.iter_mut().zip(&g_pre) {
                *gb += g;
            }
            let mut next_delta = vec![0.0; layer.spec.output_size];
            for (j, (grow, wrow)) in grad
                .weights
                .chunks_exact_mut(n_in)
                .zip(layer.weights.chunks_exact(n_in))
                .enumerate()
            {
                let h = upper[j];
                let mut acc = 0.0;
                for ((gw, w), g) in grow.iter_mut().zip(wrow).zip(&g_pre) {
                    *gw += g * h;
                    acc += w * g;
                }
                next_delta[j] = acc;
            }
            delta = next_delta;
        }

        // `delta` now holds dL/dH_depth through the decoder; continue down the encoder.
        for n in (0..depth).rev() {
            let layer = &self.layers[n];
            let n_in = layer.spec.input_size;
            let out = &rec.encode_post[n + 1];
            let g_pre: Vec<f64> = delta
                .iter()
                .zip(out)
                .map(|(d, &y)| d * f.derivative_from_output(y))
                .collect();
            let input = &rec.encode_post[n];
            let grad = &mut grads[n];
            for (gb, g) in grad.bias.iter_mut().zip(&g_pre) {
                *gb += g;
            }
            for (grow, g) in grad.weights.chunks_exact_mut(n_in).zip(&g_pre) {
                for (gw, xi) in grow.iter_mut().zip(input) {
                    *gw += g * xi;
                }
            }
            if n > 0 {
                let mut next_delta = vec![0.0; n_in];
                for (wrow, g) in layer.weights.chunks_exact(n_in).zip(&g_pre) {
                    for (nd, w) in next_delta.iter_mut().zip(wrow) {
                        *nd += w * g;
                    }
                }
                delta = next_delta;
            }
        }

        Ok((loss, Gradients { layers: grads }))
    }

    /// One online gradient-descent step on `x`. Returns the loss before the
    /// update.
    pub fn train_step(&mut self, x: &[f64], learning_rate: f64) -> Result<f64> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {learning_rate}"
            )));
        }
        let (loss, grads) = self.gradients(x)?;
        for (layer, grad) in self.layers.iter_mut().zip(grads.layers) {
            axpy(&mut layer.weights, &grad.weights, -learning_rate);
            axpy(&mut layer.bias, &grad.bias, -learning_rate);
            axpy(&mut layer.recon_bias, &grad.recon_bias, -learning_rate);
        }
        Ok(loss)
    }

    const SNAPSHOT_MAGIC: &'static str = "DEEPOPT-AE";
    const SNAPSHOT_VERSION: u32 = 1;

    /// Plain-text snapshot: magic and version, the layer dimensions, then per
    /// layer the row-major weights, the encoder bias and the reconstruction
    /// bias, one line each.
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", Self::SNAPSHOT_MAGIC, Self::SNAPSHOT_VERSION);
        let dims: Vec<String> = std::iter::once(self.visible_size)
            .chain(self.layers.iter().map(|l| l.spec.output_size))
            .map(|d| d.to_string())
            .collect();
        let _ = writeln!(out, "{}", dims.join(" "));
        for layer in &self.layers {
            for values in [&layer.weights, &layer.bias, &layer.recon_bias] {
                let line: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Snapshot(msg.to_owned());
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty snapshot"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(Self::SNAPSHOT_MAGIC) {
            return Err(bad("missing magic string"));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing version"))?;
        if version != Self::SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing dimensions"))?
            .split_whitespace()
            .map(|d| d.parse().map_err(|_| bad("bad dimension")))
            .collect::<Result<_>>()?;
        if dims.len() < 2 {
            return Err(bad("need at least one hidden layer"));
        }
        let mut model = Self::zeros(dims[0], &dims[1..])?;
        for layer in &mut model.layers {
            for target in [&mut layer.weights, &mut layer.bias, &mut layer.recon_bias] {
                let values: Vec<f64> = lines
                    .next()
                    .ok_or_else(|| bad("truncated parameters"))?
                    .split_whitespace()
                    .map(|v| v.parse().map_err(|_| bad("bad parameter value")))
                    .collect::<Result<_>>()?;
                if values.len() != target.len() {
                    return Err(Error::Snapshot(format!(
                        "expected {} values, found {}",
                        target.len(),
                        values.len()
                    )));
                }
                *target = values;
            }
        }
        Ok(model)
    }
}

fn axpy(target: &mut [f64], delta: &[f64], scale: f64) {
    for (t, d) in target.iter_mut().zip(delta) {
        *t += scale * d;
    }
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}
