//! Small fully-connected decoder with hand-written forward and reverse passes.
//!
//! The network maps `(x, z)` (dimension `3 + d`) to a scalar signed distance.
//! Hidden layers use the algebraic sigmoid `x / sqrt(1 + x^2)` (smooth
//! everywhere, saturating, and far cheaper than a transcendental call on the
//! hot path); the output layer is linear.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::real::Real;

use super::LatentSdf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    /// `x / sqrt(1 + x^2)`: bounded to (-1, 1), smooth with derivative
    /// `(1 - a^2)^(3/2)` in terms of the activated value `a`.
    Smooth,
    Linear,
}

#[inline]
fn smooth_act<R: Real>(x: R) -> R {
    x / (R::one() + x * x).sqrt()
}

/// Derivative of [`smooth_act`] expressed through its output.
#[inline]
fn smooth_act_prime_from_output<R: Real>(a: R) -> R {
    let t = (R::one() - a * a).max(R::zero());
    t * t.sqrt()
}

fn transpose_all<R: Real>(layers: &[DenseLayer<R>]) -> Vec<Vec<R>> {
    layers
        .iter()
        .map(|l| {
            let mut t = vec![R::zero(); l.weights.len()];
            for o in 0..l.out_dim {
                for j in 0..l.in_dim {
                    t[j * l.out_dim + o] = l.weights[o * l.in_dim + j];
                }
            }
            t
        })
        .collect()
}

/// Dot product over eight independent accumulator lanes; the fixed-width
/// inner loop vectorizes, and splitting the dependency chain keeps the FPU
/// busy. The summation order is fixed, so results stay deterministic.
#[inline]
fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    let n = a.len().min(b.len());
    let chunks = n / 8;
    let mut lanes = [R::zero(); 8];
    for i in 0..chunks {
        let ca = &a[i * 8..i * 8 + 8];
        let cb = &b[i * 8..i * 8 + 8];
        for j in 0..8 {
            lanes[j] = lanes[j] + ca[j] * cb[j];
        }
    }
    let mut rest = R::zero();
    for k in chunks * 8..n {
        rest = rest + a[k] * b[k];
    }
    let mut total = R::zero();
    for l in lanes {
        total = total + l;
    }
    total + rest
}

/// `out[j] += c * v[j]`. The zip form auto-vectorizes; chunked manual
/// unrolling of the mutable side defeats it.
#[inline]
fn axpy<R: Real>(out: &mut [R], c: R, v: &[R]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o = *o + c * *x;
    }
}

#[derive(Clone, Debug)]
pub struct DenseLayer<R> {
    /// `out_dim x in_dim`, row-major.
    pub weights: Vec<R>,
    pub bias: Vec<R>,
    pub activation: Activation,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// Auto-decoder network over the encoded input
/// `[x, sin(w_k x), cos(w_k x) (k bands), z]`, chaining down to one output.
///
/// The sinusoidal bands (`w_k = pi 2^k`, axis-aligned, nothing learned)
/// counter the spectral bias of plain coordinate inputs; without them a small
/// decoder needs an order of magnitude more epochs to sharpen a surface. The
/// band count is recoverable from the first layer's width, so checkpoints
/// need no extra fields.
///
/// A transposed copy of every weight matrix is kept alongside the originals
/// so the reverse pass can run on row-contiguous dot products; it is rebuilt
/// whenever the weights change (see [`MlpDecoder::mutate_layers`]).
#[derive(Clone, Debug)]
pub struct MlpDecoder<R> {
    latent_dim: usize,
    fourier_bands: usize,
    layers: Vec<DenseLayer<R>>,
    /// Per layer: `in_dim x out_dim`, row-major (the transpose of `weights`).
    transposed: Vec<Vec<R>>,
}

/// Default number of sinusoidal bands.
pub const DEFAULT_FOURIER_BANDS: usize = 3;

#[inline]
fn encoded_width(latent_dim: usize, bands: usize) -> usize {
    3 + 6 * bands + latent_dim
}

/// Reusable forward/backward buffers for one decoder topology.
pub struct MlpScratch<R> {
    input: Vec<R>,
    /// Post-activation output of each layer.
    activations: Vec<Vec<R>>,
    /// Backprop buffer per layer (pre-activation gradient).
    deltas: Vec<Vec<R>>,
    input_grad: Vec<R>,
    /// Raw point of the last forward pass (needed to chain gradients through
    /// the sinusoidal encoding).
    point: Vec3<R>,
}

/// Per-layer weight and bias gradients, matching a decoder's topology.
#[derive(Clone, Debug)]
pub struct MlpGradients<R> {
    pub layers: Vec<(Vec<R>, Vec<R>)>,
}

impl<R: Real> MlpGradients<R> {
    pub fn zeros_like(dec: &MlpDecoder<R>) -> Self {
        MlpGradients {
            layers: dec
                .layers
                .iter()
                .map(|l| (vec![R::zero(); l.weights.len()], vec![R::zero(); l.bias.len()]))
                .collect(),
        }
    }

    pub fn zero(&mut self) {
        for (w, b) in &mut self.layers {
            w.fill(R::zero());
            b.fill(R::zero());
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for ((w, b), (ow, ob)) in self.layers.iter_mut().zip(&other.layers) {
            for (a, o) in w.iter_mut().zip(ow) {
                *a = *a + *o;
            }
            for (a, o) in b.iter_mut().zip(ob) {
                *a = *a + *o;
            }
        }
    }

    pub fn scale(&mut self, s: R) {
        for (w, b) in &mut self.layers {
            for v in w.iter_mut() {
                *v = *v * s;
            }
            for v in b.iter_mut() {
                *v = *v * s;
            }
        }
    }
}

impl<R: Real> MlpDecoder<R> {
    /// Builds a decoder with the given hidden widths, Xavier-uniform init,
    /// and the default Fourier bands.
    pub fn new(latent_dim: usize, hidden: &[usize], seed: u64) -> Self {
        Self::with_bands(latent_dim, DEFAULT_FOURIER_BANDS, hidden, seed)
    }

    pub fn with_bands(latent_dim: usize, bands: usize, hidden: &[usize], seed: u64) -> Self {
        assert!(latent_dim >= 1, "latent dimension must be at least 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dims = vec![encoded_width(latent_dim, bands)];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for (idx, w) in dims.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let mut limit = (6.0 / (n_in + n_out) as f64).sqrt();
            if idx + 2 == dims.len() {
                // Small output layer: initial predictions must start inside
                // the clamp band or the clamped-L1 training loss has zero
                // gradient on most samples.
                limit *= 0.1;
            }
            let weights: Vec<R> = (0..n_in * n_out)
                .map(|_| R::of(rng.random_range(-limit..limit)))
                .collect();
            layers.push(DenseLayer {
                weights,
                bias: vec![R::zero(); n_out],
                activation: if n_out == 1 { Activation::Linear } else { Activation::Smooth },
                in_dim: n_in,
                out_dim: n_out,
            });
        }
        let transposed = transpose_all(&layers);
        MlpDecoder { latent_dim, fourier_bands: bands, layers, transposed }
    }

    /// Assembles a decoder from explicit layers, checking the dimension chain.
    /// The band count is inferred from the first layer's input width
    /// (`3 + 6 bands + d`); zero bands means a plain `[x, z]` input.
    pub fn from_layers(latent_dim: usize, layers: Vec<DenseLayer<R>>) -> Result<Self> {
        let first = layers.first().ok_or(Error::EmptyInput("decoder layers"))?;
        let extra = first
            .in_dim
            .checked_sub(3 + latent_dim)
            .ok_or(Error::DimensionMismatch { expected: 3 + latent_dim, actual: first.in_dim })?;
        if extra % 6 != 0 {
            return Err(Error::DimensionMismatch {
                expected: 3 + latent_dim,
                actual: first.in_dim,
            });
        }
        let bands = extra / 6;
        let mut expect = encoded_width(latent_dim, bands);
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim != expect {
                return Err(Error::DimensionMismatch { expected: expect, actual: l.in_dim });
            }
            if l.weights.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim {
                return Err(Error::InvalidParameter(format!(
                    "layer {i}: weight/bias sizes do not match declared dims"
                )));
            }
            expect = l.out_dim;
        }
        if expect != 1 {
            return Err(Error::DimensionMismatch { expected: 1, actual: expect });
        }
        let transposed = transpose_all(&layers);
        Ok(MlpDecoder { latent_dim, fourier_bands: bands, layers, transposed })
    }

    pub fn fourier_bands(&self) -> usize {
        self.fourier_bands
    }

    /// Writes `[x, sin(w_k x), cos(w_k x) .., z]` into `buf`.
    fn encode_input(&self, x: Vec3<R>, z: &[R], buf: &mut [R]) {
        buf[0] = x.x;
        buf[1] = x.y;
        buf[2] = x.z;
        let mut off = 3;
        let mut w = R::of(std::f64::consts::PI);
        for _ in 0..self.fourier_bands {
            buf[off] = (x.x * w).sin();
            buf[off + 1] = (x.y * w).sin();
            buf[off + 2] = (x.z * w).sin();
            buf[off + 3] = (x.x * w).cos();
            buf[off + 4] = (x.y * w).cos();
            buf[off + 5] = (x.z * w).cos();
            off += 6;
            w = w + w;
        }
        buf[off..].copy_from_slice(z);
    }

    /// Chains an encoded-input gradient back to the raw point coordinates.
    fn decode_point_gradient(&self, g: &[R], x: Vec3<R>) -> Vec3<R> {
        let mut dx = Vec3::new(g[0], g[1], g[2]);
        let mut off = 3;
        let mut w = R::of(std::f64::consts::PI);
        for _ in 0..self.fourier_bands {
            // d sin(wx)/dx = w cos(wx); d cos(wx)/dx = -w sin(wx).
            dx.x = dx.x + w * ((x.x * w).cos() * g[off] - (x.x * w).sin() * g[off + 3]);
            dx.y = dx.y + w * ((x.y * w).cos() * g[off + 1] - (x.y * w).sin() * g[off + 4]);
            dx.z = dx.z + w * ((x.z * w).cos() * g[off + 2] - (x.z * w).sin() * g[off + 5]);
            off += 6;
            w = w + w;
        }
        dx
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn layers(&self) -> &[DenseLayer<R>] {
        &self.layers
    }

    /// Mutates the layers (weight updates) and refreshes the transposed
    /// weight cache afterwards.
    pub fn mutate_layers(&mut self, f: impl FnOnce(&mut [DenseLayer<R>])) {
        f(&mut self.layers);
        self.transposed = transpose_all(&self.layers);
    }

    pub fn scratch(&self) -> MlpScratch<R> {
        let width = encoded_width(self.latent_dim, self.fourier_bands);
        MlpScratch {
            input: vec![R::zero(); width],
            activations: self.layers.iter().map(|l| vec![R::zero(); l.out_dim]).collect(),
            deltas: self.layers.iter().map(|l| vec![R::zero(); l.out_dim]).collect(),
            input_grad: vec![R::zero(); width],
            point: Vec3::zero(),
        }
    }

    pub fn forward_with(&self, ws: &mut MlpScratch<R>, x: Vec3<R>, z: &[R]) -> R {
        debug_assert_eq!(z.len(), self.latent_dim);
        ws.point = x;
        let input = &mut ws.input;
        self.encode_input(x, z, input);

        for (li, layer) in self.layers.iter().enumerate() {
            // Split scratch so the previous activation can be read while the
            // current one is written.
            let (prev_slice, rest) = ws.activations.split_at_mut(li);
            let out = &mut rest[0];
            let input: &[R] = if li == 0 { &ws.input } else { &prev_slice[li - 1] };
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let acc = layer.bias[o] + dot(row, input);
                out[o] = match layer.activation {
                    Activation::Smooth => smooth_act(acc),
                    Activation::Linear => acc,
                };
            }
        }
        ws.activations.last().expect("at least one layer")[0]
    }

    /// Reverse pass after [`MlpDecoder::forward_with`] on the same scratch.
    ///
    /// Writes `d phi / d z` into `dz` and returns `d phi / d x`. When `grads`
    /// is provided, accumulates `scale * d phi / d weights` into it.
    pub fn backward_with(
        &self,
        ws: &mut MlpScratch<R>,
        dz: &mut [R],
        mut grads: Option<(&mut MlpGradients<R>, R)>,
    ) -> Vec3<R> {
        debug_assert_eq!(dz.len(), self.latent_dim);
        let n_layers = self.layers.len();

        // Seed: d phi / d y_last = 1 through the linear output.
        ws.deltas[n_layers - 1][0] = R::one();
        if self.layers[n_layers - 1].activation == Activation::Smooth {
            let a = ws.activations[n_layers - 1][0];
            ws.deltas[n_layers - 1][0] = smooth_act_prime_from_output(a);
        }

        for li in (0..n_layers).rev() {
            let layer = &self.layers[li];
            // Weight/bias gradients: dW = delta (x) input_activation.
            if let Some((g, scale)) = grads.as_mut().map(|(g, s)| (&mut **g, *s)) {
                let (gw, gb) = &mut g.layers[li];
                let input: &[R] = if li == 0 { &ws.input } else { &ws.activations[li - 1] };
                for o in 0..layer.out_dim {
                    let d = ws.deltas[li][o] * scale;
                    gb[o] = gb[o] + d;
                    axpy(&mut gw[o * layer.in_dim..(o + 1) * layer.in_dim], d, input);
                }
            }

            // Propagate to the previous layer (or the input) through the
            // transposed weights: each input element is one contiguous dot.
            let wt = &self.transposed[li];
            if li == 0 {
                for j in 0..layer.in_dim {
                    ws.input_grad[j] =
                        dot(&wt[j * layer.out_dim..(j + 1) * layer.out_dim], &ws.deltas[0]);
                }
            } else {
                let (head, tail) = ws.deltas.split_at_mut(li);
                let prev = &mut head[li - 1];
                let cur = &tail[0];
                for (j, slot) in prev.iter_mut().enumerate() {
                    *slot = dot(&wt[j * layer.out_dim..(j + 1) * layer.out_dim], cur);
                }
                // Through the previous layer's activation.
                if self.layers[li - 1].activation == Activation::Smooth {
                    for (slot, a) in prev.iter_mut().zip(&ws.activations[li - 1]) {
                        *slot = *slot * smooth_act_prime_from_output(*a);
                    }
                }
            }
        }

        let enc = 3 + 6 * self.fourier_bands;
        dz.copy_from_slice(&ws.input_grad[enc..]);
        self.decode_point_gradient(&ws.input_grad, ws.point)
    }
}

/// Accumulates weight gradients over micro-blocks of samples.
///
/// Per-sample rank-1 updates stream the full gradient matrices from memory
/// for every sample; staging a block of scaled deltas and layer inputs and
/// folding them in one pass keeps each gradient row hot while the block is
/// consumed. Accumulation order is fixed, so results are deterministic.
pub struct BatchAccumulator<R> {
    block: usize,
    filled: usize,
    /// Staged layer inputs, one buffer per layer: `block x in_dim`.
    inputs: Vec<Vec<R>>,
    /// Staged pre-activation gradients, scaled: `block x out_dim`.
    deltas: Vec<Vec<R>>,
}

impl<R: Real> BatchAccumulator<R> {
    pub fn new(dec: &MlpDecoder<R>, block: usize) -> Self {
        let block = block.max(1);
        BatchAccumulator {
            block,
            filled: 0,
            inputs: dec.layers.iter().map(|l| vec![R::zero(); block * l.in_dim]).collect(),
            deltas: dec.layers.iter().map(|l| vec![R::zero(); block * l.out_dim]).collect(),
        }
    }

    /// Stages the sample currently held in `ws` (after `forward_with` and a
    /// delta-only `backward_with`), contributing `scale * d phi / d W`.
    /// Flushes into `grads` when the block fills.
    pub fn stage(
        &mut self,
        dec: &MlpDecoder<R>,
        ws: &MlpScratch<R>,
        scale: R,
        grads: &mut MlpGradients<R>,
    ) {
        let i = self.filled;
        for (li, layer) in dec.layers.iter().enumerate() {
            let input: &[R] = if li == 0 { &ws.input } else { &ws.activations[li - 1] };
            self.inputs[li][i * layer.in_dim..(i + 1) * layer.in_dim].copy_from_slice(input);
            let dst = &mut self.deltas[li][i * layer.out_dim..(i + 1) * layer.out_dim];
            for (slot, d) in dst.iter_mut().zip(&ws.deltas[li]) {
                *slot = *d * scale;
            }
        }
        self.filled += 1;
        if self.filled == self.block {
            self.flush(dec, grads);
        }
    }

    /// Folds any staged samples into `grads`.
    pub fn flush(&mut self, dec: &MlpDecoder<R>, grads: &mut MlpGradients<R>) {
        if self.filled == 0 {
            return;
        }
        let n = self.filled;
        for (li, layer) in dec.layers.iter().enumerate() {
            let (gw, gb) = &mut grads.layers[li];
            let inputs = &self.inputs[li];
            let deltas = &self.deltas[li];
            for o in 0..layer.out_dim {
                let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut bias_acc = R::zero();
                for i in 0..n {
                    let c = deltas[i * layer.out_dim + o];
                    if c != R::zero() {
                        axpy(row, c, &inputs[i * layer.in_dim..(i + 1) * layer.in_dim]);
                    }
                    bias_acc = bias_acc + c;
                }
                gb[o] = gb[o] + bias_acc;
            }
        }
        self.filled = 0;
    }
}

impl<R: Real> LatentSdf<R> for MlpDecoder<R> {
    fn dim(&self) -> usize {
        self.latent_dim
    }

    fn eval(&self, x: Vec3<R>, z: &[R]) -> R {
        let mut ws = self.scratch();
        self.forward_with(&mut ws, x, z)
    }

    fn eval_grad(&self, x: Vec3<R>, z: &[R], dz: &mut [R]) -> (R, Vec3<R>) {
        let mut ws = self.scratch();
        let phi = self.forward_with(&mut ws, x, z);
        let dx = self.backward_with(&mut ws, dz, None);
        (phi, dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_decoder(row: Vec<f64>, latent_dim: usize) -> MlpDecoder<f64> {
        MlpDecoder::from_layers(
            latent_dim,
            vec![DenseLayer {
                in_dim: 3 + latent_dim,
                out_dim: 1,
                weights: row,
                bias: vec![0.0],
                activation: Activation::Linear,
            }],
        )
        .unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let dec = linear_decoder(vec![0.0; 5], 2);
        let z = [0.7, -0.3];
        assert_eq!(dec.eval(Vec3::of(1.0, 2.0, 3.0), &z), 0.0);
        assert_eq!(dec.eval(Vec3::of(-5.0, 0.0, 9.0), &z), 0.0);
    }

    #[test]
    fn identity_slice_returns_first_coordinate() {
        let dec = linear_decoder(vec![1.0, 0.0, 0.0, 0.0, 0.0], 2);
        let z = [0.4, 0.6];
        assert_eq!(dec.eval(Vec3::of(0.25, -3.0, 7.0), &z), 0.25);
    }

    #[test]
    fn linear_decoder_gradient_is_the_weight_row() {
        let row = vec![0.5, -1.5, 2.0, 0.25, -0.75];
        let dec = linear_decoder(row.clone(), 2);
        let z = [0.1, 0.2];
        for x in [Vec3::of(0.0, 0.0, 0.0), Vec3::of(1.0, -2.0, 3.0)] {
            let mut dz = [0.0; 2];
            let (_, dx) = dec.eval_grad(x, &z, &mut dz);
            assert_eq!(dx.to_array(), [0.5, -1.5, 2.0]);
            assert_eq!(dz, [0.25, -0.75]);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let bad = MlpDecoder::from_layers(
            2,
            vec![DenseLayer {
                in_dim: 4, // should be 5
                out_dim: 1,
                weights: vec![0.0; 4],
                bias: vec![0.0],
                activation: Activation::Linear,
            }],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn random_net_gradients_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let dec = MlpDecoder::<f64>::new(4, &[16, 16], 123);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-6;
        for _ in 0..100 {
            let x = Vec3::of(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let z: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut dz = vec![0.0; 4];
            let (phi, dx) = dec.eval_grad(x, &z, &mut dz);
            assert_eq!(phi, dec.eval(x, &z));

            let check = |analytic: f64, plus: f64, minus: f64| {
                let fd = (plus - minus) / (2.0 * h);
                let denom = fd.abs().max(1e-7);
                assert!(
                    (analytic - fd).abs() / denom < 1e-4,
                    "analytic {analytic} vs fd {fd}"
                );
            };
            check(
                dx.x,
                dec.eval(Vec3::of(x.x + h, x.y, x.z), &z),
                dec.eval(Vec3::of(x.x - h, x.y, x.z), &z),
            );
            check(
                dx.y,
                dec.eval(Vec3::of(x.x, x.y + h, x.z), &z),
                dec.eval(Vec3::of(x.x, x.y - h, x.z), &z),
            );
            check(
                dx.z,
                dec.eval(Vec3::of(x.x, x.y, x.z + h), &z),
                dec.eval(Vec3::of(x.x, x.y, x.z - h), &z),
            );
            for i in 0..4 {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[i] += h;
                zm[i] -= h;
                check(dz[i], dec.eval(x, &zp), dec.eval(x, &zm));
            }
        }
    }

    #[test]
    fn batch_accumulator_matches_per_sample_accumulation() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let dec = MlpDecoder::<f64>::new(3, &[12, 10], 77);
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let samples: Vec<(Vec3<f64>, Vec<f64>, f64)> = (0..23)
            .map(|_| {
                (
                    Vec3::of(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ),
                    (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    rng.random_range(-2.0..2.0),
                )
            })
            .collect();

        let mut ws = dec.scratch();
        let mut dz = vec![0.0; 3];

        let mut direct = MlpGradients::zeros_like(&dec);
        for (x, z, scale) in &samples {
            dec.forward_with(&mut ws, *x, z);
            dec.backward_with(&mut ws, &mut dz, Some((&mut direct, *scale)));
        }

        let mut batched = MlpGradients::zeros_like(&dec);
        let mut acc = BatchAccumulator::new(&dec, 8); // 23 samples: partial tail block
        for (x, z, scale) in &samples {
            dec.forward_with(&mut ws, *x, z);
            dec.backward_with(&mut ws, &mut dz, None);
            acc.stage(&dec, &ws, *scale, &mut batched);
        }
        acc.flush(&dec, &mut batched);

        for (li, ((dw, db), (bw, bb))) in direct.layers.iter().zip(&batched.layers).enumerate() {
            for (a, b) in dw.iter().zip(bw) {
                assert!(
                    (a - b).abs() < 1e-12 * a.abs().max(1.0),
                    "layer {li} weight grad {a} vs {b}"
                );
            }
            for (a, b) in db.iter().zip(bb) {
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "layer {li} bias grad");
            }
        }
    }

    #[test]
    fn weight_gradients_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        let mut dec = MlpDecoder::<f64>::new(2, &[8], 55);
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        let x = Vec3::of(0.3, -0.2, 0.5);
        let z = [0.4, -0.1];
        let h = 1e-6;

        let mut ws = dec.scratch();
        let mut grads = MlpGradients::zeros_like(&dec);
        dec.forward_with(&mut ws, x, &z);
        let mut dz = [0.0; 2];
        dec.backward_with(&mut ws, &mut dz, Some((&mut grads, 1.0)));

        let mut set_weight = |dec: &mut MlpDecoder<f64>, li: usize, wi: usize, v: f64| {
            dec.mutate_layers(|layers| layers[li].weights[wi] = v);
        };
        for li in 0..dec.layers().len() {
            for _ in 0..10 {
                let wi = rng.random_range(0..dec.layers()[li].weights.len());
                let orig = dec.layers()[li].weights[wi];
                set_weight(&mut dec, li, wi, orig + h);
                let plus = dec.eval(x, &z);
                set_weight(&mut dec, li, wi, orig - h);
                let minus = dec.eval(x, &z);
                set_weight(&mut dec, li, wi, orig);
                let fd = (plus - minus) / (2.0 * h);
                let analytic = grads.layers[li].0[wi];
                assert!(
                    (analytic - fd).abs() / fd.abs().max(1e-7) < 1e-4,
                    "layer {li} weight {wi}: {analytic} vs {fd}"
                );
            }
            for bi in 0..dec.layers()[li].bias.len() {
                let orig = dec.layers()[li].bias[bi];
                dec.mutate_layers(|layers| layers[li].bias[bi] = orig + h);
                let plus = dec.eval(x, &z);
                dec.mutate_layers(|layers| layers[li].bias[bi] = orig - h);
                let minus = dec.eval(x, &z);
                dec.mutate_layers(|layers| layers[li].bias[bi] = orig);
                let fd = (plus - minus) / (2.0 * h);
                let analytic = grads.layers[li].1[bi];
                assert!(
                    (analytic - fd).abs() / fd.abs().max(1e-7) < 1e-4,
                    "layer {li} bias {bi}: {analytic} vs {fd}"
                );
            }
        }
    }
}
