//! Auto-decoder training: network weights and one latent code per shape are
//! optimized jointly on a clamped-L1 SDF regression loss plus a small squared
//! penalty on the codes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::AdamState;
use crate::real::Real;
use crate::seed::derive_seed;

use super::{LatentCode, MlpDecoder, MlpGradients, ShapeLibrary};

/// Samples per parallel gradient chunk; chunk sums are combined in order, so
/// the result does not depend on the worker count.
const CHUNK: usize = 256;

#[derive(Clone, Debug)]
pub struct TrainConfig<R> {
    pub epochs: usize,
    pub lr_weights: R,
    pub lr_codes: R,
    /// Both prediction and target are clamped to `[-delta, delta]`.
    pub clamp_delta: R,
    pub prior_weight: R,
    pub batch_size: usize,
    /// Hidden layer widths of the decoder built at training start.
    pub hidden: Vec<usize>,
    /// Codes are initialized from `Normal(0, sigma^2 I)`.
    pub code_init_sigma: f64,
    pub seed: u64,
    /// Per-epoch multiplicative learning-rate decay (1.0 = constant). The
    /// Adam + L1 combination settles into an lr-proportional noise floor, so
    /// decaying the rate is what actually drives the loss down late in
    /// training.
    pub lr_decay: f64,
    /// Called after each epoch with (epoch, total epochs, mean loss).
    pub progress: Option<fn(usize, usize, f64)>,
}

impl<R: Real> Default for TrainConfig<R> {
    fn default() -> Self {
        TrainConfig {
            epochs: 60,
            lr_weights: R::of(1e-3),
            lr_codes: R::of(1e-3),
            clamp_delta: R::of(0.1),
            prior_weight: R::of(1e-4),
            batch_size: 1024,
            hidden: vec![128, 128, 128, 128],
            code_init_sigma: 0.01,
            seed: 0,
            lr_decay: 0.98,
            progress: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport<R> {
    /// Mean batch loss (data term plus prior) per epoch.
    pub epoch_losses: Vec<R>,
}

#[inline]
fn clamp_sym<R: Real>(v: R, delta: R) -> R {
    v.max(-delta).min(delta)
}

/// Trains a fresh decoder on the library. Codes are (re)initialized from the
/// configured normal distribution, then shapes are visited in order within
/// each epoch, one full pass over each shape's shuffled samples. Deterministic
/// given the seed.
pub fn train_autodecoder<R: Real>(
    mut library: ShapeLibrary<R>,
    cfg: &TrainConfig<R>,
) -> Result<(MlpDecoder<R>, ShapeLibrary<R>, TrainReport<R>)> {
    if library.is_empty() {
        return Err(Error::EmptyInput("shape library"));
    }
    if library.dim < 1 {
        return Err(Error::InvalidParameter("latent dimension must be >= 1".into()));
    }
    for e in &library.entries {
        if e.samples.len() < 1000 {
            return Err(Error::InvalidParameter(format!(
                "shape {:?} has {} samples; training expects at least 1000",
                e.id,
                e.samples.len()
            )));
        }
    }

    let mut decoder = MlpDecoder::<R>::new(library.dim, &cfg.hidden, derive_seed(cfg.seed, 0));
    {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1));
        for entry in &mut library.entries {
            let code: Vec<R> = (0..library.dim)
                .map(|_| {
                    let n: f64 = rng.sample(StandardNormal);
                    R::of(n * cfg.code_init_sigma)
                })
                .collect();
            entry.code = LatentCode::from_vec(code);
        }
    }

    let n_layers = decoder.layers().len();
    let mut adam_w: Vec<AdamState<R>> = decoder
        .layers()
        .iter()
        .map(|l| AdamState::with_defaults(l.weights.len()))
        .collect();
    let mut adam_b: Vec<AdamState<R>> = decoder
        .layers()
        .iter()
        .map(|l| AdamState::with_defaults(l.bias.len()))
        .collect();
    let mut adam_z: Vec<AdamState<R>> = library
        .entries
        .iter()
        .map(|_| AdamState::with_defaults(library.dim))
        .collect();

    let mut grads = MlpGradients::zeros_like(&decoder);
    let mut code_grad = vec![R::zero(); library.dim];
    let mut report = TrainReport { epoch_losses: Vec::with_capacity(cfg.epochs) };

    for epoch in 0..cfg.epochs {
        let mut epoch_loss_sum = R::zero();
        let mut epoch_batches = 0usize;
        let decay = R::of(cfg.lr_decay.powi(epoch as i32));
        let lr_w = cfg.lr_weights * decay;
        let lr_z = cfg.lr_codes * decay;

        // One pass over every shape's samples, with the (single-shape)
        // batches interleaved across shapes: consecutive same-shape batches
        // would drag the shared weights toward one shape at a time and the
        // codes would never differentiate.
        let mut schedule: Vec<(usize, Vec<usize>)> = Vec::new();
        for shape_idx in 0..library.entries.len() {
            let mut order: Vec<usize> = (0..library.entries[shape_idx].samples.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                cfg.seed,
                2 + (epoch as u64) * library.entries.len() as u64 + shape_idx as u64,
            ));
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch_size.max(1)) {
                schedule.push((shape_idx, batch.to_vec()));
            }
        }
        {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xbadc + epoch as u64));
            schedule.shuffle(&mut rng);
        }

        for (shape_idx, batch) in schedule {
            {
                let batch = &batch[..];
                let entry = &library.entries[shape_idx];
                let inv_b = R::of(1.0 / batch.len() as f64);

                // Per-chunk partial sums keep the reduction order fixed.
                struct Partial<R> {
                    loss: R,
                    grads: MlpGradients<R>,
                    code_grad: Vec<R>,
                }
                let partials: Vec<Partial<R>> = batch
                    .par_chunks(CHUNK)
                    .map(|chunk| {
                        let mut ws = decoder.scratch();
                        let mut g = MlpGradients::zeros_like(&decoder);
                        let mut acc = super::mlp::BatchAccumulator::new(&decoder, 32);
                        let mut zg = vec![R::zero(); library.dim];
                        let mut dz = vec![R::zero(); library.dim];
                        let mut loss = R::zero();
                        for &si in chunk {
                            let s = entry.samples[si];
                            let f = decoder.forward_with(&mut ws, s.point, &entry.code);
                            let pred = clamp_sym(f, cfg.clamp_delta);
                            let target = clamp_sym(s.distance, cfg.clamp_delta);
                            let res = pred - target;
                            loss = loss + res.abs();
                            let active = f.abs() < cfg.clamp_delta;
                            let sg = if res > R::zero() {
                                R::one()
                            } else if res < R::zero() {
                                -R::one()
                            } else {
                                R::zero()
                            };
                            if sg == R::zero() || !active {
                                continue;
                            }
                            let scale = sg * inv_b;
                            decoder.backward_with(&mut ws, &mut dz, None);
                            acc.stage(&decoder, &ws, scale, &mut g);
                            for (slot, d) in zg.iter_mut().zip(&dz) {
                                *slot = *slot + scale * *d;
                            }
                        }
                        acc.flush(&decoder, &mut g);
                        Partial { loss, grads: g, code_grad: zg }
                    })
                    .collect();

                grads.zero();
                code_grad.fill(R::zero());
                let mut data_loss = R::zero();
                for p in &partials {
                    data_loss = data_loss + p.loss;
                    grads.add_assign(&p.grads);
                    for (slot, g) in code_grad.iter_mut().zip(&p.code_grad) {
                        *slot = *slot + *g;
                    }
                }
                let two = R::of(2.0);
                for (slot, z) in code_grad.iter_mut().zip(entry.code.iter()) {
                    *slot = *slot + two * cfg.prior_weight * *z;
                }
                let batch_loss =
                    data_loss * inv_b + cfg.prior_weight * entry.code.norm_squared();
                if !batch_loss.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "training loss became non-finite at epoch {epoch}, shape {:?}",
                        entry.id
                    )));
                }
                epoch_loss_sum = epoch_loss_sum + batch_loss;
                epoch_batches += 1;

                let mut step_err = None;
                decoder.mutate_layers(|layers| {
                    for li in 0..n_layers {
                        let (gw, gb) = &grads.layers[li];
                        let r = adam_w[li]
                            .step(&mut layers[li].weights, gw, lr_w)
                            .and_then(|_| {
                                adam_b[li].step(&mut layers[li].bias, gb, lr_w)
                            });
                        if let Err(e) = r {
                            step_err = Some(e);
                            return;
                        }
                    }
                });
                if let Some(e) = step_err {
                    return Err(e);
                }
                adam_z[shape_idx].step(
                    &mut library.entries[shape_idx].code,
                    &code_grad,
                    lr_z,
                )?;
            }
        }

        let epoch_mean = epoch_loss_sum / R::of(epoch_batches.max(1) as f64);
        report.epoch_losses.push(epoch_mean);
        if let Some(cb) = cfg.progress {
            cb(epoch, cfg.epochs, epoch_mean.as_f64());
        }
    }

    Ok((decoder, library, report))
}
