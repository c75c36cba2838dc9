//! The joint objective and its analytic gradient.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{rotation_matrix, rotation_matrix_partials};
use crate::latent::LatentSdf;
use crate::real::Real;
use crate::sampling::SdfSample;

use super::{FitParams, FrozenMask};

/// Samples per parallel chunk. Chunks are summed in order, so the result is
/// independent of the worker count.
const CHUNK: usize = 1024;

#[inline]
fn sign<R: Real>(v: R) -> R {
    if v > R::zero() {
        R::one()
    } else if v < R::zero() {
        -R::one()
    } else {
        R::zero()
    }
}

#[inline]
fn clamp_sym<R: Real>(v: R, delta: R) -> R {
    v.max(-delta).min(delta)
}

/// Data term plus latent prior:
/// `sum_i |s f(R^T (x_i - t) / s, z) - phi_i| + prior_weight * |z|^2`.
///
/// With `clamp_delta` set, both the prediction and the observation are
/// clamped to `[-delta, delta]` inside the residual.
pub fn objective<R: Real>(
    space: &dyn LatentSdf<R>,
    params: &FitParams<R>,
    batch: &[SdfSample<R>],
    prior_weight: R,
    clamp_delta: Option<R>,
) -> Result<R> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("objective batch"));
    }
    if !(params.scale > R::zero()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {}",
            params.scale
        )));
    }
    space.check_dim(&params.code)?;

    let rt = rotation_matrix(params.rot).transpose();
    let s_div = params.scale;

    let chunk_losses: Vec<Result<R>> = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut acc = R::zero();
            for (si, sample) in chunk.iter().enumerate() {
                let u = rt * (sample.point - params.translation) / s_div;
                let f = space.eval(u, &params.code);
                if !f.is_finite() {
                    return Err(Error::NonFiniteEval { index: ci * CHUNK + si });
                }
                let (pred, target) = match clamp_delta {
                    Some(d) => (clamp_sym(params.scale * f, d), clamp_sym(sample.distance, d)),
                    None => (params.scale * f, sample.distance),
                };
                acc = acc + (pred - target).abs();
            }
            Ok(acc)
        })
        .collect();

    let mut loss = R::zero();
    for c in chunk_losses {
        loss = loss + c?;
    }
    Ok(loss + prior_weight * params.code.norm_squared())
}

/// Objective value and its gradient over the flat layout
/// `[s, psi, rho, theta, tx, ty, tz, z...]`; masked components are exactly 0.
///
/// The L1 subgradient at a zero residual is taken as 0, so exact fixed points
/// stay stationary.
pub fn objective_gradient<R: Real>(
    space: &dyn LatentSdf<R>,
    params: &FitParams<R>,
    batch: &[SdfSample<R>],
    prior_weight: R,
    clamp_delta: Option<R>,
    mask: &FrozenMask,
    grad_out: &mut [R],
) -> Result<R> {
    if batch.is_empty() {
        return Err(Error::EmptyInput("objective batch"));
    }
    if !(params.scale > R::zero()) {
        return Err(Error::InvalidParameter(format!(
            "scale must be positive, got {}",
            params.scale
        )));
    }
    space.check_dim(&params.code)?;
    let d = space.dim();
    let n_flat = 7 + d;
    if grad_out.len() != n_flat {
        return Err(Error::DimensionMismatch { expected: n_flat, actual: grad_out.len() });
    }

    let r = rotation_matrix(params.rot);
    let rt = r.transpose();
    let (dr_psi, dr_rho, dr_theta) = rotation_matrix_partials(params.rot);
    let s = params.scale;

    struct ChunkGrad<R> {
        loss: R,
        grad: Vec<R>,
    }

    let chunk_results: Vec<Result<ChunkGrad<R>>> = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut grad = vec![R::zero(); n_flat];
            let mut loss = R::zero();
            let mut dz = vec![R::zero(); d];
            for (si, sample) in chunk.iter().enumerate() {
                let v = sample.point - params.translation;
                let u = rt * v / s;
                let (f, gx) = space.eval_grad(u, &params.code, &mut dz);
                if !f.is_finite() {
                    return Err(Error::NonFiniteEval { index: ci * CHUNK + si });
                }

                let raw_pred = s * f;
                let (pred, target, active) = match clamp_delta {
                    Some(dl) => (
                        clamp_sym(raw_pred, dl),
                        clamp_sym(sample.distance, dl),
                        raw_pred.abs() < dl,
                    ),
                    None => (raw_pred, sample.distance, true),
                };
                let res = pred - target;
                loss = loss + res.abs();
                let sg = sign(res);
                if sg == R::zero() || !active {
                    continue;
                }

                // d pred / d s = f - gx . u  (u depends on s as u = w / s).
                grad[0] = grad[0] + sg * (f - gx.dot(u));
                // d pred / d angle = (dR_angle gx) . v.
                grad[1] = grad[1] + sg * (dr_psi * gx).dot(v);
                grad[2] = grad[2] + sg * (dr_rho * gx).dot(v);
                grad[3] = grad[3] + sg * (dr_theta * gx).dot(v);
                // d pred / d t = -R gx.
                let dt = r * gx;
                grad[4] = grad[4] - sg * dt.x;
                grad[5] = grad[5] - sg * dt.y;
                grad[6] = grad[6] - sg * dt.z;
                // d pred / d z = s * dz.
                for (slot, g) in grad[7..].iter_mut().zip(&dz) {
                    *slot = *slot + sg * s * *g;
                }
            }
            Ok(ChunkGrad { loss, grad })
        })
        .collect();

    grad_out.fill(R::zero());
    let mut loss = R::zero();
    for c in chunk_results {
        let c = c?;
        loss = loss + c.loss;
        for (o, g) in grad_out.iter_mut().zip(&c.grad) {
            *o = *o + *g;
        }
    }

    // Latent prior applies whether or not residuals saturate.
    let two = R::of(2.0);
    for (slot, z) in grad_out[7..].iter_mut().zip(params.code.iter()) {
        *slot = *slot + two * prior_weight * *z;
    }
    loss = loss + prior_weight * params.code.norm_squared();

    mask.apply(grad_out);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::FitParams;
    use crate::geom::{RotationParams, Vec3};
    use crate::latent::{AnalyticFamily, LatentCode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn family_batch(
        truth: &FitParams<f64>,
        n: usize,
        seed: u64,
    ) -> Vec<SdfSample<f64>> {
        // Exact samples of the transformed family shape.
        let f = AnalyticFamily;
        let g = truth.transform();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let p = Vec3::of(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                );
                let x = g.apply(p); // sample points around the shape
                let u = g.inverse_warp(x).unwrap();
                let phi = g.scale * f.eval(u, &truth.code);
                SdfSample::new(x, phi)
            })
            .collect()
    }

    fn truth_params() -> FitParams<f64> {
        FitParams::new(
            1.4,
            RotationParams::new(0.5, -0.8, 0.9),
            Vec3::of(0.3, -0.6, 0.2),
            LatentCode::from_vec(vec![0.4, -0.2, 0.7, -0.5]),
        )
    }

    #[test]
    fn zero_residual_objective_is_the_prior_alone() {
        let truth = truth_params();
        let batch = family_batch(&truth, 500, 1);
        let loss = objective(&AnalyticFamily, &truth, &batch, 1e-4, None).unwrap();
        let prior = 1e-4 * truth.code.norm_squared();
        assert!(
            (loss - prior).abs() < 1e-9,
            "loss {loss} should equal prior {prior}"
        );
    }

    #[test]
    fn wrong_scale_increases_objective() {
        let truth = truth_params();
        let batch = family_batch(&truth, 500, 2);
        let at_truth = objective(&AnalyticFamily, &truth, &batch, 1e-4, None).unwrap();
        let mut off = truth.clone();
        off.scale *= 2.0;
        let at_off = objective(&AnalyticFamily, &off, &batch, 1e-4, None).unwrap();
        assert!(at_off > at_truth);
    }

    #[test]
    fn single_sample_hand_arithmetic() {
        // Identity transform, z = 0: family value at (0,0,0) is -0.375.
        // With observation phi = -0.3 the residual is |-0.375 + 0.3| = 0.075.
        let params = FitParams::<f64>::identity(4);
        let batch = vec![SdfSample::new(Vec3::zero(), -0.3)];
        let loss: f64 = objective(&AnalyticFamily, &params, &batch, 0.0, None).unwrap();
        assert!((loss - 0.075).abs() < 1e-12, "loss {loss}");
    }

    #[test]
    fn empty_batch_is_an_error() {
        let params = FitParams::identity(4);
        assert!(objective(&AnalyticFamily, &params, &[], 1e-4, None).is_err());
    }

    #[test]
    fn frozen_mask_zeroes_components_exactly() {
        let truth = truth_params();
        let batch = family_batch(&truth, 64, 3);
        let mut init = truth.clone();
        init.scale = 1.1;
        init.rot.theta += 0.3;
        let mut grad = vec![0.0; 11];
        let mask = FrozenMask::known_axis();
        objective_gradient(&AnalyticFamily, &init, &batch, 1e-4, None, &mask, &mut grad).unwrap();
        assert_eq!(grad[1], 0.0);
        assert_eq!(grad[2], 0.0);
        assert!(grad[3] != 0.0, "theta gradient should survive the mask");
    }

    #[test]
    fn translation_gradient_vanishes_at_zero_residuals() {
        let truth = truth_params();
        let batch = family_batch(&truth, 200, 4);
        let mut grad = vec![0.0; 11];
        objective_gradient(
            &AnalyticFamily,
            &truth,
            &batch,
            0.0,
            None,
            &FrozenMask::default(),
            &mut grad,
        )
        .unwrap();
        assert_eq!(&grad[4..7], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2025);
        let h = 1e-6;
        let mut checked = 0;
        let mut attempts = 0;
        'outer: while checked < 60 {
            attempts += 1;
            assert!(
                attempts < 200,
                "only {checked}/60 probes passed in {attempts} attempts; \
                 kink re-draws should be rare"
            );
            let truth = FitParams::new(
                rng.random_range(0.6..1.8),
                RotationParams::new(
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                ),
                Vec3::of(
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                    rng.random_range(-0.5..0.5),
                ),
                LatentCode::from_vec((0..4).map(|_| rng.random_range(-1.0..1.0)).collect()),
            );
            let batch = family_batch(&truth, 48, 1000 + checked as u64);

            // Probe at perturbed parameters so residuals are generically
            // nonzero (and away from the L1 kink).
            let mut probe = truth.clone();
            probe.scale *= rng.random_range(0.85..1.15);
            probe.rot.theta += rng.random_range(-0.2..0.2);
            probe.rot.psi += rng.random_range(-0.1..0.1);
            probe.translation.x += rng.random_range(-0.1..0.1);
            for z in probe.code.iter_mut() {
                *z += rng.random_range(-0.2..0.2);
            }

            let eval = |p: &FitParams<f64>| -> f64 {
                objective(&AnalyticFamily, p, &batch, 1e-4, None).unwrap()
            };

            // Skip probes with residuals near zero (subgradient ambiguity).
            let r = crate::geom::rotation_matrix(probe.rot).transpose();
            for s in &batch {
                let u = r * (s.point - probe.translation) / probe.scale;
                let res = probe.scale * AnalyticFamily.eval(u, &probe.code) - s.distance;
                if res.abs() < 1e-5 {
                    continue 'outer;
                }
            }

            let mut grad = vec![0.0; 11];
            let loss = objective_gradient(
                &AnalyticFamily,
                &probe,
                &batch,
                1e-4,
                None,
                &FrozenMask::default(),
                &mut grad,
            )
            .unwrap();
            assert!((loss - eval(&probe)).abs() < 1e-9);

            let mut flat = vec![0.0; 11];
            probe.write_flat(&mut flat);
            let mut mismatch = false;
            for i in 0..11 {
                let mut plus = probe.clone();
                let mut minus = probe.clone();
                let mut fp = flat.clone();
                let mut fm = flat.clone();
                fp[i] += h;
                fm[i] -= h;
                plus.read_flat(&fp);
                minus.read_flat(&fm);
                let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
                let denom = fd.abs().max(1e-6);
                if (grad[i] - fd).abs() / denom > 1e-4 {
                    mismatch = true;
                    break;
                }
            }
            if mismatch {
                // A family-SDF kink can sit inside the FD stencil; re-draw.
                continue;
            }
            checked += 1;
        }
    }
}
