//! The optimization loop and the rotation-grid multi-start driver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{RotationParams, Vec3};
use crate::latent::{LatentCode, LatentSdf};
use crate::mesh::extract_shape;
use crate::metrics::{bounding_sphere, f_score_points, FScoreReport};
use crate::real::Real;
use crate::sampling::{sample_surface, SdfSample};
use crate::seed::derive_seed;

use super::{
    objective, objective_gradient, AdamState, FitConfig, FitParams, FitResult, LossSample,
    SCALE_MAX, SCALE_MIN,
};

/// Runs the Adam loop on minibatches drawn uniformly with replacement.
///
/// The loss recorded at iteration `i` is the batch objective of the parameters
/// entering that iteration; the returned parameters are the best-scoring ones
/// seen (including the final iterate, checked on one extra batch). `theta` is
/// wrapped into `[-pi, pi]` on output unless frozen; frozen components pass
/// through bitwise unchanged.
pub fn fit<R: Real>(
    space: &dyn LatentSdf<R>,
    samples: &[SdfSample<R>],
    init: &FitParams<R>,
    cfg: &FitConfig<R>,
) -> Result<FitResult<R>> {
    let start = std::time::Instant::now();
    if samples.is_empty() {
        return Err(Error::EmptyInput("fit samples"));
    }
    space.check_dim(&init.code)?;
    if !init.is_finite() {
        return Err(Error::InvalidParameter("non-finite initial parameters".into()));
    }
    let (smin, smax) = (R::of(SCALE_MIN), R::of(SCALE_MAX));
    if init.scale < smin || init.scale > smax {
        return Err(Error::InvalidParameter(format!(
            "initial scale {} outside [{SCALE_MIN}, {SCALE_MAX}]",
            init.scale
        )));
    }

    let n_flat = init.flat_len();
    let mut flat = vec![R::zero(); n_flat];
    init.write_flat(&mut flat);
    let mut params = init.clone();
    let mut grad = vec![R::zero(); n_flat];
    let mut adam = AdamState::new(n_flat, cfg.beta1, cfg.beta2, cfg.epsilon);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut batch: Vec<SdfSample<R>> = Vec::with_capacity(cfg.batch_size.max(1));

    let draw_batch = |rng: &mut ChaCha8Rng, batch: &mut Vec<SdfSample<R>>| {
        batch.clear();
        for _ in 0..cfg.batch_size.max(1) {
            batch.push(samples[rng.random_range(0..samples.len())]);
        }
    };

    let mut history = Vec::with_capacity(cfg.iterations.max(1));
    let mut best_flat = flat.clone();
    let mut best_loss = R::infinity();

    if cfg.iterations == 0 {
        draw_batch(&mut rng, &mut batch);
        let loss =
            objective(space, &params, &batch, cfg.prior_weight, cfg.clamp_delta)?;
        history.push(LossSample { iteration: 0, loss, learning_rate: cfg.lr_at(0) });
        best_loss = loss;
    }

    let diverged = R::of(1e6);
    for iteration in 0..cfg.iterations {
        draw_batch(&mut rng, &mut batch);
        let lr = cfg.lr_at(iteration);
        let loss = objective_gradient(
            space,
            &params,
            &batch,
            cfg.prior_weight,
            cfg.clamp_delta,
            &cfg.frozen,
            &mut grad,
        )?;
        history.push(LossSample { iteration, loss, learning_rate: lr });
        if loss > diverged {
            return Err(Error::Diverged { iteration, loss: loss.as_f64() });
        }
        if loss < best_loss {
            best_loss = loss;
            best_flat.copy_from_slice(&flat);
        }

        adam.step(&mut flat, &grad, lr)?;
        // Projection onto the feasible scale interval.
        flat[0] = flat[0].max(smin).min(smax);
        params.read_flat(&flat);
    }

    if cfg.iterations > 0 {
        // The final iterate never had its loss recorded; give it a chance.
        draw_batch(&mut rng, &mut batch);
        let loss = objective(space, &params, &batch, cfg.prior_weight, cfg.clamp_delta)?;
        if loss < best_loss {
            best_loss = loss;
            best_flat.copy_from_slice(&flat);
        }
    }

    let mut best = init.clone();
    best.read_flat(&best_flat);
    if !cfg.frozen.theta {
        best.rot = best.rot.wrapped();
    }

    let mesh = match &cfg.meshing {
        Some(grid) => Some(extract_shape(space, &best.code, &best.transform(), grid)?),
        None => None,
    };

    Ok(FitResult {
        final_objective: best_loss,
        params: best,
        history,
        mesh,
        duration: start.elapsed(),
    })
}

/// Partial initialization for the rotation-grid driver: everything except the
/// rotation angle.
#[derive(Clone, Debug)]
pub struct PartialInit<R> {
    /// Initial scale (bounding-sphere radius of the query).
    pub scale: R,
    /// Initial translation (bounding-sphere center of the query).
    pub translation: Vec3<R>,
    /// Known or estimated rotation axis (unit).
    pub axis: Vec3<R>,
    /// Initial latent code.
    pub code: LatentCode<R>,
}

/// One rotation-grid start and its outcome.
#[derive(Clone, Debug)]
pub struct GridCandidate<R> {
    pub theta0: R,
    pub score: FScoreReport<R>,
    pub result: FitResult<R>,
}

/// All grid starts (kept for later analysis) plus the winner's index.
#[derive(Clone, Debug)]
pub struct ThetaGridResult<R> {
    pub candidates: Vec<GridCandidate<R>>,
    pub best_index: usize,
}

impl<R: Real> ThetaGridResult<R> {
    pub fn best(&self) -> &GridCandidate<R> {
        &self.candidates[self.best_index]
    }

    pub fn into_best(mut self) -> FitResult<R> {
        self.candidates.swap_remove(self.best_index).result
    }
}

/// Multi-start driver over the rotation angle: runs one fit per `theta0` on a
/// uniform grid over `[0, 2 pi)` and keeps the result scoring the highest
/// F-score against the query's surface points (threshold `0.05 r`, `r` from
/// those same points — the only reference available at query time).
///
/// Grid fits run in parallel; each start derives its own batch seed, and
/// candidates are collected by grid index, so results do not depend on the
/// worker count. Ties prefer the lower grid index.
pub fn fit_with_theta_grid<R: Real>(
    space: &dyn LatentSdf<R>,
    samples: &[SdfSample<R>],
    surface: &[Vec3<R>],
    init: &PartialInit<R>,
    cfg: &FitConfig<R>,
    grid_step: R,
) -> Result<ThetaGridResult<R>> {
    if surface.is_empty() {
        return Err(Error::EmptyInput("query surface points"));
    }
    if cfg.meshing.is_none() {
        return Err(Error::InvalidParameter(
            "rotation-grid driver needs meshing enabled to score candidates".into(),
        ));
    }
    if !(grid_step > R::zero()) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {grid_step}")));
    }
    let tau = R::of(std::f64::consts::TAU);
    let n_starts = (tau / grid_step).round().as_f64() as usize;
    if n_starts == 0 {
        return Err(Error::InvalidParameter("grid step exceeds the full circle".into()));
    }

    let eps = bounding_sphere(surface)?.radius * R::of(0.05);
    let axis_rot = RotationParams::from_axis(init.axis.normalized());

    let candidates: Vec<Result<GridCandidate<R>>> = (0..n_starts)
        .into_par_iter()
        .map(|k| {
            let theta0 = grid_step * R::of(k as f64);
            let start = FitParams::new(
                init.scale,
                RotationParams::new(axis_rot.psi, axis_rot.rho, theta0),
                init.translation,
                init.code.clone(),
            );
            let mut cfg_k = cfg.clone();
            cfg_k.seed = derive_seed(cfg.seed, k as u64);
            let result = fit(space, samples, &start, &cfg_k)?;
            let mesh = result.mesh.as_ref().expect("meshing enabled");
            // Match the reference density so the score is not floored by
            // point-sampling sparsity.
            let n_est = surface.len().max(3000);
            let est = sample_surface(mesh, n_est, derive_seed(cfg.seed, 0x5106 + k as u64))?;
            let score = f_score_points(&est.points, surface, eps)?;
            Ok(GridCandidate { theta0, score, result })
        })
        .collect();

    let mut out = Vec::with_capacity(n_starts);
    for c in candidates {
        out.push(c?);
    }
    let mut best_index = 0;
    for (i, c) in out.iter().enumerate() {
        if c.score.f > out[best_index].score.f {
            best_index = i;
        }
    }
    Ok(ThetaGridResult { candidates: out, best_index })
}
