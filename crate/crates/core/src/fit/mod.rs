//! Joint estimation of shape code and similarity transform from SDF samples.
//!
//! The decision variables are `(s, psi, rho, theta, t, z)`; the objective is
//! the L1 data term over a sample batch
//! `sum_i | s * f(R^T (x_i - t) / s, z) - phi_i |` plus a small squared-norm
//! penalty on `z`. Everything is optimized with Adam under the schedule and
//! scale clamp described in [`FitConfig`], optionally holding parameter groups
//! fixed (a known rotation axis freezes `psi` and `rho`).

mod adam;
mod driver;
mod objective;

pub use adam::AdamState;
pub use driver::{fit, fit_with_theta_grid, GridCandidate, PartialInit, ThetaGridResult};
pub use objective::{objective, objective_gradient};

use crate::geom::{RotationParams, SimilarityTransform, Vec3};
use crate::latent::LatentCode;
use crate::mesh::{GridSpec, TriangleMesh};
use crate::real::Real;

/// Lower scale clamp applied after every optimizer step.
pub const SCALE_MIN: f64 = 0.01;
/// Upper scale clamp applied after every optimizer step.
pub const SCALE_MAX: f64 = 10.0;

/// Decision variables of one fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitParams<R> {
    pub scale: R,
    pub rot: RotationParams<R>,
    pub translation: Vec3<R>,
    pub code: LatentCode<R>,
}

impl<R: Real> FitParams<R> {
    pub fn new(
        scale: R,
        rot: RotationParams<R>,
        translation: Vec3<R>,
        code: LatentCode<R>,
    ) -> Self {
        FitParams { scale, rot, translation, code }
    }

    pub fn identity(dim: usize) -> Self {
        FitParams {
            scale: R::one(),
            rot: RotationParams::identity(),
            translation: Vec3::zero(),
            code: LatentCode::zeros(dim),
        }
    }

    pub fn transform(&self) -> SimilarityTransform<R> {
        SimilarityTransform::new(self.scale, self.rot, self.translation)
    }

    /// Number of flat parameters: `7 + d`.
    pub fn flat_len(&self) -> usize {
        7 + self.code.dim()
    }

    /// Layout: `[s, psi, rho, theta, tx, ty, tz, z_0 .. z_{d-1}]`.
    pub fn write_flat(&self, out: &mut [R]) {
        out[0] = self.scale;
        out[1] = self.rot.psi;
        out[2] = self.rot.rho;
        out[3] = self.rot.theta;
        out[4] = self.translation.x;
        out[5] = self.translation.y;
        out[6] = self.translation.z;
        out[7..].copy_from_slice(&self.code);
    }

    pub fn read_flat(&mut self, flat: &[R]) {
        self.scale = flat[0];
        self.rot = RotationParams::new(flat[1], flat[2], flat[3]);
        self.translation = Vec3::new(flat[4], flat[5], flat[6]);
        self.code.copy_from_slice(&flat[7..]);
    }

    pub fn is_finite(&self) -> bool {
        self.scale.is_finite()
            && self.rot.is_finite()
            && self.translation.is_finite()
            && self.code.is_finite()
    }
}

/// Which parameter groups stay fixed during optimization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrozenMask {
    pub scale: bool,
    pub psi: bool,
    pub rho: bool,
    pub theta: bool,
    pub translation: bool,
    pub code: bool,
}

impl FrozenMask {
    /// Known rotation axis: `psi` and `rho` fixed, everything else free.
    pub fn known_axis() -> Self {
        FrozenMask { psi: true, rho: true, ..Default::default() }
    }

    /// Latent-only fitting: canonical pose, only `z` moves.
    pub fn code_only() -> Self {
        FrozenMask {
            scale: true,
            psi: true,
            rho: true,
            theta: true,
            translation: true,
            code: false,
        }
    }

    /// Zeroes the masked components of a flat gradient.
    pub fn apply<R: Real>(&self, grad: &mut [R]) {
        let z = R::zero();
        if self.scale {
            grad[0] = z;
        }
        if self.psi {
            grad[1] = z;
        }
        if self.rho {
            grad[2] = z;
        }
        if self.theta {
            grad[3] = z;
        }
        if self.translation {
            grad[4] = z;
            grad[5] = z;
            grad[6] = z;
        }
        if self.code {
            for g in &mut grad[7..] {
                *g = z;
            }
        }
    }
}

/// Optimizer settings. Defaults: 800 iterations of batches of 8000, learning
/// rate 0.05 divided by 5 every 400 iterations, Adam `(0.9, 0.999, 1e-8)`,
/// latent prior weight `1e-4`.
#[derive(Clone, Debug)]
pub struct FitConfig<R> {
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: R,
    pub decay_factor: R,
    pub decay_interval: usize,
    pub beta1: R,
    pub beta2: R,
    pub epsilon: R,
    pub prior_weight: R,
    /// When set, both predicted and observed distances are clamped to
    /// `[-delta, delta]` inside the data term (off by default).
    pub clamp_delta: Option<R>,
    pub frozen: FrozenMask,
    pub seed: u64,
    /// Grid for the final mesh extraction; `None` disables meshing.
    pub meshing: Option<GridSpec<R>>,
}

impl<R: Real> Default for FitConfig<R> {
    fn default() -> Self {
        FitConfig {
            iterations: 800,
            batch_size: 8000,
            learning_rate: R::of(0.05),
            decay_factor: R::of(5.0),
            decay_interval: 400,
            beta1: R::of(0.9),
            beta2: R::of(0.999),
            epsilon: R::of(1e-8),
            prior_weight: R::of(1e-4),
            clamp_delta: None,
            frozen: FrozenMask::default(),
            seed: 0,
            meshing: Some(GridSpec::default()),
        }
    }
}

impl<R: Real> FitConfig<R> {
    /// Learning rate in effect at a given iteration.
    pub fn lr_at(&self, iteration: usize) -> R {
        let steps = (iteration / self.decay_interval.max(1)) as i32;
        self.learning_rate / self.decay_factor.powi(steps)
    }
}

/// Outcome of one fit: the best parameters seen, the loss trace, and the
/// extracted mesh (canonical decode mapped by the fitted transform).
#[derive(Clone, Debug)]
pub struct FitResult<R> {
    pub params: FitParams<R>,
    pub final_objective: R,
    /// Batch objective at the parameters held entering each iteration.
    pub history: Vec<LossSample<R>>,
    pub mesh: Option<TriangleMesh<R>>,
    pub duration: std::time::Duration,
}

#[derive(Clone, Copy, Debug)]
pub struct LossSample<R> {
    pub iteration: usize,
    pub loss: R,
    pub learning_rate: R,
}
