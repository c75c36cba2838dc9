//! Differentiable shape spaces: a latent code decodes, through a backend, to
//! an SDF over the canonical frame.
//!
//! Two backends implement the common [`LatentSdf`] interface: an exactly
//! differentiable parametric family ([`AnalyticFamily`]) used to exercise the
//! optimizer without any training, and a small MLP auto-decoder
//! ([`MlpDecoder`]) with hand-written forward and backward passes plus a
//! training routine.

mod checkpoint;
mod family;
mod mlp;
mod reconstruct;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use family::AnalyticFamily;
pub use mlp::{Activation, BatchAccumulator, DenseLayer, MlpDecoder, MlpGradients, MlpScratch};
pub use reconstruct::reconstruct_latent;
pub use train::{train_autodecoder, TrainConfig, TrainReport};

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::real::Real;
use crate::sampling::SdfSample;

/// Latent vector identifying a shape in the learned space.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentCode<R>(Vec<R>);

impl<R: Real> LatentCode<R> {
    pub fn zeros(dim: usize) -> Self {
        LatentCode(vec![R::zero(); dim])
    }

    pub fn from_vec(v: Vec<R>) -> Self {
        LatentCode(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm_squared(&self) -> R {
        self.0.iter().map(|&v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_vec(self) -> Vec<R> {
        self.0
    }
}

impl<R> Deref for LatentCode<R> {
    type Target = [R];
    fn deref(&self) -> &[R] {
        &self.0
    }
}

impl<R> DerefMut for LatentCode<R> {
    fn deref_mut(&mut self) -> &mut [R] {
        &mut self.0
    }
}

/// A differentiable latent shape space: `eval` produces the signed distance
/// of the shape coded by `z` at canonical-frame point `x`, and `eval_grad`
/// additionally produces the partials with respect to `x` and `z`.
///
/// Contract shared by every backend: the gradients must agree with central
/// finite differences of `eval` to a relative error below `1e-4`.
pub trait LatentSdf<R: Real>: Send + Sync {
    /// Latent dimension `d`.
    fn dim(&self) -> usize;

    /// Signed distance at `x` for code `z` (`z.len() == dim()`).
    fn eval(&self, x: Vec3<R>, z: &[R]) -> R;

    /// Evaluates the field and writes `d phi / d z` into `dz` (length
    /// `dim()`); returns `(phi, d phi / d x)`.
    fn eval_grad(&self, x: Vec3<R>, z: &[R], dz: &mut [R]) -> (R, Vec3<R>);

    /// Convenience allocating form of [`LatentSdf::eval_grad`].
    fn grad(&self, x: Vec3<R>, z: &[R]) -> (Vec3<R>, Vec<R>) {
        let mut dz = vec![R::zero(); self.dim()];
        let (_, dx) = self.eval_grad(x, z, &mut dz);
        (dx, dz)
    }

    fn check_dim(&self, z: &[R]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: z.len() });
        }
        Ok(())
    }
}

/// A shape with its SDF samples and (once trained) its latent code.
#[derive(Clone, Debug)]
pub struct LibraryEntry<R> {
    pub id: String,
    pub samples: Vec<SdfSample<R>>,
    pub code: LatentCode<R>,
}

/// The training dataset: one latent code per shape, all codes sharing the
/// configured dimension.
#[derive(Clone, Debug)]
pub struct ShapeLibrary<R> {
    pub dim: usize,
    pub entries: Vec<LibraryEntry<R>>,
}

impl<R: Real> ShapeLibrary<R> {
    pub fn new(dim: usize) -> Self {
        ShapeLibrary { dim, entries: Vec::new() }
    }

    pub fn push(&mut self, id: impl Into<String>, samples: Vec<SdfSample<R>>) {
        self.entries.push(LibraryEntry {
            id: id.into(),
            samples,
            code: LatentCode::zeros(self.dim),
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
