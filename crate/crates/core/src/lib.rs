//! Joint shape and similarity-transform estimation over latent signed-distance
//! fields.
//!
//! Given signed-distance samples of a query object, this crate recovers both a
//! shape (a latent code in a differentiable SDF shape space) and the similarity
//! transform (isotropic scale, rotation, translation) that map the canonical
//! shape onto the query. It also bundles the machinery needed to evaluate such
//! a fit end to end: SDF sampling, marching-cubes extraction, F-score metrics,
//! a classical retrieve-then-register baseline, benchmark drivers, and a
//! compact latent+matrix serialization.
//!
//! All math is generic over the scalar type through [`Real`]; `f64` is the
//! working precision of the CLI and benchmarks.

pub mod baseline;
pub mod bench;
pub mod error;
pub mod fit;
pub mod geom;
pub mod latent;
pub mod mesh;
pub mod metrics;
pub mod real;
pub mod sampling;
pub mod seed;

pub use error::{Error, Result};
pub use real::Real;

/// Concrete aliases for the two supported scalar types.
pub type Vec3f = geom::Vec3<f32>;
pub type Vec3d = geom::Vec3<f64>;
pub type Mat3f = geom::Mat3<f32>;
pub type Mat3d = geom::Mat3<f64>;
