//! SDF sample generation, surface point sampling, and nearest-neighbor search.

mod io;
mod kdtree;
mod sdf_points;
mod surface;

pub use io::{read_samples_bin, read_samples_csv, write_samples_bin, write_samples_csv};
pub use kdtree::KdTree;
pub use sdf_points::{
    region_for_transform, sample_analytic_sdf, sample_latent_sdf, sample_mesh_sdf,
    sample_transformed_field, FieldSampleCounts, MeshSdfConfig, MeshSdfSamples,
};
pub use surface::sample_surface;

use crate::geom::Vec3;
use crate::real::Real;

/// One SDF observation: a point and the signed distance there (negative
/// inside the shape, same units as the point).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdfSample<R> {
    pub point: Vec3<R>,
    pub distance: R,
}

impl<R: Real> SdfSample<R> {
    pub fn new(point: Vec3<R>, distance: R) -> Self {
        SdfSample { point, distance }
    }

    pub fn is_finite(&self) -> bool {
        self.point.is_finite() && self.distance.is_finite()
    }
}

/// Points sampled from a surface, with optional unit outward normals.
#[derive(Clone, Debug, Default)]
pub struct SurfacePointSet<R> {
    pub points: Vec<Vec3<R>>,
    pub normals: Option<Vec<Vec3<R>>>,
}

impl<R: Real> SurfacePointSet<R> {
    pub fn from_points(points: Vec<Vec3<R>>) -> Self {
        SurfacePointSet { points, normals: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
