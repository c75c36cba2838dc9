//! SDF sample-set generation from meshes and from exact fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{transformed_sdf, AnalyticShape, SimilarityTransform, Vec3};
use crate::latent::LatentSdf;
use crate::mesh::TriangleMesh;
use crate::real::Real;

use super::{sample_surface, KdTree, SdfSample};

/// Knobs for [`sample_mesh_sdf`]. Offsets and the freespace band are in the
/// same units as the mesh coordinates.
#[derive(Clone, Copy, Debug)]
pub struct MeshSdfConfig {
    /// Number of near-surface sample pairs (each pair contributes the +offset
    /// and -offset point).
    pub near_pairs: usize,
    /// Signed-distance magnitude assigned to near-surface points.
    pub near_offset: f64,
    /// Number of freespace samples.
    pub freespace: usize,
    /// Freespace offsets are drawn uniformly from this band along the normal.
    pub freespace_band: (f64, f64),
    /// Size of the dense surface sampling backing the k-d tree.
    pub dense_surface: usize,
    pub seed: u64,
}

impl Default for MeshSdfConfig {
    fn default() -> Self {
        MeshSdfConfig {
            near_pairs: 25_000,
            near_offset: 0.01,
            freespace: 25_000,
            freespace_band: (0.07, 0.20),
            dense_surface: 100_000,
            seed: 0,
        }
    }
}

/// Result of [`sample_mesh_sdf`] plus a winding diagnostic.
#[derive(Clone, Debug)]
pub struct MeshSdfSamples<R> {
    pub samples: Vec<SdfSample<R>>,
    /// Fraction of freespace samples that came out negative; a large value
    /// indicates inconsistent outward normals in the input mesh.
    pub negative_freespace_fraction: f64,
}

impl<R> MeshSdfSamples<R> {
    /// More than 10% negatively-signed freespace samples suggests bad winding.
    pub fn winding_suspect(&self) -> bool {
        self.negative_freespace_fraction > 0.10
    }
}

/// Samples an SDF from a triangle mesh with consistent outward normals.
///
/// Near-surface points sit at +/- `near_offset` along the local normal and are
/// assigned exactly that signed distance. Freespace points are offset along
/// the outward normal by a distance drawn from `freespace_band`; their
/// magnitude is the nearest-neighbor distance to a dense surface sampling
/// (k-d tree) and their sign comes from the normal-direction test at that
/// nearest neighbor.
pub fn sample_mesh_sdf<R: Real>(
    mesh: &TriangleMesh<R>,
    cfg: &MeshSdfConfig,
) -> Result<MeshSdfSamples<R>> {
    let dense = sample_surface(mesh, cfg.dense_surface, cfg.seed ^ 0x5f5f)?;
    let dense_normals = dense.normals.as_ref().expect("surface sampler emits normals");
    let tree = KdTree::build(&dense.points)?;

    let mut samples = Vec::with_capacity(cfg.near_pairs * 2 + cfg.freespace);

    let near = sample_surface(mesh, cfg.near_pairs, cfg.seed ^ 0xa0a0)?;
    let near_normals = near.normals.as_ref().unwrap();
    let off = R::of(cfg.near_offset);
    for (p, n) in near.points.iter().zip(near_normals) {
        samples.push(SdfSample::new(*p + *n * off, off));
        samples.push(SdfSample::new(*p - *n * off, -off));
    }

    let free = sample_surface(mesh, cfg.freespace, cfg.seed ^ 0x0f0f)?;
    let free_normals = free.normals.as_ref().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf00d);
    let mut negative = 0usize;
    for (p, n) in free.points.iter().zip(free_normals) {
        let dist = R::of(rng.random_range(cfg.freespace_band.0..cfg.freespace_band.1));
        let q = *p + *n * dist;
        let (nn, d) = tree.nearest(q);
        let outward = (q - dense.points[nn]).dot(dense_normals[nn]) >= R::zero();
        let phi = if outward { d } else { -d };
        if !outward {
            negative += 1;
        }
        samples.push(SdfSample::new(q, phi));
    }

    Ok(MeshSdfSamples {
        samples,
        negative_freespace_fraction: if cfg.freespace == 0 {
            0.0
        } else {
            negative as f64 / cfg.freespace as f64
        },
    })
}

/// How many samples of each kind an exact-field sampler produces.
#[derive(Clone, Copy, Debug)]
pub struct FieldSampleCounts {
    /// Points projected onto the surface and re-offset by a small amount.
    pub near_surface: usize,
    /// Points drawn uniformly over the region box.
    pub uniform: usize,
    pub seed: u64,
}

impl Default for FieldSampleCounts {
    fn default() -> Self {
        FieldSampleCounts { near_surface: 20_000, uniform: 10_000, seed: 0 }
    }
}

/// Exact SDF samples of an arbitrary field over an axis-aligned region box.
///
/// Near-surface points are found by projecting region points along the field
/// gradient (finite differences; the assigned value is exact regardless) and
/// nudging them off the surface by up to ~0.015 units. Errors when the region
/// shows no sign change anywhere.
pub fn sample_transformed_field<R, F>(
    field: F,
    region_min: Vec3<R>,
    region_max: Vec3<R>,
    counts: &FieldSampleCounts,
) -> Result<Vec<SdfSample<R>>>
where
    R: Real,
    F: Fn(Vec3<R>) -> R,
{
    let mut rng = ChaCha8Rng::seed_from_u64(counts.seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec3<R> {
        Vec3::new(
            R::of(rng.random_range(region_min.x.as_f64()..region_max.x.as_f64())),
            R::of(rng.random_range(region_min.y.as_f64()..region_max.y.as_f64())),
            R::of(rng.random_range(region_min.z.as_f64()..region_max.z.as_f64())),
        )
    };

    let mut samples = Vec::with_capacity(counts.near_surface + counts.uniform);
    let mut any_negative = false;
    let mut any_positive = false;

    for _ in 0..counts.uniform {
        let p = draw(&mut rng);
        let phi = field(p);
        any_negative |= phi < R::zero();
        any_positive |= phi > R::zero();
        samples.push(SdfSample::new(p, phi));
    }

    // Projection scale: finite-difference step proportional to the region.
    let extent = (region_max - region_min).norm();
    let h = extent * R::of(1e-6);
    let gradient = |p: Vec3<R>| -> Vec3<R> {
        let two_h = h + h;
        Vec3::new(
            (field(Vec3::new(p.x + h, p.y, p.z)) - field(Vec3::new(p.x - h, p.y, p.z))) / two_h,
            (field(Vec3::new(p.x, p.y + h, p.z)) - field(Vec3::new(p.x, p.y - h, p.z))) / two_h,
            (field(Vec3::new(p.x, p.y, p.z + h)) - field(Vec3::new(p.x, p.y, p.z - h))) / two_h,
        )
    };

    let mut produced = 0usize;
    let mut attempts = 0usize;
    let max_attempts = counts.near_surface.saturating_mul(20).max(1000);
    while produced < counts.near_surface && attempts < max_attempts {
        attempts += 1;
        let mut p = draw(&mut rng);
        // Newton projection along the gradient toward the zero set.
        let mut ok = false;
        for _ in 0..12 {
            let phi = field(p);
            if phi.abs() < extent * R::of(1e-7) {
                ok = true;
                break;
            }
            let g = gradient(p);
            let g2 = g.norm_squared();
            if g2 < R::of(1e-12) {
                break;
            }
            p = p - g * (phi / g2);
            ok = phi.abs() < extent * R::of(1e-4);
        }
        if !ok || !p.is_finite() {
            continue;
        }
        let g = gradient(p).normalized();
        let delta = R::of(rng.random_range(-0.015..0.015));
        let q = p + g * delta;
        let phi = field(q);
        any_negative |= phi < R::zero();
        any_positive |= phi > R::zero();
        samples.push(SdfSample::new(q, phi));
        produced += 1;
    }

    if !(any_negative && any_positive) {
        return Err(Error::Degenerate(
            "sampling region shows no sign change; shape not inside region".into(),
        ));
    }
    if produced < counts.near_surface {
        return Err(Error::Degenerate(format!(
            "surface projection kept failing: {produced}/{} near-surface samples",
            counts.near_surface
        )));
    }
    Ok(samples)
}

/// Exact samples of a similarity-transformed analytic shape.
pub fn sample_analytic_sdf<R: Real>(
    shape: &AnalyticShape<R>,
    g: &SimilarityTransform<R>,
    region_min: Vec3<R>,
    region_max: Vec3<R>,
    counts: &FieldSampleCounts,
) -> Result<Vec<SdfSample<R>>> {
    sample_transformed_field(
        |x| transformed_sdf(shape, g, x).expect("positive scale"),
        region_min,
        region_max,
        counts,
    )
}

/// Exact samples of a similarity-transformed latent shape.
pub fn sample_latent_sdf<R: Real>(
    space: &dyn LatentSdf<R>,
    z: &[R],
    g: &SimilarityTransform<R>,
    region_min: Vec3<R>,
    region_max: Vec3<R>,
    counts: &FieldSampleCounts,
) -> Result<Vec<SdfSample<R>>> {
    space.check_dim(z)?;
    sample_transformed_field(
        |x| {
            let u = g.inverse_warp(x).expect("positive scale");
            g.scale * space.eval(u, z)
        },
        region_min,
        region_max,
        counts,
    )
}

/// Region box that surely contains the transformed shape: the transformed
/// bounding sphere padded by `margin` (canonical units).
pub fn region_for_transform<R: Real>(
    canonical_radius: R,
    g: &SimilarityTransform<R>,
    margin: R,
) -> (Vec3<R>, Vec3<R>) {
    let r = g.scale * (canonical_radius + margin);
    (g.translation - Vec3::splat(r), g.translation + Vec3::splat(r))
}
