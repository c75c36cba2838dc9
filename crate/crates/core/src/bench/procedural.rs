//! Procedural canonical shape sets for training and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geom::{AnalyticShape, Vec3};
use crate::latent::ShapeLibrary;
use crate::real::Real;
use crate::seed::derive_seed;

/// Deterministic set of canonical-frame shapes cycling through spheres,
/// rounded boxes, capsules, and two-primitive unions; every shape fits inside
/// the unit sphere.
pub fn procedural_shapes<R: Real>(n: usize, seed: u64) -> Vec<(String, AnalyticShape<R>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let shape: AnalyticShape<R> = match i % 4 {
            0 => AnalyticShape::sphere(rng.random_range(0.35..0.6)),
            1 => AnalyticShape::rounded_box(
                [
                    rng.random_range(0.2..0.45),
                    rng.random_range(0.2..0.45),
                    rng.random_range(0.2..0.45),
                ],
                rng.random_range(0.04..0.1),
            ),
            2 => {
                let half = rng.random_range(0.25..0.45);
                let dir = match i % 3 {
                    0 => [half, 0.0, 0.0],
                    1 => [0.0, half, 0.0],
                    _ => [0.0, 0.0, half],
                };
                AnalyticShape::capsule(
                    [-dir[0], -dir[1], -dir[2]],
                    dir,
                    rng.random_range(0.12..0.2),
                )
            }
            _ => {
                let r = rng.random_range(0.2..0.3);
                let off = rng.random_range(0.15..0.3);
                AnalyticShape::union(
                    AnalyticShape::sphere(r),
                    AnalyticShape::capsule([0.0, 0.0, 0.0], [0.0, 0.0, off + 0.2], r * 0.6),
                )
            }
        };
        debug_assert!(shape.bounding_radius() <= R::of(1.0));
        out.push((format!("shape-{i:03}"), shape));
    }
    out
}

/// Exact SDF sample sets for each shape, ready for auto-decoder training.
///
/// Supervision concentrates in a shell around each surface at two offset
/// scales (sigma 0.05 and 0.005 along random directions), with a uniform
/// sprinkle over the canonical box; every value is the exact signed distance.
/// A thin single-scale shell leaves the field free to flatten right outside
/// it, which moves the decoded zero set badly.
pub fn build_library<R: Real>(
    shapes: &[(String, AnalyticShape<R>)],
    dim: usize,
    samples_per_shape: usize,
    seed: u64,
) -> Result<ShapeLibrary<R>> {
    use crate::sampling::SdfSample;
    use rand_distr::StandardNormal;

    // Half shell, half uniform: the uniform half carries the coarse
    // inside/outside signal that bootstraps training; the shell half sharpens
    // the zero set.
    let shell_fraction: f64 = 0.5;
    let mut library = ShapeLibrary::new(dim);
    for (i, (id, shape)) in shapes.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let n_shell = (samples_per_shape as f64 * shell_fraction) as usize;
        let n_uniform = samples_per_shape - n_shell;
        let mut samples: Vec<SdfSample<R>> = Vec::with_capacity(samples_per_shape);

        // Rejection-project random box points onto the surface, then offset.
        let mut produced = 0usize;
        let mut guard = 0usize;
        while produced < n_shell {
            guard += 1;
            assert!(guard < n_shell * 30, "surface projection kept failing");
            let mut p: Vec3<R> = Vec3::of(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            // March along the field toward the zero set (exact SDF, so a few
            // full steps land on it away from skeleton points).
            let mut ok = false;
            for _ in 0..16 {
                let d = shape.sdf(p);
                if d.abs() < R::of(1e-4) {
                    ok = true;
                    break;
                }
                let g = field_gradient(shape, p);
                let g2 = g.norm_squared();
                if g2 < R::of(1e-8) {
                    break;
                }
                p = p - g * (d / g2);
            }
            if !ok || !p.is_finite() || p.norm() > R::of(1.1) {
                continue;
            }
            let sigma = if produced % 2 == 0 { 0.05 } else { 0.005 };
            let n: f64 = rng.sample(StandardNormal);
            let dir = field_gradient(shape, p).normalized();
            let q = p + dir * R::of(n * sigma);
            samples.push(SdfSample::new(q, shape.sdf(q)));
            produced += 1;
        }
        for _ in 0..n_uniform {
            let p: Vec3<R> = Vec3::of(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            samples.push(SdfSample::new(p, shape.sdf(p)));
        }
        library.push(id.clone(), samples);
    }
    Ok(library)
}

fn field_gradient<R: Real>(shape: &AnalyticShape<R>, p: Vec3<R>) -> Vec3<R> {
    let h = R::of(1e-5);
    let two_h = h + h;
    Vec3::new(
        (shape.sdf(Vec3::new(p.x + h, p.y, p.z)) - shape.sdf(Vec3::new(p.x - h, p.y, p.z))) / two_h,
        (shape.sdf(Vec3::new(p.x, p.y + h, p.z)) - shape.sdf(Vec3::new(p.x, p.y - h, p.z))) / two_h,
        (shape.sdf(Vec3::new(p.x, p.y, p.z + h)) - shape.sdf(Vec3::new(p.x, p.y, p.z - h))) / two_h,
    )
}
