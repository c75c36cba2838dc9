//! Analytic signed-distance primitives used as ground truth throughout the
//! test and benchmark suites.

use crate::real::Real;

use super::Vec3;

/// Closed-form shapes with known SDFs, defined in the canonical frame.
///
/// The union variant takes the pointwise `min` of its members, which is the
/// exact signed distance everywhere outside and only a lower bound inside
/// overlap regions; fitting and training samples are drawn near surfaces and
/// in freespace, where the bound is tight.
#[derive(Clone, Debug)]
pub enum AnalyticShape<R> {
    Sphere { radius: R },
    RoundedBox { half_extents: Vec3<R>, radius: R },
    Capsule { a: Vec3<R>, b: Vec3<R>, radius: R },
    Union(Box<AnalyticShape<R>>, Box<AnalyticShape<R>>),
}

impl<R: Real> AnalyticShape<R> {
    pub fn sphere(radius: f64) -> Self {
        assert!(radius > 0.0, "sphere radius must be positive");
        AnalyticShape::Sphere { radius: R::of(radius) }
    }

    pub fn rounded_box(half_extents: [f64; 3], radius: f64) -> Self {
        assert!(
            half_extents.iter().all(|&h| h > 0.0) && radius > 0.0,
            "rounded box dimensions must be positive"
        );
        AnalyticShape::RoundedBox {
            half_extents: Vec3::of(half_extents[0], half_extents[1], half_extents[2]),
            radius: R::of(radius),
        }
    }

    pub fn capsule(a: [f64; 3], b: [f64; 3], radius: f64) -> Self {
        assert!(radius > 0.0, "capsule radius must be positive");
        AnalyticShape::Capsule {
            a: Vec3::of(a[0], a[1], a[2]),
            b: Vec3::of(b[0], b[1], b[2]),
            radius: R::of(radius),
        }
    }

    pub fn union(a: AnalyticShape<R>, b: AnalyticShape<R>) -> Self {
        AnalyticShape::Union(Box::new(a), Box::new(b))
    }

    /// Signed distance at `x`; negative inside.
    pub fn sdf(&self, x: Vec3<R>) -> R {
        match self {
            AnalyticShape::Sphere { radius } => x.norm() - *radius,
            AnalyticShape::RoundedBox { half_extents, radius } => {
                rounded_box_sdf(x, *half_extents, *radius)
            }
            AnalyticShape::Capsule { a, b, radius } => {
                let ab = *b - *a;
                let denom = ab.norm_squared().max(R::of(1e-30));
                let t = ((x - *a).dot(ab) / denom).min(R::one()).max(R::zero());
                (x - (*a + ab * t)).norm() - *radius
            }
            AnalyticShape::Union(a, b) => a.sdf(x).min(b.sdf(x)),
        }
    }

    /// Radius of a sphere at the origin guaranteed to contain the shape.
    pub fn bounding_radius(&self) -> R {
        match self {
            AnalyticShape::Sphere { radius } => *radius,
            AnalyticShape::RoundedBox { half_extents, radius } => {
                half_extents.norm() + *radius
            }
            AnalyticShape::Capsule { a, b, radius } => a.norm().max(b.norm()) + *radius,
            AnalyticShape::Union(a, b) => a.bounding_radius().max(b.bounding_radius()),
        }
    }
}

/// Exact rounded-box SDF: box of half extents `h` with edges rounded by `r`,
/// so the surface passes `h + r` from the origin along each axis.
pub fn rounded_box_sdf<R: Real>(x: Vec3<R>, h: Vec3<R>, r: R) -> R {
    let q = x.abs() - h;
    let outside = q.max_scalar(R::zero()).norm();
    let inside = q.max_component().min(R::zero());
    outside + inside - r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{transformed_sdf, RotationParams, SimilarityTransform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_point(rng: &mut ChaCha8Rng, r: f64) -> Vec3<f64> {
        Vec3::of(
            rng.random_range(-r..r),
            rng.random_range(-r..r),
            rng.random_range(-r..r),
        )
    }

    fn rand_unit(rng: &mut ChaCha8Rng) -> Vec3<f64> {
        loop {
            let v = rand_point(rng, 1.0);
            let n = v.norm();
            if n > 1e-3 && n <= 1.0 {
                return v / n;
            }
        }
    }

    /// Dense, independent sampling of a rounded-box surface via its Minkowski
    /// construction: pick a point `q` on the inner box boundary and a unit
    /// direction `n` inside the normal cone of `q`; then `q + r n` lies on the
    /// rounded surface. Faces, rounded edges, and corner caps are all covered.
    fn rounded_box_surface(n: usize, h: Vec3<f64>, r: f64, seed: u64) -> Vec<Vec3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::with_capacity(n);
        let sign = |rng: &mut ChaCha8Rng| if rng.random::<bool>() { 1.0 } else { -1.0 };
        while pts.len() < n {
            let kind = rng.random_range(0..10usize);
            let (q, normal) = if kind < 5 {
                // Face interior: normal is the axis direction.
                let axis = rng.random_range(0..3usize);
                let s = sign(&mut rng);
                let u = rng.random_range(-1.0..1.0);
                let v = rng.random_range(-1.0..1.0);
                match axis {
                    0 => (Vec3::of(s * h.x, u * h.y, v * h.z), Vec3::of(s, 0.0, 0.0)),
                    1 => (Vec3::of(u * h.x, s * h.y, v * h.z), Vec3::of(0.0, s, 0.0)),
                    _ => (Vec3::of(u * h.x, v * h.y, s * h.z), Vec3::of(0.0, 0.0, s)),
                }
            } else if kind < 9 {
                // Edge: two coordinates pinned, normal in the quarter circle
                // spanned by the two face normals.
                let free = rng.random_range(0..3usize);
                let s1 = sign(&mut rng);
                let s2 = sign(&mut rng);
                let u = rng.random_range(-1.0..1.0);
                let a = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
                let (c, s) = (a.cos(), a.sin());
                match free {
                    0 => (
                        Vec3::of(u * h.x, s1 * h.y, s2 * h.z),
                        Vec3::of(0.0, s1 * c, s2 * s),
                    ),
                    1 => (
                        Vec3::of(s1 * h.x, u * h.y, s2 * h.z),
                        Vec3::of(s1 * c, 0.0, s2 * s),
                    ),
                    _ => (
                        Vec3::of(s1 * h.x, s2 * h.y, u * h.z),
                        Vec3::of(s1 * c, s2 * s, 0.0),
                    ),
                }
            } else {
                // Corner: normal anywhere in the octant cone.
                let sx = sign(&mut rng);
                let sy = sign(&mut rng);
                let sz = sign(&mut rng);
                let d = rand_unit(&mut rng).abs();
                (
                    Vec3::of(sx * h.x, sy * h.y, sz * h.z),
                    Vec3::of(sx * d.x, sy * d.y, sz * d.z),
                )
            };
            pts.push(q + normal * r);
        }
        pts
    }

    /// Independent containment test: `x` is inside the rounded box iff its
    /// distance to the solid inner box (via the closest clamped point) is at
    /// most `r`.
    fn inside_rounded_box(x: Vec3<f64>, h: Vec3<f64>, r: f64) -> bool {
        let q = Vec3::of(
            x.x.clamp(-h.x, h.x),
            x.y.clamp(-h.y, h.y),
            x.z.clamp(-h.z, h.z),
        );
        (x - q).norm() <= r
    }

    #[test]
    fn sphere_sdf_cases() {
        let s = AnalyticShape::<f64>::sphere(1.0);
        assert!((s.sdf(Vec3::of(2.0, 0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((s.sdf(Vec3::zero()) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rounded_box_matches_surface_sampling_oracle() {
        let h = Vec3::of(0.3, 0.2, 0.25);
        let r = 0.08;
        let shape = AnalyticShape::RoundedBox { half_extents: h, radius: r };
        let surface = rounded_box_surface(200_000, h, r, 99);
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let mut tested = 0;
        while tested < 30 {
            let x = rand_point(&mut rng, 0.8);
            let sdf = shape.sdf(x);
            if sdf.abs() < 0.02 {
                continue; // sampling oracle resolution degrades right at the surface
            }
            let brute = surface
                .iter()
                .map(|p| (*p - x).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                (sdf.abs() - brute).abs() < 2e-3,
                "sdf {sdf} vs sampled distance {brute} at {x:?}"
            );
            assert_eq!(sdf < 0.0, inside_rounded_box(x, h, r));
            tested += 1;
        }
    }

    #[test]
    fn transformed_sphere_matches_closed_form() {
        // Spheres are closed under similarity: the transformed SDF must equal
        // the closed-form SDF of the transformed sphere exactly.
        let shape = AnalyticShape::<f64>::sphere(1.0);
        let g = SimilarityTransform::new(2.0, RotationParams::identity(), Vec3::zero());
        let v = transformed_sdf(&shape, &g, Vec3::of(1.5, 0.0, 0.0)).unwrap();
        assert!((v + 0.5).abs() < 1e-12, "transformed sphere of radius 2: {v}");

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let g = SimilarityTransform::new(
                rng.random_range(0.3..3.0),
                RotationParams::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                ),
                rand_point(&mut rng, 1.5),
            );
            let x = rand_point(&mut rng, 4.0);
            let direct = (x - g.translation).norm() - g.scale;
            let via_identity = transformed_sdf(&shape, &g, x).unwrap();
            assert!((direct - via_identity).abs() < 1e-12);
        }
    }

    #[test]
    fn transformed_sdf_identity_is_plain_sdf() {
        let shape = AnalyticShape::<f64>::rounded_box([0.3, 0.25, 0.2], 0.05);
        let g = SimilarityTransform::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = rand_point(&mut rng, 1.0);
            assert_eq!(transformed_sdf(&shape, &g, x).unwrap(), shape.sdf(x));
        }
    }

    #[test]
    fn transformed_rounded_box_matches_transformed_surface_oracle() {
        let h = Vec3::of(0.25, 0.3, 0.2);
        let r = 0.06;
        let shape = AnalyticShape::RoundedBox { half_extents: h, radius: r };
        let g = SimilarityTransform::new(
            1.7,
            RotationParams::new(0.4, -0.9, 1.1),
            Vec3::of(0.3, -0.2, 0.5),
        );
        let surface: Vec<Vec3<f64>> = rounded_box_surface(200_000, h, r, 17)
            .into_iter()
            .map(|p| g.apply(p))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let mut tested = 0;
        while tested < 20 {
            let x = rand_point(&mut rng, 1.2);
            let sdf = transformed_sdf(&shape, &g, x).unwrap();
            if sdf.abs() < 0.03 {
                continue;
            }
            let brute = surface
                .iter()
                .map(|p| (*p - x).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(
                (sdf.abs() - brute).abs() < 2e-3 * g.scale,
                "sdf {sdf} vs sampled {brute}"
            );
            tested += 1;
        }
    }

    #[test]
    fn capsule_and_union_basics() {
        let cap = AnalyticShape::<f64>::capsule([-0.2, 0.0, 0.0], [0.2, 0.0, 0.0], 0.1);
        assert!((cap.sdf(Vec3::of(0.0, 0.3, 0.0)) - 0.2).abs() < 1e-15);
        assert!((cap.sdf(Vec3::of(0.5, 0.0, 0.0)) - 0.2).abs() < 1e-15);
        assert!(cap.sdf(Vec3::zero()) < 0.0);

        let u: AnalyticShape<f64> = AnalyticShape::union(
            AnalyticShape::sphere(0.2),
            AnalyticShape::Sphere { radius: 0.1 },
        );
        // min() of members: outside both, distance to the nearer.
        assert!((u.sdf(Vec3::of(0.5, 0.0, 0.0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn eikonal_spot_check() {
        // |grad sdf| = 1 away from the medial axis and switching surfaces.
        let shapes: Vec<AnalyticShape<f64>> = vec![
            AnalyticShape::sphere(0.5),
            AnalyticShape::rounded_box([0.3, 0.2, 0.25], 0.07),
            AnalyticShape::capsule([-0.2, -0.1, 0.0], [0.2, 0.1, 0.1], 0.12),
        ];
        let h = 1e-5;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for shape in &shapes {
            let mut tested = 0;
            while tested < 40 {
                let x = rand_point(&mut rng, 0.9);
                if !smooth_at(shape, x) {
                    continue;
                }
                let g: Vec3<f64> = Vec3::of(
                    (shape.sdf(Vec3::of(x.x + h, x.y, x.z)) - shape.sdf(Vec3::of(x.x - h, x.y, x.z))) / (2.0 * h),
                    (shape.sdf(Vec3::of(x.x, x.y + h, x.z)) - shape.sdf(Vec3::of(x.x, x.y - h, x.z))) / (2.0 * h),
                    (shape.sdf(Vec3::of(x.x, x.y, x.z + h)) - shape.sdf(Vec3::of(x.x, x.y, x.z - h))) / (2.0 * h),
                );
                assert!(
                    (g.norm() - 1.0).abs() < 1e-6,
                    "gradient norm {} at {:?} for {:?}",
                    g.norm(),
                    x,
                    shape
                );
                tested += 1;
            }
        }
    }

    /// True when the SDF is smooth in a 1e-3 neighbourhood of `x` (away from
    /// centers, axes, and max/min switching sets of the closed forms).
    fn smooth_at(shape: &AnalyticShape<f64>, x: Vec3<f64>) -> bool {
        let margin = 1e-3;
        match shape {
            AnalyticShape::Sphere { .. } => x.norm() > margin,
            AnalyticShape::RoundedBox { half_extents, .. } => {
                let q = x.abs() - *half_extents;
                let comps = [q.x, q.y, q.z];
                if comps.iter().any(|c| c.abs() < margin) {
                    return false;
                }
                if x.x.abs() < margin || x.y.abs() < margin || x.z.abs() < margin {
                    return false;
                }
                // Inside region: gradient follows the largest q component;
                // require a clear winner.
                let mut sorted = comps;
                sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
                sorted[0] - sorted[1] > margin
            }
            AnalyticShape::Capsule { a, b, radius: _ } => {
                let ab = *b - *a;
                let t = (x - *a).dot(ab) / ab.norm_squared();
                let clamped = t.clamp(0.0, 1.0);
                let axis_pt = *a + ab * clamped;
                // Off the segment axis, and away from the endpoint transitions.
                (x - axis_pt).norm() > margin
                    && (t - 0.0).abs() > margin
                    && (t - 1.0).abs() > margin
            }
            AnalyticShape::Union(a, b) => {
                (a.sdf(x) - b.sdf(x)).abs() > margin && smooth_at(a, x) && smooth_at(b, x)
            }
        }
    }
}
