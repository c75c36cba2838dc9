//! Area-weighted surface point sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::real::Real;

use super::SurfacePointSet;

/// Draws `n` points uniformly by area from the mesh surface. Normals come
/// from the triangle planes, outward per the stored winding.
pub fn sample_surface<R: Real>(
    mesh: &TriangleMesh<R>,
    n: usize,
    seed: u64,
) -> Result<SurfacePointSet<R>> {
    if n == 0 {
        return Ok(SurfacePointSet { points: Vec::new(), normals: Some(Vec::new()) });
    }
    let mut cumulative: Vec<f64> = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0f64;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f).as_f64();
        cumulative.push(total);
    }
    if !(total > 0.0) {
        return Err(Error::Degenerate(
            "mesh has no triangles with positive area".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for _ in 0..n {
        let target = rng.random_range(0.0..total);
        let face = cumulative.partition_point(|&c| c <= target);
        let face = face.min(mesh.faces.len() - 1);
        let [a, b, c] = mesh.face_vertices(face);

        // Uniform barycentric draw via the square-root trick.
        let r1 = rng.random::<f64>().sqrt();
        let r2 = rng.random::<f64>();
        let w0 = R::of(1.0 - r1);
        let w1 = R::of(r1 * (1.0 - r2));
        let w2 = R::of(r1 * r2);
        points.push(a * w0 + b * w1 + c * w2);
        normals.push(mesh.face_normal(face));
    }
    Ok(SurfacePointSet { points, normals: Some(normals) })
}
