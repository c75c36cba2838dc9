//! Vertex-clustering mesh simplification.

use std::collections::HashMap;

use crate::geom::Vec3;
use crate::real::Real;

use super::TriangleMesh;

/// Snaps vertices to the centroids of a regular grid of the given cell size
/// and drops faces that collapse onto fewer than three representatives.
///
/// Never increases vertex or face counts; representatives are indexed in
/// first-occurrence order so the result is deterministic.
pub fn vertex_clustering<R: Real>(mesh: &TriangleMesh<R>, cell: R) -> TriangleMesh<R> {
    assert!(cell > R::zero(), "cluster cell size must be positive");

    // Grid anchored at the mesh minimum so a cell larger than the mesh
    // collapses everything into one representative.
    let mut anchor = Vec3::splat(R::zero());
    if let Some(first) = mesh.vertices.first() {
        anchor = *first;
        for v in &mesh.vertices {
            anchor.x = anchor.x.min(v.x);
            anchor.y = anchor.y.min(v.y);
            anchor.z = anchor.z.min(v.z);
        }
    }
    let key_of = |v: Vec3<R>| -> (i128, i128, i128) {
        (
            quantize(v.x - anchor.x, cell),
            quantize(v.y - anchor.y, cell),
            quantize(v.z - anchor.z, cell),
        )
    };

    let mut cells: HashMap<(i128, i128, i128), usize> = HashMap::new();
    let mut sums: Vec<Vec3<R>> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut remap: Vec<u32> = Vec::with_capacity(mesh.vertices.len());

    for &v in &mesh.vertices {
        let next = sums.len();
        let idx = *cells.entry(key_of(v)).or_insert(next);
        if idx == sums.len() {
            sums.push(Vec3::zero());
            counts.push(0);
        }
        sums[idx] += v;
        counts[idx] += 1;
        remap.push(idx as u32);
    }

    let vertices: Vec<Vec3<R>> = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s / R::of(c as f64))
        .collect();

    let mut faces = Vec::new();
    for f in &mesh.faces {
        let m = [
            remap[f[0] as usize],
            remap[f[1] as usize],
            remap[f[2] as usize],
        ];
        if m[0] != m[1] && m[1] != m[2] && m[0] != m[2] {
            faces.push(m);
        }
    }

    TriangleMesh { vertices, faces }
}

fn quantize<R: Real>(v: R, cell: R) -> i128 {
    let q = (v / cell).floor().as_f64();
    // Guard against overflow for pathologically small cells.
    q.clamp(-1e30, 1e30) as i128
}
