//! Isosurface extraction on a regular grid.

use rayon::prelude::*;

use crate::geom::{SimilarityTransform, Vec3};
use crate::latent::LatentSdf;
use crate::real::Real;

use super::tables::{edge_axis, triangle_table, EDGE_ENDPOINTS};
use super::{GridSpec, TriangleMesh};

/// Extracts the zero level set of `field` over `grid` with marching cubes.
///
/// Every emitted vertex lies on a grid edge whose endpoint values straddle
/// zero, placed by linear interpolation (midpoint when both endpoints are
/// exactly zero). Triangle normals point toward positive field values, so an
/// SDF (negative inside) yields outward counter-clockwise winding. A field
/// with no sign change yields an empty mesh.
///
/// Field evaluation runs in parallel; assembly order is fixed by cell index,
/// so the output is deterministic.
pub fn marching_cubes<R, F>(field: F, grid: &GridSpec<R>) -> TriangleMesh<R>
where
    R: Real,
    F: Fn(Vec3<R>) -> R + Sync,
{
    let n = grid.resolution + 1; // nodes per axis
    let node_index = |i: usize, j: usize, k: usize| i + n * (j + n * k);

    let mut values = vec![R::zero(); n * n * n];
    values
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(k, slab)| {
            for j in 0..n {
                for i in 0..n {
                    slab[i + n * j] = field(grid.node(i, j, k));
                }
            }
        });

    // One vertex slot per grid edge, keyed by (axis, lower node).
    const UNSET: u32 = u32::MAX;
    let mut edge_vertex = vec![[UNSET; 3]; n * n * n];

    let mut vertices: Vec<Vec3<R>> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let table = triangle_table();

    for k in 0..grid.resolution {
        for j in 0..grid.resolution {
            for i in 0..grid.resolution {
                let mut mask = 0usize;
                for c in 0..8usize {
                    let (di, dj, dk) = (c & 1, (c >> 1) & 1, (c >> 2) & 1);
                    if values[node_index(i + di, j + dj, k + dk)] < R::zero() {
                        mask |= 1 << c;
                    }
                }
                if mask == 0 || mask == 255 {
                    continue;
                }
                for tri in &table[mask] {
                    let mut idx = [0u32; 3];
                    for (slot, &e) in idx.iter_mut().zip(tri.iter()) {
                        let (ca, cb) = EDGE_ENDPOINTS[e as usize];
                        let na = node_index(
                            i + (ca & 1) as usize,
                            j + ((ca >> 1) & 1) as usize,
                            k + ((ca >> 2) & 1) as usize,
                        );
                        let nb = node_index(
                            i + (cb & 1) as usize,
                            j + ((cb >> 1) & 1) as usize,
                            k + ((cb >> 2) & 1) as usize,
                        );
                        let axis = edge_axis(e as usize);
                        let existing = edge_vertex[na][axis];
                        *slot = if existing != UNSET {
                            existing
                        } else {
                            let va = values[na];
                            let vb = values[nb];
                            let denom = va - vb;
                            let t = if denom.abs() > R::zero() {
                                (va / denom).max(R::zero()).min(R::one())
                            } else {
                                R::of(0.5)
                            };
                            let pa = node_position(grid, na, n);
                            let pb = node_position(grid, nb, n);
                            let p = pa + (pb - pa) * t;
                            let id = vertices.len() as u32;
                            vertices.push(p);
                            edge_vertex[na][axis] = id;
                            id
                        };
                    }
                    faces.push(idx);
                }
            }
        }
    }

    TriangleMesh { vertices, faces }
}

fn node_position<R: Real>(grid: &GridSpec<R>, node: usize, n: usize) -> Vec3<R> {
    let i = node % n;
    let j = (node / n) % n;
    let k = node / (n * n);
    grid.node(i, j, k)
}

/// Decodes a latent shape over the canonical grid and maps the extracted mesh
/// by the similarity transform.
pub fn extract_shape<R: Real>(
    space: &dyn LatentSdf<R>,
    z: &[R],
    g: &SimilarityTransform<R>,
    grid: &GridSpec<R>,
) -> crate::Result<TriangleMesh<R>> {
    space.check_dim(z)?;
    let mut mesh = marching_cubes(|x| space.eval(x, z), grid);
    if mesh.is_empty() {
        return Err(crate::Error::EmptyExtraction);
    }
    mesh.map_vertices(|v| g.apply(v));
    Ok(mesh)
}
