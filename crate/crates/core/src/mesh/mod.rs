//! Triangle meshes: isosurface extraction, simplification, and OBJ I/O.

mod marching;
mod obj;
mod simplify;
mod tables;

pub use marching::{extract_shape, marching_cubes};
pub use obj::{obj_string, read_obj, write_obj};
pub use simplify::vertex_clustering;

use crate::geom::Vec3;
use crate::real::Real;

/// Indexed triangle surface. Faces wind counter-clockwise when viewed from
/// outside the shape.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh<R> {
    pub vertices: Vec<Vec3<R>>,
    pub faces: Vec<[u32; 3]>,
}

impl<R: Real> TriangleMesh<R> {
    pub fn new(vertices: Vec<Vec3<R>>, faces: Vec<[u32; 3]>) -> Self {
        TriangleMesh { vertices, faces }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_vertices(&self, f: usize) -> [Vec3<R>; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn face_area(&self, f: usize) -> R {
        let [a, b, c] = self.face_vertices(f);
        (b - a).cross(c - a).norm() * R::of(0.5)
    }

    /// Unit normal of face `f`; zero for degenerate faces.
    pub fn face_normal(&self, f: usize) -> Vec3<R> {
        let [a, b, c] = self.face_vertices(f);
        (b - a).cross(c - a).normalized()
    }

    pub fn total_area(&self) -> R {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Applies a point map to every vertex in place.
    pub fn map_vertices(&mut self, f: impl Fn(Vec3<R>) -> Vec3<R>) {
        for v in &mut self.vertices {
            *v = f(*v);
        }
    }

    /// V - E + F with edges counted as distinct undirected vertex pairs.
    pub fn euler_characteristic(&self) -> i64 {
        use std::collections::HashSet;
        let mut edges: HashSet<(u32, u32)> = HashSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let a = f[k];
                let b = f[(k + 1) % 3];
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    pub fn validate(&self) -> crate::Result<()> {
        let n = self.vertices.len() as u32;
        if let Some(v) = self.vertices.iter().find(|v| !v.is_finite()) {
            return Err(crate::Error::Degenerate(format!("non-finite vertex {v:?}")));
        }
        if self.faces.iter().flatten().any(|&i| i >= n) {
            return Err(crate::Error::Degenerate("face index out of range".into()));
        }
        Ok(())
    }
}

/// Regular sampling grid for isosurface extraction: `resolution` cells per
/// axis over an axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<R> {
    pub min: Vec3<R>,
    pub max: Vec3<R>,
    pub resolution: usize,
}

impl<R: Real> GridSpec<R> {
    pub fn new(min: Vec3<R>, max: Vec3<R>, resolution: usize) -> Self {
        assert!(resolution >= 2, "grid resolution must be at least 2");
        assert!(
            max.x > min.x && max.y > min.y && max.z > min.z,
            "grid bounds must be non-degenerate"
        );
        GridSpec { min, max, resolution }
    }

    /// Canonical extraction grid: `[-1, 1]^3` at the given resolution.
    pub fn canonical(resolution: usize) -> Self {
        GridSpec::new(Vec3::of(-1.0, -1.0, -1.0), Vec3::of(1.0, 1.0, 1.0), resolution)
    }

    pub fn cell_size(&self) -> Vec3<R> {
        let n = R::of(self.resolution as f64);
        Vec3::new(
            (self.max.x - self.min.x) / n,
            (self.max.y - self.min.y) / n,
            (self.max.z - self.min.z) / n,
        )
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> Vec3<R> {
        let c = self.cell_size();
        Vec3::new(
            self.min.x + c.x * R::of(i as f64),
            self.min.y + c.y * R::of(j as f64),
            self.min.z + c.z * R::of(k as f64),
        )
    }
}

impl<R: Real> Default for GridSpec<R> {
    fn default() -> Self {
        GridSpec::canonical(64)
    }
}
