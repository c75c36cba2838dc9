//! Static 3D k-d tree for exact nearest-neighbor queries.

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::real::Real;

struct Node<R> {
    point: Vec3<R>,
    /// Index into the original point slice.
    index: u32,
    axis: u8,
    left: i32,
    right: i32,
}

/// Balanced k-d tree over a fixed point set. Queries return exactly the
/// brute-force nearest neighbor; no approximation is involved.
pub struct KdTree<R> {
    nodes: Vec<Node<R>>,
    root: i32,
}

impl<R: Real> KdTree<R> {
    pub fn build(points: &[Vec3<R>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("k-d tree points"));
        }
        let mut items: Vec<(Vec3<R>, u32)> = points
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i as u32))
            .collect();
        let mut nodes = Vec::with_capacity(points.len());
        let root = build_rec(&mut items, 0, &mut nodes);
        Ok(KdTree { nodes, root })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index (into the build slice) and distance of the nearest stored point.
    pub fn nearest(&self, q: Vec3<R>) -> (usize, R) {
        let mut best = (0usize, R::infinity());
        self.search(self.root, q, &mut best);
        (best.0, best.1.sqrt())
    }

    fn search(&self, node: i32, q: Vec3<R>, best: &mut (usize, R)) {
        if node < 0 {
            return;
        }
        let n = &self.nodes[node as usize];
        let d2 = (n.point - q).norm_squared();
        if d2 < best.1 {
            *best = (n.index as usize, d2);
        }
        let delta = match n.axis {
            0 => q.x - n.point.x,
            1 => q.y - n.point.y,
            _ => q.z - n.point.z,
        };
        let (near, far) = if delta < R::zero() {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.search(near, q, best);
        if delta * delta < best.1 {
            self.search(far, q, best);
        }
    }
}

fn build_rec<R: Real>(items: &mut [(Vec3<R>, u32)], depth: usize, nodes: &mut Vec<Node<R>>) -> i32 {
    if items.is_empty() {
        return -1;
    }
    let axis = (depth % 3) as u8;
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| {
        let (ka, kb) = match axis {
            0 => (a.0.x, b.0.x),
            1 => (a.0.y, b.0.y),
            _ => (a.0.z, b.0.z),
        };
        ka.partial_cmp(&kb).expect("finite coordinates")
    });
    let (point, index) = items[mid];
    let id = nodes.len() as i32;
    nodes.push(Node { point, index, axis, left: -1, right: -1 });
    let (lo, rest) = items.split_at_mut(mid);
    let hi = &mut rest[1..];
    let left = build_rec(lo, depth + 1, nodes);
    let right = build_rec(hi, depth + 1, nodes);
    nodes[id as usize].left = left;
    nodes[id as usize].right = right;
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(points: &[Vec3<f64>], q: Vec3<f64>) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = (*p - q).norm();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(KdTree::<f64>::build(&[]).is_err());
    }

    #[test]
    fn single_point() {
        let tree = KdTree::<f64>::build(&[Vec3::of(1.0, 1.0, 1.0)]).unwrap();
        let (i, d) = tree.nearest(Vec3::zero());
        assert_eq!(i, 0);
        assert!((d - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn query_on_stored_point_has_zero_distance() {
        let pts: Vec<Vec3<f64>> = vec![
            Vec3::of(0.0, 0.0, 0.0),
            Vec3::of(1.0, 2.0, 3.0),
            Vec3::of(-1.0, 0.5, 0.25),
        ];
        let tree = KdTree::build(&pts).unwrap();
        for (i, p) in pts.iter().enumerate() {
            let (j, d) = tree.nearest(*p);
            assert_eq!(i, j);
            assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn matches_brute_force_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let points: Vec<Vec3<f64>> = (0..1000)
            .map(|_| {
                Vec3::of(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let tree = KdTree::build(&points).unwrap();
        for _ in 0..100 {
            let q = Vec3::of(
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            );
            let (bi, bd) = brute_force(&points, q);
            let (ti, td) = tree.nearest(q);
            assert_eq!(bi, ti);
            assert!((bd - td).abs() < 1e-12);
        }
    }
}
