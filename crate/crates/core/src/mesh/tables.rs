//! Marching-cubes case tables.
//!
//! The classic 256-case edge/triangle tables are generated once at startup
//! from the cube's topology instead of being transcribed: for every corner
//! sign pattern, crossed edges are linked into closed loops across the cube
//! faces and fan-triangulated. Ambiguous faces (four crossed edges) are always
//! split so that the negative corners are separated; the rule depends only on
//! the face itself, so adjacent cells agree and the output surface is
//! crack-free. Loops are oriented so triangle normals point toward positive
//! field values (outward for an SDF).

use std::sync::OnceLock;

/// Cube corner `c` sits at `(c & 1, (c >> 1) & 1, (c >> 2) & 1)`.
///
/// Edge ids: 0..4 along x, 4..8 along y, 8..12 along z, each identified by its
/// lower corner.
pub const EDGE_ENDPOINTS: [(u8, u8); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Axis along which an edge runs (0 = x, 1 = y, 2 = z).
#[inline]
pub fn edge_axis(edge: usize) -> usize {
    edge / 4
}

/// Triangles (as local edge-id triples) for one corner-sign case.
pub type CaseTriangles = Vec<[u8; 3]>;

/// Triangle table for all 256 corner-sign cases. A corner's bit is set when
/// its field value is negative (inside).
pub fn triangle_table() -> &'static [CaseTriangles; 256] {
    static TABLE: OnceLock<Box<[CaseTriangles; 256]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t: Vec<CaseTriangles> = Vec::with_capacity(256);
        for mask in 0..256u32 {
            t.push(build_case(mask as u8));
        }
        t.try_into().expect("256 cases")
    })
}

fn corner_pos(c: u8) -> [f64; 3] {
    [(c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64]
}

fn edge_id(a: u8, b: u8) -> u8 {
    let key = (a.min(b), a.max(b));
    EDGE_ENDPOINTS
        .iter()
        .position(|&e| e == key)
        .expect("corner pair forms a cube edge") as u8
}

/// The 6 cube faces as (axis, side); face corners listed in ring order.
fn face_ring(axis: usize, side: u8) -> [u8; 4] {
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let base = side << axis;
    [
        base,
        base | (1 << u),
        base | (1 << u) | (1 << v),
        base | (1 << v),
    ]
}

fn build_case(mask: u8) -> CaseTriangles {
    let neg = |c: u8| mask & (1 << c) != 0;

    // Segments connecting crossed edges across each face.
    let mut segments: Vec<(u8, u8)> = Vec::new();
    for axis in 0..3 {
        for side in 0..2u8 {
            let ring = face_ring(axis, side);
            let crossed: Vec<usize> = (0..4)
                .filter(|&i| neg(ring[i]) != neg(ring[(i + 1) % 4]))
                .collect();
            match crossed.len() {
                0 => {}
                2 => {
                    let e0 = edge_id(ring[crossed[0]], ring[(crossed[0] + 1) % 4]);
                    let e1 = edge_id(ring[crossed[1]], ring[(crossed[1] + 1) % 4]);
                    segments.push((e0, e1));
                }
                4 => {
                    // Diagonal pattern: cut off each negative corner.
                    for i in 0..4 {
                        if neg(ring[i]) {
                            let prev = edge_id(ring[(i + 3) % 4], ring[i]);
                            let next = edge_id(ring[i], ring[(i + 1) % 4]);
                            segments.push((prev, next));
                        }
                    }
                }
                n => unreachable!("face with {n} crossed edges"),
            }
        }
    }
    if segments.is_empty() {
        return Vec::new();
    }

    // Each crossed edge belongs to exactly two segments (one per adjacent
    // face); walking unused segments therefore yields disjoint closed loops.
    let mut used = vec![false; segments.len()];
    let mut loops: Vec<Vec<u8>> = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, mut current) = segments[start];
        let mut cycle = vec![first, current];
        while current != first {
            let next_seg = (0..segments.len())
                .find(|&s| !used[s] && (segments[s].0 == current || segments[s].1 == current))
                .expect("crossed edge with an unused partner segment");
            used[next_seg] = true;
            current = if segments[next_seg].0 == current {
                segments[next_seg].1
            } else {
                segments[next_seg].0
            };
            cycle.push(current);
        }
        cycle.pop(); // closing edge repeats the first
        loops.push(cycle);
    }

    let mut triangles = Vec::new();
    for mut cycle in loops {
        orient_loop(&mut cycle, mask);
        for i in 1..cycle.len() - 1 {
            triangles.push([cycle[0], cycle[i], cycle[i + 1]]);
        }
    }
    triangles
}

/// Orients a loop so its Newell normal points toward positive field values,
/// using edge midpoints for geometry and the crossed edges' inside-to-outside
/// directions as the gradient proxy.
fn orient_loop(cycle: &mut Vec<u8>, mask: u8) {
    let neg = |c: u8| mask & (1 << c) != 0;
    let mids: Vec<[f64; 3]> = cycle
        .iter()
        .map(|&e| {
            let (a, b) = EDGE_ENDPOINTS[e as usize];
            let (pa, pb) = (corner_pos(a), corner_pos(b));
            [
                (pa[0] + pb[0]) * 0.5,
                (pa[1] + pb[1]) * 0.5,
                (pa[2] + pb[2]) * 0.5,
            ]
        })
        .collect();

    let mut normal = [0.0f64; 3];
    for i in 0..mids.len() {
        let a = mids[i];
        let b = mids[(i + 1) % mids.len()];
        normal[0] += a[1] * b[2] - a[2] * b[1];
        normal[1] += a[2] * b[0] - a[0] * b[2];
        normal[2] += a[0] * b[1] - a[1] * b[0];
    }

    let mut grad = [0.0f64; 3];
    for &e in cycle.iter() {
        let (a, b) = EDGE_ENDPOINTS[e as usize];
        let (inside, outside) = if neg(a) { (a, b) } else { (b, a) };
        let (pi, po) = (corner_pos(inside), corner_pos(outside));
        for k in 0..3 {
            grad[k] += po[k] - pi[k];
        }
    }

    let dot: f64 = (0..3).map(|k| normal[k] * grad[k]).sum();
    debug_assert!(
        dot.abs() > 1e-9,
        "degenerate loop orientation for mask {mask:#010b}: {cycle:?}"
    );
    if dot < 0.0 {
        cycle.reverse();
    }
}
