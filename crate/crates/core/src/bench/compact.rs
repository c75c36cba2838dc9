//! Compact shape storage: the latent code plus the similarity transform as a
//! 4x4 matrix, all little-endian float32. Size is exactly `4 d + 64` bytes.

use crate::error::{Error, Result};
use crate::geom::{rotation_params_from_matrix, Mat3, SimilarityTransform, Vec3};
use crate::latent::LatentCode;
use crate::real::Real;

/// `d` f32 code values followed by the row-major homogeneous matrix
/// `[[sR, t], [0 0 0 1]]` (16 f32).
pub fn serialize_compact<R: Real>(
    code: &LatentCode<R>,
    g: &SimilarityTransform<R>,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 * code.dim() + 64);
    for v in code.iter() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    for row in g.to_homogeneous() {
        for v in row {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    }
    out
}

/// Inverse of [`serialize_compact`]. The byte length must be exactly
/// `4 d + 64`; the matrix block must factor as a positive scale times a
/// rotation (orthogonality residual below `1e-3`) with last row `0 0 0 1`.
pub fn deserialize_compact<R: Real>(
    bytes: &[u8],
    dim: usize,
) -> Result<(LatentCode<R>, SimilarityTransform<R>)> {
    let expected = 4 * dim + 64;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "compact blob must be {expected} bytes for d = {dim}, got {}",
            bytes.len()
        )));
    }
    let f = |i: usize| -> f64 {
        f32::from_le_bytes(bytes[i * 4..i * 4 + 4].try_into().unwrap()) as f64
    };
    let code: Vec<R> = (0..dim).map(|i| R::of(f(i))).collect();

    let m = |r: usize, c: usize| -> f64 { f(dim + r * 4 + c) };
    let bottom = [m(3, 0), m(3, 1), m(3, 2), m(3, 3)];
    if bottom[0] != 0.0 || bottom[1] != 0.0 || bottom[2] != 0.0 || (bottom[3] - 1.0).abs() > 1e-6 {
        return Err(Error::Format(format!("bad homogeneous bottom row {bottom:?}")));
    }

    let block = Mat3::from_rows(
        [m(0, 0), m(0, 1), m(0, 2)],
        [m(1, 0), m(1, 1), m(1, 2)],
        [m(2, 0), m(2, 1), m(2, 2)],
    );
    let det = block.det();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::Format(format!(
            "matrix block is not positive-scale times rotation (det {det})"
        )));
    }
    let scale = det.cbrt();
    let rot_raw = block * (1.0 / scale);
    let residual = (rot_raw.transpose() * rot_raw).max_abs_diff(Mat3::identity());
    if residual > 1e-3 {
        return Err(Error::Format(format!(
            "matrix block is not a scaled rotation (orthogonality residual {residual:.2e})"
        )));
    }

    // Clean up float32 noise before extracting angles.
    let rot_clean = crate::geom::nearest_rotation(&rot_raw)
        .map_err(|e| Error::Format(format!("rotation projection failed: {e}")))?;
    let rot = rotation_params_from_matrix(&rot_clean);
    let t = Vec3::of(m(0, 3), m(1, 3), m(2, 3));
    let g = SimilarityTransform::new(
        R::of(scale),
        crate::geom::RotationParams::new(R::of(rot.psi), R::of(rot.rho), R::of(rot.theta)),
        Vec3::new(R::of(t.x), R::of(t.y), R::of(t.z)),
    );
    Ok((LatentCode::from_vec(code), g))
}
