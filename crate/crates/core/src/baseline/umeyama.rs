//! Closed-form least-squares similarity estimation from correspondences:
//! centroid alignment, covariance SVD, scale from the variance ratio, and a
//! determinant-sign guard so reflections never come back as rotations.

use crate::error::{Error, Result};
use crate::geom::{jacobi_eigen_sym3, rotation_params_from_matrix, sort_eigen_desc, Mat3,
    SimilarityTransform, Vec3};
use crate::real::Real;

/// Minimizes `sum_i |dst_i - (s R src_i + t)|^2` over similarity transforms.
///
/// Needs at least three pairs spanning a plane (covariance rank >= 2); exact
/// on noise-free data.
pub fn umeyama<R: Real>(
    src: &[Vec3<R>],
    dst: &[Vec3<R>],
    correspondences: &[(usize, usize)],
) -> Result<SimilarityTransform<R>> {
    if correspondences.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "similarity estimation needs at least 3 pairs, got {}",
            correspondences.len()
        )));
    }
    for &(i, j) in correspondences {
        if i >= src.len() || j >= dst.len() {
            return Err(Error::InvalidParameter(format!(
                "correspondence ({i}, {j}) out of range"
            )));
        }
    }
    let n = R::of(correspondences.len() as f64);

    let mut mu_s = Vec3::zero();
    let mut mu_d = Vec3::zero();
    for &(i, j) in correspondences {
        mu_s += src[i];
        mu_d += dst[j];
    }
    mu_s = mu_s / n;
    mu_d = mu_d / n;

    // Covariance of dst against src and the source variance.
    let mut sigma = Mat3::zero();
    let mut var_s = R::zero();
    for &(i, j) in correspondences {
        let a = src[i] - mu_s;
        let b = dst[j] - mu_d;
        var_s = var_s + a.norm_squared();
        for r in 0..3 {
            for c in 0..3 {
                let br = [b.x, b.y, b.z][r];
                let ac = [a.x, a.y, a.z][c];
                sigma.m[r][c] = sigma.m[r][c] + br * ac;
            }
        }
    }
    var_s = var_s / n;
    sigma = sigma * (R::one() / n);
    if !(var_s > R::zero()) {
        return Err(Error::Degenerate("all source points coincide".into()));
    }

    let (mut vals, mut v) = jacobi_eigen_sym3(sigma.transpose() * sigma);
    // Descending eigenvalues; singular values are their square roots.
    sort_eigen_desc(&mut vals, &mut v);
    let sing: [R; 3] = [
        vals[0].max(R::zero()).sqrt(),
        vals[1].max(R::zero()).sqrt(),
        vals[2].max(R::zero()).sqrt(),
    ];
    let scale_ref = sing[0].max(R::of(1e-300));
    if sing[1] / scale_ref < R::of(1e-9) {
        return Err(Error::Degenerate(
            "correspondence covariance has rank < 2 (collinear points)".into(),
        ));
    }

    // Right singular vectors with a proper orientation.
    let v0 = v.col(0);
    let v1 = v.col(1);
    let v2 = v0.cross(v1);
    // Left singular vectors: u_i = Sigma v_i / sigma_i for the well-separated
    // pair, completed by the cross product.
    let u0 = (sigma * v0) / sing[0];
    let u1 = (sigma * v1) / sing[1];
    let u2 = u0.cross(u1);
    let u = Mat3::from_cols(u0, u1, u2);
    let vt = Mat3::from_cols(v0, v1, v2).transpose();

    // Both U and V are proper (det +1) by construction, so U V^T is already
    // the optimal proper rotation. The reflection sign only enters the scale:
    // a negative det(Sigma) means the smallest singular direction fights the
    // rotation constraint.
    let d = if sing[2] / scale_ref < R::of(1e-9) {
        R::one()
    } else if sigma.det() >= R::zero() {
        R::one()
    } else {
        -R::one()
    };
    let rot_matrix = u * vt;

    let scale = (sing[0] + sing[1] + d * sing[2]) / var_s;
    if !(scale > R::zero()) {
        return Err(Error::Degenerate(format!("non-positive scale estimate {scale}")));
    }
    let rot = rotation_params_from_matrix(&rot_matrix);
    let t = mu_d - rot.matrix() * mu_s * scale;
    Ok(SimilarityTransform::new(scale, rot, t))
}
