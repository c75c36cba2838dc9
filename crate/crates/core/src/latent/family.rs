//! Exactly differentiable parametric shape family: a rounded box whose half
//! extents and corner radius are smooth functions of a 4-dimensional code.
//!
//! This backend exists so the joint optimizer can be tested in isolation,
//! with no training step and machine-precision gradients.

use crate::geom::Vec3;
use crate::real::Real;

use super::LatentSdf;

/// Rounded-box family over `z in R^4`:
/// half extents `h_i = 0.15 + 0.25 * sigmoid(z_i)` for `i = 1..3` and corner
/// radius `r = 0.05 + 0.1 * sigmoid(z_4)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyticFamily;

impl AnalyticFamily {
    pub const DIM: usize = 4;

    pub fn half_extents_and_radius<R: Real>(z: &[R]) -> (Vec3<R>, R) {
        let h = Vec3::new(
            R::of(0.15) + R::of(0.25) * sigmoid(z[0]),
            R::of(0.15) + R::of(0.25) * sigmoid(z[1]),
            R::of(0.15) + R::of(0.25) * sigmoid(z[2]),
        );
        let r = R::of(0.05) + R::of(0.1) * sigmoid(z[3]);
        (h, r)
    }

    /// Radius of the bounding sphere of the coded shape.
    pub fn bounding_radius<R: Real>(z: &[R]) -> R {
        let (h, r) = Self::half_extents_and_radius(z);
        h.norm() + r
    }
}

#[inline]
fn sigmoid<R: Real>(v: R) -> R {
    R::one() / (R::one() + (-v).exp())
}

#[inline]
fn sigmoid_prime<R: Real>(v: R) -> R {
    let s = sigmoid(v);
    s * (R::one() - s)
}

impl<R: Real> LatentSdf<R> for AnalyticFamily {
    fn dim(&self) -> usize {
        Self::DIM
    }

    fn eval(&self, x: Vec3<R>, z: &[R]) -> R {
        debug_assert_eq!(z.len(), Self::DIM);
        let (h, r) = Self::half_extents_and_radius(z);
        crate::geom::rounded_box_sdf(x, h, r)
    }

    fn eval_grad(&self, x: Vec3<R>, z: &[R], dz: &mut [R]) -> (R, Vec3<R>) {
        debug_assert_eq!(z.len(), Self::DIM);
        debug_assert_eq!(dz.len(), Self::DIM);
        let (h, r) = Self::half_extents_and_radius(z);

        // phi = |max(q, 0)| + min(max_i q_i, 0) - r with q = |x| - h.
        let q = x.abs() - h;
        let qp = q.max_scalar(R::zero());
        let outside = qp.norm();
        let zero = R::zero();

        // d phi / d q: outside part from the normalized positive clip, inside
        // part a one-hot on the largest component when all are negative.
        let mut dphi_dq = Vec3::zero();
        if outside > zero {
            dphi_dq = qp / outside;
        } else {
            // Strictly inside: derivative of max(q.x, q.y, q.z).
            let m = q.max_component();
            if q.x == m {
                dphi_dq.x = R::one();
            } else if q.y == m {
                dphi_dq.y = R::one();
            } else {
                dphi_dq.z = R::one();
            }
        }

        // d q / d x = sign(x) componentwise; d q / d h = -1.
        let sgn = Vec3::new(sign(x.x), sign(x.y), sign(x.z));
        let dx = Vec3::new(dphi_dq.x * sgn.x, dphi_dq.y * sgn.y, dphi_dq.z * sgn.z);

        let quarter = R::of(0.25);
        dz[0] = -dphi_dq.x * quarter * sigmoid_prime(z[0]);
        dz[1] = -dphi_dq.y * quarter * sigmoid_prime(z[1]);
        dz[2] = -dphi_dq.z * quarter * sigmoid_prime(z[2]);
        dz[3] = -R::of(0.1) * sigmoid_prime(z[3]);

        let phi = outside + q.max_component().min(zero) - r;
        (phi, dx)
    }
}

#[inline]
fn sign<R: Real>(v: R) -> R {
    if v > R::zero() {
        R::one()
    } else if v < R::zero() {
        -R::one()
    } else {
        R::zero()
    }
}
