//! 3D primitives: vectors, matrices, rotations, similarity transforms, and
//! analytic signed-distance shapes.
//!
//! Sign convention used everywhere in this crate: an SDF is **negative inside**
//! the shape and positive outside. Distances carry the same units as the
//! coordinates they were measured in.
//!
//! Rotations are parameterized by spherical axis-angle coordinates: a unit
//! axis `w = (sin psi cos rho, sin psi sin rho, cos psi)` and an angle `theta`.
//! The rotation matrix is the matrix exponential of the skew matrix `w^ *
//! theta`, evaluated in closed form with Rodrigues' formula. All three partial
//! derivatives of the matrix are available analytically so the parameters can
//! be optimized by plain gradient descent.

mod shapes;

pub use shapes::{rounded_box_sdf, AnalyticShape};

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::real::Real;

/// Column vector in R^3.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<R> {
    pub x: R,
    pub y: R,
    pub z: R,
}

impl<R: Real> Vec3<R> {
    #[inline]
    pub fn new(x: R, y: R, z: R) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3::new(R::zero(), R::zero(), R::zero())
    }

    #[inline]
    pub fn splat(v: R) -> Self {
        Vec3::new(v, v, v)
    }

    #[inline]
    pub fn of(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(R::of(x), R::of(y), R::of(z))
    }

    #[inline]
    pub fn dot(self, o: Self) -> R {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> R {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> R {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(self, o: Self) -> R {
        (self - o).norm()
    }

    /// Unit vector in the same direction; zero vector maps to zero.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > R::zero() {
            self / n
        } else {
            self
        }
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component-wise absolute value.
    #[inline]
    pub fn abs(self) -> Self {
        Vec3::new(self.x.abs(), self.y.abs(), self.z.abs())
    }

    /// Component-wise maximum against a scalar.
    #[inline]
    pub fn max_scalar(self, v: R) -> Self {
        Vec3::new(self.x.max(v), self.y.max(v), self.z.max(v))
    }

    #[inline]
    pub fn max_component(self) -> R {
        self.x.max(self.y).max(self.z)
    }

    #[inline]
    pub fn to_array(self) -> [R; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [R; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl<R: Real> Add for Vec3<R> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<R: Real> AddAssign for Vec3<R> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<R: Real> Sub for Vec3<R> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<R: Real> SubAssign for Vec3<R> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<R: Real> Neg for Vec3<R> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<R: Real> Mul<R> for Vec3<R> {
    type Output = Self;
    #[inline]
    fn mul(self, s: R) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<R: Real> Div<R> for Vec3<R> {
    type Output = Self;
    #[inline]
    fn div(self, s: R) -> Self {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<R> {
    pub m: [[R; 3]; 3],
}

impl<R: Real> Mat3<R> {
    pub fn zero() -> Self {
        Mat3 { m: [[R::zero(); 3]; 3] }
    }

    pub fn identity() -> Self {
        let mut m = Mat3::zero();
        for i in 0..3 {
            m.m[i][i] = R::one();
        }
        m
    }

    pub fn from_rows(r0: [R; 3], r1: [R; 3], r2: [R; 3]) -> Self {
        Mat3 { m: [r0, r1, r2] }
    }

    pub fn from_cols(c0: Vec3<R>, c1: Vec3<R>, c2: Vec3<R>) -> Self {
        Mat3 {
            m: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    /// Skew-symmetric cross-product matrix: `skew(w) * v == w x v`.
    pub fn skew(w: Vec3<R>) -> Self {
        let o = R::zero();
        Mat3::from_rows([o, -w.z, w.y], [w.z, o, -w.x], [-w.y, w.x, o])
    }

    #[inline]
    pub fn transpose(self) -> Self {
        let m = self.m;
        Mat3::from_rows(
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        )
    }

    pub fn det(self) -> R {
        let m = self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(self) -> R {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn col(self, j: usize) -> Vec3<R> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn is_finite(self) -> bool {
        self.m.iter().all(|r| r.iter().all(|v| v.is_finite()))
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(self, other: Self) -> R {
        let mut worst = R::zero();
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        worst
    }
}

impl<R: Real> Mul<Vec3<R>> for Mat3<R> {
    type Output = Vec3<R>;
    #[inline]
    fn mul(self, v: Vec3<R>) -> Vec3<R> {
        let m = self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

impl<R: Real> Mul for Mat3<R> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = R::zero();
                for k in 0..3 {
                    acc = acc + self.m[i][k] * o.m[k][j];
                }
                out.m[i][j] = acc;
            }
        }
        out
    }
}

impl<R: Real> Mul<R> for Mat3<R> {
    type Output = Self;
    fn mul(self, s: R) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = out.m[i][j] * s;
            }
        }
        out
    }
}

impl<R: Real> Add for Mat3<R> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = out.m[i][j] + o.m[i][j];
            }
        }
        out
    }
}

/// Spherical axis-angle rotation parameters.
///
/// `psi` is the polar angle of the rotation axis, `rho` its azimuth, `theta`
/// the rotation angle about that axis. `theta` is only wrapped into
/// `[-pi, pi]` when a final result is reported, never mid-optimization.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RotationParams<R> {
    pub psi: R,
    pub rho: R,
    pub theta: R,
}

impl<R: Real> RotationParams<R> {
    pub fn new(psi: R, rho: R, theta: R) -> Self {
        RotationParams { psi, rho, theta }
    }

    pub fn identity() -> Self {
        RotationParams::new(R::zero(), R::zero(), R::zero())
    }

    /// Axis parameters for a given unit axis (angle left at zero).
    pub fn from_axis(axis: Vec3<R>) -> Self {
        let psi = axis.z.min(R::one()).max(-R::one()).acos();
        let rho = if axis.x == R::zero() && axis.y == R::zero() {
            R::zero()
        } else {
            axis.y.atan2(axis.x)
        };
        RotationParams::new(psi, rho, R::zero())
    }

    pub fn axis(self) -> Vec3<R> {
        axis_from_spherical(self.psi, self.rho)
    }

    pub fn matrix(self) -> Mat3<R> {
        rotation_matrix(self)
    }

    /// Same parameters with `theta` wrapped into `[-pi, pi]`.
    pub fn wrapped(self) -> Self {
        RotationParams::new(self.psi, self.rho, wrap_angle(self.theta))
    }

    pub fn is_finite(self) -> bool {
        self.psi.is_finite() && self.rho.is_finite() && self.theta.is_finite()
    }
}

/// Wrap an angle into `[-pi, pi]`.
pub fn wrap_angle<R: Real>(a: R) -> R {
    let two_pi = R::of(std::f64::consts::TAU);
    let pi = R::of(std::f64::consts::PI);
    let mut w = (a + pi) % two_pi;
    if w < R::zero() {
        w = w + two_pi;
    }
    w - pi
}

/// Unit rotation axis from spherical coordinates.
pub fn axis_from_spherical<R: Real>(psi: R, rho: R) -> Vec3<R> {
    let (sp, cp) = (psi.sin(), psi.cos());
    let (sr, cr) = (rho.sin(), rho.cos());
    Vec3::new(sp * cr, sp * sr, cp)
}

/// Rodrigues' formula: `exp(skew(w) * theta) = I + skew(w) sin(theta) +
/// skew(w)^2 (1 - cos(theta))` for the unit axis described by `rot`.
pub fn rotation_matrix<R: Real>(rot: RotationParams<R>) -> Mat3<R> {
    let w = Mat3::skew(rot.axis());
    let w2 = w * w;
    Mat3::identity() + w * rot.theta.sin() + w2 * (R::one() - rot.theta.cos())
}

/// Analytic partials of [`rotation_matrix`] with respect to `(psi, rho, theta)`.
///
/// Differentiating Rodrigues' formula: the `theta` partial is
/// `skew(w) cos(theta) + skew(w)^2 sin(theta)`, and the axis-angle partials
/// follow from the product rule with `d skew(w)^2 = dW W + W dW`.
pub fn rotation_matrix_partials<R: Real>(rot: RotationParams<R>) -> (Mat3<R>, Mat3<R>, Mat3<R>) {
    let (sp, cp) = (rot.psi.sin(), rot.psi.cos());
    let (sr, cr) = (rot.rho.sin(), rot.rho.cos());
    let (st, ct) = (rot.theta.sin(), rot.theta.cos());
    let one_m_ct = R::one() - ct;

    let w = Mat3::skew(rot.axis());
    let dw_dpsi = Mat3::skew(Vec3::new(cp * cr, cp * sr, -sp));
    let dw_drho = Mat3::skew(Vec3::new(-sp * sr, sp * cr, R::zero()));

    let d_psi = dw_dpsi * st + (dw_dpsi * w + w * dw_dpsi) * one_m_ct;
    let d_rho = dw_drho * st + (dw_drho * w + w * dw_drho) * one_m_ct;
    let d_theta = w * ct + (w * w) * st;
    (d_psi, d_rho, d_theta)
}

/// Recover spherical axis-angle parameters from a rotation matrix (log map).
///
/// Returns a representative with `theta` in `[0, pi]`; near the identity the
/// axis defaults to `+z`.
pub fn rotation_params_from_matrix<R: Real>(r: &Mat3<R>) -> RotationParams<R> {
    let pi = R::of(std::f64::consts::PI);
    let half = R::of(0.5);
    let cos_theta = ((r.trace() - R::one()) * half).min(R::one()).max(-R::one());
    let theta = cos_theta.acos();

    let eps = R::of(1e-7);
    let axis = if theta < eps {
        Vec3::new(R::zero(), R::zero(), R::one())
    } else if pi - theta < eps {
        // theta ~ pi: here (R + I) / 2 = w w^T, so the diagonal gives |w_i|
        // and the symmetric off-diagonals (R_ij + R_ji) / 4 = w_i w_j fix the
        // relative signs; seed from the largest diagonal entry.
        let m = r.m;
        let quarter = R::of(0.25);
        let xx = (m[0][0] + R::one()) * half;
        let yy = (m[1][1] + R::one()) * half;
        let zz = (m[2][2] + R::one()) * half;
        let v = if xx >= yy && xx >= zz {
            let x = xx.max(R::zero()).sqrt().max(eps);
            Vec3::new(x, (m[0][1] + m[1][0]) * quarter / x, (m[0][2] + m[2][0]) * quarter / x)
        } else if yy >= zz {
            let y = yy.max(R::zero()).sqrt().max(eps);
            Vec3::new((m[0][1] + m[1][0]) * quarter / y, y, (m[1][2] + m[2][1]) * quarter / y)
        } else {
            let z = zz.max(R::zero()).sqrt().max(eps);
            Vec3::new((m[0][2] + m[2][0]) * quarter / z, (m[1][2] + m[2][1]) * quarter / z, z)
        };
        v.normalized()
    } else {
        let m = r.m;
        let two = R::of(2.0);
        Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]) / (two * theta.sin())
    };

    let mut p = RotationParams::from_axis(axis);
    p.theta = theta;
    p
}

/// Projects a matrix onto the nearest proper rotation (chordal/Frobenius
/// sense) through its SVD; used to average rotations.
pub fn nearest_rotation<R: Real>(m: &Mat3<R>) -> crate::Result<Mat3<R>> {
    let (mut vals, mut v) = jacobi_eigen_sym3(m.transpose() * *m);
    sort_eigen_desc(&mut vals, &mut v);
    let sing = [
        vals[0].max(R::zero()).sqrt(),
        vals[1].max(R::zero()).sqrt(),
        vals[2].max(R::zero()).sqrt(),
    ];
    let scale_ref = sing[0].max(R::of(1e-300));
    if sing[1] / scale_ref < R::of(1e-9) {
        return Err(crate::Error::Degenerate("rotation projection of a rank-<2 matrix".into()));
    }
    let v0 = v.col(0);
    let v1 = v.col(1);
    let v2 = v0.cross(v1);
    let u0 = (*m * v0) / sing[0];
    let u1 = (*m * v1) / sing[1];
    let u2 = u0.cross(u1);
    let u = Mat3::from_cols(u0, u1, u2);
    let vt = Mat3::from_cols(v0, v1, v2).transpose();
    Ok(u * vt)
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvector columns).
pub(crate) fn jacobi_eigen_sym3<R: Real>(mut a: Mat3<R>) -> ([R; 3], Mat3<R>) {
    let mut v = Mat3::identity();
    for _sweep in 0..50 {
        // Largest off-diagonal element.
        let mut p = 0;
        let mut q = 1;
        let mut biggest = a.m[0][1].abs();
        if a.m[0][2].abs() > biggest {
            p = 0;
            q = 2;
            biggest = a.m[0][2].abs();
        }
        if a.m[1][2].abs() > biggest {
            p = 1;
            q = 2;
            biggest = a.m[1][2].abs();
        }
        let scale = a.m[0][0].abs().max(a.m[1][1].abs()).max(a.m[2][2].abs());
        if biggest <= scale * R::of(1e-17) || biggest == R::zero() {
            break;
        }

        let app = a.m[p][p];
        let aqq = a.m[q][q];
        let apq = a.m[p][q];
        let theta = (aqq - app) / (R::of(2.0) * apq);
        let t = {
            let sign = if theta >= R::zero() { R::one() } else { -R::one() };
            sign / (theta.abs() + (theta * theta + R::one()).sqrt())
        };
        let c = R::one() / (t * t + R::one()).sqrt();
        let s = t * c;

        // A <- J^T A J with the rotation in the (p, q) plane.
        for k in 0..3 {
            let akp = a.m[k][p];
            let akq = a.m[k][q];
            a.m[k][p] = c * akp - s * akq;
            a.m[k][q] = s * akp + c * akq;
        }
        for k in 0..3 {
            let apk = a.m[p][k];
            let aqk = a.m[q][k];
            a.m[p][k] = c * apk - s * aqk;
            a.m[q][k] = s * apk + c * aqk;
        }
        for k in 0..3 {
            let vkp = v.m[k][p];
            let vkq = v.m[k][q];
            v.m[k][p] = c * vkp - s * vkq;
            v.m[k][q] = s * vkp + c * vkq;
        }
    }
    ([a.m[0][0], a.m[1][1], a.m[2][2]], v)
}

pub(crate) fn sort_eigen_desc<R: Real>(vals: &mut [R; 3], v: &mut Mat3<R>) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).expect("finite eigenvalues"));
    let old_vals = *vals;
    let old_v = *v;
    for (new_i, &old_i) in order.iter().enumerate() {
        vals[new_i] = old_vals[old_i];
        for r in 0..3 {
            v.m[r][new_i] = old_v.m[r][old_i];
        }
    }
    // Keep det(V) = +1 so downstream sign logic is stable.
    if v.det() < R::zero() {
        for r in 0..3 {
            v.m[r][2] = -v.m[r][2];
        }
    }
}

/// A 3D similarity transform `g(x) = s R x + t` with isotropic scale `s > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityTransform<R> {
    pub scale: R,
    pub rot: RotationParams<R>,
    pub translation: Vec3<R>,
}

impl<R: Real> SimilarityTransform<R> {
    pub fn new(scale: R, rot: RotationParams<R>, translation: Vec3<R>) -> Self {
        SimilarityTransform { scale, rot, translation }
    }

    pub fn identity() -> Self {
        SimilarityTransform::new(R::one(), RotationParams::identity(), Vec3::zero())
    }

    /// Forward map `g(x) = s R x + t`.
    pub fn apply(&self, x: Vec3<R>) -> Vec3<R> {
        self.rot.matrix() * x * self.scale + self.translation
    }

    /// Inverse map `g^-1(x) = R^T (x - t) / s`.
    ///
    /// The rotation inverse is the transpose, never a matrix inversion.
    pub fn inverse_warp(&self, x: Vec3<R>) -> crate::Result<Vec3<R>> {
        if self.scale <= R::zero() {
            return Err(crate::Error::InvalidParameter(format!(
                "similarity transform scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(self.rot.matrix().transpose() * (x - self.translation) / self.scale)
    }

    /// 4x4 homogeneous matrix `[[sR, t], [0, 1]]`, row-major.
    pub fn to_homogeneous(&self) -> [[R; 4]; 4] {
        let m = self.rot.matrix();
        let s = self.scale;
        let t = self.translation;
        [
            [m.m[0][0] * s, m.m[0][1] * s, m.m[0][2] * s, t.x],
            [m.m[1][0] * s, m.m[1][1] * s, m.m[1][2] * s, t.y],
            [m.m[2][0] * s, m.m[2][1] * s, m.m[2][2] * s, t.z],
            [R::zero(), R::zero(), R::zero(), R::one()],
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.scale.is_finite() && self.rot.is_finite() && self.translation.is_finite()
    }
}

/// `Phi(g(x), g(S)) = s Phi(x, S)`: signed distance of a similarity-transformed
/// shape, evaluated by pulling the query point back to the canonical frame.
pub fn transformed_sdf<R: Real>(
    shape: &AnalyticShape<R>,
    g: &SimilarityTransform<R>,
    x: Vec3<R>,
) -> crate::Result<R> {
    Ok(g.scale * shape.sdf(g.inverse_warp(x)?))
}
