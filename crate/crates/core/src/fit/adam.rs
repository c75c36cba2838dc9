//! Adam with bias correction over a flat parameter slice.

use crate::error::{Error, Result};
use crate::real::Real;

/// First/second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState<R> {
    m: Vec<R>,
    v: Vec<R>,
    t: i32,
    beta1: R,
    beta2: R,
    epsilon: R,
}

impl<R: Real> AdamState<R> {
    pub fn new(len: usize, beta1: R, beta2: R, epsilon: R) -> Self {
        AdamState { m: vec![R::zero(); len], v: vec![R::zero(); len], t: 0, beta1, beta2, epsilon }
    }

    /// Standard values `(0.9, 0.999, 1e-8)`.
    pub fn with_defaults(len: usize) -> Self {
        AdamState::new(len, R::of(0.9), R::of(0.999), R::of(1e-8))
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    /// One update: `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`, then the
    /// bias-corrected step `p <- p - lr * m_hat / (sqrt(v_hat) + eps)`.
    ///
    /// A parameter whose gradient is identically zero never moves (its
    /// moments stay exactly zero), which is what keeps frozen parameters
    /// bitwise intact.
    pub fn step(&mut self, params: &mut [R], grads: &[R], lr: R) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::DimensionMismatch { expected: self.m.len(), actual: grads.len() });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("non-finite gradient in Adam step".into()));
        }
        self.t += 1;
        let one = R::one();
        let bc1 = one - self.beta1.powi(self.t);
        let bc2 = one - self.beta2.powi(self.t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
        Ok(())
    }
}
