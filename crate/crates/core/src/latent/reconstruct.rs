//! Latent-only shape estimation in the canonical frame.

use crate::error::Result;
use crate::fit::{fit, FitConfig, FitParams, FrozenMask};
use crate::real::Real;
use crate::sampling::SdfSample;

use super::{LatentCode, LatentSdf};

/// Estimates the latent code explaining canonical-frame SDF samples by
/// minimizing `sum_i |f(x_i, z) - phi_i| + prior_weight |z|^2` with Adam; the
/// transform stays at the identity.
///
/// The returned code never scores worse than `z0` on the full objective: if
/// the optimizer's best iterate loses to the start (possible when `z0` is
/// already a zero-residual point and only the prior pushes), `z0` itself is
/// returned.
pub fn reconstruct_latent<R: Real>(
    space: &dyn LatentSdf<R>,
    samples: &[SdfSample<R>],
    z0: &LatentCode<R>,
    cfg: &FitConfig<R>,
) -> Result<LatentCode<R>> {
    let mut cfg = cfg.clone();
    cfg.frozen = FrozenMask::code_only();
    cfg.meshing = None;

    let init = FitParams::new(
        R::one(),
        crate::geom::RotationParams::identity(),
        crate::geom::Vec3::zero(),
        z0.clone(),
    );
    let result = fit(space, samples, &init, &cfg)?;

    // Full-set comparison, not a minibatch.
    let full_at = |code: &LatentCode<R>| -> Result<R> {
        let mut p = init.clone();
        p.code = code.clone();
        crate::fit::objective(space, &p, samples, cfg.prior_weight, cfg.clamp_delta)
    };
    let candidate = result.params.code;
    if full_at(&candidate)? <= full_at(z0)? {
        Ok(candidate)
    } else {
        Ok(z0.clone())
    }
}
