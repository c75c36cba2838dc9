//! Ground-truth and initialization sampling for the synthetic benchmark.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::fit::FitParams;
use crate::geom::{RotationParams, Vec3};
use crate::latent::LatentCode;
use crate::real::Real;

/// Half-open interval `[lo, hi)`; `lo == hi` collapses to the point `lo`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "range bounds out of order: [{lo}, {hi})");
        Range { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Range { lo: v, hi: v }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.hi > self.lo {
            rng.random_range(self.lo..self.hi)
        } else {
            self.lo
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        if self.hi > self.lo {
            v >= self.lo && v < self.hi
        } else {
            v == self.lo
        }
    }
}

/// Sampling ranges for one benchmark scenario: how ground truth is drawn and
/// how far the initialization may sit from it.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    /// Ground truth: scale uniform over this range.
    pub truth_scale: Range,
    /// Ground truth: each rotation angle uniform over this range.
    pub truth_angles: Range,
    /// Ground truth: translation magnitude (direction uniform on the sphere).
    pub truth_translation_norm: Range,
    /// Ground-truth latent code components drawn uniformly from this range.
    pub truth_code: Range,
    /// Relative scale offset: `s0 = s (1 + delta)`.
    pub delta_scale: Range,
    /// Axis perturbations; `None` means the axis is known and copied exactly.
    pub delta_psi: Option<Range>,
    pub delta_rho: Option<Range>,
    pub delta_theta: Range,
    /// Translation offset magnitude (direction uniform on the sphere).
    pub delta_translation_norm: Range,
    /// Initialization codes are drawn from `Normal(0, sigma^2 I)`.
    pub code_sigma: f64,
    pub shapes: usize,
    pub trials: usize,
    pub seed: u64,
}

const PI: f64 = std::f64::consts::PI;

impl ScenarioConfig {
    fn base(name: &str) -> Self {
        ScenarioConfig {
            name: name.into(),
            truth_scale: Range::new(0.5, 2.0),
            truth_angles: Range::new(-PI, PI),
            truth_translation_norm: Range::new(0.0, 4.0),
            truth_code: Range::new(-1.5, 1.5),
            delta_scale: Range::new(0.0, 0.3),
            delta_psi: None,
            delta_rho: None,
            delta_theta: Range::new(-PI / 9.0, PI / 9.0),
            delta_translation_norm: Range::new(0.0, 0.15),
            code_sigma: 0.01,
            shapes: 5,
            trials: 10,
            seed: 0,
        }
    }

    /// Known rotation axis: `ds in [0, 0.3)`, `dtheta in [-pi/9, pi/9)`,
    /// `|dt| in [0, 0.15)`.
    pub fn known_axis() -> Self {
        Self::base("known-axis")
    }

    /// Unknown rotation axis: adds `dpsi, drho in [-pi/36, pi/36)`.
    pub fn unknown_axis() -> Self {
        ScenarioConfig {
            name: "unknown-axis".into(),
            delta_psi: Some(Range::new(-PI / 36.0, PI / 36.0)),
            delta_rho: Some(Range::new(-PI / 36.0, PI / 36.0)),
            ..Self::base("unknown-axis")
        }
    }

    /// Wider known-axis ranges: `ds in [0, 0.5)`, `dtheta in [-2pi/9, 2pi/9)`,
    /// `|dt| in [0, 0.20)`.
    pub fn supp_known_axis() -> Self {
        ScenarioConfig {
            delta_scale: Range::new(0.0, 0.5),
            delta_theta: Range::new(-2.0 * PI / 9.0, 2.0 * PI / 9.0),
            delta_translation_norm: Range::new(0.0, 0.20),
            ..Self::base("supp-known-axis")
        }
    }

    /// Wider unknown-axis ranges.
    pub fn supp_unknown_axis() -> Self {
        ScenarioConfig {
            delta_psi: Some(Range::new(-PI / 36.0, PI / 36.0)),
            delta_rho: Some(Range::new(-PI / 36.0, PI / 36.0)),
            delta_scale: Range::new(0.0, 0.5),
            delta_theta: Range::new(-2.0 * PI / 9.0, 2.0 * PI / 9.0),
            delta_translation_norm: Range::new(0.0, 0.20),
            ..Self::base("supp-unknown-axis")
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "known-axis" => Some(Self::known_axis()),
            "unknown-axis" => Some(Self::unknown_axis()),
            "supp-known-axis" => Some(Self::supp_known_axis()),
            "supp-unknown-axis" => Some(Self::supp_unknown_axis()),
            _ => None,
        }
    }

    pub fn is_known_axis(&self) -> bool {
        self.delta_psi.is_none() && self.delta_rho.is_none()
    }
}

/// The raw offsets drawn for one initialization.
#[derive(Clone, Copy, Debug, Default)]
pub struct Deltas {
    pub scale: f64,
    pub psi: f64,
    pub rho: f64,
    pub theta: f64,
    pub translation: [f64; 3],
}

/// One full scenario draw: ground truth, the initialization derived from it,
/// and the offsets used.
#[derive(Clone, Debug)]
pub struct ScenarioSample<R> {
    pub truth: FitParams<R>,
    pub init: FitParams<R>,
    pub deltas: Deltas,
}

fn unit_direction(rng: &mut ChaCha8Rng) -> Vec3<f64> {
    loop {
        let v = Vec3::of(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-6 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Draws ground truth uniformly over the configured ranges and an
/// initialization offset per the scenario row: `s0 = s (1 + ds)`, additive
/// angle offsets (axis copied exactly when known), a translation offset of
/// bounded norm with uniform direction, and a small-normal init code.
pub fn sample_scenario<R: Real>(
    cfg: &ScenarioConfig,
    code_dim: usize,
    seed: u64,
) -> ScenarioSample<R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let scale = cfg.truth_scale.sample(&mut rng);
    let rot = RotationParams::new(
        cfg.truth_angles.sample(&mut rng),
        cfg.truth_angles.sample(&mut rng),
        cfg.truth_angles.sample(&mut rng),
    );
    let t_norm = cfg.truth_translation_norm.sample(&mut rng);
    let t_dir = unit_direction(&mut rng);
    let code: Vec<f64> = (0..code_dim).map(|_| cfg.truth_code.sample(&mut rng)).collect();
    let truth = FitParams::new(
        R::of(scale),
        RotationParams::new(R::of(rot.psi), R::of(rot.rho), R::of(rot.theta)),
        Vec3::from_array((t_dir * t_norm).to_array().map(R::of)),
        LatentCode::from_vec(code.iter().map(|&v| R::of(v)).collect()),
    );

    let deltas = Deltas {
        scale: cfg.delta_scale.sample(&mut rng),
        psi: cfg.delta_psi.map_or(0.0, |r| r.sample(&mut rng)),
        rho: cfg.delta_rho.map_or(0.0, |r| r.sample(&mut rng)),
        theta: cfg.delta_theta.sample(&mut rng),
        translation: {
            let n = cfg.delta_translation_norm.sample(&mut rng);
            let d = unit_direction(&mut rng);
            (d * n).to_array()
        },
    };
    let init_code: Vec<R> = (0..code_dim)
        .map(|_| {
            let n: f64 = rng.sample(StandardNormal);
            R::of(n * cfg.code_sigma)
        })
        .collect();

    let mut init = truth.clone();
    init.scale = truth.scale * (R::one() + R::of(deltas.scale));
    init.rot.psi = truth.rot.psi + R::of(deltas.psi);
    init.rot.rho = truth.rot.rho + R::of(deltas.rho);
    init.rot.theta = truth.rot.theta + R::of(deltas.theta);
    init.translation = truth.translation + Vec3::from_array(deltas.translation.map(R::of));
    init.code = LatentCode::from_vec(init_code);

    ScenarioSample { truth, init, deltas }
}
