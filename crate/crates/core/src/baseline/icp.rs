//! Coarse similarity initialization and assignment ICP.

use crate::error::{Error, Result};
use crate::geom::{RotationParams, SimilarityTransform, Vec3};
use crate::metrics::bounding_sphere;
use crate::real::Real;
use crate::sampling::{KdTree, SurfacePointSet};

use super::{hungarian, umeyama, CostMatrix};

/// Bounding-sphere alignment plus a rotation-angle sweep about a known axis.
///
/// Scale is the ratio of bounding-sphere radii; translation is chosen so the
/// transformed match center lands on the test center; the angle comes from an
/// 18-step grid (default 20 degrees) minimizing the maximum nearest-neighbor
/// distance from transformed match points to the test set.
pub fn coarse_init<R: Real>(
    test: &SurfacePointSet<R>,
    matched: &SurfacePointSet<R>,
    axis: Vec3<R>,
    grid_step_deg: f64,
) -> Result<SimilarityTransform<R>> {
    if test.is_empty() || matched.is_empty() {
        return Err(Error::EmptyInput("coarse init point sets"));
    }
    if !(grid_step_deg > 0.0 && grid_step_deg <= 360.0) {
        return Err(Error::InvalidParameter(format!("bad grid step {grid_step_deg} degrees")));
    }
    let test_bs = bounding_sphere(&test.points)?;
    let match_bs = bounding_sphere(&matched.points)?;
    if !(match_bs.radius > R::zero()) {
        return Err(Error::Degenerate("match shape has zero bounding radius".into()));
    }
    let scale = test_bs.radius / match_bs.radius;
    let axis_rot = RotationParams::from_axis(axis.normalized());

    let tree = KdTree::build(&test.points)?;
    let n_angles = (360.0 / grid_step_deg).round() as usize;
    let mut best: Option<(R, SimilarityTransform<R>)> = None;
    for k in 0..n_angles {
        let theta = R::of((k as f64) * grid_step_deg * std::f64::consts::PI / 180.0);
        let rot = RotationParams::new(axis_rot.psi, axis_rot.rho, theta);
        // Translation so the transformed match center equals the test center.
        let t = test_bs.center - rot.matrix() * match_bs.center * scale;
        let g = SimilarityTransform::new(scale, rot, t);
        let worst = matched
            .points
            .iter()
            .map(|p| tree.nearest(g.apply(*p)).1)
            .fold(R::zero(), |a, b| a.max(b));
        if best.as_ref().map_or(true, |(score, _)| worst < *score) {
            best = Some((worst, g));
        }
    }
    Ok(best.expect("at least one grid angle").1)
}

/// Iteration log of [`assignment_icp`].
#[derive(Clone, Debug)]
pub struct AssignmentIcpReport<R> {
    pub transform: SimilarityTransform<R>,
    /// Total matched cost per accepted iteration; non-increasing.
    pub objectives: Vec<R>,
    pub iterations_run: usize,
}

/// ICP with optimal-assignment correspondences: per iteration the transformed
/// source is matched one-to-one against the destination by the Hungarian
/// algorithm and the similarity re-estimated in closed form. One-to-one
/// matching is what keeps the scale from collapsing.
///
/// Assignment costs are squared Euclidean distances, so both the matching and
/// the closed-form update minimize the same functional and the alternation
/// descends monotonically. A proposal that would still increase the matched
/// cost (numerically) is rejected and iteration stops, so the recorded
/// objective sequence is non-increasing by construction.
pub fn assignment_icp<R: Real>(
    src: &SurfacePointSet<R>,
    dst: &SurfacePointSet<R>,
    init: &SimilarityTransform<R>,
    iterations: usize,
) -> Result<AssignmentIcpReport<R>> {
    if src.is_empty() || dst.is_empty() {
        return Err(Error::EmptyInput("assignment ICP point sets"));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("assignment ICP needs at least one iteration".into()));
    }
    // Equal-size sets: strided subsample of the larger one.
    let n = src.len().min(dst.len());
    let take = |set: &SurfacePointSet<R>| -> Vec<Vec3<R>> {
        let stride = set.len() as f64 / n as f64;
        (0..n)
            .map(|i| set.points[(i as f64 * stride) as usize])
            .collect()
    };
    let src_pts = take(src);
    let dst_pts = take(dst);

    let matched_cost = |g: &SimilarityTransform<R>| -> Result<(R, Vec<(usize, usize)>)> {
        let cost = CostMatrix::from_fn(n, n, |i, j| {
            (g.apply(src_pts[i]) - dst_pts[j]).norm_squared()
        })?;
        let (corr, total) = hungarian(&cost)?;
        Ok((total, corr.pairs))
    };

    let mut current = *init;
    let (mut current_cost, mut pairs) = matched_cost(&current)?;
    let mut objectives = vec![current_cost];
    let mut accepted = 0usize;

    for it in 0..iterations {
        let proposal = umeyama(&src_pts, &dst_pts, &pairs).map_err(|e| {
            Error::Degenerate(format!("registration failed at ICP iteration {it}: {e}"))
        })?;
        let (proposal_cost, proposal_pairs) = matched_cost(&proposal)?;
        if proposal_cost > current_cost + R::of(1e-9) {
            break; // accepting would increase the matched cost
        }
        current = proposal;
        current_cost = proposal_cost;
        pairs = proposal_pairs;
        objectives.push(current_cost);
        accepted += 1;
        // Converged when the cost stops moving.
        if objectives.len() >= 2 {
            let prev = objectives[objectives.len() - 2];
            if (prev - current_cost).abs() < R::of(1e-12) {
                break;
            }
        }
    }

    Ok(AssignmentIcpReport { transform: current, objectives, iterations_run: accepted })
}
