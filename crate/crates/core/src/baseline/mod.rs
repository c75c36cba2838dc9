//! Classical retrieve-then-register comparison pipeline: chamfer retrieval,
//! bounding-sphere coarse alignment, and an ICP variant whose correspondence
//! step solves an optimal one-to-one assignment.

mod hungarian;
mod icp;
mod umeyama;

pub use hungarian::{hungarian, CostMatrix};
pub use icp::{assignment_icp, coarse_init, AssignmentIcpReport};
pub use umeyama::umeyama;

use crate::error::{Error, Result};
use crate::geom::{SimilarityTransform, Vec3};
use crate::metrics::{bounding_sphere, chamfer, f_score, FScoreConfig, FScoreReport};
use crate::mesh::TriangleMesh;
use crate::real::Real;
use crate::sampling::{sample_surface, SurfacePointSet};

/// One-to-one index pairs between a source and a destination point set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Correspondences {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondences {
    /// Checks the one-to-one invariant (no repeated source or destination).
    pub fn is_one_to_one(&self) -> bool {
        let mut src: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        let mut dst: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        src.sort_unstable();
        dst.sort_unstable();
        src.windows(2).all(|w| w[0] != w[1]) && dst.windows(2).all(|w| w[0] != w[1])
    }
}

/// A canonical-pose shape the retrieval stage can return.
#[derive(Clone, Debug)]
pub struct CatalogShape<R> {
    pub id: String,
    pub mesh: TriangleMesh<R>,
    pub surface: SurfacePointSet<R>,
}

impl<R: Real> CatalogShape<R> {
    pub fn from_mesh(id: impl Into<String>, mesh: TriangleMesh<R>, points: usize, seed: u64) -> Result<Self> {
        let surface = sample_surface(&mesh, points, seed)?;
        Ok(CatalogShape { id: id.into(), mesh, surface })
    }
}

/// Returns the catalog index whose shape is nearest to the query under the
/// chamfer distance, after normalizing the query's bounding sphere onto the
/// candidate's (scale and center). Ties break toward the lower index, and the
/// catalog is expected to be sorted by id for a stable tie rule.
pub fn retrieve_by_chamfer<R: Real>(
    query: &SurfacePointSet<R>,
    catalog: &[CatalogShape<R>],
) -> Result<usize> {
    if catalog.is_empty() {
        return Err(Error::EmptyInput("retrieval catalog"));
    }
    if query.is_empty() {
        return Err(Error::EmptyInput("retrieval query points"));
    }
    let qbs = bounding_sphere(&query.points)?;
    if !(qbs.radius > R::zero()) {
        return Err(Error::Degenerate("query has zero bounding radius".into()));
    }

    let mut best = 0usize;
    let mut best_cost = R::infinity();
    for (i, entry) in catalog.iter().enumerate() {
        let ebs = bounding_sphere(&entry.surface.points)?;
        if !(ebs.radius > R::zero()) {
            return Err(Error::Degenerate(format!("catalog shape {:?} has zero radius", entry.id)));
        }
        let scale = ebs.radius / qbs.radius;
        let normalized: Vec<Vec3<R>> = query
            .points
            .iter()
            .map(|p| (*p - qbs.center) * scale + ebs.center)
            .collect();
        let cost = chamfer(
            &SurfacePointSet::from_points(normalized),
            &entry.surface,
        )?;
        if cost < best_cost {
            best_cost = cost;
            best = i;
        }
    }
    Ok(best)
}

/// Settings for the full retrieve + register baseline.
#[derive(Clone, Debug)]
pub struct BaselineConfig<R> {
    /// Points per shape inside assignment ICP (the assignment is cubic).
    pub icp_points: usize,
    /// Iterations per resampled stage.
    pub icp_iterations: usize,
    /// Warm-started stages, each on a fresh sample draw. A single sparse draw
    /// pins the alignment to its own realization; averaging the later stage
    /// outputs cancels most of that.
    pub icp_stages: usize,
    /// Stages excluded from the average while still approaching the optimum.
    pub icp_burn_in: usize,
    /// Rotation-angle grid step for the coarse initialization.
    pub coarse_grid_step_deg: f64,
    pub fscore: FScoreConfig<R>,
    pub seed: u64,
}

impl<R: Real> Default for BaselineConfig<R> {
    fn default() -> Self {
        BaselineConfig {
            icp_points: 256,
            icp_iterations: 12,
            icp_stages: 8,
            icp_burn_in: 2,
            coarse_grid_step_deg: 20.0,
            fscore: FScoreConfig::default(),
            seed: 0,
        }
    }
}

/// Retrieval followed by coarse alignment and staged assignment ICP; the
/// returned F-score compares the transformed catalog mesh against the query
/// mesh.
pub fn baseline_pipeline<R: Real>(
    query_mesh: &TriangleMesh<R>,
    catalog: &[CatalogShape<R>],
    axis: Vec3<R>,
    cfg: &BaselineConfig<R>,
) -> Result<(usize, SimilarityTransform<R>, FScoreReport<R>)> {
    let query_surface = sample_surface(query_mesh, 4000, cfg.seed ^ 0x51)?;
    let retrieved = retrieve_by_chamfer(&query_surface, catalog)?;
    let member = &catalog[retrieved];

    let init = coarse_init(&query_surface, &member.surface, axis, cfg.coarse_grid_step_deg)?;

    let mut current = init;
    let mut kept = R::zero();
    let mut scale_sum = R::zero();
    let mut rot_sum = crate::geom::Mat3::zero();
    let mut t_sum = Vec3::zero();
    for stage in 0..cfg.icp_stages.max(1) {
        let seed = crate::seed::derive_seed(cfg.seed, 0xba5e + stage as u64);
        let m_icp = sample_surface(&member.mesh, cfg.icp_points, seed ^ 0x53)?;
        let q_icp = sample_surface(query_mesh, cfg.icp_points, seed ^ 0x52)?;
        let refined = assignment_icp(&m_icp, &q_icp, &current, cfg.icp_iterations)?;
        current = refined.transform;
        if stage >= cfg.icp_burn_in || stage + 1 == cfg.icp_stages.max(1) {
            scale_sum = scale_sum + current.scale;
            rot_sum = rot_sum + current.rot.matrix();
            t_sum += current.translation;
            kept = kept + R::one();
        }
    }
    // Chordal mean of the stage rotations: average matrix projected back
    // onto SO(3).
    let mean_rot = crate::geom::nearest_rotation(&(rot_sum * (R::one() / kept)))?;
    let fitted = SimilarityTransform::new(
        scale_sum / kept,
        crate::geom::rotation_params_from_matrix(&mean_rot),
        t_sum / kept,
    );

    let mut est_mesh = member.mesh.clone();
    est_mesh.map_vertices(|v| fitted.apply(v));
    let report = f_score(&est_mesh, query_mesh, &cfg.fscore)?;
    Ok((retrieved, fitted, report))
}
