//! The storage-versus-fidelity comparison: compact latent+matrix blobs
//! against vertex-clustered meshes.

use crate::error::Result;
use crate::geom::SimilarityTransform;
use crate::latent::LatentCode;
use crate::mesh::{obj_string, vertex_clustering, TriangleMesh};
use crate::metrics::{bounding_sphere, f_score, FScoreConfig};
use crate::real::Real;
use crate::sampling::sample_surface;

use super::serialize_compact;

/// One fitted shape: the compact representation and the meshes it is judged
/// against.
#[derive(Clone, Debug)]
pub struct CompressionCase<R> {
    pub code: LatentCode<R>,
    pub transform: SimilarityTransform<R>,
    /// Decoded estimate (what the compact representation reproduces).
    pub fit_mesh: TriangleMesh<R>,
    /// The original mesh every method is compared against.
    pub reference_mesh: TriangleMesh<R>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompressionRow {
    pub method: String,
    pub mean_f: f64,
    pub mean_size_kb: f64,
}

/// Per method: mean F-score against the reference meshes and mean stored
/// size. The compact row stores exactly `4 d + 64` bytes per shape; mesh rows
/// store OBJ bytes of the vertex-clustered reference (cell sizes are the
/// given fractions of each reference's bounding-sphere radius).
pub fn run_compression_experiment<R: Real>(
    cases: &[CompressionCase<R>],
    cell_fractions: &[f64],
    fscore: &FScoreConfig<R>,
) -> Result<Vec<CompressionRow>> {
    if cases.is_empty() {
        return Err(crate::Error::EmptyInput("compression cases"));
    }
    let mut rows = Vec::with_capacity(1 + cell_fractions.len());

    let mut f_sum = 0.0;
    let mut size_sum = 0usize;
    for c in cases {
        let report = f_score(&c.fit_mesh, &c.reference_mesh, fscore)?;
        f_sum += report.f.as_f64();
        size_sum += serialize_compact(&c.code, &c.transform).len();
    }
    rows.push(CompressionRow {
        method: "compact".into(),
        mean_f: f_sum / cases.len() as f64,
        mean_size_kb: size_sum as f64 / cases.len() as f64 / 1000.0,
    });

    for &fraction in cell_fractions {
        let mut f_sum = 0.0;
        let mut size_sum = 0usize;
        for c in cases {
            let pts = sample_surface(&c.reference_mesh, 2000, 17)?;
            let radius = bounding_sphere(&pts.points)?.radius;
            let cell = radius * R::of(fraction);
            let simplified = vertex_clustering(&c.reference_mesh, cell);
            let report = f_score(&simplified, &c.reference_mesh, fscore)?;
            f_sum += report.f.as_f64();
            size_sum += obj_string(&simplified).len();
        }
        rows.push(CompressionRow {
            method: format!("vc-{fraction}"),
            mean_f: f_sum / cases.len() as f64,
            mean_size_kb: size_sum as f64 / cases.len() as f64 / 1000.0,
        });
    }
    Ok(rows)
}

pub fn compression_csv(rows: &[CompressionRow]) -> String {
    let mut out = String::from("method,mean_f,mean_size_kb\n");
    for r in rows {
        out.push_str(&format!("{},{:.6},{:.6}\n", r.method, r.mean_f, r.mean_size_kb));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::mesh::{marching_cubes, GridSpec};

    fn sphere_case() -> CompressionCase<f64> {
        let mesh = marching_cubes(|x: Vec3<f64>| x.norm() - 0.47, &GridSpec::canonical(40));
        CompressionCase {
            code: LatentCode::zeros(16),
            transform: SimilarityTransform::identity(),
            fit_mesh: mesh.clone(),
            reference_mesh: mesh,
        }
    }

    #[test]
    fn clustering_fidelity_decreases_with_cell_size() {
        let cases = vec![sphere_case()];
        let rows = run_compression_experiment(
            &cases,
            &[0.1, 0.2],
            &FScoreConfig { samples: 8000, ..Default::default() },
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].method, "compact");
        // Identical fit and reference meshes: compact F is exactly 1.
        assert!(rows[0].mean_f >= 0.999);
        assert_eq!(rows[0].mean_size_kb, (4.0 * 16.0 + 64.0) / 1000.0);
        let vc01 = &rows[1];
        let vc02 = &rows[2];
        assert!(
            vc01.mean_f > vc02.mean_f,
            "vc-0.1 ({}) should beat vc-0.2 ({})",
            vc01.mean_f,
            vc02.mean_f
        );
        assert!(vc01.mean_size_kb > vc02.mean_size_kb);
    }

    #[test]
    fn empty_fraction_list_gives_only_the_compact_row() {
        let cases = vec![sphere_case()];
        let rows =
            run_compression_experiment(&cases, &[], &FScoreConfig::default()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].method, "compact");
    }
}
