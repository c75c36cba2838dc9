//! Reproducible experiment drivers: the synthetic recovery benchmark, the
//! joint-fit versus retrieve-and-register comparison, and the compression
//! study, plus their CSV emitters.
//!
//! Every trial derives its own RNG stream from the base seed and its case id,
//! and results are collected by case index, so output never depends on how
//! many workers ran.

mod compact;
mod compression;
mod config;
mod procedural;
mod scenario;

pub use compact::{deserialize_compact, serialize_compact};
pub use compression::{compression_csv, run_compression_experiment, CompressionCase, CompressionRow};
pub use config::{parse_config, scenario_from_config};
pub use procedural::{build_library, procedural_shapes};
pub use scenario::{sample_scenario, Range, ScenarioConfig, ScenarioSample};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{fit, fit_with_theta_grid, FitConfig, FitParams, FrozenMask, PartialInit};
use crate::geom::Vec3;
use crate::latent::{AnalyticFamily, LatentCode, LatentSdf};
use crate::mesh::{extract_shape, GridSpec};
use crate::metrics::{bounding_sphere, f_score, rotation_error, FScoreConfig};
use crate::real::Real;
use crate::sampling::{region_for_transform, sample_latent_sdf, sample_surface, FieldSampleCounts};
use crate::seed::derive_seed;
use rand::SeedableRng;

/// Execution knobs shared by the benchmark drivers.
#[derive(Clone, Debug)]
pub struct RunConfig<R> {
    pub fit: FitConfig<R>,
    /// Resolution of ground-truth and estimate extractions.
    pub mesh_resolution: usize,
    /// Surface samples per mesh in F-score evaluations. Desk-scale shapes are
    /// small, so this sits well above the paper's 3000 to keep the
    /// point-sampling noise floor out of the score.
    pub fscore_samples: usize,
    /// Query SDF sample counts per shape.
    pub query_samples: FieldSampleCounts,
}

impl<R: Real> Default for RunConfig<R> {
    fn default() -> Self {
        RunConfig {
            fit: FitConfig { meshing: Some(GridSpec::canonical(48)), ..Default::default() },
            mesh_resolution: 48,
            fscore_samples: 12_000,
            query_samples: FieldSampleCounts { near_surface: 20_000, uniform: 8_000, seed: 0 },
        }
    }
}

/// One benchmark trial.
#[derive(Clone, Debug)]
pub struct BenchmarkRecord<R> {
    pub case_id: usize,
    pub scenario: String,
    pub shape: usize,
    pub trial: usize,
    pub truth: FitParams<R>,
    pub init: FitParams<R>,
    /// `None` when the fit failed; the error text lands in `status`.
    pub final_params: Option<FitParams<R>>,
    pub f_score: Option<R>,
    pub rotation_error: Option<R>,
    pub status: String,
    pub wall: std::time::Duration,
}

/// Box-plot feed: for each F-score bin, statistics of the per-pair trial
/// counts falling into that bin.
#[derive(Clone, Debug)]
pub struct BinnedSummary {
    pub edges: Vec<f64>,
    /// One row per bin: (min, q1, median, q3, max) of counts across pairs.
    pub count_stats: Vec<[f64; 5]>,
}

pub struct SynthBenchmark<R> {
    pub records: Vec<BenchmarkRecord<R>>,
    pub summary: BinnedSummary,
}

/// Runs the synthetic recovery benchmark on the analytic family: per shape a
/// ground-truth pose and exact SDF samples, per trial a perturbed
/// initialization per the scenario ranges, one fit each, scored against the
/// ground-truth extraction.
pub fn run_synth_benchmark<R: Real>(
    scenario: &ScenarioConfig,
    run: &RunConfig<R>,
) -> Result<SynthBenchmark<R>> {
    let space = AnalyticFamily;
    let dim = LatentSdf::<R>::dim(&space);
    let grid = GridSpec::canonical(run.mesh_resolution);

    // Per-shape artifacts, built in parallel but indexed deterministically.
    struct ShapeCase<R> {
        truth: FitParams<R>,
        samples: Vec<crate::sampling::SdfSample<R>>,
        gt_mesh: crate::mesh::TriangleMesh<R>,
    }
    let shape_cases: Vec<Result<ShapeCase<R>>> = (0..scenario.shapes)
        .into_par_iter()
        .map(|shape_idx| {
            let truth = sample_scenario::<R>(
                scenario,
                dim,
                derive_seed(scenario.seed, 0x5000 + shape_idx as u64),
            )
            .truth;
            let g = truth.transform();
            let radius = AnalyticFamily::bounding_radius(&truth.code);
            let (lo, hi) = region_for_transform(radius, &g, R::of(0.35));
            let mut counts = run.query_samples;
            counts.seed = derive_seed(scenario.seed, 0x6000 + shape_idx as u64);
            let samples = sample_latent_sdf(&space, &truth.code, &g, lo, hi, &counts)?;
            let gt_mesh = extract_shape(&space, &truth.code, &g, &grid)?;
            Ok(ShapeCase { truth, samples, gt_mesh })
        })
        .collect();
    let mut shapes = Vec::with_capacity(scenario.shapes);
    for s in shape_cases {
        shapes.push(s?);
    }

    let n_cases = scenario.shapes * scenario.trials;
    let records: Vec<BenchmarkRecord<R>> = (0..n_cases)
        .into_par_iter()
        .map(|case_id| {
            let shape_idx = case_id / scenario.trials;
            let trial = case_id % scenario.trials;
            let sc = &shapes[shape_idx];
            let start = std::time::Instant::now();

            // Re-draw the scenario with the trial stream: the truth part is
            // discarded (the shape's own truth stays), only the deltas and
            // code noise differ per trial.
            let trial_draw = sample_scenario::<R>(
                scenario,
                dim,
                derive_seed(scenario.seed, 0x7000 + case_id as u64),
            );
            let init = apply_deltas(&sc.truth, &trial_draw, scenario);

            let mut cfg = run.fit.clone();
            cfg.seed = derive_seed(scenario.seed, 0x8000 + case_id as u64);
            cfg.frozen = if scenario.is_known_axis() {
                FrozenMask::known_axis()
            } else {
                FrozenMask::default()
            };
            cfg.meshing = Some(grid);

            let outcome = fit(&space, &sc.samples, &init, &cfg).and_then(|res| {
                let est = res.mesh.as_ref().expect("meshing enabled");
                let fcfg = FScoreConfig {
                    samples: run.fscore_samples,
                    seed: derive_seed(scenario.seed, 0x9000 + case_id as u64),
                    ..Default::default()
                };
                let report = f_score(est, &sc.gt_mesh, &fcfg)?;
                Ok((res, report))
            });

            match outcome {
                Ok((res, report)) => BenchmarkRecord {
                    case_id,
                    scenario: scenario.name.clone(),
                    shape: shape_idx,
                    trial,
                    truth: sc.truth.clone(),
                    init,
                    rotation_error: Some(rotation_error(
                        res.params.rot.theta,
                        sc.truth.rot.theta,
                    )),
                    final_params: Some(res.params),
                    f_score: Some(report.f),
                    status: "ok".into(),
                    wall: start.elapsed(),
                },
                Err(e) => BenchmarkRecord {
                    case_id,
                    scenario: scenario.name.clone(),
                    shape: shape_idx,
                    trial,
                    truth: sc.truth.clone(),
                    init,
                    final_params: None,
                    f_score: None,
                    rotation_error: None,
                    status: format!("error: {e}"),
                    wall: start.elapsed(),
                },
            }
        })
        .collect();

    let summary = bin_summary(&records, scenario.shapes, scenario.trials);
    Ok(SynthBenchmark { records, summary })
}

/// Composes a perturbed initialization: `s0 = s (1 + ds)`, additive angle and
/// translation offsets, and the init code taken from the scenario draw.
fn apply_deltas<R: Real>(
    truth: &FitParams<R>,
    init_rel: &ScenarioSample<R>,
    scenario: &ScenarioConfig,
) -> FitParams<R> {
    let d = &init_rel.deltas;
    let mut init = truth.clone();
    init.scale = truth.scale * (R::one() + R::of(d.scale));
    init.rot.theta = truth.rot.theta + R::of(d.theta);
    if !scenario.is_known_axis() {
        init.rot.psi = truth.rot.psi + R::of(d.psi);
        init.rot.rho = truth.rot.rho + R::of(d.rho);
    }
    init.translation = truth.translation + Vec3::from_array(d.translation.map(R::of));
    init.code = init_rel.init.code.clone();
    init
}

fn bin_summary<R: Real>(
    records: &[BenchmarkRecord<R>],
    shapes: usize,
    trials: usize,
) -> BinnedSummary {
    let edges: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let n_bins = edges.len() - 1;
    let mut per_pair = vec![vec![0usize; n_bins]; shapes];
    for r in records {
        if let Some(f) = r.f_score {
            let f = f.as_f64().clamp(0.0, 1.0);
            let mut bin = (f * 10.0).floor() as usize;
            if bin >= n_bins {
                bin = n_bins - 1; // f = 1.0 joins the top bin
            }
            per_pair[r.shape][bin] += 1;
        }
    }
    let _ = trials;
    let mut count_stats = Vec::with_capacity(n_bins);
    for bin in 0..n_bins {
        let mut counts: Vec<f64> = per_pair.iter().map(|p| p[bin] as f64).collect();
        counts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        count_stats.push([
            counts[0],
            quantile(&counts, 0.25),
            quantile(&counts, 0.5),
            quantile(&counts, 0.75),
            counts[counts.len() - 1],
        ]);
    }
    BinnedSummary { edges, count_stats }
}

/// Linear-interpolation quantile of a sorted slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }
}

/// Median F-score over successful records.
pub fn median_f<R: Real>(records: &[BenchmarkRecord<R>]) -> Option<f64> {
    let mut fs: Vec<f64> = records
        .iter()
        .filter_map(|r| r.f_score.map(|f| f.as_f64()))
        .collect();
    if fs.is_empty() {
        return None;
    }
    fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(quantile(&fs, 0.5))
}

/// One query of the method-comparison suite.
#[derive(Clone, Debug)]
pub struct ComparisonCase<R> {
    pub id: usize,
    pub code: LatentCode<R>,
    pub transform: crate::geom::SimilarityTransform<R>,
    pub in_library: bool,
}

/// Seeded library plus a case list: the first cases query library members,
/// the remaining `out_of_library` query fresh codes the catalog cannot
/// contain. Transforms are upright (rotation about +z) with moderate scale
/// and translation, mirroring objects standing on a floor.
pub fn default_comparison_setup<R: Real>(
    n_library: usize,
    n_cases: usize,
    out_of_library: usize,
    seed: u64,
) -> (Vec<LatentCode<R>>, Vec<ComparisonCase<R>>) {
    use rand::Rng;
    let dim = AnalyticFamily::DIM;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x11b));
    let draw_code = |rng: &mut rand_chacha::ChaCha8Rng| -> LatentCode<R> {
        LatentCode::from_vec((0..dim).map(|_| R::of(rng.random_range(-1.5..1.5))).collect())
    };
    let library: Vec<LatentCode<R>> = (0..n_library).map(|_| draw_code(&mut rng)).collect();

    let in_library = n_cases.saturating_sub(out_of_library);
    let mut cases = Vec::with_capacity(n_cases);
    for id in 0..n_cases {
        let (code, member) = if id < in_library {
            (library[id % n_library.max(1)].clone(), true)
        } else {
            (draw_code(&mut rng), false)
        };
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let scale = rng.random_range(0.8..1.6);
        let t_norm = rng.random_range(0.0..0.8);
        let dir = loop {
            let v = Vec3::of(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let n = v.norm();
            if n > 1e-6 && n <= 1.0 {
                break v / n;
            }
        };
        cases.push(ComparisonCase {
            id,
            code,
            transform: crate::geom::SimilarityTransform::new(
                R::of(scale),
                crate::geom::RotationParams::new(R::zero(), R::zero(), R::of(theta)),
                Vec3::from_array((dir * t_norm).to_array().map(R::of)),
            ),
            in_library: member,
        });
    }
    (library, cases)
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub case_id: usize,
    pub method: String,
    pub retrieved: String,
    pub scale: f64,
    pub theta: f64,
    pub translation: [f64; 3],
    pub f_score: f64,
}

pub struct ComparisonOutcome {
    pub rows: Vec<ComparisonRow>,
    /// Mean F per method, in method order (joint-fit first).
    pub means: Vec<(String, f64)>,
}

pub const METHOD_JOINT: &str = "joint-fit";
pub const METHOD_BASELINE: &str = "retrieve-icp";

/// Runs both methods on a shared case list over the analytic family: the
/// joint fit uses the rotation-angle grid driver with bounding-sphere
/// initialization (axis known); the baseline retrieves by chamfer distance
/// and registers with staged assignment ICP.
pub fn run_baseline_comparison<R: Real>(
    library_codes: &[LatentCode<R>],
    cases: &[ComparisonCase<R>],
    run: &RunConfig<R>,
    seed: u64,
) -> Result<ComparisonOutcome> {
    let space = AnalyticFamily;
    let grid = GridSpec::canonical(run.mesh_resolution);
    if library_codes.is_empty() {
        return Err(Error::EmptyInput("comparison library"));
    }

    // Canonical catalog meshes for the retrieval baseline.
    let catalog: Vec<crate::baseline::CatalogShape<R>> = library_codes
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let mesh = extract_shape(&space, code, &crate::geom::SimilarityTransform::identity(), &grid)?;
            crate::baseline::CatalogShape::from_mesh(
                format!("lib-{i:03}"),
                mesh,
                2000,
                derive_seed(seed, 0xca7 + i as u64),
            )
        })
        .collect::<Result<_>>()?;

    let row_results: Vec<Result<Vec<ComparisonRow>>> = cases
        .par_iter()
        .map(|case| {
            let g = case.transform;
            let query_mesh = extract_shape(&space, &case.code, &g, &grid)?;
            let radius = AnalyticFamily::bounding_radius(&case.code);
            let (lo, hi) = region_for_transform(radius, &g, R::of(0.35));
            let mut counts = run.query_samples;
            counts.seed = derive_seed(seed, 0x1000 + case.id as u64);
            let samples = sample_latent_sdf(&space, &case.code, &g, lo, hi, &counts)?;
            let surface =
                sample_surface(&query_mesh, run.fscore_samples, derive_seed(seed, 0x2000 + case.id as u64))?;

            // Joint fit: bounding-sphere initialization, known vertical axis.
            let bs = bounding_sphere(&surface.points)?;
            let mut zrng = rand_chacha::ChaCha8Rng::seed_from_u64(
                derive_seed(seed, 0x3000 + case.id as u64),
            );
            let z0: Vec<R> = (0..LatentSdf::<R>::dim(&space))
                .map(|_| {
                    let n: f64 = rand::Rng::sample(&mut zrng, rand_distr::StandardNormal);
                    R::of(n * 0.01)
                })
                .collect();
            let init = PartialInit {
                scale: bs.radius.max(R::of(crate::fit::SCALE_MIN * 2.0)),
                translation: bs.center,
                axis: Vec3::new(R::zero(), R::zero(), R::one()),
                code: LatentCode::from_vec(z0),
            };
            let mut cfg = run.fit.clone();
            cfg.frozen = FrozenMask::known_axis();
            cfg.meshing = Some(grid);
            cfg.seed = derive_seed(seed, 0x4000 + case.id as u64);
            let step = R::of(std::f64::consts::TAU / 12.0);
            let grid_result =
                fit_with_theta_grid(&space, &samples, &surface.points, &init, &cfg, step)?;
            let best = grid_result.best();
            let fcfg = FScoreConfig {
                samples: run.fscore_samples,
                seed: derive_seed(seed, 0x5000 + case.id as u64),
                ..Default::default()
            };
            let joint_mesh = best.result.mesh.as_ref().expect("meshing enabled");
            let joint_f = f_score(joint_mesh, &query_mesh, &fcfg)?;
            let jp = &best.result.params;
            let joint_row = ComparisonRow {
                case_id: case.id,
                method: METHOD_JOINT.into(),
                retrieved: String::new(),
                scale: jp.scale.as_f64(),
                theta: jp.rot.theta.as_f64(),
                translation: [
                    jp.translation.x.as_f64(),
                    jp.translation.y.as_f64(),
                    jp.translation.z.as_f64(),
                ],
                f_score: joint_f.f.as_f64(),
            };

            let bcfg = crate::baseline::BaselineConfig {
                fscore: fcfg,
                seed: derive_seed(seed, 0x6000 + case.id as u64),
                ..Default::default()
            };
            let (idx, bg, brep) = crate::baseline::baseline_pipeline(
                &query_mesh,
                &catalog,
                Vec3::new(R::zero(), R::zero(), R::one()),
                &bcfg,
            )?;
            let baseline_row = ComparisonRow {
                case_id: case.id,
                method: METHOD_BASELINE.into(),
                retrieved: catalog[idx].id.clone(),
                scale: bg.scale.as_f64(),
                theta: bg.rot.theta.as_f64(),
                translation: [
                    bg.translation.x.as_f64(),
                    bg.translation.y.as_f64(),
                    bg.translation.z.as_f64(),
                ],
                f_score: brep.f.as_f64(),
            };
            Ok(vec![joint_row, baseline_row])
        })
        .collect();

    let mut rows = Vec::with_capacity(cases.len() * 2);
    for r in row_results {
        rows.extend(r?);
    }
    let mean_of = |method: &str| -> f64 {
        let fs: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.f_score)
            .collect();
        fs.iter().sum::<f64>() / fs.len().max(1) as f64
    };
    let means = vec![
        (METHOD_JOINT.to_string(), mean_of(METHOD_JOINT)),
        (METHOD_BASELINE.to_string(), mean_of(METHOD_BASELINE)),
    ];
    Ok(ComparisonOutcome { rows, means })
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

fn join_code<R: Real>(code: &LatentCode<R>) -> String {
    code.iter()
        .map(|v| format!("{:.9e}", v.as_f64()))
        .collect::<Vec<_>>()
        .join(";")
}

fn params_fields<R: Real>(p: &FitParams<R>) -> String {
    format!(
        "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{}",
        p.scale.as_f64(),
        p.rot.psi.as_f64(),
        p.rot.rho.as_f64(),
        p.rot.theta.as_f64(),
        p.translation.x.as_f64(),
        p.translation.y.as_f64(),
        p.translation.z.as_f64(),
        join_code(&p.code)
    )
}

/// Records CSV. Wall-clock time is deliberately excluded so the file is
/// bit-identical across runs and worker counts; timings go to their own file.
pub fn records_csv<R: Real>(records: &[BenchmarkRecord<R>]) -> String {
    let mut out = String::new();
    out.push_str("case_id,scenario,shape,trial,");
    out.push_str("truth_s,truth_psi,truth_rho,truth_theta,truth_tx,truth_ty,truth_tz,truth_z,");
    out.push_str("init_s,init_psi,init_rho,init_theta,init_tx,init_ty,init_tz,init_z,");
    out.push_str("final_s,final_psi,final_rho,final_theta,final_tx,final_ty,final_tz,final_z,");
    out.push_str("f_score,rotation_error,status\n");
    for r in records {
        let final_part = match &r.final_params {
            Some(p) => params_fields(p),
            None => ",,,,,,,".into(),
        };
        let f = r.f_score.map_or(String::new(), |v| format!("{:.9e}", v.as_f64()));
        let re = r
            .rotation_error
            .map_or(String::new(), |v| format!("{:.9e}", v.as_f64()));
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.case_id,
            r.scenario,
            r.shape,
            r.trial,
            params_fields(&r.truth),
            params_fields(&r.init),
            final_part,
            f,
            re,
            r.status
        ));
    }
    out
}

pub fn timings_csv<R: Real>(records: &[BenchmarkRecord<R>]) -> String {
    let mut out = String::from("case_id,wall_ms\n");
    for r in records {
        out.push_str(&format!("{},{:.3}\n", r.case_id, r.wall.as_secs_f64() * 1e3));
    }
    out
}

pub fn summary_csv(summary: &BinnedSummary) -> String {
    let mut out = String::from("bin_lo,bin_hi,min,q1,median,q3,max\n");
    for (i, stats) in summary.count_stats.iter().enumerate() {
        out.push_str(&format!(
            "{:.1},{:.1},{},{},{},{},{}\n",
            summary.edges[i],
            summary.edges[i + 1],
            stats[0],
            stats[1],
            stats[2],
            stats[3],
            stats[4]
        ));
    }
    out
}

pub fn comparison_csv(outcome: &ComparisonOutcome) -> String {
    let mut out = String::from("case_id,method,retrieved_id,s,theta,tx,ty,tz,f_score\n");
    for r in &outcome.rows {
        out.push_str(&format!(
            "{},{},{},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
            r.case_id,
            r.method,
            r.retrieved,
            r.scale,
            r.theta,
            r.translation[0],
            r.translation[1],
            r.translation[2],
            r.f_score
        ));
    }
    for (method, mean) in &outcome.means {
        out.push_str(&format!("mean,{method},,,,,,,{mean:.9e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn tiny_benchmark_is_deterministic_and_complete() {
        let scenario = ScenarioConfig {
            shapes: 2,
            trials: 2,
            seed: 11,
            ..ScenarioConfig::known_axis()
        };
        let run = RunConfig::<f64> {
            fit: FitConfig {
                iterations: 60,
                batch_size: 800,
                decay_interval: 30,
                ..Default::default()
            },
            mesh_resolution: 24,
            fscore_samples: 2000,
            query_samples: FieldSampleCounts { near_surface: 1500, uniform: 800, seed: 0 },
        };
        let a = run_synth_benchmark(&scenario, &run).unwrap();
        let b = run_synth_benchmark(&scenario, &run).unwrap();
        assert_eq!(a.records.len(), 4);
        assert_eq!(records_csv(&a.records), records_csv(&b.records));
        assert_eq!(summary_csv(&a.summary), summary_csv(&b.summary));
        for r in &a.records {
            assert_eq!(r.status, "ok");
        }
        // One record per (shape, trial) pair.
        let mut seen: Vec<(usize, usize)> = a.records.iter().map(|r| (r.shape, r.trial)).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }
}
