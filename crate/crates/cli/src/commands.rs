use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use shapefit_core::bench::{
    self, build_library, procedural_shapes, records_csv, run_baseline_comparison,
    run_compression_experiment, run_synth_benchmark, summary_csv, timings_csv,
    CompressionCase, RunConfig, ScenarioConfig,
};
use shapefit_core::fit::{
    fit as run_fit, fit_with_theta_grid, FitConfig, FitParams, FrozenMask, PartialInit,
};
use shapefit_core::geom::{RotationParams, SimilarityTransform, Vec3};
use shapefit_core::latent::{
    load_checkpoint, save_checkpoint, train_autodecoder, LatentCode, TrainConfig,
};
use shapefit_core::mesh::{extract_shape, read_obj, write_obj, GridSpec};
use shapefit_core::metrics::{bounding_sphere, f_score, FScoreConfig};
use shapefit_core::real::Real;
use shapefit_core::sampling::{
    read_samples_bin, read_samples_csv, sample_surface, SdfSample,
};
use shapefit_core::seed::derive_seed;

use crate::params::{params_block, read_params};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct TrainArgs {
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Latent dimension.
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Number of procedural shapes (ignored with --samples-dir).
    #[arg(long, default_value_t = 16)]
    shapes: usize,
    /// SDF samples generated per procedural shape.
    #[arg(long, default_value_t = 16_000)]
    samples_per_shape: usize,
    /// Directory of per-shape sample files (.csv or .sdfs), one shape each.
    #[arg(long)]
    samples_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 150)]
    epochs: usize,
    #[arg(long, default_value_t = 1024)]
    batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr_weights: f64,
    #[arg(long, default_value_t = 1e-3)]
    lr_codes: f64,
    /// Clamp applied to predictions and targets in the training loss.
    #[arg(long, default_value_t = 0.1)]
    clamp: f64,
    /// Hidden layer widths.
    #[arg(long, default_value = "128,128,128,128", value_delimiter = ',')]
    hidden: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scalar type used during training; the checkpoint is float32 either way.
    #[arg(long, default_value = "f32", value_parser = ["f32", "f64"])]
    precision: String,
}

pub fn train(args: TrainArgs) -> anyhow::Result<()> {
    match args.precision.as_str() {
        "f32" => train_generic::<f32>(&args),
        _ => train_generic::<f64>(&args),
    }
}

fn train_generic<R: Real>(args: &TrainArgs) -> anyhow::Result<()> {
    let library = match &args.samples_dir {
        Some(dir) => {
            let mut lib = shapefit_core::latent::ShapeLibrary::<R>::new(args.dim);
            let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("csv") | Some("sdfs")
                    )
                })
                .collect();
            entries.sort();
            if entries.is_empty() {
                bail!("no .csv or .sdfs sample files in {}", dir.display());
            }
            for path in entries {
                let samples = load_samples::<R>(&path)?;
                let id = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
                lib.push(id, samples);
            }
            lib
        }
        None => {
            let shapes = procedural_shapes::<R>(args.shapes, derive_seed(args.seed, 1));
            build_library(&shapes, args.dim, args.samples_per_shape, derive_seed(args.seed, 2))?
        }
    };
    println!(
        "training on {} shapes, d = {}, {} epochs ({})",
        library.len(),
        args.dim,
        args.epochs,
        args.precision
    );

    let cfg = TrainConfig::<R> {
        epochs: args.epochs,
        lr_weights: R::of(args.lr_weights),
        lr_codes: R::of(args.lr_codes),
        clamp_delta: R::of(args.clamp),
        batch_size: args.batch,
        hidden: args.hidden.clone(),
        seed: args.seed,
        progress: Some(|epoch, total, loss| {
            if (epoch + 1) % 10 == 0 || epoch + 1 == total {
                println!("epoch {:>4}/{total}: mean loss {loss:.6}", epoch + 1);
            }
        }),
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let (decoder, library, report) = train_autodecoder(library, &cfg)?;
    if let (Some(first), Some(last)) = (report.epoch_losses.first(), report.epoch_losses.last()) {
        println!(
            "loss: first epoch {:.6}, last epoch {:.6} ({:.1?})",
            first.as_f64(),
            last.as_f64(),
            start.elapsed()
        );
    }

    let codes: Vec<LatentCode<R>> = library.entries.iter().map(|e| e.code.clone()).collect();
    save_checkpoint(&args.out, &decoder, &codes)?;
    println!("checkpoint written to {}", args.out.display());
    Ok(())
}

fn load_samples<R: Real>(path: &Path) -> anyhow::Result<Vec<SdfSample<R>>> {
    let samples = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_samples_csv(path)?,
        _ => read_samples_bin(path)?,
    };
    if samples.is_empty() {
        bail!("{}: no samples", path.display());
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct FitArgs {
    /// Query SDF samples (.csv with x,y,z,phi header, or .sdfs binary).
    #[arg(long)]
    samples: PathBuf,
    /// Decoder checkpoint.
    #[arg(long)]
    model: PathBuf,
    /// Known rotation axis "x,y,z"; freezes the axis parameters.
    #[arg(long, value_delimiter = ',')]
    axis: Option<Vec<f64>>,
    /// Rotation-grid step in degrees; runs one fit per grid angle.
    #[arg(long)]
    theta_grid: Option<f64>,
    /// Single-start initial rotation angle in degrees (default 0).
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    /// Query surface points used to score grid candidates (defaults to the
    /// near-surface subset of the samples).
    #[arg(long)]
    surface: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    iters: usize,
    #[arg(long, default_value_t = 8000)]
    batch: usize,
    /// Extraction grid resolution.
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (params.txt, loss.csv, mesh.obj, grid.csv).
    #[arg(long)]
    out: PathBuf,
}

pub fn fit(args: FitArgs) -> anyhow::Result<()> {
    let samples = load_samples::<f64>(&args.samples)?;
    let ck = load_checkpoint::<f64>(&args.model)?;
    let decoder = ck.decoder;
    let dim = decoder.latent_dim();

    let surface_points: Vec<Vec3<f64>> = match &args.surface {
        Some(path) => {
            if path.extension().and_then(|e| e.to_str()) == Some("obj") {
                let mesh = read_obj::<f64>(path)?;
                sample_surface(&mesh, 8000, derive_seed(args.seed, 0xf))?.points
            } else {
                load_samples::<f64>(path)?.into_iter().map(|s| s.point).collect()
            }
        }
        None => {
            // Near-surface subset: distances assigned at +/- offsets sit below
            // ~0.02 in magnitude.
            let near: Vec<Vec3<f64>> = samples
                .iter()
                .filter(|s| s.distance.abs() < 0.02)
                .map(|s| s.point)
                .collect();
            if near.is_empty() {
                samples.iter().map(|s| s.point).collect()
            } else {
                near
            }
        }
    };
    if surface_points.is_empty() {
        bail!("no surface points available for initialization");
    }

    let bs = bounding_sphere(&surface_points)?;
    let mut zrng = ChaCha8Rng::seed_from_u64(derive_seed(args.seed, 0x20));
    let z0: Vec<f64> = (0..dim)
        .map(|_| {
            let n: f64 = zrng.sample(StandardNormal);
            n * 0.01
        })
        .collect();

    let axis = match &args.axis {
        Some(a) => {
            if a.len() != 3 {
                bail!("--axis needs exactly 3 comma-separated values");
            }
            let v = Vec3::of(a[0], a[1], a[2]);
            if v.norm() < 1e-9 {
                bail!("--axis must be a nonzero vector");
            }
            v.normalized()
        }
        None => Vec3::of(0.0, 0.0, 1.0),
    };
    let mut cfg = FitConfig::<f64> {
        iterations: args.iters,
        batch_size: args.batch,
        seed: args.seed,
        meshing: Some(GridSpec::canonical(args.res)),
        ..Default::default()
    };
    if args.axis.is_some() {
        cfg.frozen = FrozenMask::known_axis();
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let (result, grid_rows) = match args.theta_grid {
        Some(step_deg) => {
            let init = PartialInit {
                scale: bs.radius.clamp(shapefit_core::fit::SCALE_MIN, shapefit_core::fit::SCALE_MAX),
                translation: bs.center,
                axis,
                code: LatentCode::from_vec(z0),
            };
            let step = step_deg.to_radians();
            let grid = fit_with_theta_grid(&decoder, &samples, &surface_points, &init, &cfg, step)?;
            let rows: Vec<String> = grid
                .candidates
                .iter()
                .map(|c| {
                    format!(
                        "{:.1},{:.6},{:.6},{:.6}",
                        c.theta0.to_degrees(),
                        c.score.f,
                        c.score.precision,
                        c.score.recall
                    )
                })
                .collect();
            println!(
                "grid: {} starts, best theta0 = {:.1} deg (F = {:.4})",
                grid.candidates.len(),
                grid.best().theta0.to_degrees(),
                grid.best().score.f
            );
            (grid.into_best(), Some(rows))
        }
        None => {
            let axis_rot = RotationParams::from_axis(axis);
            let init = FitParams::new(
                bs.radius.clamp(shapefit_core::fit::SCALE_MIN, shapefit_core::fit::SCALE_MAX),
                RotationParams::new(axis_rot.psi, axis_rot.rho, args.theta0.to_radians()),
                bs.center,
                LatentCode::from_vec(z0),
            );
            (run_fit(&decoder, &samples, &init, &cfg)?, None)
        }
    };

    std::fs::write(args.out.join("params.txt"), params_block(&result.params))?;
    let mut loss = String::from("iter,loss,lr\n");
    for h in &result.history {
        loss.push_str(&format!("{},{:.9e},{:.9e}\n", h.iteration, h.loss, h.learning_rate));
    }
    std::fs::write(args.out.join("loss.csv"), loss)?;
    if let Some(mesh) = &result.mesh {
        write_obj(mesh, args.out.join("mesh.obj"))?;
    }
    if let Some(rows) = grid_rows {
        let mut csv = String::from("theta0_deg,f,precision,recall\n");
        for r in rows {
            csv.push_str(&r);
            csv.push('\n');
        }
        std::fs::write(args.out.join("grid.csv"), csv)?;
    }
    println!(
        "fit: objective {:.6}, scale {:.4}, theta {:.4} rad -> {}",
        result.final_objective,
        result.params.scale,
        result.params.rot.theta,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// synth-bench
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct SynthBenchArgs {
    /// Named scenario: known-axis | unknown-axis | supp-known-axis |
    /// supp-unknown-axis.
    #[arg(long, default_value = "known-axis")]
    scenario: String,
    /// Scenario config file overriding the named scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    shapes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 800)]
    iters: usize,
    #[arg(long, default_value_t = 8000)]
    batch: usize,
    #[arg(long, default_value_t = 48)]
    res: usize,
    #[arg(long, default_value_t = 12_000)]
    fscore_samples: usize,
    /// Output directory (records.csv, summary.csv, timings.csv).
    #[arg(long)]
    out: PathBuf,
}

pub fn synth_bench(args: SynthBenchArgs) -> anyhow::Result<()> {
    let mut scenario = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            bench::scenario_from_config(&bench::parse_config(&text)?)?
        }
        None => ScenarioConfig::by_name(&args.scenario)
            .with_context(|| format!("unknown scenario {:?}", args.scenario))?,
    };
    if let Some(t) = args.trials {
        scenario.trials = t;
    }
    if let Some(s) = args.shapes {
        scenario.shapes = s;
    }
    scenario.seed = args.seed;

    let run = RunConfig::<f64> {
        fit: FitConfig {
            iterations: args.iters,
            batch_size: args.batch,
            ..Default::default()
        },
        mesh_resolution: args.res,
        fscore_samples: args.fscore_samples,
        ..Default::default()
    };

    let start = std::time::Instant::now();
    let outcome = run_synth_benchmark(&scenario, &run)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("records.csv"), records_csv(&outcome.records))?;
    std::fs::write(args.out.join("summary.csv"), summary_csv(&outcome.summary))?;
    std::fs::write(args.out.join("timings.csv"), timings_csv(&outcome.records))?;

    let median = bench::median_f(&outcome.records);
    let failures = outcome.records.iter().filter(|r| r.status != "ok").count();
    println!(
        "{}: {} records ({} failures), median F {} in {:.1?} -> {}",
        scenario.name,
        outcome.records.len(),
        failures,
        median.map_or("n/a".into(), |m| format!("{m:.4}")),
        start.elapsed(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// baseline-bench
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct BaselineBenchArgs {
    #[arg(long, default_value_t = 20)]
    cases: usize,
    /// How many query shapes are NOT library members.
    #[arg(long, default_value_t = 10)]
    out_of_library: usize,
    /// Library size (analytic-family codes).
    #[arg(long, default_value_t = 12)]
    library: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    iters: usize,
    #[arg(long, default_value_t = 4000)]
    batch: usize,
    #[arg(long, default_value_t = 48)]
    res: usize,
    #[arg(long, default_value_t = 8000)]
    fscore_samples: usize,
    /// Output directory (comparison.csv).
    #[arg(long)]
    out: PathBuf,
}

pub fn baseline_bench(args: BaselineBenchArgs) -> anyhow::Result<()> {
    if args.out_of_library > args.cases {
        bail!("--out-of-library cannot exceed --cases");
    }
    let (library, cases) = bench::default_comparison_setup::<f64>(
        args.library,
        args.cases,
        args.out_of_library,
        args.seed,
    );
    let run = RunConfig::<f64> {
        fit: FitConfig {
            iterations: args.iters,
            batch_size: args.batch,
            ..Default::default()
        },
        mesh_resolution: args.res,
        fscore_samples: args.fscore_samples,
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let outcome = run_baseline_comparison(&library, &cases, &run, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("comparison.csv"), bench::comparison_csv(&outcome))?;
    for (method, mean) in &outcome.means {
        println!("mean F {method}: {mean:.4}");
    }
    println!(
        "{} cases in {:.1?} -> {}",
        cases.len(),
        start.elapsed(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// compress
// ---------------------------------------------------------------------------

#[derive(Subcommand)]
pub enum CompressCmd {
    /// Pack fitted parameters into the compact binary form.
    Pack(CompressPackArgs),
    /// Print the contents of a compact blob.
    Unpack(CompressUnpackArgs),
    /// The storage/fidelity comparison against vertex clustering.
    Bench(CompressBenchArgs),
}

#[derive(Args)]
pub struct CompressPackArgs {
    /// params.txt from a fit run.
    #[arg(long)]
    params: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct CompressUnpackArgs {
    #[arg(long)]
    input: PathBuf,
    /// Latent dimension of the stored code.
    #[arg(long)]
    dim: usize,
}

#[derive(Args)]
pub struct CompressBenchArgs {
    /// Decoder checkpoint whose stored codes are evaluated.
    #[arg(long)]
    model: PathBuf,
    /// Number of stored codes to use (default: all).
    #[arg(long)]
    shapes: Option<usize>,
    /// Shapes/seed must match the training run so references line up.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 48)]
    res: usize,
    /// Vertex-clustering cell sizes as fractions of the bounding radius.
    #[arg(long, default_value = "0.1,0.2", value_delimiter = ',')]
    cells: Vec<f64>,
    #[arg(long, default_value_t = 8000)]
    fscore_samples: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn compress(cmd: CompressCmd) -> anyhow::Result<()> {
    match cmd {
        CompressCmd::Pack(args) => {
            let p = read_params(&args.params)?;
            let bytes = bench::serialize_compact(&p.code, &p.transform());
            std::fs::write(&args.out, &bytes)?;
            println!("{} bytes -> {}", bytes.len(), args.out.display());
            Ok(())
        }
        CompressCmd::Unpack(args) => {
            let bytes = std::fs::read(&args.input)
                .with_context(|| format!("reading {}", args.input.display()))?;
            let (code, g) = bench::deserialize_compact::<f64>(&bytes, args.dim)?;
            let p = FitParams::new(g.scale, g.rot, g.translation, code);
            print!("{}", params_block(&p));
            Ok(())
        }
        CompressCmd::Bench(args) => {
            let ck = load_checkpoint::<f64>(&args.model)?;
            let n = args.shapes.unwrap_or(ck.codes.len()).min(ck.codes.len());
            if n == 0 {
                bail!("checkpoint stores no codes");
            }
            let shapes = procedural_shapes::<f64>(n, derive_seed(args.seed, 1));
            let grid = GridSpec::canonical(args.res);
            let mut cases = Vec::with_capacity(n);
            for (i, (_, shape)) in shapes.iter().enumerate() {
                let reference = shapefit_core::mesh::marching_cubes(|x| shape.sdf(x), &grid);
                let fit_mesh = extract_shape(
                    &ck.decoder,
                    &ck.codes[i],
                    &SimilarityTransform::identity(),
                    &grid,
                )?;
                cases.push(CompressionCase {
                    code: ck.codes[i].clone(),
                    transform: SimilarityTransform::identity(),
                    fit_mesh,
                    reference_mesh: reference,
                });
            }
            let rows = run_compression_experiment(
                &cases,
                &args.cells,
                &FScoreConfig { samples: args.fscore_samples, ..Default::default() },
            )?;
            let csv = bench::compression_csv(&rows);
            std::fs::write(&args.out, &csv)?;
            print!("{csv}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long)]
    model: PathBuf,
    /// Index of a stored code.
    #[arg(long)]
    index: Option<usize>,
    /// Explicit code values, semicolon-separated.
    #[arg(long)]
    code: Option<String>,
    /// Similarity transform "s,psi,rho,theta,tx,ty,tz" applied to the mesh.
    #[arg(long)]
    transform: Option<String>,
    #[arg(long, default_value_t = 64)]
    res: usize,
    #[arg(long)]
    out: PathBuf,
}

pub fn extract(args: ExtractArgs) -> anyhow::Result<()> {
    let ck = load_checkpoint::<f64>(&args.model)?;
    let code = match (&args.index, &args.code) {
        (Some(i), None) => ck
            .codes
            .get(*i)
            .cloned()
            .with_context(|| format!("checkpoint stores {} codes", ck.codes.len()))?,
        (None, Some(text)) => {
            let vals: Result<Vec<f64>, _> =
                text.split(';').map(|v| v.trim().parse::<f64>()).collect();
            LatentCode::from_vec(vals.context("parsing --code")?)
        }
        _ => bail!("exactly one of --index or --code is required"),
    };
    let g = match &args.transform {
        Some(text) => {
            let vals: Result<Vec<f64>, _> =
                text.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let v = vals.context("parsing --transform")?;
            if v.len() != 7 {
                bail!("--transform needs 7 values: s,psi,rho,theta,tx,ty,tz");
            }
            SimilarityTransform::new(
                v[0],
                RotationParams::new(v[1], v[2], v[3]),
                Vec3::of(v[4], v[5], v[6]),
            )
        }
        None => SimilarityTransform::identity(),
    };
    let mesh = extract_shape(&ck.decoder, &code, &g, &GridSpec::canonical(args.res))?;
    write_obj(&mesh, &args.out)?;
    println!(
        "{} vertices, {} faces -> {}",
        mesh.vertices.len(),
        mesh.faces.len(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// fscore
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct FscoreArgs {
    /// Estimate mesh.
    #[arg(long)]
    a: PathBuf,
    /// Reference mesh.
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 3000)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    eps_fraction: f64,
    /// Override the reference bounding-sphere radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the result as a report CSV row (header written when creating).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Case id for the CSV row.
    #[arg(long, default_value = "-")]
    case_id: String,
}

pub fn fscore(args: FscoreArgs) -> anyhow::Result<()> {
    let a = read_obj::<f64>(&args.a)?;
    let b = read_obj::<f64>(&args.b)?;
    let report = f_score(
        &a,
        &b,
        &FScoreConfig {
            samples: args.samples,
            eps_fraction: args.eps_fraction,
            seed: args.seed,
            reference_radius: args.radius,
        },
    )?;
    println!(
        "precision={:.3} recall={:.3} f={:.3} epsilon={:.6}",
        report.precision, report.recall, report.f, report.epsilon
    );
    if let Some(path) = &args.csv {
        use std::io::Write;
        let fresh = !path.exists();
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        if fresh {
            writeln!(file, "{}", shapefit_core::metrics::REPORT_CSV_HEADER)?;
        }
        writeln!(
            file,
            "{}",
            shapefit_core::metrics::report_csv_row(&args.case_id, &report, None)
        )?;
    }
    Ok(())
}
