use shapefit_core::fit::*;
use shapefit_core::geom::{RotationParams, SimilarityTransform, Vec3};
use shapefit_core::latent::{load_checkpoint, LatentCode};
use shapefit_core::mesh::GridSpec;
use shapefit_core::sampling::{region_for_transform, sample_latent_sdf, sample_surface, FieldSampleCounts};

fn main() {
    // mirror the CLI flow test
    let dir = std::env::temp_dir().join("shapefit_cli_tests/flow");
    let ck = load_checkpoint::<f64>(dir.join("model.bin")).unwrap();
    let g = SimilarityTransform::new(1.2, RotationParams::new(0.0, 0.0, 0.9), Vec3::of(0.3, -0.1, 0.2));
    let (lo, hi) = region_for_transform(1.0, &g, 0.3);
    let samples = sample_latent_sdf(&ck.decoder, &ck.codes[0], &g, lo, hi,
        &FieldSampleCounts { near_surface: 6000, uniform: 3000, seed: 9 }).unwrap();
    println!("samples {} | sample phi range {:?}", samples.len(),
        samples.iter().fold((f64::MAX, f64::MIN), |a, s| (a.0.min(s.distance), a.1.max(s.distance))));

    let query_mesh = shapefit_core::mesh::extract_shape(&ck.decoder, &ck.codes[0], &g, &GridSpec::canonical(40)).unwrap();
    let surface = sample_surface(&query_mesh, 6000, 17).unwrap();
    let bs = shapefit_core::metrics::bounding_sphere(&surface.points).unwrap();
    println!("query bs: c ({:.3},{:.3},{:.3}) r {:.3}", bs.center.x, bs.center.y, bs.center.z, bs.radius);

    let cfg = FitConfig::<f64> {
        iterations: 250, batch_size: 2000, seed: 3,
        meshing: Some(GridSpec::canonical(40)),
        frozen: FrozenMask::known_axis(),
        ..Default::default()
    };
    let init = PartialInit {
        scale: bs.radius, translation: bs.center,
        axis: Vec3::of(0.0, 0.0, 1.0),
        code: LatentCode::from_vec(vec![0.005; 8]),
    };
    let out = fit_with_theta_grid(&ck.decoder, &samples, &surface.points, &init, &cfg,
        30f64.to_radians()).unwrap();
    for c in &out.candidates {
        println!("theta0 {:5.1} deg: F {:.3} | s {:.3} th {:.3} t ({:.2},{:.2},{:.2}) loss {:.2}",
            c.theta0.to_degrees(), c.score.f, c.result.params.scale, c.result.params.rot.theta,
            c.result.params.translation.x, c.result.params.translation.y, c.result.params.translation.z,
            c.result.final_objective);
    }
}
