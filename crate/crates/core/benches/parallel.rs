//! Sequential vs rayon execution of the data-parallel kernels.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use workcell::cloud::{estimate_normals, segment_plane, segment_scene, PlaneSearch, PointCloud, SceneConfig};
use workcell::grasp::{KinematicChain, EXAMPLE_READY};
use workcell::nav::{dwa_step, DwaConfig, GridMeta, OccupancyGrid, RobotState};
use workcell::placement::{rank_placements, sample_placements, workstation_model, PlacementConfig};
use workcell::sim::{gen_workstation, WorkstationScenario};
use workcell::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn scenario_file(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name);
    std::fs::read_to_string(path).expect("bundled scenario")
}

fn workstation_cloud() -> PointCloud {
    let s: WorkstationScenario = serde_json::from_str(&scenario_file("workstation.json")).unwrap();
    gen_workstation(&s).unwrap().0
}

fn cloud_kernels(c: &mut Criterion) {
    let cloud = workstation_cloud();
    let with_normals = estimate_normals(&cloud, 10, Execution::Sequential).unwrap();
    let cfg = SceneConfig::default();

    let mut g = c.benchmark_group("estimate_normals");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate_normals(black_box(&cloud), 10, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("segment_plane");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| segment_plane(black_box(&with_normals), &PlaneSearch::default(), exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("segment_scene");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| segment_scene(black_box(&cloud), &cfg, exec).unwrap())
        });
    }
    g.finish();
}

fn placement_ranking(c: &mut Criterion) {
    let cloud = workstation_cloud();
    let cfg = PlacementConfig::default();
    let model = workstation_model(&cloud, &cfg.scene, Execution::Sequential).unwrap();
    let candidates = sample_placements(
        &model.polygon,
        &model.obstacles,
        cfg.d_min,
        cfg.footprint,
        cfg.n,
        cfg.seed,
        cfg.max_attempts,
    )
    .unwrap();
    let chain = KinematicChain::example();
    let base = candidates[0].pose;

    let mut g = c.benchmark_group("rank_placements");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                rank_placements(
                    &chain,
                    &base,
                    black_box(&candidates),
                    &EXAMPLE_READY,
                    cfg.release_height,
                    &cfg.ik,
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn dwa(c: &mut Criterion) {
    let meta: GridMeta = serde_json::from_str(&scenario_file("lab.json")).unwrap();
    let grid = OccupancyGrid::from_pgm(&scenario_file("lab.pgm"), meta).unwrap();
    let cfg = DwaConfig::default();
    let state = RobotState::at_rest(1.0, 1.0, 0.0);

    let mut g = c.benchmark_group("dwa_step");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| dwa_step(black_box(&state), [2.5, 5.0], &grid, &cfg, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, cloud_kernels, placement_ranking, dwa);
criterion_main!(benches);
