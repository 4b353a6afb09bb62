//! Sequential vs rayon execution for the three batch workloads.

use std::hint::black_box;

use armpose::control::{reach_grid, run_reach_experiment, EpisodeConfig, PoseSource};
use armpose::refine::refine_batch;
use armpose::solver::{solve_pose, SolverOptions};
use armpose::synth::{generate_dataset, render_heatmaps, sample_scene_seeded, DatasetSpec, HeatmapLayout, NoiseSpec, SampleRanges};
use armpose::{ArmModel, CameraIntrinsics, Exec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn restarts(c: &mut Criterion) {
    let model = ArmModel::owi535();
    let intr = CameraIntrinsics::default();
    let s = sample_scene_seeded(3, 0, &SampleRanges::default(), &model, &intr).unwrap();
    let mut g = c.benchmark_group("solve_restarts");
    for (name, exec) in STRATEGIES {
        let opts = SolverOptions {
            restarts: 32,
            exec,
            ..Default::default()
        };
        g.bench_function(name, |b| b.iter(|| solve_pose(black_box(&s.y), &intr, &model, &opts).unwrap()));
    }
    g.finish();
}

fn batch_refine(c: &mut Criterion) {
    let model = ArmModel::owi535();
    let intr = CameraIntrinsics::default();
    let layout = HeatmapLayout::default();
    let items: Vec<_> = (0..64)
        .map(|i| {
            let s = sample_scene_seeded(4, i, &SampleRanges::default(), &model, &intr).unwrap();
            (format!("{i}"), render_heatmaps(&s.y, &NoiseSpec::default(), &layout, i).unwrap())
        })
        .collect();
    let mut g = c.benchmark_group("refine_batch");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        let opts = SolverOptions {
            exec,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::new(name, items.len()), &items, |b, items| {
            b.iter(|| refine_batch(items, &intr, &model, &opts))
        });
    }
    g.finish();
}

fn dataset(c: &mut Criterion) {
    let model = ArmModel::owi535();
    let spec = DatasetSpec {
        n: 200,
        seed: 5,
        ..Default::default()
    };
    let mut g = c.benchmark_group("generate_dataset");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::new(name, spec.n), |b| {
            b.iter(|| {
                let dir = tempfile::tempdir().unwrap();
                generate_dataset(&spec, &model, dir.path(), exec).unwrap()
            })
        });
    }
    g.finish();
}

fn episodes(c: &mut Criterion) {
    let model = ArmModel::owi535();
    let targets = reach_grid();
    let cfg = EpisodeConfig::default();
    let mut g = c.benchmark_group("reach_episodes");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| {
            b.iter(|| run_reach_experiment(&model, &targets, PoseSource::Solver, 2, &cfg, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, restarts, batch_refine, dataset, episodes);
criterion_main!(benches);
