//! Elliptic solve, water-wave right-hand side and a tiny sweep, each timed
//! on a one-thread pool and on a wider pool. Build with
//! `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kdv_momentum::experiments::{build_coupled_initial_data, convergence_study, ExperimentConfig, InitialProfile, SweepConfig};
use kdv_momentum::par;
use kdv_momentum::waterwave::{VerticalGrid, WaterWaveSolver};
use kdv_momentum::{Grid1D, ModelParams};

fn pools() -> Vec<usize> {
    let wide = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    vec![1, wide]
}

fn water_wave(c: &mut Criterion) {
    let p = ModelParams::new(0.04, 0.04).unwrap();
    let grid = Grid1D::new(80.0, 512).unwrap();
    let solver = WaterWaveSolver::new(&grid, &p, &VerticalGrid::new(24).unwrap());
    let state = build_coupled_initial_data(&InitialProfile::default(), &solver)
        .unwrap()
        .waterwave();

    let mut g = c.benchmark_group("waterwave");
    g.sample_size(20);
    for workers in pools() {
        g.bench_with_input(BenchmarkId::new("elliptic_solve", workers), &workers, |b, &w| {
            b.iter(|| {
                par::with_workers(w, || {
                    solver
                        .solve_potential(black_box(&state.zeta), &state.phi_s, state.phi_slope)
                        .unwrap()
                })
            })
        });
        g.bench_with_input(BenchmarkId::new("rhs", workers), &workers, |b, &w| {
            b.iter(|| par::with_workers(w, || solver.rhs(black_box(&state)).unwrap()))
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    for workers in pools() {
        let cfg = SweepConfig {
            base: ExperimentConfig {
                n: 256,
                nz: 12,
                horizon: 0.1,
                ..ExperimentConfig::default()
            },
            mus: vec![0.08, 0.04, 0.02, 0.01],
            workers,
            ..SweepConfig::default()
        };
        g.bench_with_input(BenchmarkId::new("four_points", workers), &cfg, |b, cfg| {
            b.iter(|| convergence_study(black_box(cfg)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, water_wave, sweep);
criterion_main!(benches);
