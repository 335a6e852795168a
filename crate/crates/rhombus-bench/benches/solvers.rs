//! Timing for the three expensive paths: the dense stationary solve, the
//! exact flux sweep, and the Langevin ensemble. The ensemble bench reports
//! throughput in integrator steps so regressions in the hot loop show up
//! directly, independent of ensemble size.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rhombus_core::lindblad::{phi_sweep, steady_state};
use rhombus_core::twa::estimate_spdm;
use rhombus_core::{build_hamiltonian, LatticeSpec, NoiseOrdering, ReservoirParams, TwaParams};
use std::f64::consts::PI;

const R: ReservoirParams = ReservoirParams { gamma_l: 0.4, gamma_r: 0.4, n_l: 1.0, n_r: 0.5 };

fn stationary_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("steady_state");
    group.sample_size(10);
    for m in [3usize, 5, 7] {
        let h = build_hamiltonian(&LatticeSpec { m, j: 1.0, phi: 0.6, u: 0.0 });
        group.bench_with_input(BenchmarkId::from_parameter(m), &h, |b, h| {
            b.iter(|| steady_state(h, &R).unwrap());
        });
    }
    group.finish();
}

fn flux_sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (0..17).map(|i| PI * i as f64 / 16.0).collect();
    let mut group = c.benchmark_group("phi_sweep");
    group.sample_size(10);
    group.bench_function("M5_17pts", |b| {
        b.iter(|| phi_sweep(5, 1.0, &R, &grid).unwrap());
    });
    group.finish();
}

fn langevin_ensemble(c: &mut Criterion) {
    let p = TwaParams {
        spec: LatticeSpec { m: 5, j: 1.0, phi: PI / 2.0, u: 0.0 },
        r: R,
        g: 2.0,
        dt: 0.01,
        n_traj: 8,
        burn_in: 5.0,
        avg_window: 5.0,
        seed: 1,
        ordering: NoiseOrdering::Normal,
    };
    let steps = p.n_traj as u64 * ((p.burn_in + p.avg_window) / p.dt) as u64;
    let mut group = c.benchmark_group("langevin");
    group.sample_size(10);
    group.throughput(Throughput::Elements(steps));
    group.bench_function("M5_8traj", |b| {
        b.iter(|| estimate_spdm(&p).unwrap());
    });
    group.finish();
}

criterion_group!(benches, stationary_solve, flux_sweep, langevin_ensemble);
criterion_main!(benches);
