use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hypspeeds_core::domains::DomainDescriptor;
use hypspeeds_core::harmonic::{mc_first_hit_with, theorem4_scan_with, Obstacle, WOS_EPS};
use hypspeeds_core::semigroup::{monotonicity_scan_with, SemigroupModel, SpeedKind, VIOLATION_SLACK};
use hypspeeds_core::Exec;
use num_complex::Complex64;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn first_hit(c: &mut Criterion) {
    let slit = Obstacle::segment(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    let mut g = c.benchmark_group("mc_first_hit");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, 20_000), |b| {
            b.iter(|| mc_first_hit_with(&slit, Complex64::new(0.0, 0.0), 20_000, WOS_EPS, 1, exec).unwrap())
        });
    }
    g.finish();
}

fn scans(c: &mut Criterion) {
    let strip = SemigroupModel::new(&DomainDescriptor::strip(-1.0, 1.0).unwrap()).unwrap();
    let wide = SemigroupModel::new(&DomainDescriptor::strip(-2.0, 2.0).unwrap()).unwrap();
    let grid: Vec<f64> = (0..=10_000).map(|i| i as f64 * 0.01).collect();
    let tail: Vec<f64> = (0..=10_000).map(|i| 10.0 + i as f64 * 0.1).collect();
    let z = Complex64::new(0.3, -0.4);
    let mut g = c.benchmark_group("scans");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("monotonicity", name), |b| {
            b.iter(|| monotonicity_scan_with(&strip, &grid, SpeedKind::Generalized(z), VIOLATION_SLACK, exec).unwrap())
        });
        g.bench_function(BenchmarkId::new("theorem4", name), |b| {
            b.iter(|| theorem4_scan_with(&strip, &wide, &tail, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, first_hit, scans);
criterion_main!(benches);
