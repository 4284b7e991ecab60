use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use purestate::families::{single_atom_point, two_qubit_family, Branch};
use purestate::feedback::FeedbackSetup;
use purestate::qcore::DensityMatrix;
use purestate::sme::{simulate_sequential, Scheme, TrajectoryConfig};

fn cases() -> Vec<(&'static str, FeedbackSetup, DensityMatrix)> {
    let atom = single_atom_point(std::f64::consts::PI / 3.0, Branch::Minus, 1.0).unwrap();
    let bell = two_qubit_family([0.3, -1.1, 0.7, 0.2], -0.4, 1.0).unwrap();
    vec![
        ("single-atom", atom.setup(), DensityMatrix::maximally_mixed(2)),
        ("two-qubit", bell.setup(), DensityMatrix::maximally_mixed(4)),
    ]
}

fn trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("feedback trajectories");
    group.sample_size(10);
    let config = TrajectoryConfig::new(1e-3, 1.0, 7, 64, Scheme::Feedback).with_sample_every(100);
    for (name, setup, rho0) in cases() {
        group.bench_with_input(BenchmarkId::new("sequential", name), &setup, |b, s| {
            b.iter(|| simulate_sequential(black_box(&rho0), s, &config).unwrap())
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", name), &setup, |b, s| {
            b.iter(|| purestate::sme::simulate_parallel(black_box(&rho0), s, &config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trajectories);
criterion_main!(benches);
