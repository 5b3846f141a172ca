use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ellipse_spectra::analysis::scan_with;
use ellipse_spectra::model::{ModelKind, SymmetryClass};
use ellipse_spectra::perturbation::eigenvalue_series_batch;
use ellipse_spectra::solver::{convergence_scan_with, merged_spectrum_with};
use ellipse_spectra::Execution;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_m1_21x12");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                scan_with(
                    ModelKind::PathNonHermitian,
                    -0.5,
                    0.5,
                    21,
                    12,
                    4,
                    black_box(exec),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_convergence(c: &mut Criterion) {
    let mut group = c.benchmark_group("converge_m2_5_to_24");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                convergence_scan_with(
                    ModelKind::PathHermitian,
                    SymmetryClass::MM,
                    1.0,
                    5,
                    24,
                    4,
                    exec,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_merged(c: &mut Criterion) {
    let mut group = c.benchmark_group("merged_m1_n16");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| merged_spectrum_with(ModelKind::PathNonHermitian, 1.0, 16, 12, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_series(c: &mut Criterion) {
    let requests: Vec<(SymmetryClass, u32)> = (1..=6u32)
        .flat_map(|n| {
            let (a, b) = SymmetryClass::partners_of_level(n).unwrap();
            [(a, n), (b, n)]
        })
        .collect();
    let mut group = c.benchmark_group("series_m2_order6");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                eigenvalue_series_batch(ModelKind::PathHermitian, &requests, 6, exec).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_scan,
    bench_convergence,
    bench_merged,
    bench_series
);
criterion_main!(benches);
