use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gkz_core::expansion::{closed_form_table, coefficients_on_cp};
use gkz_core::{Exec, SectorPoint};
use num_complex::Complex64;

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn quadrature_tables(c: &mut Criterion) {
    let x1 = SectorPoint::new(1.0, PI).unwrap();
    let beta = Complex64::new(0.3, 0.0);
    let mut group = c.benchmark_group("quadrature_table");
    group.sample_size(10);
    for n in [16, 48] {
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| coefficients_on_cp(3, 5, beta, 2, x1, black_box(n), 1e-12, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn closed_tables(c: &mut Criterion) {
    let x1 = SectorPoint::new(1.0, PI).unwrap();
    let beta = Complex64::new(-0.7, 0.2);
    let mut group = c.benchmark_group("closed_table");
    for n in [60, 600] {
        for (name, exec) in modes() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| closed_form_table(2, 3, beta, 1, x1, 0..black_box(n), exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, quadrature_tables, closed_tables);
criterion_main!(benches);
