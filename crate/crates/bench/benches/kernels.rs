use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use drem_core::linear::drem_extend;
use drem_core::matalg::adjugate;
use drem_core::rk4_integrate;
use drem_core::{fixtures, Matrix, TimeGrid};

fn bench_adjugate(c: &mut Criterion) {
    let mut group = c.benchmark_group("adjugate");
    for n in [2usize, 4, 8, 12] {
        let data: Vec<f64> = (0..n * n)
            .map(|k| ((k * 7919) % 97) as f64 / 97.0 - 0.5)
            .collect();
        let a = Matrix::from_row_major(n, n, data).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| adjugate(black_box(a)).unwrap())
        });
    }
    group.finish();
}

fn bench_drem_extend(c: &mut Criterion) {
    let reg = fixtures::decaying_regression();
    let ops = [fixtures::unit_lag()];
    let grid = TimeGrid::spanning(0.0, 10.0, 1e-3).unwrap();
    c.bench_function("drem_extend 10k samples", |b| {
        b.iter(|| drem_extend(black_box(&reg), &ops, &grid).unwrap())
    });
}

fn bench_rk4(c: &mut Criterion) {
    let grid = TimeGrid::spanning(0.0, 100.0, 1e-3).unwrap();
    c.bench_function("rk4 damped oscillator 100k steps", |b| {
        b.iter(|| {
            rk4_integrate(
                |t, x: &[f64], dx: &mut [f64]| {
                    dx[0] = x[1];
                    dx[1] = -x[0] - 0.1 * x[1] + t.sin();
                },
                black_box(&[1.0, 0.0]),
                &grid,
            )
        })
    });
}

criterion_group!(benches, bench_adjugate, bench_drem_extend, bench_rk4);
criterion_main!(benches);
