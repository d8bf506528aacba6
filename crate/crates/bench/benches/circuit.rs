use coupler_bench::flux_period;
use coupler_core::circuit::{record_sweep, three_junction_coefficients, ThreeJunctionParams};
use coupler_core::fit::g_range;
use coupler_core::CircuitParams;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn sweep(c: &mut Criterion) {
    let p = CircuitParams::table1();
    let mut group = c.benchmark_group("record_sweep");
    for n in [200, 2000] {
        let biases = flux_period(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &biases, |b, biases| {
            b.iter(|| record_sweep(&p, black_box(biases)))
        });
    }
    group.finish();
    c.bench_function("g_range_2000", |b| b.iter(|| g_range(black_box(&p), 2000).unwrap()));
    let p3 = ThreeJunctionParams::fig3();
    c.bench_function("three_junction_point", |b| {
        b.iter(|| three_junction_coefficients(&p3, black_box(2.0)).unwrap())
    });
}

criterion_group!(benches, sweep);
criterion_main!(benches);
