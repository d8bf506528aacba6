use coupler_bench::centred_biases;
use coupler_core::fit::{fit_parameters, synthetic_peaks, FitConfig, DEFAULT_BAND_HZ};
use coupler_core::CircuitParams;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn fit(c: &mut Criterion) {
    let truth = CircuitParams::table1();
    let peaks = synthetic_peaks(&truth, &centred_biases(60), DEFAULT_BAND_HZ);
    let start = CircuitParams {
        l_sh: truth.l_sh * 1.05,
        l_j0: truth.l_j0 * 0.95,
        m_0: truth.m_0 * 1.05,
        ..truth
    };
    let cfg = FitConfig::new(start);
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    group.bench_function("table1_60_biases", |b| b.iter(|| fit_parameters(black_box(&peaks), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, fit);
criterion_main!(benches);
