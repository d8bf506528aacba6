use coupler_bench::measured_drive;
use coupler_core::lindblad::{coupling_window, scan_spectrum, zero_coupling_bias, Signal};
use coupler_core::units::{from_mhz, turns_to_rad};
use coupler_core::{CircuitParams, FluxBias};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn scan(c: &mut Criterion) {
    let p = CircuitParams::table1();
    let phi0 = zero_coupling_bias(&p, turns_to_rad(0.4), turns_to_rad(0.49)).unwrap();
    let (lo, hi) = coupling_window(&p, phi0, from_mhz(25.0)).unwrap();
    let biases: Vec<FluxBias> = (0..200).map(|k| FluxBias::rf(lo + (hi - lo) * k as f64 / 199.0)).collect();
    let probe: Vec<f64> = (0..400).map(|k| 5.40e9 + 0.25e9 * k as f64 / 399.0).collect();
    let drive = measured_drive(0.25);
    let mut group = c.benchmark_group("scan_spectrum");
    group.sample_size(20);
    group.bench_function("200x400", |b| {
        b.iter(|| scan_spectrum(&p, black_box(&biases), &probe, &drive, Signal::TBA).unwrap())
    });
    group.finish();
}

criterion_group!(benches, scan);
criterion_main!(benches);
