use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use gravtime_core::experiments::{figure3_platforms, figure3_table};
use gravtime_core::kernel::{axis_from_quadratic, normalized_coeffs, retention_kernel};
use gravtime_core::{freefall, kasevich_chu, schur_effective, GaussianProbe, KCConfig};

fn freefall_qfim(c: &mut Criterion) {
    let probe = GaussianProbe::natural(1.3).unwrap();
    c.bench_function("freefall qfim + schur", |b| {
        b.iter(|| {
            let f = freefall::qfim(&probe, black_box(0.7), black_box(2.0)).unwrap();
            schur_effective(&f).unwrap()
        })
    });
}

fn kernel_sweep(c: &mut Criterion) {
    let cfg = KCConfig::ideal(1.6e7, 0.06, 9.81, 0.0138).unwrap();
    let p = kasevich_chu::fullstate_kernel_params(&cfg).unwrap();
    let n = normalized_coeffs(&p, &axis_from_quadratic(&p).unwrap()).unwrap();
    c.bench_function("retention kernel, 1000 u points", |b| {
        b.iter(|| {
            (0..1000)
                .map(|i| retention_kernel(&n, -10.0 + 0.02 * i as f64).unwrap())
                .sum::<f64>()
        })
    });
}

fn figure3(c: &mut Criterion) {
    let t: Vec<f64> = (1..=250).map(|i| 1e-3 * i as f64).collect();
    let platforms = figure3_platforms();
    c.bench_function("figure 3 table", |b| b.iter(|| figure3_table(&platforms, black_box(&t)).unwrap()));
}

criterion_group!(benches, freefall_qfim, kernel_sweep, figure3);
criterion_main!(benches);
