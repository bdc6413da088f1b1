// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use cpfilter::noisegen::{default_dt, synthesize};
use cpfilter::{ensemble, EnsembleConfig, NoiseSpectrum, SequenceId};
use cpfilter_bench::{sequence, spectrum, OMEGA};

fn small_ensemble(c: &mut Criterion) {
    let sk1 = sequence(SequenceId::Sk1);
    let spec = spectrum(1e-2);
    let zero = NoiseSpectrum::zero();
    let cfg = EnsembleConfig {
        n: 200,
        seed: 1,
        ..Default::default()
    };
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    g.bench_function("sk1_amplitude_n200", |b| {
        b.iter(|| ensemble(&sk1, black_box(&spec), &zero, &cfg))
    });
    g.finish();
}

fn synthesis(c: &mut Criterion) {
    let spec = spectrum(1e-2);
    let dt = default_dt(OMEGA);
    c.bench_function("synthesize_4096", |b| {
        b.iter(|| synthesize(&spec, dt, 4096.0 * dt, black_box(7)))
    });
}

criterion_group!(benches, small_ensemble, synthesis);
criterion_main!(benches);
