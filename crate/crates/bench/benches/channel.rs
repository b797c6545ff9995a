use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use debrisense::experiments::{simulate_sample, Cell, ExperimentConfig};
use debrisense::link::{run_link, LinkOptions};
use debrisense::mimo::{assemble_subband, ArrayConfig, Direction, PathContribution};
use debrisense::{ComplexGain, DebrisClass, Mechanism};
use num_complex::Complex64;

fn paths(n: usize) -> Vec<PathContribution> {
    (0..n)
        .map(|i| {
            let t = i as f64 * 0.37;
            PathContribution {
                mechanism: if i == 0 { Mechanism::LoS } else { Mechanism::Scattering },
                gain: ComplexGain(Complex64::from_polar(1e-10 / (1.0 + t), t)),
                delay_s: 1.6e-3 + 1e-6 * t,
                aod: Direction { theta: 1.2 + 0.1 * t.sin(), phi: t },
                aoa: Direction { theta: 1.9 + 0.1 * t.cos(), phi: -t },
            }
        })
        .collect()
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble_subband");
    let p = paths(8);
    for n in [4usize, 16, 64] {
        let cfg = ArrayConfig::square(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| assemble_subband(black_box(&p), &cfg, 3e12, 7000.0, true).unwrap())
        });
    }
    g.finish();
}

fn link(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_link");
    g.sample_size(20);
    let p = paths(20);
    let opts = LinkOptions::default();
    for n in [4usize, 16] {
        let cfg = ArrayConfig::square(n);
        let chans: Vec<_> =
            (0..8).map(|k| assemble_subband(&p, &cfg, 3e12 + k as f64 * 1.25e9, 7000.0, true).unwrap()).collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| run_link(black_box(&chans), 15.0, &opts, 11).unwrap())
        });
    }
    g.finish();
}

fn sample(c: &mut Criterion) {
    let cfg = ExperimentConfig::table(2).unwrap();
    let cell = Cell {
        frequency_hz: 5e12,
        snr_db: 15.0,
        mimo: 16,
        class: DebrisClass::RoughMetal,
        density_per_km3: Some(1e-6),
    };
    let mut g = c.benchmark_group("simulate_sample");
    g.sample_size(10);
    g.bench_function("5THz_16x16", |b| b.iter(|| simulate_sample(&cfg, black_box(&cell), 3, 7).unwrap()));
    g.finish();
}

criterion_group!(benches, assembly, link, sample);
criterion_main!(benches);
