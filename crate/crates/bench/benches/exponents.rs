use criterion::{criterion_group, criterion_main, Criterion};
use qlimit_core::{
    continuum_exponent, estimate_error, fock_oracle_q, hypothesis_h0, hypothesis_h1, mode_geometry,
    pixelated_exponent, q_of_s, quantum_exponent, receiver_exponent, receiver_exponent_bruteforce, Receiver,
    SceneParams, TrialConfig,
};
use std::hint::black_box;

fn exponents(c: &mut Criterion) {
    c.bench_function("continuum_exponent mu=0.1", |b| {
        b.iter(|| continuum_exponent(black_box(0.1)).unwrap())
    });
    c.bench_function("pixelated_exponent mu=0.1 delta=0.4", |b| {
        b.iter(|| pixelated_exponent(black_box(0.1), black_box(0.4)).unwrap())
    });
    c.bench_function("receiver_exponent", |b| {
        b.iter(|| receiver_exponent(black_box(0.5), black_box(0.01)).unwrap())
    });
    c.bench_function("receiver_exponent_bruteforce cutoff=40", |b| {
        b.iter(|| receiver_exponent_bruteforce(black_box(0.5), black_box(0.01), 40).unwrap())
    });
    c.bench_function("quantum_exponent", |b| {
        b.iter(|| quantum_exponent(black_box(0.5), black_box(0.01)).unwrap())
    });
}

fn trace_overlap(c: &mut Criterion) {
    let geom = mode_geometry(0.5, 0.01).unwrap();
    let (h0, h1) = (hypothesis_h0(&geom), hypothesis_h1(&geom).unwrap());
    c.bench_function("q_of_s", |b| b.iter(|| q_of_s(&h0, &h1, black_box(0.3)).unwrap()));
    let mut group = c.benchmark_group("fock_oracle_q");
    group.sample_size(10);
    group.bench_function("cutoff=15", |b| {
        b.iter(|| fock_oracle_q(&h0, &h1, black_box(0.3), 15).unwrap())
    });
    group.finish();
}

fn simulation(c: &mut Criterion) {
    let scene = SceneParams::new(0.5, 0.01, 2000).unwrap();
    let mut group = c.benchmark_group("estimate_error 10k trials");
    group.sample_size(10);
    for (name, receiver) in [
        ("continuum", Receiver::Continuum),
        ("pixelated", Receiver::Pixelated { delta: 0.4 }),
        ("mode-sorted", Receiver::ModeSorted),
    ] {
        let config = TrialConfig::new(scene, receiver, 10_000, 1).unwrap();
        group.bench_function(name, |b| b.iter(|| estimate_error(&config).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, exponents, trace_overlap, simulation);
criterion_main!(benches);
