use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use orthohaptic::orthoglide::{fk_translation, ik_translation, jacobian_translation};
use orthohaptic::transmission::double_cardan_transfer;
use orthohaptic::wrist::{fk_wrist, ik_wrist};
use orthohaptic_bench::{geometry, poses, wrist_samples};

fn translation(c: &mut Criterion) {
    let g = geometry();
    let poses = poses(6);
    c.bench_function("ik_translation", |b| {
        b.iter(|| {
            for (p, _) in &poses {
                black_box(ik_translation(black_box(p), &g).ok());
            }
        })
    });
    c.bench_function("fk_translation", |b| {
        b.iter(|| {
            for (_, rho) in &poses {
                black_box(fk_translation(black_box(rho), &g).ok());
            }
        })
    });
    c.bench_function("jacobian_translation", |b| {
        b.iter(|| {
            for (p, _) in &poses {
                black_box(
                    jacobian_translation(black_box(p), &g)
                        .map(|j| j.amplification())
                        .ok(),
                );
            }
        })
    });
}

fn wrist(c: &mut Criterion) {
    let samples = wrist_samples(128);
    let quats: Vec<_> = samples.iter().map(fk_wrist).collect();
    c.bench_function("fk_wrist", |b| {
        b.iter(|| {
            for t in &samples {
                black_box(fk_wrist(black_box(t)));
            }
        })
    });
    c.bench_function("ik_wrist", |b| {
        b.iter(|| {
            for q in &quats {
                black_box(ik_wrist(black_box(q)).ok());
            }
        })
    });
}

fn transmission(c: &mut Criterion) {
    let g = geometry();
    let poses = poses(4);
    c.bench_function("double_cardan_transfer", |b| {
        b.iter(|| {
            for (p, _) in &poses {
                black_box(double_cardan_transfer(black_box(1.3), p, &g, 2).ok());
            }
        })
    });
}

criterion_group!(benches, translation, wrist, transmission);
criterion_main!(benches);
