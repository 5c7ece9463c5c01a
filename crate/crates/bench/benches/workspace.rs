use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use orthohaptic::optimize::{sizing_check, SizingOptions};
use orthohaptic::workspace::{largest_cube, map_workspace, Bounds, CubeSearch};
use orthohaptic::DeviceGeometry;
use orthohaptic_bench::geometry;

fn map(c: &mut Criterion) {
    let g = geometry();
    let mut group = c.benchmark_group("map_workspace");
    group.sample_size(10);
    for res in [21, 61] {
        group.bench_function(format!("res_{res}"), |b| {
            b.iter(|| black_box(map_workspace(&g, &Bounds::symmetric(1.2), res).unwrap()))
        });
    }
    group.finish();
}

fn cube(c: &mut Criterion) {
    let g = geometry();
    let mut group = c.benchmark_group("cube");
    group.sample_size(10);
    group.bench_function("largest_cube", |b| {
        b.iter(|| {
            black_box(
                largest_cube(&g, &Bounds::symmetric(1.0), 1e-4, &CubeSearch::default()).unwrap(),
            )
        })
    });
    let template = DeviceGeometry::default();
    let options = SizingOptions::default();
    group.bench_function("sizing_check", |b| {
        b.iter(|| black_box(sizing_check(black_box(1.6), 1.0, 2.0, &template, &options).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, map, cube);
criterion_main!(benches);
