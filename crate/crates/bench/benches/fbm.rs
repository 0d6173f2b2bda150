use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fsse_core::fbm::uniform_grid;
use fsse_core::{FbmMethod, FbmSampler};
use std::hint::black_box;

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("fbm_sample");
    for points in [256usize, 4096] {
        let times = uniform_grid(1.0, points + 1);
        let circulant = FbmSampler::new(0.75, &times, FbmMethod::Circulant).unwrap();
        group.bench_with_input(BenchmarkId::new("circulant", points), &circulant, |b, s| {
            b.iter(|| black_box(s.sample(7)))
        });
        if points <= 256 {
            let dense = FbmSampler::new(0.75, &times, FbmMethod::Cholesky).unwrap();
            group.bench_with_input(BenchmarkId::new("cholesky", points), &dense, |b, s| {
                b.iter(|| black_box(s.sample(7)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
