use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fsse_core::fbm::uniform_grid;
use fsse_core::fraccalc::StieltjesIntegrator;
use fsse_core::{FbmMethod, FbmSampler, FracConfig};
use std::hint::black_box;

fn integrate(c: &mut Criterion) {
    let cfg = FracConfig::stochastic(0.4, 0.75).unwrap();
    let mut group = c.benchmark_group("stieltjes_integrate");
    group.sample_size(20);
    for points in [64usize, 256, 2048] {
        let times = uniform_grid(1.0, points + 1);
        let g = FbmSampler::new(0.75, &times, FbmMethod::Circulant).unwrap().sample(3).values;
        let f: Vec<f64> = times.iter().map(|t| (3.0 * t).cos()).collect();
        let fft = StieltjesIntegrator::new(&times, cfg).unwrap();
        group.bench_with_input(BenchmarkId::new("uniform", points), &points, |b, _| {
            b.iter(|| black_box(fft.integrate(&f, &g).unwrap()))
        });
        if points <= 64 {
            let direct = StieltjesIntegrator::direct(&times, cfg).unwrap();
            group.bench_with_input(BenchmarkId::new("direct", points), &points, |b, _| {
                b.iter(|| black_box(direct.integrate(&f, &g).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, integrate);
criterion_main!(benches);
