use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hopfzero::hypernorm::{infinite_level, second_level, HyperOptions};
use hopfzero::radius::diag_sequence;
use hopfzero_bench::{dense, rossler_exact, rossler_float};

fn bracket(c: &mut Criterion) {
    let a = dense(8);
    let b = dense(6);
    c.bench_function("bracket dense 8x6", |bn| bn.iter(|| black_box(&a).bracket(black_box(&b))));
}

fn normalize(c: &mut Criterion) {
    let v = rossler_exact();
    c.bench_function("second level rossler N=12", |bn| bn.iter(|| second_level(black_box(&v), 12).unwrap()));
    c.bench_function("infinite level rossler N=12", |bn| {
        bn.iter(|| infinite_level(black_box(&v), 12, &HyperOptions::default()).unwrap())
    });
}

fn radius(c: &mut Criterion) {
    let v = rossler_float();
    let mut g = c.benchmark_group("radius");
    g.sample_size(10);
    g.bench_function("diag sequence G=64", |bn| bn.iter(|| diag_sequence(black_box(&v), 64, 128).unwrap()));
    g.finish();
}

criterion_group!(benches, bracket, normalize, radius);
criterion_main!(benches);
