use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sk_clt::harness::map_indexed;
use sk_clt::moments::ModelParams;
use sk_clt::skexact::{gibbs_correlations, sample_disorder, FieldMode, GibbsOptions};

fn options(order: usize) -> GibbsOptions {
    GibbsOptions {
        order,
        keep_weights: false,
        field_mode: FieldMode::Sk,
    }
}

fn single_sample(c: &mut Criterion) {
    let params = ModelParams::new(0.15, 0.3).unwrap();
    let mut group = c.benchmark_group("gibbs_correlations");
    group.sample_size(10);
    for &(n, order) in &[(12, 4), (16, 2), (16, 4), (20, 2)] {
        let d = sample_disorder(n, 1, 0).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("order{order}"), n), &d, |b, d| {
            b.iter(|| gibbs_correlations(d, params, options(order)).unwrap())
        });
    }
    group.finish();
}

/// Sequential versus data-parallel evaluation of a batch of disorder samples.
fn batch(c: &mut Criterion) {
    let params = ModelParams::new(0.15, 0.3).unwrap();
    let mut group = c.benchmark_group("batch_n14_order4");
    group.sample_size(10);
    let count = 64;
    let work = |i: u64| {
        let d = sample_disorder(14, 1, i)?;
        gibbs_correlations(&d, params, options(4)).map(|s| s.log_z)
    };
    group.bench_function("sequential", |b| {
        b.iter(|| map_indexed(count, 1, work).unwrap())
    });
    group.bench_function("parallel", |b| {
        b.iter(|| map_indexed(count, 0, work).unwrap())
    });
    group.finish();
}

criterion_group!(benches, single_sample, batch);
criterion_main!(benches);
