use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parcelingam::independence::{GaussianGram, HsicTest, IndependenceTest};
use parcelingam_bench::dependent_pair;

fn hsic(c: &mut Criterion) {
    let mut group = c.benchmark_group("hsic");
    group.sample_size(10);
    for n in [200, 500, 1000, 2000] {
        let (u, v) = dependent_pair(n, 1);
        group.bench_with_input(BenchmarkId::new("full_test", n), &n, |b, _| {
            b.iter(|| HsicTest::default().test(&u, &v).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("gram", n), &n, |b, _| b.iter(|| GaussianGram::new(&u)));
        let test = HsicTest::default();
        let (pu, pv) = (test.prepare(&u).unwrap(), test.prepare(&v).unwrap());
        group.bench_with_input(BenchmarkId::new("prepared_pair", n), &n, |b, _| b.iter(|| test.p_value(&pu, &pv)));
    }
    group.finish();
}

criterion_group!(benches, hsic);
criterion_main!(benches);
