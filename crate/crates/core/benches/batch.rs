use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lie_poisson_core::batch;
use lie_poisson_core::fixtures::{seeded_random_state, FixtureKind};
use lie_poisson_core::toda::{flaschka, involution_defect, intertwining_defect};

fn toda_audit(seed: &u64) -> f64 {
    let s = seeded_random_state(*seed, FixtureKind::Toda, 8).into_toda().unwrap();
    let lp = flaschka(&s).unwrap();
    let mut worst = intertwining_defect(&s).unwrap();
    for j in 1..=5 {
        for k in 1..=5 {
            worst = worst.max(involution_defect(&lp, j, k).unwrap());
        }
    }
    worst
}

fn bench_batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("toda_audit");
    for count in [16usize, 64] {
        let seeds: Vec<u64> = (0..count as u64).collect();
        group.bench_with_input(BenchmarkId::new("sequential", count), &seeds, |b, seeds| {
            b.iter(|| batch::map_sequential(seeds, toda_audit))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", count), &seeds, |b, seeds| {
            b.iter(|| batch::map_parallel(seeds, toda_audit))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_batch);
criterion_main!(benches);
