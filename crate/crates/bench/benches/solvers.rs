use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use mesp_bench::{binary_instance, subset_instance};
use mesp_core::exact::{solve_exact, Objective, SolveBudget};
use mesp_core::fptas::{dp_min_min_binary, FptasConfig};
use mesp_core::rational::rat;
use mesp_core::zonotope::{solve_maxmin_binary, solve_maxmin_subset, ZonotopeConfig};

fn bench_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact_min_min");
    group.sample_size(10);
    for n in [8usize, 10, 12] {
        let instance = binary_instance(n, 0xBE_0000 + n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &instance, |b, inst| {
            b.iter(|| {
                solve_exact(black_box(inst), Objective::MinMin, &SolveBudget::default()).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_fptas(c: &mut Criterion) {
    let mut group = c.benchmark_group("fptas_binary");
    group.sample_size(10);
    let instance = binary_instance(10, 0xBE_1000);
    for (label, epsilon) in [("1", rat(1, 1)), ("1/4", rat(1, 4)), ("1/10", rat(1, 10))] {
        let config = FptasConfig::new(epsilon).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(label), &config, |b, config| {
            b.iter(|| dp_min_min_binary(black_box(&instance), config).unwrap())
        });
    }
    group.finish();
}

fn bench_zonotope(c: &mut Criterion) {
    let mut group = c.benchmark_group("zonotope_max_min");
    group.sample_size(10);
    for n in [8usize, 16, 24] {
        let instance = binary_instance(n, 0xBE_2000 + n as u64);
        group.bench_with_input(
            BenchmarkId::new("binary", n),
            &instance,
            |b, inst| b.iter(|| solve_maxmin_binary(black_box(inst), &ZonotopeConfig::default())),
        );
    }
    for (n, k) in [(8usize, 3usize), (12, 5)] {
        let instance = subset_instance(n, k, 0xBE_3000 + n as u64);
        group.bench_with_input(
            BenchmarkId::new("subset", format!("{n}_{k}")),
            &instance,
            |b, inst| b.iter(|| solve_maxmin_subset(black_box(inst), &ZonotopeConfig::default())),
        );
    }
    group.finish();
}

criterion_group!(benches, bench_exact, bench_fptas, bench_zonotope);
criterion_main!(benches);
