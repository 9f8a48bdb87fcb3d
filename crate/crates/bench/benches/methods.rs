use bcinv_bench::{instance, SIZES};
use bcinv_core::inverse::compute_with;
use bcinv_core::random::Sampler;
use bcinv_core::special::{drazin_inverse, group_inverse};
use bcinv_core::{bc_inverse, existence_report, ComputeOptions, Method, Tolerance};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn methods(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("method");
    for (label, n, m, r) in SIZES {
        let inst = instance(n, m, r);
        for method in Method::ALL {
            group.bench_with_input(BenchmarkId::new(method.name(), label), &inst, |b, inst| {
                b.iter(|| compute_with(method, black_box(&inst.a), &inst.d, &inst.e, &tol).unwrap())
            });
        }
    }
    group.finish();
}

fn dispatcher(c: &mut Criterion) {
    let tol = Tolerance::default();
    let opts = ComputeOptions::default();
    let mut group = c.benchmark_group("dispatch");
    for (label, n, m, r) in SIZES {
        let inst = instance(n, m, r);
        group.bench_with_input(BenchmarkId::new("exists", label), &inst, |b, inst| {
            b.iter(|| existence_report(black_box(&inst.a), &inst.d, &inst.e, &tol).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("bc_inverse", label), &inst, |b, inst| {
            b.iter(|| bc_inverse(black_box(&inst.a), &inst.d, &inst.e, &tol, &opts).unwrap())
        });
    }
    group.finish();
}

fn special(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut group = c.benchmark_group("special");
    for n in [8, 32] {
        let mut s = Sampler::seeded(n as u64);
        let a = s.index_one_non_ep(n, n / 2);
        group.bench_with_input(BenchmarkId::new("group", n), &a, |b, a| {
            b.iter(|| group_inverse(black_box(a), &tol).unwrap())
        });
        let a = s.similar_to_block(n, 3, false);
        group.bench_with_input(BenchmarkId::new("drazin", n), &a, |b, a| {
            b.iter(|| drazin_inverse(black_box(a), &tol).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, methods, dispatcher, special);
criterion_main!(benches);
