use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use fhc_bench::{default_profile, strided_indices};
use fhc_core::dyadic::{nk_closed_general, nk_closed_identity, nk_recursive};
use fhc_core::weights::{density_via_subsequence, logsum::RatioAccumulator};
use fhc_core::{IntegerSet, StepFunction, WeightFamily};

fn closed_forms(c: &mut Criterion) {
    let ks = strided_indices(4096, 977);
    let tower = StepFunction::tower(2).unwrap();
    let mut g = c.benchmark_group("nk");
    g.throughput(Throughput::Elements(ks.len() as u64));
    g.bench_function("closed_identity", |b| {
        b.iter(|| {
            ks.iter()
                .map(|&k| nk_closed_identity(black_box(k)).unwrap())
                .sum::<u128>()
        })
    });
    g.bench_function("closed_general_tower2", |b| {
        b.iter(|| {
            ks.iter()
                .map(|&k| nk_closed_general(&tower, black_box(k)).unwrap())
                .sum::<u128>()
        })
    });
    for count in [1u64 << 12, 1 << 16] {
        g.throughput(Throughput::Elements(count));
        g.bench_with_input(BenchmarkId::new("recursive", count), &count, |b, &count| {
            b.iter(|| nk_recursive(&StepFunction::Identity, black_box(count)))
        });
    }
    g.finish();
}

fn log_sum_scan(c: &mut Criterion) {
    let family = WeightFamily::B(2.0);
    let mut g = c.benchmark_group("weights");
    for horizon in [10_000u64, 100_000] {
        let lws: Vec<f64> = (1..=horizon).map(|k| family.log_weight(k)).collect();
        g.throughput(Throughput::Elements(horizon));
        g.bench_with_input(
            BenchmarkId::new("ratio_accumulator", horizon),
            &lws,
            |b, lws| {
                b.iter(|| {
                    let mut acc = RatioAccumulator::default();
                    for (i, &lw) in lws.iter().enumerate() {
                        acc.push(lw, i % 4 == 0);
                    }
                    acc.hit_ratio()
                })
            },
        );
    }
    let seq = IntegerSet::sequence(|k| nk_closed_identity(k).unwrap() as u64);
    g.bench_function("subsequence_b2_10000", |b| {
        b.iter(|| {
            density_via_subsequence(&seq, &family, black_box(10_000))
                .unwrap()
                .last_entry
        })
    });
    g.finish();
}

fn shift_profile(c: &mut Criterion) {
    let profile = default_profile();
    let ns = strided_indices(4096, 2_441);
    let mut g = c.benchmark_group("shift");
    g.throughput(Throughput::Elements(ns.len() as u64));
    g.bench_function("log2_product", |b| {
        b.iter(|| {
            ns.iter()
                .filter(|&&n| profile.log2_product(black_box(n)) > 0.into())
                .count()
        })
    });
    g.finish();
}

criterion_group!(benches, closed_forms, log_sum_scan, shift_profile);
criterion_main!(benches);
