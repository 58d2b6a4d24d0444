use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use pisot_bench::{params, recurrence, CASES};
use pisot_core::{certify_roots, decide, generate, guess_recurrence};

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    let p = params(10, 219);
    for n in [100, 1000, 5000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| generate(black_box(&p), n).unwrap())
        });
    }
    group.finish();
}

fn bench_guess(c: &mut Criterion) {
    let mut group = c.benchmark_group("guess");
    for (label, x, y, _) in CASES {
        let terms = generate(&params(x, y), 56).unwrap().terms;
        group.bench_function(label, |b| b.iter(|| guess_recurrence(black_box(&terms), 12).unwrap()));
    }
    group.finish();
}

fn bench_certify(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify_roots");
    for (label, x, y, coefficients) in CASES {
        let poly = recurrence(x, y, coefficients).char_poly();
        for bits in [128, 1024] {
            group.bench_function(format!("{label}/{bits}"), |b| {
                b.iter(|| certify_roots(black_box(&poly), bits).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_decide(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide");
    group.sample_size(10);
    for (label, x, y, coefficients) in CASES {
        let p = params(x, y);
        let rec = recurrence(x, y, coefficients);
        group.bench_function(label, |b| b.iter(|| decide(black_box(&p), &rec, 2000).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_generate, bench_guess, bench_certify, bench_decide);
criterion_main!(benches);
