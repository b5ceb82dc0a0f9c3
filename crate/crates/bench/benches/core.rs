use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use c2adic_core::cycles::{build_qn, cycle_decomposition, enumerate_ergodic_sets};
use c2adic_core::embedding::generate_set;
use c2adic_core::qmap::{q_mod, qinv_mod};
use c2adic_core::search::{search, SearchConfig};

fn residues(c: &mut Criterion) {
    let xs: Vec<u64> = (0..1024u64)
        .map(|i| i.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .collect();
    c.bench_function("q_mod 64 bits x1024", |b| {
        b.iter(|| {
            xs.iter()
                .map(|&x| q_mod(black_box(x), 64))
                .fold(0, u64::wrapping_add)
        })
    });
    c.bench_function("qinv_mod 64 bits x1024", |b| {
        b.iter(|| {
            xs.iter()
                .map(|&x| qinv_mod(black_box(x), 64))
                .fold(0, u64::wrapping_add)
        })
    });
}

fn tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("tables");
    g.sample_size(10);
    for n in [16u32, 20] {
        g.bench_with_input(BenchmarkId::new("build_qn", n), &n, |b, &n| {
            b.iter(|| build_qn(n).unwrap())
        });
    }
    let t = build_qn(20).unwrap();
    g.bench_function("cycle_decomposition 20", |b| {
        b.iter(|| cycle_decomposition(&t).unwrap())
    });
    g.bench_function("ergodic census k<=10 cap 16", |b| {
        b.iter(|| enumerate_ergodic_sets(10, 16).unwrap())
    });
    g.finish();
}

fn search_and_embed(c: &mut Criterion) {
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    let cfg = SearchConfig {
        bound: 199,
        ..SearchConfig::default()
    };
    g.bench_function("search bound 199", |b| b.iter(|| search(&cfg).unwrap()));
    g.bench_function("generate_set 16", |b| b.iter(|| generate_set(16).unwrap()));
    g.finish();
}

criterion_group!(benches, residues, tables, search_and_embed);
criterion_main!(benches);
