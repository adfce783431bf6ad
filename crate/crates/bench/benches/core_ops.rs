use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use permgrowth::perm::power_set;
use permgrowth::walks::cayley_bfs;
use permgrowth::{StabilizerChain, DEFAULT_CAP};
use permgrowth_bench::{scrambled, sym_pair};

fn compose(c: &mut Criterion) {
    let mut g = c.benchmark_group("compose");
    for n in [16, 256, 4096] {
        let (p, q) = (scrambled(n, 1), scrambled(n, 2));
        g.bench_function(format!("n={n}"), |b| b.iter(|| black_box(&p).compose(black_box(&q))));
    }
    g.finish();
}

fn bfs(c: &mut Criterion) {
    let a = sym_pair(7).symmetrize();
    let mut g = c.benchmark_group("cayley_bfs");
    g.sample_size(10);
    g.bench_function("Sym(7)", |b| b.iter(|| cayley_bfs(black_box(&a), DEFAULT_CAP).unwrap().diameter));
    g.finish();
}

fn schreier_sims(c: &mut Criterion) {
    let a = sym_pair(20);
    let gens = a.non_identity();
    c.bench_function("schreier_sims/Sym(20)", |b| {
        b.iter_batched(|| gens.clone(), |g| StabilizerChain::new(&g, 20).order(), BatchSize::SmallInput)
    });
}

fn powers(c: &mut Criterion) {
    let a = sym_pair(7).symmetrize();
    let mut g = c.benchmark_group("power_set");
    g.sample_size(10);
    for k in [4, 8, 12] {
        g.bench_function(format!("Sym(7) k={k}"), |b| b.iter(|| power_set(&a, k, DEFAULT_CAP).unwrap().len()));
    }
    g.finish();
}

criterion_group!(benches, compose, bfs, schreier_sims, powers);
criterion_main!(benches);
