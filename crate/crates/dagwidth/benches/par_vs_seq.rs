//! Parallel-vs-sequential comparison for the data-parallel kernels.
//!
//! Run with the default features to get both sides: the public entry
//! points fan out through rayon, the `*_seq` twins are the sequential
//! fallbacks that `--no-default-features` would select for everything.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dagwidth::cycles::{circumference_bounded, circumference_bounded_seq};
use dagwidth::digraph::{bidirect, Digraph};
use dagwidth::game::{cops_win, decompose};

/// Deterministic sparse digraph with many small strongly connected
/// pockets: a chain of bidirected 4-cycles with forward shortcuts.
fn pocket_chain(pockets: usize) -> Digraph {
    let n = pockets * 4;
    let mut edges = Vec::new();
    for p in 0..pockets {
        let b = 4 * p;
        edges.push((b, b + 1));
        edges.push((b + 1, b + 2));
        edges.push((b + 2, b + 3));
        edges.push((b, b + 3));
    }
    let mut d = bidirect(n, &edges).unwrap();
    for p in 0..pockets.saturating_sub(1) {
        d.add_arc(4 * p + 2, 4 * (p + 1)).unwrap();
    }
    d
}

fn bench_circumference(c: &mut Criterion) {
    let mut group = c.benchmark_group("circumference");
    let d = pocket_chain(24);
    group.bench_with_input(BenchmarkId::new("parallel", 24), &d, |b, d| {
        b.iter(|| circumference_bounded(d, 4).unwrap())
    });
    group.bench_with_input(BenchmarkId::new("sequential", 24), &d, |b, d| {
        b.iter(|| circumference_bounded_seq(d, 4).unwrap())
    });
    group.finish();
}

fn bench_cop_game(c: &mut Criterion) {
    let mut group = c.benchmark_group("cop_game_fixed_point");
    let d = bidirect(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
    group.bench_function("parallel", |b| b.iter(|| cops_win(&d, 3, 1_000_000).unwrap()));
    group.finish();
}

fn bench_decompose(c: &mut Criterion) {
    let mut group = c.benchmark_group("decompose");
    let d = pocket_chain(16);
    group.bench_function("pocket_chain_16", |b| b.iter(|| decompose(&d, 4).unwrap()));
    group.finish();
}

criterion_group!(benches, bench_circumference, bench_cop_game, bench_decompose);
criterion_main!(benches);
