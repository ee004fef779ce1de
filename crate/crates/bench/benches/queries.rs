use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dynbp::fuzz::random_bp;
use dynbp::stats::random_node;
use dynbp::{DynamicTree, MinMaxTree, Query, TreeConfig, WeightFn};

fn tree_queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree");
    for n in [10_000usize, 200_000] {
        let mut rng = StdRng::seed_from_u64(7);
        let tree = DynamicTree::from_bp(&random_bp(n, &mut rng), TreeConfig::default()).unwrap();
        let nodes: Vec<usize> = (0..1024).map(|_| random_node(&tree, &mut rng)).collect();
        for k in [0usize, 3, 4, 5, 6, 10, 11, 12] {
            let name = Query::all_for(1, 1, 1)[k].name();
            let batch: Vec<Query> = nodes
                .iter()
                .zip(nodes.iter().rev())
                .map(|(&x, &y)| Query::all_for(x, y, rng.gen_range(1..=3))[k])
                .collect();
            group.bench_with_input(BenchmarkId::new(name, n), &batch, |b, batch| {
                let mut i = 0;
                b.iter(|| {
                    i = (i + 1) % batch.len();
                    black_box(tree.query(&batch[i]).ok())
                })
            });
        }
    }
    group.finish();
}

fn base_searches(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    let mut rng = StdRng::seed_from_u64(11);
    let bits = random_bp(100_000, &mut rng);
    let len = bits.len();
    let mm = MinMaxTree::from_bits(&bits, Default::default()).unwrap();
    let starts: Vec<usize> = (0..1024).map(|_| rng.gen_range(1..=len)).collect();
    for (label, f) in [("fwd_pi", WeightFn::Pi), ("fwd_phi", WeightFn::Phi)] {
        group.bench_function(label, |b| {
            let mut i = 0;
            b.iter(|| {
                i = (i + 1) % starts.len();
                black_box(mm.fwd_search_geq(f, starts[i], 3).unwrap())
            })
        });
    }
    group.bench_function("bwd_pi", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % starts.len();
            black_box(mm.bwd_search_geq(WeightFn::Pi, starts[i], 2).unwrap())
        })
    });
    group.bench_function("min_count", |b| {
        let mut i = 0;
        b.iter(|| {
            i = (i + 1) % starts.len();
            let (a, z) = (starts[i].min(starts[1023 - i]), starts[i].max(starts[1023 - i]));
            black_box(mm.min_family(a, z).unwrap())
        })
    });
    group.finish();
}

criterion_group!(benches, tree_queries, base_searches);
criterion_main!(benches);
