use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use dynbp::fuzz::random_bp;
use dynbp::stats::random_node;
use dynbp::{DynamicTree, TreeConfig};

fn insert_delete(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(3);
    let tree = DynamicTree::from_bp(&random_bp(100_000, &mut rng), TreeConfig::default()).unwrap();

    c.bench_function("insert_then_delete_leaf", |b| {
        let mut t = tree.clone();
        b.iter(|| {
            let y = random_node(&t, &mut rng);
            let d = t.degree(y).unwrap();
            let l = rng.gen_range(1..=d + 1);
            let z = t.insert_node(Some(y), l, l - 1).unwrap();
            t.delete_node(black_box(z)).unwrap();
        })
    });

    c.bench_function("insert_adopting_children", |b| {
        b.iter_batched(
            || tree.clone(),
            |mut t| {
                for _ in 0..64 {
                    let y = random_node(&t, &mut rng);
                    let d = t.degree(y).unwrap();
                    let l = rng.gen_range(1..=d + 1);
                    let r = rng.gen_range(l - 1..=d);
                    black_box(t.insert_node(Some(y), l, r).unwrap());
                }
                t
            },
            BatchSize::LargeInput,
        )
    });
}

criterion_group!(benches, insert_delete);
criterion_main!(benches);
