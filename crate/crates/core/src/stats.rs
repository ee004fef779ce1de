//! Space and per-query work reports.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::Rng;

use crate::minmax::Probe;
use crate::query::{Query, QUERY_NAMES};
use crate::tree::DynamicTree;

/// Multi-line breakdown of the space used by `tree`.
pub fn space_table(tree: &DynamicTree) -> String {
    let s = tree.space();
    let n = s.nodes.max(1) as f64;
    let m = &s.minmax;
    let rows = [
        ("leaf blocks", m.leaf_blocks),
        ("subtree sizes", m.sizes),
        ("child offsets", m.offsets),
        ("maxima", m.maxima),
        ("minima", m.minima),
        ("cartesian trees", m.cartesian),
        ("minimum counts", m.counts),
        ("tree skeleton", m.skeleton),
        ("heavy index", s.heavy_index),
    ];
    let mut out = String::new();
    writeln!(out, "nodes {}  height {}  heavy nodes {}", s.nodes, tree.min_max().height(), s.heavy_nodes).unwrap();
    for (name, bits) in rows {
        writeln!(out, "{name:>16} {bits:>12} bits {:>9.2} bits/node", bits as f64 / n).unwrap();
    }
    writeln!(out, "{:>16} {:>12} bits {:>9.2} bits/node", "total", s.total_bits(), s.bits_per_node()).unwrap();
    out
}

/// For each query kind, how often each number of visited tree nodes
/// occurred over `samples` random queries.
pub fn probe_histograms(tree: &DynamicTree, samples: usize, rng: &mut impl Rng) -> BTreeMap<&'static str, BTreeMap<u64, usize>> {
    let mut hist: BTreeMap<&'static str, BTreeMap<u64, usize>> = BTreeMap::new();
    if tree.is_empty() {
        return hist;
    }
    for _ in 0..samples {
        let x = random_node(tree, rng);
        let y = random_node(tree, rng);
        let i = rng.gen_range(1..=4);
        for q in Query::all_for(x, y, i) {
            let mut probe = Probe::default();
            let _ = tree.query_probed(&q, &mut probe);
            *hist.entry(q.name()).or_default().entry(probe.node_visits).or_default() += 1;
        }
    }
    hist
}

/// A uniformly random node of a non-empty tree.
pub fn random_node(tree: &DynamicTree, rng: &mut impl Rng) -> usize {
    let len = tree.min_max().len();
    loop {
        let x = rng.gen_range(1..=len);
        if tree.is_node(x) {
            return x;
        }
    }
}

/// Text rendering of [`probe_histograms`], queries in canonical order.
pub fn render_histograms(hist: &BTreeMap<&'static str, BTreeMap<u64, usize>>) -> String {
    let mut out = String::new();
    for name in QUERY_NAMES {
        let Some(h) = hist.get(name) else { continue };
        let total: usize = h.values().sum();
        let mean = h.iter().map(|(v, c)| *v as f64 * *c as f64).sum::<f64>() / total.max(1) as f64;
        let cells: Vec<String> = h.iter().map(|(v, c)| format!("{v}:{c}")).collect();
        writeln!(out, "{name:>16}  mean {mean:>6.1}  visits {}", cells.join(" ")).unwrap();
    }
    out
}
