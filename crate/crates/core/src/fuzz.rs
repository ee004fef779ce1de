//! Randomized differential testing of [`DynamicTree`] against [`OracleTree`].
//!
//! A workload is a sequence of node insertions and deletions applied to both
//! trees; every so often every query is asked about every node and the
//! answers compared. On a mismatch the failing workload is shrunk greedily and
//! reported as a replayable script.

use std::fmt;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::oracle::{OracleSnapshot, OracleTree};
use crate::query::{Answer, NodeId, Query};
use crate::tree::{format_bp, DynamicTree, TreeConfig, TreeError};

/// One structural edit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    /// New node adopting children `l..=r` of `y` (`None`: above the root).
    Insert { y: Option<NodeId>, l: u64, r: u64 },
    Delete(NodeId),
}

impl fmt::Display for Op {
    /// Script syntax; the virtual parent of the root is written as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::Insert { y, l, r } => write!(f, "insert {} {l} {r}", y.unwrap_or(0)),
            Op::Delete(x) => write!(f, "delete {x}"),
        }
    }
}

/// A balanced parentheses string of a random tree with `n` nodes.
pub fn random_bp(n: usize, rng: &mut impl Rng) -> Vec<bool> {
    if n == 0 {
        return Vec::new();
    }
    let mut bits = Vec::with_capacity(2 * n);
    bits.push(true);
    let (mut opens, mut excess) = (n - 1, 0usize);
    while opens > 0 || excess > 0 {
        let open = excess == 0 || (opens > 0 && rng.gen_bool(0.5));
        bits.push(open);
        if open {
            opens -= 1;
            excess += 1;
        } else {
            excess -= 1;
        }
    }
    bits.push(false);
    bits
}

/// A random edit of the tree whose nodes and degrees are listed in
/// `outline` (preorder). Inserts are chosen with probability `grow`; a small
/// share of edits is deliberately invalid.
pub fn random_op(outline: &[(NodeId, u64)], grow: f64, rng: &mut impl Rng) -> Op {
    if outline.is_empty() {
        return Op::Insert { y: None, l: 1, r: 0 };
    }
    if rng.gen_bool(0.01) {
        // out-of-range arguments must be rejected identically
        let x = rng.gen_range(0..=2 * outline.len() + 1);
        return match rng.gen_bool(0.5) {
            true => Op::Delete(x),
            false => Op::Insert { y: Some(x), l: rng.gen_range(0..4), r: rng.gen_range(0..4) },
        };
    }
    if rng.gen_bool(grow) {
        if rng.gen_bool(0.02) {
            return Op::Insert { y: None, l: 1, r: 1 };
        }
        let (y, degree) = outline[rng.gen_range(0..outline.len())];
        let l = rng.gen_range(1..=degree + 1);
        // favour short adopted ranges, including empty ones
        let span = rng.gen_range(0..=(degree + 1 - l).min(3));
        let r = if rng.gen_bool(0.1) { rng.gen_range(l - 1..=degree) } else { l - 1 + span };
        Op::Insert { y: Some(y), l, r: r.min(degree) }
    } else {
        // the root can only go when it is the last node
        let first = usize::from(outline.len() > 1);
        Op::Delete(outline[rng.gen_range(first..outline.len())].0)
    }
}

/// Applies `op` to both trees; the outcomes must agree.
pub fn apply_both(tree: &mut DynamicTree, oracle: &mut OracleTree, op: Op) -> Result<(), String> {
    let (got, want) = match op {
        Op::Insert { y, l, r } => (
            tree.insert_node(y, l, r).map(Some),
            oracle.insert_node(y, l, r).map(Some),
        ),
        Op::Delete(x) => (tree.delete_node(x).map(|_| None), oracle.delete_node(x).map(|_| None)),
    };
    if got.is_ok() != want.is_ok() || got.as_ref().ok() != want.as_ref().ok() {
        return Err(format!("`{op}`: tree gave {got:?}, oracle gave {want:?}"));
    }
    Ok(())
}

/// The queries asked about node `x`, with extra arguments drawn around the
/// interesting boundaries.
pub fn queries_for(x: NodeId, snap: &OracleSnapshot, rng: &mut impl Rng) -> Vec<Query> {
    let nodes = snap.nodes();
    let depth = match snap.query(&Query::Depth(x)) {
        Ok(Answer::Count(d)) => d,
        _ => 1,
    };
    let degree = snap.degree(x).unwrap_or(0);
    let other = nodes[rng.gen_range(0..nodes.len())];
    use Query::*;
    vec![
        Depth(x),
        Height(x),
        NumDescendants(x),
        Parent(x),
        Lca(x, other),
        LevelAncestor(x, rng.gen_range(0..=depth)),
        LevelNext(x),
        LevelPrev(x),
        LevelLmost(rng.gen_range(0..=depth + 1)),
        LevelRmost(rng.gen_range(0..=depth + 1)),
        Degree(x),
        ChildRank(x),
        ChildSelect(x, rng.gen_range(0..=degree + 1)),
        FirstChild(x),
        LastChild(x),
        NextSibling(x),
        PrevSibling(x),
    ]
}

/// A query whose answers differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub query: Query,
    pub expected: Result<Answer, TreeError>,
    pub actual: Result<Answer, TreeError>,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &Result<Answer, TreeError>| match r {
            Ok(a) => a.to_string(),
            Err(e) => format!("error ({e})"),
        };
        write!(f, "{}: expected {}, got {}", self.query, show(&self.expected), show(&self.actual))
    }
}

pub fn compare(tree: &DynamicTree, snap: &OracleSnapshot, q: &Query) -> Result<(), Mismatch> {
    let expected = snap.query(q);
    let actual = tree.query(q);
    let same = match (&expected, &actual) {
        (Ok(a), Ok(b)) => a == b,
        (Err(_), Err(_)) => true,
        _ => false,
    };
    if same {
        Ok(())
    } else {
        Err(Mismatch { query: *q, expected, actual })
    }
}

/// Asks every query about every node; returns the number of queries.
pub fn compare_all(tree: &DynamicTree, snap: &OracleSnapshot, rng: &mut impl Rng) -> Result<usize, Mismatch> {
    let mut asked = 0;
    for x in snap.nodes() {
        for q in queries_for(x, snap, rng) {
            compare(tree, snap, &q)?;
            asked += 1;
        }
    }
    // a couple of non-nodes must be rejected by both
    for x in [0, snap.len_bits(), snap.len_bits() + 1] {
        compare(tree, snap, &Query::Depth(x))?;
        asked += 1;
    }
    Ok(asked)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub ops: usize,
    /// Full comparison after this many edits.
    pub check_every: usize,
    /// Deletions are forced once the tree reaches this many nodes.
    pub max_nodes: usize,
    /// Probability that an edit is an insertion while below `max_nodes`.
    pub grow: f64,
    pub tree: TreeConfig,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self { seed: 1, ops: 2000, check_every: 50, max_nodes: 2000, grow: 0.65, tree: TreeConfig::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub ops: usize,
    pub queries: usize,
    pub max_nodes_seen: usize,
    /// Description and shrunk reproduction script of the first failure.
    pub failure: Option<(String, String)>,
}

/// Runs a seeded random workload against the oracle.
pub fn run(cfg: &FuzzConfig) -> FuzzReport {
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut tree = DynamicTree::new(cfg.tree).expect("valid tree configuration");
    let mut oracle = OracleTree::new();
    let mut report = FuzzReport::default();
    let mut history = Vec::new();
    for step in 1..=cfg.ops {
        let outline = oracle.outline();
        let n = outline.len();
        report.max_nodes_seen = report.max_nodes_seen.max(n);
        let grow = if n >= cfg.max_nodes { 0.0 } else { cfg.grow };
        let op = random_op(&outline, grow, &mut rng);
        history.push(op);
        report.ops += 1;
        if let Err(msg) = apply_both(&mut tree, &mut oracle, op) {
            report.failure = Some((msg, shrink(&history, cfg.tree)));
            return report;
        }
        if step % cfg.check_every == 0 || step == cfg.ops {
            let snap = oracle.snapshot();
            if let Err(e) = tree.check_invariants() {
                report.failure = Some((format!("invariant broken: {e}"), script(&history, None)));
                return report;
            }
            match compare_all(&tree, &snap, &mut rng) {
                Ok(asked) => report.queries += asked,
                Err(m) => {
                    report.failure = Some((m.to_string(), shrink(&history, cfg.tree)));
                    return report;
                }
            }
        }
    }
    report
}

/// First disagreement when replaying `ops` and then querying everything.
fn replay_fails(ops: &[Op], cfg: TreeConfig) -> Option<String> {
    let mut tree = DynamicTree::new(cfg).unwrap();
    let mut oracle = OracleTree::new();
    for &op in ops {
        if let Err(msg) = apply_both(&mut tree, &mut oracle, op) {
            return Some(msg);
        }
    }
    let snap = oracle.snapshot();
    for x in snap.nodes() {
        for name in crate::query::QUERY_NAMES {
            for args in exhaustive_args(name, x, &snap) {
                let q = Query::from_parts(name, &args).unwrap();
                if let Err(m) = compare(&tree, &snap, &q) {
                    return Some(m.to_string());
                }
            }
        }
    }
    None
}

fn exhaustive_args(name: &str, x: NodeId, snap: &OracleSnapshot) -> Vec<Vec<u64>> {
    let x = x as u64;
    let depth = match snap.query(&Query::Depth(x as usize)) {
        Ok(Answer::Count(d)) => d,
        _ => 1,
    };
    match name {
        "lca" => snap.nodes().iter().map(|&y| vec![x, y as u64]).collect(),
        "level_ancestor" => (0..=depth).map(|i| vec![x, i]).collect(),
        "child_select" => (0..=snap.degree(x as usize).unwrap_or(0) + 1).map(|i| vec![x, i]).collect(),
        "level_lmost" | "level_rmost" => (0..=depth + 1).map(|d| vec![d]).collect(),
        _ => vec![vec![x]],
    }
}

/// Drops edits one at a time while the failure persists, then renders the
/// survivors as a script ending in the failing check.
pub fn shrink(ops: &[Op], cfg: TreeConfig) -> String {
    let mut ops = ops.to_vec();
    let Some(mut reason) = replay_fails(&ops, cfg) else {
        return script(&ops, None);
    };
    let mut i = ops.len();
    while i > 0 {
        i -= 1;
        let mut trial = ops.clone();
        trial.remove(i);
        if let Some(r) = replay_fails(&trial, cfg) {
            ops = trial;
            reason = r;
        }
    }
    script(&ops, Some(&reason))
}

fn script(ops: &[Op], reason: Option<&str>) -> String {
    let mut out = String::new();
    for op in ops {
        out.push_str(&op.to_string());
        out.push('\n');
    }
    if let Some(reason) = reason {
        out.push_str(&format!("# {reason}\n"));
        if let Some(q) = reason.split(':').next().and_then(|s| s.parse::<Query>().ok()) {
            out.push_str(&format!("q {q}\n"));
        }
    }
    out
}

/// Builds a tree of the given shape with both implementations.
pub fn build_pair(bits: &[bool], cfg: TreeConfig) -> Result<(DynamicTree, OracleTree), TreeError> {
    Ok((DynamicTree::from_bp(bits, cfg)?, OracleTree::from_bp(bits)?))
}

/// Short text form of a tree for messages.
pub fn describe(tree: &DynamicTree) -> String {
    let bp = format_bp(&tree.to_bp());
    if bp.len() > 80 {
        format!("{}... ({} nodes)", &bp[..80], tree.node_count())
    } else {
        bp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_bp_is_a_tree() {
        let mut rng = StdRng::seed_from_u64(3);
        for n in [1, 2, 10, 500] {
            let bits = random_bp(n, &mut rng);
            assert_eq!(bits.len(), 2 * n);
            crate::tree::validate_bp(&bits).unwrap();
        }
    }

    #[test]
    fn short_fuzz_run_is_clean_and_deterministic() {
        let cfg = FuzzConfig {
            seed: 9,
            ops: 400,
            check_every: 40,
            max_nodes: 150,
            grow: 0.65,
            tree: TreeConfig { capacity: 16, leaf_bits: 16, min_arity: 2, max_arity: 3 },
        };
        let a = run(&cfg);
        assert_eq!(a.failure, None);
        assert!(a.queries > 0);
        assert_eq!(a, run(&cfg));
    }

    #[test]
    fn script_lines_replay() {
        assert_eq!(Op::Insert { y: None, l: 1, r: 0 }.to_string(), "insert 0 1 0");
        assert_eq!(Op::Delete(4).to_string(), "delete 4");
    }
}
