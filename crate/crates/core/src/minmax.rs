//! The min-max B-tree over leaf blocks of the parentheses string.
//!
//! Every internal node keeps small per-child arrays (sizes, opens, excess
//! offsets, block maxima and minima, minimum counts) so that the base queries
//! descend the tree doing constant work per node, except for at most one
//! logarithmic search over a node's children per forward or backward search.
//!
//! Positions are 1-based throughout. Inside a node, "frame" values are
//! prefix sums counted from the node's first position, with the value just
//! before the node taken as zero.

use thiserror::Error;

use crate::cartesian::{CartesianBp, Order};
use crate::kernel::{BitBlock, MaxFamily, MinFamily, Summary, WeightFn};
use crate::partial_sums::{RangeAddArray, SearchableSignedSums, SmallNonNegSums, MAX_ENTRIES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinMaxError {
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("empty or reversed range {i}..={j}")]
    BadRange { i: usize, j: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, MinMaxError>;

/// Shape parameters of the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    /// Maximum bits per leaf block; non-root leaves hold at least half.
    pub leaf_bits: usize,
    pub min_arity: usize,
    pub max_arity: usize,
    /// Cap applied to the per-child minimum counts (the heavy threshold).
    pub heavy_threshold: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self { leaf_bits: 512, min_arity: 4, max_arity: 16, heavy_threshold: 1024 }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MinMaxError::BadConfig(msg));
        if self.leaf_bits < 16 || !self.leaf_bits.is_multiple_of(8) {
            return bad(format!("leaf bits {} must be a multiple of 8 and at least 16", self.leaf_bits));
        }
        if self.min_arity < 2 {
            return bad(format!("minimum arity {} below 2", self.min_arity));
        }
        if self.max_arity < 2 * self.min_arity - 1 {
            return bad(format!(
                "maximum arity {} below 2 * {} - 1",
                self.max_arity, self.min_arity
            ));
        }
        if self.max_arity >= MAX_ENTRIES {
            return bad(format!("maximum arity {} must stay below {MAX_ENTRIES}", self.max_arity));
        }
        if self.heavy_threshold == 0 || self.heavy_threshold > u16::MAX as u64 {
            return bad(format!("heavy threshold {} out of range", self.heavy_threshold));
        }
        Ok(())
    }
}

/// Work counters for one or more queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Probe {
    /// Internal nodes entered.
    pub node_visits: u64,
    /// Logarithmic-cost searches over the children of one node.
    pub log_searches: u64,
    /// Constant-time threshold searches on the searchable maxima arrays.
    pub positive_searches: u64,
    /// Uncapped min-count sums over a run of whole children.
    pub exact_min_sums: u64,
    /// Capped min-count sums over a run of whole children.
    pub capped_min_sums: u64,
}

impl Probe {
    pub fn absorb(&mut self, other: &Probe) {
        self.node_visits += other.node_visits;
        self.log_searches += other.log_searches;
        self.positive_searches += other.positive_searches;
        self.exact_min_sums += other.exact_min_sums;
        self.capped_min_sums += other.capped_min_sums;
    }
}

/// Sum of `counts[c]` over the children `c` in `a..=b` (1-based) whose
/// minimum equals the smallest minimum of the range.
pub fn min_sum(mins: &[i64], counts: &[u64], a: usize, b: usize) -> u64 {
    assert!(1 <= a && a <= b && b <= mins.len() && mins.len() == counts.len());
    let low = *mins[a - 1..b].iter().min().unwrap();
    (a - 1..b).filter(|&c| mins[c] == low).map(|c| counts[c]).sum()
}

/// [`min_sum`] over counts already capped at `cap`; exact whenever the true
/// total is below `cap`.
pub fn capped_min_sum(mins: &[i64], capped: &[u16], a: usize, b: usize, cap: u64) -> u64 {
    let low = *mins[a - 1..b].iter().min().unwrap();
    let total: u64 = (a - 1..b).filter(|&c| mins[c] == low).map(|c| capped[c] as u64).sum();
    debug_assert!(capped[a - 1..b].iter().all(|&n| n as u64 <= cap));
    total
}

/// Local structures of an internal node with children `1..=k`.
#[derive(Clone, Debug, PartialEq)]
struct Locals {
    /// bits per child
    sizes: SmallNonNegSums,
    /// opens per child; prefix sums give the offsets for `phi`
    ones: SmallNonNegSums,
    /// closes per child; prefix sums give the offsets for `psi`
    zeros: SmallNonNegSums,
    /// excess before child `i`
    offsets: RangeAddArray,
    /// differences of the child maxima `M`
    max_fwd: SearchableSignedSums,
    /// differences of the negated child minima `-m`
    negmin_fwd: SearchableSignedSums,
    /// differences of `M` read right to left, relative to the node's end value
    max_bwd: SearchableSignedSums,
    /// differences of `-m` read right to left, relative to the node's end value
    negmin_bwd: SearchableSignedSums,
    /// child minima `m`
    mins: RangeAddArray,
    max_cart: CartesianBp,
    min_cart: CartesianBp,
    /// minimum counts `n`
    counts: Vec<u64>,
    /// `min(D, n)`
    capped: Vec<u16>,
}

fn diffs(values: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut prev = 0;
    values
        .map(|v| {
            let d = v - prev;
            prev = v;
            d
        })
        .collect()
}

/// Applies `delta` to entry `i` as a sequence of unit steps.
fn bump(s: &mut SearchableSignedSums, i: usize, delta: i64) {
    for _ in 0..delta.abs() {
        s.update(i, delta.signum()).expect("unit update in range");
    }
}

impl Locals {
    fn build(kids: &[Summary], cap: u64) -> Self {
        let k = kids.len();
        assert!((1..MAX_ENTRIES).contains(&k), "node with {k} children");
        let mut offsets = Vec::with_capacity(k);
        let mut acc = 0;
        for s in kids {
            offsets.push(acc);
            acc += s.excess();
        }
        let end = acc;
        let maxima: Vec<i64> = kids.iter().zip(&offsets).map(|(s, o)| o + s.max).collect();
        let minima: Vec<i64> = kids.iter().zip(&offsets).map(|(s, o)| o + s.min).collect();
        let counts: Vec<u64> = kids.iter().map(|s| s.min_count).collect();
        let sss = |v: Vec<i64>| SearchableSignedSums::from_slice(&v).expect("at most 64 entries");
        let nn = |v: Vec<u64>| SmallNonNegSums::from_slice(&v, MAX_ENTRIES).expect("at most 64 entries");
        Self {
            sizes: nn(kids.iter().map(|s| s.len as u64).collect()),
            ones: nn(kids.iter().map(|s| s.ones as u64).collect()),
            zeros: nn(kids.iter().map(|s| (s.len - s.ones) as u64).collect()),
            offsets: RangeAddArray::from_values(&offsets).unwrap(),
            max_fwd: sss(diffs(maxima.iter().copied())),
            negmin_fwd: sss(diffs(minima.iter().map(|m| -m))),
            max_bwd: sss(diffs(maxima.iter().rev().map(|m| m - end))),
            negmin_bwd: sss(diffs(minima.iter().rev().map(|m| end - m))),
            mins: RangeAddArray::from_values(&minima).unwrap(),
            max_cart: CartesianBp::build(&maxima, Order::Max),
            min_cart: CartesianBp::build(&minima, Order::Min),
            capped: counts.iter().map(|&n| n.min(cap) as u16).collect(),
            counts,
        }
    }

    fn k(&self) -> usize {
        self.sizes.len()
    }

    fn size(&self, t: usize) -> usize {
        self.sizes.get(t).unwrap() as usize
    }

    /// Positions before child `t`.
    fn before(&self, t: usize) -> usize {
        self.sizes.sum(t - 1).unwrap() as usize
    }

    /// The child holding position `p` (1-based within the node).
    fn child_at(&self, p: usize) -> usize {
        self.sizes.search(p as i64).unwrap().expect("position inside node")
    }

    fn max_at(&self, t: usize) -> i64 {
        self.max_fwd.sum(t).unwrap()
    }

    fn min_at(&self, t: usize) -> i64 {
        self.mins.get(t).unwrap()
    }

    /// Frame value of `g` just before child `t`.
    fn offset(&self, g: WeightFn, t: usize) -> i64 {
        match g {
            WeightFn::Pi => self.offsets.get(t).unwrap(),
            WeightFn::PiPrime => -self.offsets.get(t).unwrap(),
            WeightFn::Phi => self.ones.sum(t - 1).unwrap() as i64,
            WeightFn::Psi => self.zeros.sum(t - 1).unwrap() as i64,
        }
    }

    /// Largest frame value of `g` inside the children `a..=b`.
    fn range_max(&self, g: WeightFn, a: usize, b: usize) -> i64 {
        match g {
            WeightFn::Pi => self.max_at(self.max_cart.best(a, b)),
            WeightFn::PiPrime => -self.min_at(self.min_cart.best(a, b)),
            WeightFn::Phi => self.ones.sum(b).unwrap() as i64,
            WeightFn::Psi => self.zeros.sum(b).unwrap() as i64,
        }
    }

    /// First child whose largest frame value reaches `d >= 1`.
    fn search_first(&self, g: WeightFn, d: i64, probe: &mut Probe) -> Option<usize> {
        assert!(d >= 1, "descent reached a non-positive threshold {d}");
        probe.positive_searches += 1;
        let hit = match g {
            WeightFn::Pi => self.max_fwd.search(d),
            WeightFn::PiPrime => self.negmin_fwd.search(d),
            WeightFn::Phi => self.ones.search(d),
            WeightFn::Psi => self.zeros.search(d),
        };
        hit.expect("positive threshold")
    }

    /// First child in `a..=k` reaching `d`, given that one exists.
    fn search_from(&self, g: WeightFn, a: usize, d: i64, probe: &mut Probe) -> usize {
        match g {
            WeightFn::Phi | WeightFn::Psi => a.max(self.search_first(g, d, probe).unwrap()),
            WeightFn::Pi | WeightFn::PiPrime => {
                probe.log_searches += 1;
                let (mut lo, mut hi) = (a, self.k());
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.range_max(g, lo, mid) >= d {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                lo
            }
        }
    }

    /// Last child in `1..=b` reaching `d`, given that one exists.
    fn search_until(&self, g: WeightFn, b: usize, d: i64, probe: &mut Probe) -> usize {
        probe.log_searches += 1;
        let (mut lo, mut hi) = (1, b);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.range_max(g, mid, hi) >= d {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }

    /// Last child whose largest frame value reaches `d`, found through the
    /// right-to-left arrays. `end` is the frame value at the node's end.
    fn search_last(&self, g: WeightFn, d: i64, end: i64, probe: &mut Probe) -> Option<usize> {
        let rel = d - end;
        assert!(rel >= 1, "backward descent reached a non-positive threshold {rel}");
        probe.positive_searches += 1;
        let hit = match g {
            WeightFn::Pi => self.max_bwd.search(rel),
            WeightFn::PiPrime => self.negmin_bwd.search(rel),
            _ => unreachable!("backward descents use pi or pi'"),
        };
        hit.unwrap().map(|s| self.k() + 1 - s)
    }

    fn min_sum(&self, a: usize, b: usize, capped: bool, probe: &mut Probe) -> (i64, u64) {
        let low = self.min_at(self.min_cart.best(a, b));
        let hits = (a..=b).filter(|&c| self.min_at(c) == low);
        let count = if capped {
            probe.capped_min_sums += 1;
            hits.map(|c| self.capped[c - 1] as u64).sum()
        } else {
            probe.exact_min_sums += 1;
            hits.map(|c| self.counts[c - 1]).sum()
        };
        (low, count)
    }

    /// Brings the structures up to date after child `t` changed from `old`
    /// to `new` by a single-bit edit.
    fn child_changed(&mut self, t: usize, old: &Summary, new: &Summary, cap: u64) {
        let k = self.k();
        let delta = new.excess() - old.excess();
        let eps = new.max - old.max;
        let eps_min = new.min - old.min;
        self.sizes.update(t, new.len as i64 - old.len as i64).unwrap();
        self.ones.update(t, new.ones as i64 - old.ones as i64).unwrap();
        let (nz, oz) = (new.len - new.ones, old.len - old.ones);
        self.zeros.update(t, nz as i64 - oz as i64).unwrap();

        bump(&mut self.max_fwd, t, eps);
        bump(&mut self.negmin_fwd, t, -eps_min);
        self.mins.suffix_add(t, eps_min).unwrap();
        if t < k {
            self.offsets.suffix_add(t + 1, delta).unwrap();
            self.mins.suffix_add(t + 1, delta - eps_min).unwrap();
            bump(&mut self.max_fwd, t + 1, delta - eps);
            bump(&mut self.negmin_fwd, t + 1, -(delta - eps_min));
        }
        let s = k + 1 - t;
        bump(&mut self.max_bwd, s, eps - delta);
        bump(&mut self.negmin_bwd, s, -eps_min + delta);
        if t >= 2 {
            bump(&mut self.max_bwd, s + 1, -eps);
            bump(&mut self.negmin_bwd, s + 1, eps_min);
        }

        let maxima: Vec<i64> = (1..=k).map(|c| self.max_at(c)).collect();
        self.max_cart = CartesianBp::build(&maxima, Order::Max);
        self.min_cart = CartesianBp::build(&self.mins.values(), Order::Min);
        self.counts[t - 1] = new.min_count;
        self.capped[t - 1] = new.min_count.min(cap) as u16;
    }

    fn summary(&self) -> Summary {
        let k = self.k();
        let min = self.min_at(self.min_cart.best(1, k));
        let min_count = (1..=k).filter(|&c| self.min_at(c) == min).map(|c| self.counts[c - 1]).sum();
        Summary {
            len: self.sizes.total() as usize,
            ones: self.ones.total() as usize,
            max: self.max_at(self.max_cart.best(1, k)),
            min,
            min_count,
        }
    }

    fn heap_bits(&self, out: &mut SpaceBreakdown) {
        out.sizes += self.sizes.heap_bits() + self.ones.heap_bits() + self.zeros.heap_bits();
        out.offsets += self.offsets.heap_bits();
        out.maxima += self.max_fwd.heap_bits() + self.max_bwd.heap_bits();
        out.minima += self.negmin_fwd.heap_bits() + self.negmin_bwd.heap_bits() + self.mins.heap_bits();
        out.cartesian += self.max_cart.heap_bits() + self.min_cart.heap_bits();
        out.counts += 64 * self.counts.capacity() + 16 * self.capped.capacity();
    }
}

/// Bits held by each class of structure in a tree.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SpaceBreakdown {
    pub leaf_blocks: usize,
    pub sizes: usize,
    pub offsets: usize,
    pub maxima: usize,
    pub minima: usize,
    pub cartesian: usize,
    pub counts: usize,
    /// Node headers and child pointers.
    pub skeleton: usize,
}

impl SpaceBreakdown {
    pub fn total(&self) -> usize {
        self.leaf_blocks
            + self.sizes
            + self.offsets
            + self.maxima
            + self.minima
            + self.cartesian
            + self.counts
            + self.skeleton
    }
}

#[derive(Clone, Debug)]
struct Internal {
    children: Vec<Node>,
    locals: Locals,
    summary: Summary,
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(BitBlock),
    Internal(Box<Internal>),
}

impl Internal {
    fn new(children: Vec<Node>, cap: u64) -> Self {
        let kids: Vec<Summary> = children.iter().map(Node::summary).collect();
        let locals = Locals::build(&kids, cap);
        let summary = locals.summary();
        Self { children, locals, summary }
    }

    fn rebuild(&mut self, cap: u64) {
        let kids: Vec<Summary> = self.children.iter().map(Node::summary).collect();
        self.locals = Locals::build(&kids, cap);
        self.summary = self.locals.summary();
    }
}

impl Node {
    fn summary(&self) -> Summary {
        match self {
            Node::Leaf(b) => *b.summary(),
            Node::Internal(v) => v.summary,
        }
    }

    fn len(&self) -> usize {
        self.summary().len
    }

    fn height(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Internal(v) => 1 + v.children[0].height(),
        }
    }

    fn prefix(&self, f: WeightFn, j: usize) -> i64 {
        match self {
            Node::Leaf(b) => b.prefix(f, j),
            Node::Internal(_) if j == 0 => 0,
            Node::Internal(v) => {
                let t = v.locals.child_at(j);
                v.locals.offset(f, t) + v.children[t - 1].prefix(f, j - v.locals.before(t))
            }
        }
    }

    fn bit(&self, p: usize) -> bool {
        match self {
            Node::Leaf(b) => b.bit(p),
            Node::Internal(v) => {
                let t = v.locals.child_at(p);
                v.children[t - 1].bit(p - v.locals.before(t))
            }
        }
    }

    /// Minimum `p >= i` with frame value of `g` at `p` at least `d`.
    fn fwd(&self, g: WeightFn, i: usize, d: i64, probe: &mut Probe) -> Option<usize> {
        let v = match self {
            Node::Leaf(b) => return b.find_fwd(g, i, d),
            Node::Internal(v) => v,
        };
        probe.node_visits += 1;
        let loc = &v.locals;
        let k = loc.k();
        let first = if i == 1 {
            1
        } else {
            let t = loc.child_at(i);
            let before = loc.before(t);
            let found = v.children[t - 1].fwd(g, i - before, d - loc.offset(g, t), probe);
            if let Some(p) = found {
                return Some(before + p);
            }
            if t == k {
                return None;
            }
            t + 1
        };
        if loc.range_max(g, first, k) < d {
            return None;
        }
        let t = if first == 1 {
            loc.search_first(g, d, probe).expect("guard passed")
        } else {
            loc.search_from(g, first, d, probe)
        };
        let p = v.children[t - 1]
            .fwd(g, 1, d - loc.offset(g, t), probe)
            .expect("child maximum reaches the threshold");
        Some(loc.before(t) + p)
    }

    /// Maximum `p` in `1..=x` with frame value of `g` at `p` at least `d`.
    fn bwd(&self, g: WeightFn, x: usize, d: i64, probe: &mut Probe) -> Option<usize> {
        let v = match self {
            Node::Leaf(b) => return b.find_bwd(g, x, d),
            Node::Internal(v) => v,
        };
        probe.node_visits += 1;
        let loc = &v.locals;
        let len = v.summary.len;
        let t = if x == len {
            let end = v.summary.total(g);
            if end >= d {
                return Some(len);
            }
            loc.search_last(g, d, end, probe)?
        } else {
            let t = loc.child_at(x);
            let before = loc.before(t);
            let found = v.children[t - 1].bwd(g, x - before, d - loc.offset(g, t), probe);
            if let Some(p) = found {
                return Some(before + p);
            }
            if t == 1 || loc.range_max(g, 1, t - 1) < d {
                return None;
            }
            loc.search_until(g, t - 1, d, probe)
        };
        let child = &v.children[t - 1];
        let p = child
            .bwd(g, child.len(), d - loc.offset(g, t), probe)
            .expect("child maximum reaches the threshold");
        Some(loc.before(t) + p)
    }

    /// Minimum of the frame excess over `i..=j` and the number of positions
    /// attaining it.
    fn min_count(&self, i: usize, j: usize, capped: bool, probe: &mut Probe) -> (i64, u64) {
        let v = match self {
            Node::Leaf(b) => {
                let fam = b.range_min(WeightFn::Pi, i, j);
                return (fam.min, fam.count);
            }
            Node::Internal(v) => v,
        };
        if i == 1 && j == v.summary.len {
            return (v.summary.min, v.summary.min_count);
        }
        probe.node_visits += 1;
        let loc = &v.locals;
        let (ta, tb) = (loc.child_at(i), loc.child_at(j));
        let (ba, bb) = (loc.before(ta), loc.before(tb));
        if ta == tb {
            let (m, n) = v.children[ta - 1].min_count(i - ba, j - ba, capped, probe);
            return (m + loc.offset(WeightFn::Pi, ta), n);
        }
        let mut parts = Vec::with_capacity(3);
        let left = &v.children[ta - 1];
        let (m, n) = left.min_count(i - ba, left.len(), capped, probe);
        parts.push((m + loc.offset(WeightFn::Pi, ta), n));
        if tb > ta + 1 {
            parts.push(loc.min_sum(ta + 1, tb - 1, capped, probe));
        }
        let (m, n) = v.children[tb - 1].min_count(1, j - bb, capped, probe);
        parts.push((m + loc.offset(WeightFn::Pi, tb), n));
        let low = parts.iter().map(|p| p.0).min().unwrap();
        (low, parts.iter().filter(|p| p.0 == low).map(|p| p.1).sum())
    }

    /// The `d`-th position in `i..=j` whose frame excess equals `m`, where `m`
    /// is at most the range minimum; `Err(count)` when there are fewer.
    fn select(&self, i: usize, j: usize, m: i64, d: u64, probe: &mut Probe) -> std::result::Result<usize, u64> {
        let v = match self {
            Node::Leaf(b) => return b.select_min(WeightFn::Pi, i, j, m, d),
            Node::Internal(v) => v,
        };
        probe.node_visits += 1;
        let loc = &v.locals;
        let (ta, tb) = (loc.child_at(i), loc.child_at(j));
        let mut seen = 0;
        for t in ta..=tb {
            let before = loc.before(t);
            let size = loc.size(t);
            let lo = if t == ta { i - before } else { 1 };
            let hi = if t == tb { j - before } else { size };
            let off = loc.offset(WeightFn::Pi, t);
            if lo == 1 && hi == size {
                if loc.min_at(t) != m {
                    continue;
                }
                let n = loc.counts[t - 1];
                if seen + n < d {
                    seen += n;
                    continue;
                }
            }
            match v.children[t - 1].select(lo, hi, m - off, d - seen, probe) {
                Ok(p) => return Ok(before + p),
                Err(n) => seen += n,
            }
        }
        Err(seen)
    }

    /// Maximum frame excess over `i..=j` and its first position.
    fn max_family(&self, i: usize, j: usize, probe: &mut Probe) -> MaxFamily {
        let v = match self {
            Node::Leaf(b) => return b.range_max(WeightFn::Pi, i, j),
            Node::Internal(v) => v,
        };
        probe.node_visits += 1;
        let loc = &v.locals;
        let (ta, tb) = (loc.child_at(i), loc.child_at(j));
        let shift = |t: usize, fam: MaxFamily| MaxFamily {
            max: fam.max + loc.offset(WeightFn::Pi, t),
            argmax: fam.argmax + loc.before(t),
        };
        if ta == tb {
            let b = loc.before(ta);
            return shift(ta, v.children[ta - 1].max_family(i - b, j - b, probe));
        }
        let left_child = &v.children[ta - 1];
        let left = shift(ta, left_child.max_family(i - loc.before(ta), left_child.len(), probe));
        let right = shift(tb, v.children[tb - 1].max_family(1, j - loc.before(tb), probe));
        let mid = (tb > ta + 1).then(|| {
            let c = loc.max_cart.best(ta + 1, tb - 1);
            (c, loc.max_at(c))
        });
        match mid {
            Some((c, value)) if value > left.max && value >= right.max => {
                let child = &v.children[c - 1];
                shift(c, child.max_family(1, child.len(), probe))
            }
            _ if right.max > left.max => right,
            _ => left,
        }
    }

    fn check(&self, cfg: &Config, is_root: bool, depth: usize, leaf_depth: &mut Option<usize>) -> std::result::Result<(), String> {
        match self {
            Node::Leaf(b) => {
                let fresh = BitBlock::from_bits(b.iter());
                if fresh.summary() != b.summary() {
                    return Err(format!("stale leaf summary {:?} vs {:?}", b.summary(), fresh.summary()));
                }
                if !is_root && (b.len() < cfg.leaf_bits / 2 || b.len() > cfg.leaf_bits) {
                    return Err(format!("leaf of {} bits outside fill bounds", b.len()));
                }
                match leaf_depth {
                    Some(d) if *d != depth => return Err("leaves at different depths".into()),
                    _ => *leaf_depth = Some(depth),
                }
                Ok(())
            }
            Node::Internal(v) => {
                let k = v.children.len();
                if (!is_root && k < cfg.min_arity) || k > cfg.max_arity || k < 2 {
                    return Err(format!("internal node with {k} children"));
                }
                for c in &v.children {
                    c.check(cfg, false, depth + 1, leaf_depth)?;
                }
                let kids: Vec<Summary> = v.children.iter().map(Node::summary).collect();
                let fresh = Locals::build(&kids, cfg.heavy_threshold);
                if fresh != v.locals {
                    return Err(format!("local structures differ from rebuild at depth {depth}"));
                }
                for s in [&v.locals.max_fwd, &v.locals.negmin_fwd, &v.locals.max_bwd, &v.locals.negmin_bwd] {
                    let dist = s.distances();
                    let compressed = s.compressed_distances();
                    if dist.iter().zip(&compressed).any(|(&d, &c)| (d == 0) != (c == 0) || c as usize > k) {
                        return Err("compressed distances out of sync".into());
                    }
                }
                let parents = v.locals.max_cart.decode_parents();
                for (c, p) in parents.iter().enumerate() {
                    if let Some(p) = p {
                        if v.locals.max_at(*p) < v.locals.max_at(c + 1) {
                            return Err("max Cartesian string out of heap order".into());
                        }
                    }
                }
                if fresh.summary() != v.summary {
                    return Err("stale internal summary".into());
                }
                Ok(())
            }
        }
    }

    fn space(&self, out: &mut SpaceBreakdown) {
        out.skeleton += 8 * std::mem::size_of::<Node>();
        match self {
            Node::Leaf(b) => out.leaf_blocks += b.heap_bits(),
            Node::Internal(v) => {
                out.skeleton += 8 * std::mem::size_of::<Internal>();
                v.locals.heap_bits(out);
                for c in &v.children {
                    c.space(out);
                }
            }
        }
    }

    fn collect_bits(&self, out: &mut Vec<bool>) {
        match self {
            Node::Leaf(b) => out.extend(b.iter()),
            Node::Internal(v) => v.children.iter().for_each(|c| c.collect_bits(out)),
        }
    }
}

/// Result of a range-minimum query over the excess: the minimum, its first
/// position and the number of positions attaining it.
pub type MinResult = MinFamily;

/// Dynamic bit string with base queries, stored as a min-max B-tree.
#[derive(Clone, Debug)]
pub struct MinMaxTree {
    root: Node,
    cfg: Config,
}

impl MinMaxTree {
    pub fn new(cfg: Config) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { root: Node::Leaf(BitBlock::new()), cfg })
    }

    /// Bulk construction with evenly filled leaves and nodes.
    pub fn from_bits(bits: &[bool], cfg: Config) -> Result<Self> {
        cfg.validate()?;
        let mut level: Vec<Node> = split_even(bits.len(), cfg.leaf_bits)
            .into_iter()
            .scan(0, |start, n| {
                let block = BitBlock::from_bits(bits[*start..*start + n].iter().copied());
                *start += n;
                Some(Node::Leaf(block))
            })
            .collect();
        if level.is_empty() {
            level.push(Node::Leaf(BitBlock::new()));
        }
        while level.len() > 1 {
            let mut rest = level.into_iter();
            level = split_even(rest.len(), cfg.max_arity)
                .into_iter()
                .map(|n| Node::Internal(Box::new(Internal::new(rest.by_ref().take(n).collect(), cfg.heavy_threshold))))
                .collect();
        }
        Ok(Self { root: level.pop().unwrap(), cfg })
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.root.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Levels from root to leaves, counting both.
    pub fn height(&self) -> usize {
        self.root.height()
    }

    pub fn summary(&self) -> Summary {
        self.root.summary()
    }

    pub fn to_bits(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.len());
        self.root.collect_bits(&mut out);
        out
    }

    fn check_pos(&self, pos: usize) -> Result<()> {
        if pos == 0 || pos > self.len() {
            return Err(MinMaxError::PositionOutOfRange { pos, len: self.len() });
        }
        Ok(())
    }

    fn check_range(&self, i: usize, j: usize) -> Result<()> {
        self.check_pos(i)?;
        self.check_pos(j)?;
        if i > j {
            return Err(MinMaxError::BadRange { i, j });
        }
        Ok(())
    }

    pub fn bit(&self, pos: usize) -> Result<bool> {
        self.check_pos(pos)?;
        Ok(self.root.bit(pos))
    }

    /// `f(P[1]) + ... + f(P[j])`, zero for `j == 0`.
    pub fn prefix(&self, f: WeightFn, j: usize) -> Result<i64> {
        if j > self.len() {
            return Err(MinMaxError::PositionOutOfRange { pos: j, len: self.len() });
        }
        Ok(self.root.prefix(f, j))
    }

    /// `f(P[i]) + ... + f(P[j])`; the empty range `i == j + 1` sums to zero.
    pub fn sum(&self, f: WeightFn, i: usize, j: usize) -> Result<i64> {
        if i == 0 || i > j + 1 || j > self.len() {
            return Err(MinMaxError::BadRange { i, j });
        }
        Ok(self.root.prefix(f, j) - self.root.prefix(f, i - 1))
    }

    /// Minimum `j >= i` with `f(P[i]) + ... + f(P[j]) >= d`.
    pub fn fwd_search_geq(&self, f: WeightFn, i: usize, d: i64) -> Result<Option<usize>> {
        self.fwd_search_geq_probed(f, i, d, &mut Probe::default())
    }

    pub fn fwd_search_geq_probed(&self, f: WeightFn, i: usize, d: i64, probe: &mut Probe) -> Result<Option<usize>> {
        self.check_pos(i)?;
        if d <= 0 {
            let here = f.value(self.root.bit(i));
            if here >= d {
                return Ok(Some(i));
            }
            // a -1 step with d == 0: the range must climb back from i + 1
            if i == self.len() {
                return Ok(None);
            }
            return self.fwd_search_geq_probed(f, i + 1, 1, probe);
        }
        let target = d + self.root.prefix(f, i - 1);
        Ok(self.root.fwd(f, i, target, probe))
    }

    /// Maximum `j <= i` with `f(P[j]) + ... + f(P[i]) >= d`.
    pub fn bwd_search_geq(&self, f: WeightFn, i: usize, d: i64) -> Result<Option<usize>> {
        self.bwd_search_geq_probed(f, i, d, &mut Probe::default())
    }

    pub fn bwd_search_geq_probed(&self, f: WeightFn, i: usize, d: i64, probe: &mut Probe) -> Result<Option<usize>> {
        self.check_pos(i)?;
        let end = self.root.prefix(f, i);
        match f {
            WeightFn::Pi | WeightFn::PiPrime => {
                // the largest j - 1 in 0..i whose prefix of the negated
                // function reaches -(F[i] - d)
                let g = if f == WeightFn::Pi { WeightFn::PiPrime } else { WeightFn::Pi };
                let target = d - end;
                let found = if i > 1 { self.root.bwd(g, i - 1, target, probe) } else { None };
                Ok(match found {
                    Some(p) => Some(p + 1),
                    None if target <= 0 => Some(1),
                    None => None,
                })
            }
            WeightFn::Phi | WeightFn::Psi => {
                // the prefix never decreases, so j - 1 is the last position
                // whose prefix stays at or below F[i] - d
                let limit = end - d;
                if limit < 0 {
                    return Ok(None);
                }
                if d <= 0 {
                    return Ok(Some(i));
                }
                let first_above = self.root.fwd(f, 1, limit + 1, probe).unwrap_or(self.len() + 1);
                Ok(Some(first_above.min(i)))
            }
        }
    }

    /// Minimum excess over `i..=j` with its first position and exact count.
    pub fn min_family(&self, i: usize, j: usize) -> Result<MinResult> {
        self.min_family_probed(i, j, &mut Probe::default())
    }

    pub fn min_family_probed(&self, i: usize, j: usize, probe: &mut Probe) -> Result<MinResult> {
        self.check_range(i, j)?;
        let (min, count) = self.root.min_count(i, j, false, probe);
        let argmin = self.root.select(i, j, min, 1, probe).expect("minimum is attained");
        Ok(MinFamily { min, argmin, count })
    }

    /// Minimum excess over `i..=j` and its count, where whole-child counts
    /// are capped at the heavy threshold. Exact when the count is below it.
    pub fn min_count_capped(&self, i: usize, j: usize, probe: &mut Probe) -> Result<(i64, u64)> {
        self.check_range(i, j)?;
        Ok(self.root.min_count(i, j, true, probe))
    }

    /// Exact minimum and count without locating the first minimum.
    pub fn min_count(&self, i: usize, j: usize, probe: &mut Probe) -> Result<(i64, u64)> {
        self.check_range(i, j)?;
        Ok(self.root.min_count(i, j, false, probe))
    }

    /// The `d`-th (1-based) position of `i..=j` attaining the range minimum.
    pub fn min_select(&self, i: usize, j: usize, d: u64) -> Result<Option<usize>> {
        self.min_select_probed(i, j, d, &mut Probe::default())
    }

    pub fn min_select_probed(&self, i: usize, j: usize, d: u64, probe: &mut Probe) -> Result<Option<usize>> {
        self.check_range(i, j)?;
        if d == 0 {
            return Ok(None);
        }
        let (min, _) = self.root.min_count(i, j, false, probe);
        Ok(self.root.select(i, j, min, d, probe).ok())
    }

    /// Maximum excess over `i..=j` and its first position.
    pub fn max_family(&self, i: usize, j: usize) -> Result<MaxFamily> {
        self.check_range(i, j)?;
        Ok(self.root.max_family(i, j, &mut Probe::default()))
    }

    /// Inserts `bit` so that it becomes position `pos` (`1..=len + 1`).
    pub fn insert_bit(&mut self, pos: usize, bit: bool) -> Result<()> {
        if pos == 0 || pos > self.len() + 1 {
            return Err(MinMaxError::PositionOutOfRange { pos, len: self.len() + 1 });
        }
        insert_at(&mut self.root, pos, bit, &self.cfg);
        if overflows(&self.root, &self.cfg) {
            let right = split_node(&mut self.root, &self.cfg);
            let left = std::mem::replace(&mut self.root, Node::Leaf(BitBlock::new()));
            self.root = Node::Internal(Box::new(Internal::new(vec![left, right], self.cfg.heavy_threshold)));
        }
        Ok(())
    }

    /// Removes position `pos` and returns its bit.
    pub fn remove_bit(&mut self, pos: usize) -> Result<bool> {
        self.check_pos(pos)?;
        let bit = remove_at(&mut self.root, pos, &self.cfg);
        if let Node::Internal(v) = &mut self.root {
            if v.children.len() == 1 {
                self.root = v.children.pop().unwrap();
            }
        }
        Ok(bit)
    }

    /// Inserts `bits` starting at position `pos`.
    pub fn insert_bits(&mut self, pos: usize, bits: &[bool]) -> Result<()> {
        for (k, &b) in bits.iter().enumerate() {
            self.insert_bit(pos + k, b)?;
        }
        Ok(())
    }

    /// Removes `count` bits starting at position `pos`.
    pub fn delete_bits(&mut self, pos: usize, count: usize) -> Result<()> {
        for _ in 0..count {
            self.remove_bit(pos)?;
        }
        Ok(())
    }

    /// Compares every cached structure with a from-scratch rebuild and checks
    /// the B-tree shape.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.root.check(&self.cfg, true, 0, &mut None)
    }

    pub fn space(&self) -> SpaceBreakdown {
        let mut out = SpaceBreakdown::default();
        self.root.space(&mut out);
        out
    }
}

/// Sizes of `parts` groups covering `n` items with at most `cap` each, as
/// even as possible.
fn split_even(n: usize, cap: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let parts = n.div_ceil(cap);
    (0..parts).map(|p| n / parts + usize::from(p < n % parts)).collect()
}

fn overflows(node: &Node, cfg: &Config) -> bool {
    match node {
        Node::Leaf(b) => b.len() > cfg.leaf_bits,
        Node::Internal(v) => v.children.len() > cfg.max_arity,
    }
}

fn underflows(node: &Node, cfg: &Config) -> bool {
    match node {
        Node::Leaf(b) => b.len() < cfg.leaf_bits / 2,
        Node::Internal(v) => v.children.len() < cfg.min_arity,
    }
}

/// Moves the right half of `node` into a new sibling.
fn split_node(node: &mut Node, cfg: &Config) -> Node {
    match node {
        Node::Leaf(b) => Node::Leaf(b.split_off(b.len() / 2)),
        Node::Internal(v) => {
            let right = v.children.split_off(v.children.len() / 2);
            v.rebuild(cfg.heavy_threshold);
            Node::Internal(Box::new(Internal::new(right, cfg.heavy_threshold)))
        }
    }
}

/// Merges or evens out the adjacent children `t` and `t + 1`. Returns
/// whether they were merged into one.
fn rebalance_pair(children: &mut Vec<Node>, t: usize, cfg: &Config) -> bool {
    let right = children.remove(t);
    let left = &mut children[t - 1];
    match (left, right) {
        (Node::Leaf(a), Node::Leaf(b)) => {
            if a.len() + b.len() <= cfg.leaf_bits {
                a.append(&b);
                true
            } else {
                a.append(&b);
                let rest = a.split_off(a.len() / 2);
                children.insert(t, Node::Leaf(rest));
                false
            }
        }
        (Node::Internal(a), Node::Internal(mut b)) => {
            a.children.append(&mut b.children);
            if a.children.len() <= cfg.max_arity {
                a.rebuild(cfg.heavy_threshold);
                true
            } else {
                let rest = a.children.split_off(a.children.len() / 2);
                a.rebuild(cfg.heavy_threshold);
                children.insert(t, Node::Internal(Box::new(Internal::new(rest, cfg.heavy_threshold))));
                false
            }
        }
        _ => unreachable!("siblings at different heights"),
    }
}

fn insert_at(node: &mut Node, pos: usize, bit: bool, cfg: &Config) {
    let v = match node {
        Node::Leaf(b) => return b.insert(pos, bit),
        Node::Internal(v) => v,
    };
    let k = v.children.len();
    let t = if pos > v.summary.len { k } else { v.locals.child_at(pos) };
    let before = v.locals.before(t);
    let child = &mut v.children[t - 1];
    let old = child.summary();
    insert_at(child, pos - before, bit, cfg);
    if overflows(child, cfg) {
        let right = split_node(child, cfg);
        v.children.insert(t, right);
        v.rebuild(cfg.heavy_threshold);
    } else {
        let new = child.summary();
        v.locals.child_changed(t, &old, &new, cfg.heavy_threshold);
        v.summary = v.locals.summary();
    }
}

fn remove_at(node: &mut Node, pos: usize, cfg: &Config) -> bool {
    let v = match node {
        Node::Leaf(b) => return b.remove(pos),
        Node::Internal(v) => v,
    };
    let t = v.locals.child_at(pos);
    let before = v.locals.before(t);
    let child = &mut v.children[t - 1];
    let old = child.summary();
    let bit = remove_at(child, pos - before, cfg);
    if underflows(child, cfg) {
        let pair = if t < v.children.len() { t } else { t - 1 };
        rebalance_pair(&mut v.children, pair, cfg);
        v.rebuild(cfg.heavy_threshold);
    } else {
        let new = child.summary();
        v.locals.child_changed(t, &old, &new, cfg.heavy_threshold);
        v.summary = v.locals.summary();
    }
    bit
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> Config {
        Config { leaf_bits: 16, min_arity: 2, max_arity: 3, heavy_threshold: 4 }
    }

    fn parse(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1' || c == '(').collect()
    }

    #[test]
    fn config_validation() {
        assert!(Config::default().validate().is_ok());
        let bad = Config { max_arity: 6, min_arity: 4, ..Config::default() };
        assert!(bad.validate().is_err());
        let bad = Config { leaf_bits: 20, ..Config::default() };
        assert!(bad.validate().is_err());
        let bad = Config { max_arity: 64, ..Config::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn min_sum_example() {
        assert_eq!(min_sum(&[1, 0, 0, 2], &[3, 1, 2, 9], 1, 4), 3);
        assert_eq!(min_sum(&[1, 0, 0, 2], &[3, 1, 2, 9], 4, 4), 9);
        assert_eq!(capped_min_sum(&[1, 0, 0, 2], &[3, 1, 2, 4], 1, 4, 4), 3);
    }

    #[test]
    fn small_string_queries() {
        let t = MinMaxTree::from_bits(&parse("110100"), Config::default()).unwrap();
        assert_eq!(t.fwd_search_geq(WeightFn::Pi, 1, 2).unwrap(), Some(2));
        assert_eq!(t.fwd_search_geq(WeightFn::PiPrime, 3, 1).unwrap(), Some(3));
        assert_eq!(t.fwd_search_geq(WeightFn::PiPrime, 2, 1).unwrap(), Some(6));
        assert_eq!(t.fwd_search_geq(WeightFn::Pi, 6, 1).unwrap(), None);
        assert_eq!(t.bwd_search_geq(WeightFn::Pi, 4, 3).unwrap(), None);
        assert_eq!(t.bwd_search_geq(WeightFn::Pi, 4, 2).unwrap(), Some(1));
        assert_eq!(t.bwd_search_geq(WeightFn::Pi, 6, 1).unwrap(), None);
        assert_eq!(t.sum(WeightFn::Pi, 1, 6).unwrap(), 0);
        assert_eq!(t.sum(WeightFn::Phi, 1, 4).unwrap(), 3);
        assert_eq!(t.sum(WeightFn::Psi, 1, 4).unwrap(), 1);
        let fam = t.min_family(2, 5).unwrap();
        assert_eq!((fam.min, fam.argmin, fam.count), (1, 3, 2));
        assert_eq!(t.min_select(2, 5, 2).unwrap(), Some(5));
        assert_eq!(t.min_select(2, 5, 3).unwrap(), None);
        let fam = t.min_family(1, 6).unwrap();
        assert_eq!((fam.min, fam.argmin, fam.count), (0, 6, 1));
        let max = t.max_family(1, 6).unwrap();
        assert_eq!((max.max, max.argmax), (2, 2));
        let max = t.max_family(3, 6).unwrap();
        assert_eq!((max.max, max.argmax), (2, 4));

        let short = MinMaxTree::from_bits(&parse("1100"), Config::default()).unwrap();
        assert_eq!(short.bwd_search_geq(WeightFn::Pi, 2, 2).unwrap(), Some(1));
    }

    #[test]
    fn insert_and_delete_round_trip() {
        let mut t = MinMaxTree::from_bits(&parse("1100"), Config::default()).unwrap();
        t.insert_bits(5, &parse("10")).unwrap();
        assert_eq!(t.to_bits(), parse("110010"));
        t.check_invariants().unwrap();
        t.delete_bits(5, 2).unwrap();
        assert_eq!(t.to_bits(), parse("1100"));
        t.check_invariants().unwrap();
    }

    #[test]
    fn growth_and_shrink_keep_structures_coherent() {
        let cfg = small_cfg();
        let mut t = MinMaxTree::new(cfg).unwrap();
        let mut shadow = Vec::new();
        let mut state = 12345u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for step in 0..3000 {
            let grow = shadow.len() < 10 || (next() % 100) < 60;
            if grow {
                let pos = (next() % (shadow.len() as u64 + 1)) as usize + 1;
                let bit = next() % 2 == 0;
                t.insert_bit(pos, bit).unwrap();
                shadow.insert(pos - 1, bit);
            } else {
                let pos = (next() % shadow.len() as u64) as usize + 1;
                assert_eq!(t.remove_bit(pos).unwrap(), shadow.remove(pos - 1));
            }
            if step % 7 == 0 {
                t.check_invariants().unwrap_or_else(|e| panic!("step {step}: {e}"));
                assert_eq!(t.to_bits(), shadow);
            }
        }
        while !shadow.is_empty() {
            t.remove_bit(1).unwrap();
            shadow.remove(0);
            t.check_invariants().unwrap();
        }
        assert!(t.is_empty());
        assert_eq!(t.height(), 1);
    }

    #[test]
    fn bulk_build_is_balanced() {
        for n in [0, 1, 15, 16, 17, 100, 1000] {
            let bits: Vec<bool> = (0..n).map(|i| i % 3 != 0).collect();
            let t = MinMaxTree::from_bits(&bits, small_cfg()).unwrap();
            t.check_invariants().unwrap_or_else(|e| panic!("n={n}: {e}"));
            assert_eq!(t.to_bits(), bits);
        }
    }
}
