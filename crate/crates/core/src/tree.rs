//! The public ordinal-tree API on top of the min-max tree.
//!
//! A node is named by the position of its opening parenthesis; the root is
//! node 1 and has depth 1. Navigation that leaves the tree answers `None`;
//! malformed arguments are errors.

use thiserror::Error;

use crate::heavy::HeavyIndex;
use crate::kernel::WeightFn;
use crate::minmax::{Config, MinMaxError, MinMaxTree, Probe, SpaceBreakdown};
use crate::query::{Answer, NodeId, Query};

use WeightFn::{Pi, PiPrime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("{0} is not a node")]
    InvalidNode(NodeId),
    #[error("child index {index} out of range for node {node} of degree {degree}")]
    BadChildIndex { node: NodeId, index: u64, degree: u64 },
    #[error("child range {l}..={r} is not valid here (degree {degree})")]
    BadChildRange { node: Option<NodeId>, l: u64, r: u64, degree: u64 },
    #[error("cannot delete the root while it has children")]
    RootWithChildren,
    #[error("unexpected character {ch:?} at position {pos}")]
    BadChar { pos: usize, ch: char },
    #[error("not a single balanced tree: {reason} at position {pos}")]
    Unbalanced { pos: usize, reason: &'static str },
    #[error(transparent)]
    Structure(#[from] MinMaxError),
}

pub type Result<T> = std::result::Result<T, TreeError>;

/// Parses a parentheses string over `()` or `10`; whitespace is ignored.
pub fn parse_bp(text: &str) -> Result<Vec<bool>> {
    let mut bits = Vec::with_capacity(text.len());
    for (idx, ch) in text.chars().enumerate() {
        match ch {
            '(' | '1' => bits.push(true),
            ')' | '0' => bits.push(false),
            c if c.is_whitespace() => {}
            c => return Err(TreeError::BadChar { pos: idx + 1, ch: c }),
        }
    }
    validate_bp(&bits)?;
    Ok(bits)
}

pub fn format_bp(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Checks that `bits` encodes exactly one tree (or is empty).
pub fn validate_bp(bits: &[bool]) -> Result<()> {
    let mut excess = 0i64;
    for (idx, &b) in bits.iter().enumerate() {
        excess += if b { 1 } else { -1 };
        let pos = idx + 1;
        if excess < 0 {
            return Err(TreeError::Unbalanced { pos, reason: "close without a matching open" });
        }
        if excess == 0 && pos < bits.len() {
            return Err(TreeError::Unbalanced { pos, reason: "the first tree ends before the input" });
        }
    }
    if excess != 0 {
        return Err(TreeError::Unbalanced { pos: bits.len(), reason: "unclosed parentheses" });
    }
    Ok(())
}

/// `⌈log₂ capacity⌉²`, the degree from which a node counts as heavy.
pub fn heavy_threshold(capacity: u64) -> u64 {
    let log = 64 - (capacity.max(2) - 1).leading_zeros() as u64;
    log * log
}

/// Construction parameters of a [`DynamicTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeConfig {
    /// Node count the heavy threshold is sized for; not enforced as a limit.
    pub capacity: u64,
    pub leaf_bits: usize,
    pub min_arity: usize,
    pub max_arity: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        let base = Config::default();
        Self {
            capacity: 1 << 32,
            leaf_bits: base.leaf_bits,
            min_arity: base.min_arity,
            max_arity: base.max_arity,
        }
    }
}

impl TreeConfig {
    pub fn minmax(&self) -> Config {
        Config {
            leaf_bits: self.leaf_bits,
            min_arity: self.min_arity,
            max_arity: self.max_arity,
            heavy_threshold: heavy_threshold(self.capacity),
        }
    }
}

/// Bits used by each part of a [`DynamicTree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceReport {
    pub nodes: usize,
    pub minmax: SpaceBreakdown,
    pub heavy_index: usize,
    pub heavy_nodes: usize,
}

impl SpaceReport {
    pub fn total_bits(&self) -> usize {
        self.minmax.total() + self.heavy_index
    }

    pub fn bits_per_node(&self) -> f64 {
        self.total_bits() as f64 / self.nodes.max(1) as f64
    }
}

/// A dynamic ordinal tree in balanced-parentheses form.
#[derive(Clone, Debug)]
pub struct DynamicTree {
    bits: MinMaxTree,
    heavy: HeavyIndex,
    threshold: u64,
    cfg: TreeConfig,
}

impl DynamicTree {
    pub fn new(cfg: TreeConfig) -> Result<Self> {
        Ok(Self {
            bits: MinMaxTree::new(cfg.minmax())?,
            heavy: HeavyIndex::zeros(0),
            threshold: heavy_threshold(cfg.capacity),
            cfg,
        })
    }

    pub fn from_bp(bits: &[bool], cfg: TreeConfig) -> Result<Self> {
        validate_bp(bits)?;
        let threshold = heavy_threshold(cfg.capacity);
        let heavy: Vec<(usize, u64)> =
            degrees_by_scan(bits).into_iter().filter(|&(_, d)| d >= threshold).collect();
        Ok(Self {
            bits: MinMaxTree::from_bits(bits, cfg.minmax())?,
            heavy: HeavyIndex::from_sorted(bits.len(), &heavy),
            threshold,
            cfg,
        })
    }

    pub fn config(&self) -> &TreeConfig {
        &self.cfg
    }

    /// The heavy-degree threshold `D`.
    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn heavy_index(&self) -> &HeavyIndex {
        &self.heavy
    }

    pub fn min_max(&self) -> &MinMaxTree {
        &self.bits
    }

    pub fn to_bp(&self) -> Vec<bool> {
        self.bits.to_bits()
    }

    pub fn node_count(&self) -> usize {
        self.bits.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_node(&self, x: NodeId) -> bool {
        x >= 1 && x <= self.bits.len() && self.bits.bit(x).unwrap()
    }

    fn walk(&self) -> Walk<'_> {
        Walk { t: self, probe: Probe::default() }
    }

    /// Position of the parenthesis closing node `x`.
    pub fn close(&self, x: NodeId) -> Result<usize> {
        self.walk().close(x)
    }

    pub fn depth(&self, x: NodeId) -> Result<u64> {
        self.walk().depth(x)
    }

    pub fn height(&self, x: NodeId) -> Result<u64> {
        self.walk().height(x)
    }

    pub fn num_descendants(&self, x: NodeId) -> Result<u64> {
        self.walk().num_descendants(x)
    }

    pub fn parent(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().level_ancestor(x, 1)
    }

    /// The ancestor `i` levels above `x`; `x` itself for `i == 0`.
    pub fn level_ancestor(&self, x: NodeId, i: u64) -> Result<Option<NodeId>> {
        self.walk().level_ancestor(x, i)
    }

    pub fn lca(&self, x: NodeId, y: NodeId) -> Result<NodeId> {
        self.walk().lca(x, y)
    }

    pub fn level_next(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().level_next(x)
    }

    pub fn level_prev(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().level_prev(x)
    }

    /// Leftmost node at depth `d`.
    pub fn level_lmost(&self, d: u64) -> Option<NodeId> {
        self.walk().level_lmost(d)
    }

    /// Rightmost node at depth `d`.
    pub fn level_rmost(&self, d: u64) -> Option<NodeId> {
        self.walk().level_rmost(d)
    }

    pub fn degree(&self, x: NodeId) -> Result<u64> {
        self.walk().degree(x)
    }

    /// [`Self::degree`] with work counters. Light nodes are answered with
    /// capped counts only.
    pub fn degree_probed(&self, x: NodeId, probe: &mut Probe) -> Result<u64> {
        let mut w = self.walk();
        let r = w.degree(x);
        probe.absorb(&w.probe);
        r
    }

    pub fn child_rank(&self, x: NodeId) -> Result<u64> {
        self.walk().child_rank(x)
    }

    /// The `i`-th child of `y`, counting from 1.
    pub fn child_select(&self, y: NodeId, i: u64) -> Result<NodeId> {
        self.walk().child_select(y, i)
    }

    pub fn first_child(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().first_child(x)
    }

    pub fn last_child(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().last_child(x)
    }

    pub fn next_sibling(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().next_sibling(x)
    }

    pub fn prev_sibling(&self, x: NodeId) -> Result<Option<NodeId>> {
        self.walk().prev_sibling(x)
    }

    pub fn query(&self, q: &Query) -> Result<Answer> {
        self.walk().query(q)
    }

    /// [`Self::query`], adding the work done to `probe`.
    pub fn query_probed(&self, q: &Query, probe: &mut Probe) -> Result<Answer> {
        let mut w = self.walk();
        let r = w.query(q);
        probe.absorb(&w.probe);
        r
    }

    fn set_degree(&mut self, x: NodeId, degree: u64) {
        self.heavy.set(x, (degree >= self.threshold).then_some(degree));
    }

    fn insert_pair(&mut self, open: usize, close: usize) -> Result<()> {
        self.bits.insert_bit(open, true)?;
        self.heavy.insert_zero(open);
        self.bits.insert_bit(close, false)?;
        self.heavy.insert_zero(close);
        Ok(())
    }

    /// Inserts a node that adopts children `l..=r` of `y` (an empty range is
    /// `r == l - 1`) and returns it. With `y == None` the node becomes the
    /// root: `(1, 0)` on an empty tree, `(1, 1)` above an existing root.
    pub fn insert_node(&mut self, y: Option<NodeId>, l: u64, r: u64) -> Result<NodeId> {
        let Some(y) = y else {
            let degree = u64::from(!self.is_empty());
            if l != 1 || r != degree {
                return Err(TreeError::BadChildRange { node: None, l, r, degree });
            }
            let end = self.bits.len() + 2;
            self.insert_pair(1, end)?;
            self.set_degree(1, degree);
            return Ok(1);
        };
        let degree = self.degree(y)?;
        if l == 0 || l > r + 1 || r > degree {
            return Err(TreeError::BadChildRange { node: Some(y), l, r, degree });
        }
        let open = if l <= degree { self.child_select(y, l)? } else { self.close(y)? };
        // positions are taken before the open is inserted, hence the + 2
        let close = if r >= l { self.close(self.child_select(y, r)?)? + 2 } else { open + 1 };
        self.insert_pair(open, close)?;
        self.set_degree(open, r + 1 - l);
        self.set_degree(y, degree + 1 - (r + 1 - l));
        Ok(open)
    }

    /// Deletes `x`; its children take its place among its parent's children.
    pub fn delete_node(&mut self, x: NodeId) -> Result<()> {
        let c = self.close(x)?;
        let parent = self.parent(x)?;
        if parent.is_none() && c != x + 1 {
            return Err(TreeError::RootWithChildren);
        }
        let own = self.degree(x)?;
        let parent_degree = parent.map(|y| self.degree(y)).transpose()?;
        self.bits.remove_bit(c)?;
        self.heavy.remove(c);
        self.bits.remove_bit(x)?;
        self.heavy.remove(x);
        if let (Some(y), Some(d)) = (parent, parent_degree) {
            self.set_degree(y, d - 1 + own);
        }
        Ok(())
    }

    pub fn space(&self) -> SpaceReport {
        SpaceReport {
            nodes: self.node_count(),
            minmax: self.bits.space(),
            heavy_index: self.heavy.heap_bits() + 8 * std::mem::size_of::<HeavyIndex>(),
            heavy_nodes: self.heavy.count(),
        }
    }

    /// Checks the min-max tree against a rebuild and the heavy index against
    /// degrees counted from the parentheses string.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        self.bits.check_invariants()?;
        let bits = self.to_bp();
        validate_bp(&bits).map_err(|e| e.to_string())?;
        if self.heavy.len() != bits.len() {
            return Err(format!("heavy index covers {} of {} positions", self.heavy.len(), bits.len()));
        }
        let want: Vec<(usize, u64)> =
            degrees_by_scan(&bits).into_iter().filter(|&(_, d)| d >= self.threshold).collect();
        if self.heavy.entries() != want {
            return Err(format!("heavy index {:?} but degrees say {:?}", self.heavy.entries(), want));
        }
        Ok(())
    }
}

/// One query in progress: the tree plus the work counters it accumulates.
struct Walk<'t> {
    t: &'t DynamicTree,
    probe: Probe,
}

impl Walk<'_> {
    fn node(&self, x: NodeId) -> Result<NodeId> {
        if self.t.is_node(x) {
            Ok(x)
        } else {
            Err(TreeError::InvalidNode(x))
        }
    }

    fn fwd(&mut self, f: WeightFn, i: usize, d: i64) -> Option<usize> {
        if i > self.t.bits.len() {
            return None;
        }
        self.t.bits.fwd_search_geq_probed(f, i, d, &mut self.probe).unwrap()
    }

    fn bwd(&mut self, f: WeightFn, i: usize, d: i64) -> Option<usize> {
        if i == 0 {
            return None;
        }
        self.t.bits.bwd_search_geq_probed(f, i, d, &mut self.probe).unwrap()
    }

    fn close(&mut self, x: NodeId) -> Result<usize> {
        self.node(x)?;
        Ok(self.fwd(PiPrime, x + 1, 1).expect("balanced string"))
    }

    /// The node whose closing parenthesis is at `c`.
    fn find_open(&mut self, c: usize) -> NodeId {
        self.bwd(Pi, c - 1, 1).expect("balanced string")
    }

    fn depth(&mut self, x: NodeId) -> Result<u64> {
        self.node(x)?;
        Ok(self.t.bits.prefix(Pi, x)? as u64)
    }

    fn height(&mut self, x: NodeId) -> Result<u64> {
        let c = self.close(x)?;
        let deepest = self.t.bits.max_family(x, c)?.max;
        Ok((deepest - self.t.bits.prefix(Pi, x)?) as u64)
    }

    fn num_descendants(&mut self, x: NodeId) -> Result<u64> {
        let c = self.close(x)?;
        Ok(((c - x).div_ceil(2) - 1) as u64)
    }

    fn level_ancestor(&mut self, x: NodeId, i: u64) -> Result<Option<NodeId>> {
        let depth = self.depth(x)?;
        if i == 0 {
            return Ok(Some(x));
        }
        if i >= depth {
            return Ok(None);
        }
        Ok(self.bwd(Pi, x, i as i64 + 1))
    }

    fn lca(&mut self, x: NodeId, y: NodeId) -> Result<NodeId> {
        self.node(x)?;
        self.node(y)?;
        let (a, b) = (x.min(y), x.max(y));
        if b <= self.close(a)? {
            return Ok(a);
        }
        // the first excess minimum between them closes a child of the lca,
        // and the next position opens the following child
        let m = self.t.bits.min_select_probed(a, b, 1, &mut self.probe)?.expect("range is non-empty");
        Ok(self.level_ancestor(m + 1, 1)?.expect("a common ancestor exists"))
    }

    fn level_next(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        let c = self.close(x)?;
        Ok(self.fwd(Pi, c + 1, 1))
    }

    fn level_prev(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        self.node(x)?;
        if x == 1 {
            return Ok(None);
        }
        // last position before x that is as deep as x, then the node it closes
        Ok(self.bwd(PiPrime, x - 1, 1).map(|j| self.find_open(j)))
    }

    fn level_lmost(&mut self, d: u64) -> Option<NodeId> {
        if d == 0 || self.t.is_empty() {
            return None;
        }
        self.fwd(Pi, 1, d as i64)
    }

    fn level_rmost(&mut self, d: u64) -> Option<NodeId> {
        if d == 0 || self.t.is_empty() {
            return None;
        }
        let j = self.bwd(PiPrime, self.t.bits.len(), d as i64)?;
        Some(self.find_open(j))
    }

    fn degree(&mut self, x: NodeId) -> Result<u64> {
        let c = self.close(x)?;
        if c == x + 1 {
            return Ok(0);
        }
        if let Some(d) = self.t.heavy.get(x) {
            return Ok(d);
        }
        Ok(self.t.bits.min_count_capped(x + 1, c - 1, &mut self.probe)?.1)
    }

    fn child_rank(&mut self, x: NodeId) -> Result<u64> {
        let Some(p) = self.level_ancestor(x, 1)? else {
            return Ok(1);
        };
        if x == p + 1 {
            return Ok(1);
        }
        Ok(self.t.bits.min_count(p + 1, x - 1, &mut self.probe)?.1 + 1)
    }

    fn child_select(&mut self, y: NodeId, i: u64) -> Result<NodeId> {
        let degree = self.degree(y)?;
        if i == 0 || i > degree {
            return Err(TreeError::BadChildIndex { node: y, index: i, degree });
        }
        if i == 1 {
            return Ok(y + 1);
        }
        let c = self.close(y)?;
        let before = self.t.bits.min_select_probed(y + 1, c - 1, i - 1, &mut self.probe)?.expect("child exists");
        Ok(before + 1)
    }

    fn first_child(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        self.node(x)?;
        Ok(self.t.bits.bit(x + 1)?.then_some(x + 1))
    }

    fn last_child(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        let c = self.close(x)?;
        Ok((c > x + 1).then(|| self.find_open(c - 1)))
    }

    fn next_sibling(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        let c = self.close(x)?;
        Ok((c < self.t.bits.len() && self.t.bits.bit(c + 1)?).then_some(c + 1))
    }

    fn prev_sibling(&mut self, x: NodeId) -> Result<Option<NodeId>> {
        self.node(x)?;
        Ok((x > 1 && !self.t.bits.bit(x - 1)?).then(|| self.find_open(x - 1)))
    }

    fn query(&mut self, q: &Query) -> Result<Answer> {
        use Query::*;
        let n = |r: Result<Option<NodeId>>| r.map(Answer::Node);
        let c = |r: Result<u64>| r.map(Answer::Count);
        match *q {
            Depth(x) => c(self.depth(x)),
            Height(x) => c(self.height(x)),
            NumDescendants(x) => c(self.num_descendants(x)),
            Parent(x) => n(self.level_ancestor(x, 1)),
            Lca(x, y) => n(self.lca(x, y).map(Some)),
            LevelAncestor(x, i) => n(self.level_ancestor(x, i)),
            LevelNext(x) => n(self.level_next(x)),
            LevelPrev(x) => n(self.level_prev(x)),
            LevelLmost(d) => Ok(Answer::Node(self.level_lmost(d))),
            LevelRmost(d) => Ok(Answer::Node(self.level_rmost(d))),
            Degree(x) => c(self.degree(x)),
            ChildRank(x) => c(self.child_rank(x)),
            ChildSelect(x, i) => n(self.child_select(x, i).map(Some)),
            FirstChild(x) => n(self.first_child(x)),
            LastChild(x) => n(self.last_child(x)),
            NextSibling(x) => n(self.next_sibling(x)),
            PrevSibling(x) => n(self.prev_sibling(x)),
        }
    }
}

/// `(position, degree)` of every node, by a stack scan.
pub fn degrees_by_scan(bits: &[bool]) -> Vec<(usize, u64)> {
    let mut out: Vec<(usize, u64)> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for (idx, &b) in bits.iter().enumerate() {
        if b {
            if let Some(&p) = stack.last() {
                out[p].1 += 1;
            }
            stack.push(out.len());
            out.push((idx + 1, 0));
        } else {
            stack.pop();
        }
    }
    out
}
