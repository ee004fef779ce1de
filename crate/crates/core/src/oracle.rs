//! Slow, obviously-correct reference implementations used as ground truth in
//! tests: literal scans for the base queries and an explicit pointer tree
//! for the tree queries.

use crate::kernel::{MaxFamily, MinFamily, WeightFn};
use crate::query::{Answer, NodeId, Query};
use crate::tree::TreeError;

/// Base queries evaluated by scanning the bit string.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScanOracle {
    pub bits: Vec<bool>,
}

impl ScanOracle {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `f(P[1]) + ... + f(P[j])`.
    pub fn prefix(&self, f: WeightFn, j: usize) -> i64 {
        self.bits[..j].iter().map(|&b| f.value(b)).sum()
    }

    pub fn sum(&self, f: WeightFn, i: usize, j: usize) -> i64 {
        self.bits[i - 1..j].iter().map(|&b| f.value(b)).sum()
    }

    pub fn fwd_search_geq(&self, f: WeightFn, i: usize, d: i64) -> Option<usize> {
        let mut acc = 0;
        for j in i..=self.len() {
            acc += f.value(self.bits[j - 1]);
            if acc >= d {
                return Some(j);
            }
        }
        None
    }

    pub fn bwd_search_geq(&self, f: WeightFn, i: usize, d: i64) -> Option<usize> {
        let mut acc = 0;
        for j in (1..=i).rev() {
            acc += f.value(self.bits[j - 1]);
            if acc >= d {
                return Some(j);
            }
        }
        None
    }

    /// Minimum of the excess over `i..=j`, first position and count.
    pub fn min_family(&self, i: usize, j: usize) -> MinFamily {
        let mut best = MinFamily { min: i64::MAX, argmin: 0, count: 0 };
        let mut acc = self.prefix(WeightFn::Pi, i - 1);
        for k in i..=j {
            acc += WeightFn::Pi.value(self.bits[k - 1]);
            if acc < best.min {
                best = MinFamily { min: acc, argmin: k, count: 1 };
            } else if acc == best.min {
                best.count += 1;
            }
        }
        best
    }

    /// The `d`-th position of `i..=j` attaining the excess minimum.
    pub fn min_select(&self, i: usize, j: usize, d: u64) -> Option<usize> {
        let min = self.min_family(i, j).min;
        (i..=j)
            .filter(|&k| self.prefix(WeightFn::Pi, k) == min)
            .nth((d as usize).checked_sub(1)?)
    }

    pub fn max_family(&self, i: usize, j: usize) -> MaxFamily {
        let mut best = MaxFamily { max: i64::MIN, argmax: 0 };
        let mut acc = self.prefix(WeightFn::Pi, i - 1);
        for k in i..=j {
            acc += WeightFn::Pi.value(self.bits[k - 1]);
            if acc > best.max {
                best = MaxFamily { max: acc, argmax: k };
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
struct Slot {
    children: Vec<usize>,
}

/// An ordinal tree stored as explicit child lists. Nodes are addressed from
/// outside by the position of their opening parenthesis, which is recomputed
/// from the structure whenever it is needed.
#[derive(Clone, Debug, Default)]
pub struct OracleTree {
    slots: Vec<Slot>,
    root: Option<usize>,
}

impl OracleTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the tree from a balanced parentheses string (`true` = open).
    pub fn from_bp(bits: &[bool]) -> Result<Self, TreeError> {
        crate::tree::validate_bp(bits)?;
        let mut tree = Self::new();
        let mut stack: Vec<usize> = Vec::new();
        for &b in bits {
            if b {
                let id = tree.slots.len();
                tree.slots.push(Slot { children: Vec::new() });
                match stack.last() {
                    Some(&p) => tree.slots[p].children.push(id),
                    None => tree.root = Some(id),
                }
                stack.push(id);
            } else {
                stack.pop();
            }
        }
        Ok(tree)
    }

    /// The balanced parentheses string, regenerated from the child lists.
    pub fn to_bp(&self) -> Vec<bool> {
        let mut out = Vec::new();
        if let Some(r) = self.root {
            self.emit(r, &mut out);
        }
        out
    }

    fn emit(&self, id: usize, out: &mut Vec<bool>) {
        out.push(true);
        for &c in &self.slots[id].children {
            self.emit(c, out);
        }
        out.push(false);
    }

    pub fn node_count(&self) -> usize {
        self.positions().len()
    }

    /// Slot ids in preorder.
    fn preorder(&self) -> Vec<usize> {
        self.positions().into_iter().map(|(_, id)| id).collect()
    }

    /// `(opening position, slot id)` of every node in preorder. The `r`-th
    /// node (from 0) at depth `d` opens at `2r - d + 2`: every earlier node
    /// contributes an open, and all but its `d - 1` ancestors a close too.
    fn positions(&self) -> Vec<(NodeId, usize)> {
        let mut out = Vec::with_capacity(self.slots.len());
        let mut stack: Vec<(usize, usize)> = self.root.into_iter().map(|r| (r, 1)).collect();
        while let Some((id, depth)) = stack.pop() {
            out.push((2 * out.len() + 2 - depth, id));
            stack.extend(self.slots[id].children.iter().rev().map(|&c| (c, depth + 1)));
        }
        out
    }

    /// `(node, degree)` for every node in preorder; much cheaper than a
    /// [`OracleSnapshot`].
    pub fn outline(&self) -> Vec<(NodeId, u64)> {
        self.positions().into_iter().map(|(x, id)| (x, self.slots[id].children.len() as u64)).collect()
    }

    fn slot_of(&self, x: NodeId) -> Result<usize, TreeError> {
        self.positions()
            .into_iter()
            .find_map(|(p, id)| (p == x).then_some(id))
            .ok_or(TreeError::InvalidNode(x))
    }

    fn parent_slot(&self, id: usize) -> Option<(usize, usize)> {
        self.slots
            .iter()
            .enumerate()
            .find_map(|(p, s)| s.children.iter().position(|&c| c == id).map(|idx| (p, idx)))
    }

    /// Inserts a new node whose children are children `l..=r` of `y` (an
    /// empty range is `r == l - 1`). With `y == None` the new node becomes the
    /// root: of an empty tree with `(1, 0)`, or above the old root with `(1, 1)`.
    /// Returns the new node.
    pub fn insert_node(&mut self, y: Option<NodeId>, l: u64, r: u64) -> Result<NodeId, TreeError> {
        let range_err = |degree: u64| TreeError::BadChildRange { node: y, l, r, degree };
        let new_id = self.slots.len();
        match y {
            None => {
                let degree = u64::from(self.root.is_some());
                if l != 1 || r != degree {
                    return Err(range_err(degree));
                }
                self.slots.push(Slot { children: self.root.into_iter().collect() });
                self.root = Some(new_id);
            }
            Some(y) => {
                let ys = self.slot_of(y)?;
                let degree = self.slots[ys].children.len() as u64;
                if l == 0 || l > r + 1 || r > degree {
                    return Err(range_err(degree));
                }
                let taken: Vec<usize> = self.slots[ys].children.drain(l as usize - 1..r as usize).collect();
                self.slots.push(Slot { children: taken });
                self.slots[ys].children.insert(l as usize - 1, new_id);
            }
        }
        Ok(self.positions().into_iter().find(|&(_, s)| s == new_id).unwrap().0)
    }

    /// Deletes `x`, handing its children to its parent in its place.
    pub fn delete_node(&mut self, x: NodeId) -> Result<(), TreeError> {
        let xs = self.slot_of(x)?;
        match self.parent_slot(xs) {
            None => {
                if !self.slots[xs].children.is_empty() {
                    return Err(TreeError::RootWithChildren);
                }
                self.root = None;
            }
            Some((p, idx)) => {
                let kids = std::mem::take(&mut self.slots[xs].children);
                self.slots[p].children.splice(idx..=idx, kids);
            }
        }
        self.compact();
        Ok(())
    }

    /// Drops unreachable slots so ids stay dense.
    fn compact(&mut self) {
        let order = self.preorder();
        let mut remap = vec![usize::MAX; self.slots.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut slots = Vec::with_capacity(order.len());
        for &old in &order {
            let children = self.slots[old].children.iter().map(|&c| remap[c]).collect();
            slots.push(Slot { children });
        }
        self.slots = slots;
        self.root = self.root.map(|r| remap[r]);
    }

    /// A read-only view with every per-node quantity precomputed.
    pub fn snapshot(&self) -> OracleSnapshot {
        OracleSnapshot::new(self)
    }

    pub fn query(&self, q: &Query) -> Result<Answer, TreeError> {
        self.snapshot().query(q)
    }
}

#[derive(Clone, Debug)]
struct NodeInfo {
    open: NodeId,
    close: usize,
    depth: u64,
    height: u64,
    descendants: u64,
    parent: Option<usize>,
    children: Vec<usize>,
    rank_in_parent: u64,
}

/// Precomputed answers for one state of an [`OracleTree`]. Nodes are held in
/// preorder.
#[derive(Clone, Debug)]
pub struct OracleSnapshot {
    nodes: Vec<NodeInfo>,
    by_position: Vec<Option<usize>>,
    levels: Vec<Vec<usize>>,
    level_index: Vec<usize>,
}

impl OracleSnapshot {
    fn new(tree: &OracleTree) -> Self {
        let order = tree.preorder();
        let mut rank = vec![0; tree.slots.len()];
        for (r, &s) in order.iter().enumerate() {
            rank[s] = r;
        }
        let mut nodes: Vec<NodeInfo> = order
            .iter()
            .map(|&s| NodeInfo {
                open: 0,
                close: 0,
                depth: 0,
                height: 0,
                descendants: 0,
                parent: None,
                children: tree.slots[s].children.iter().map(|&c| rank[c]).collect(),
                rank_in_parent: 1,
            })
            .collect();
        for r in 0..nodes.len() {
            let kids = nodes[r].children.clone();
            for (idx, &c) in kids.iter().enumerate() {
                nodes[c].parent = Some(r);
                nodes[c].rank_in_parent = idx as u64 + 1;
            }
        }
        // positions and depths top-down, heights and sizes bottom-up
        let mut pos = 0;
        fn walk(nodes: &mut [NodeInfo], r: usize, depth: u64, pos: &mut usize) {
            *pos += 1;
            nodes[r].open = *pos;
            nodes[r].depth = depth;
            let kids = nodes[r].children.clone();
            let (mut height, mut desc) = (0, 0);
            for c in kids {
                walk(nodes, c, depth + 1, pos);
                height = height.max(nodes[c].height + 1);
                desc += nodes[c].descendants + 1;
            }
            *pos += 1;
            nodes[r].close = *pos;
            nodes[r].height = height;
            nodes[r].descendants = desc;
        }
        if !nodes.is_empty() {
            walk(&mut nodes, 0, 1, &mut pos);
        }
        let mut by_position = vec![None; 2 * nodes.len() + 1];
        let mut levels: Vec<Vec<usize>> = Vec::new();
        let mut level_index = vec![0; nodes.len()];
        for (r, n) in nodes.iter().enumerate() {
            by_position[n.open] = Some(r);
            let d = n.depth as usize;
            if levels.len() < d {
                levels.resize(d, Vec::new());
            }
            level_index[r] = levels[d - 1].len();
            levels[d - 1].push(r);
        }
        Self { nodes, by_position, levels, level_index }
    }

    fn rank_of(&self, x: NodeId) -> Result<usize, TreeError> {
        self.by_position.get(x).copied().flatten().ok_or(TreeError::InvalidNode(x))
    }

    pub fn len_bits(&self) -> usize {
        2 * self.nodes.len()
    }

    /// Opening positions of all nodes in preorder.
    pub fn nodes(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.open).collect()
    }

    pub fn degree(&self, x: NodeId) -> Result<u64, TreeError> {
        Ok(self.nodes[self.rank_of(x)?].children.len() as u64)
    }

    /// Opening positions of the nodes at depth `d`, left to right.
    pub fn level(&self, d: u64) -> Vec<NodeId> {
        match (d as usize).checked_sub(1).and_then(|i| self.levels.get(i)) {
            Some(l) => l.iter().map(|&r| self.nodes[r].open).collect(),
            None => Vec::new(),
        }
    }

    pub fn query(&self, q: &Query) -> Result<Answer, TreeError> {
        use Query::*;
        let node = |r: Option<usize>| Answer::Node(r.map(|r| self.nodes[r].open));
        let info = |x: NodeId| -> Result<(usize, &NodeInfo), TreeError> {
            let r = self.rank_of(x)?;
            Ok((r, &self.nodes[r]))
        };
        Ok(match *q {
            Depth(x) => Answer::Count(info(x)?.1.depth),
            Height(x) => Answer::Count(info(x)?.1.height),
            NumDescendants(x) => Answer::Count(info(x)?.1.descendants),
            Parent(x) => node(info(x)?.1.parent),
            Lca(x, y) => {
                let (mut a, _) = info(x)?;
                let (mut b, _) = info(y)?;
                while self.nodes[a].depth > self.nodes[b].depth {
                    a = self.nodes[a].parent.unwrap();
                }
                while self.nodes[b].depth > self.nodes[a].depth {
                    b = self.nodes[b].parent.unwrap();
                }
                while a != b {
                    a = self.nodes[a].parent.unwrap();
                    b = self.nodes[b].parent.unwrap();
                }
                node(Some(a))
            }
            LevelAncestor(x, i) => {
                let (mut r, n) = info(x)?;
                if i >= n.depth {
                    return Ok(Answer::Node(None));
                }
                for _ in 0..i {
                    r = self.nodes[r].parent.unwrap();
                }
                node(Some(r))
            }
            LevelNext(x) => {
                let (r, n) = info(x)?;
                let level = &self.levels[n.depth as usize - 1];
                node(level.get(self.level_index[r] + 1).copied())
            }
            LevelPrev(x) => {
                let (r, n) = info(x)?;
                let level = &self.levels[n.depth as usize - 1];
                node(self.level_index[r].checked_sub(1).map(|i| level[i]))
            }
            LevelLmost(d) => node(self.level_ranks(d).and_then(|l| l.first().copied())),
            LevelRmost(d) => node(self.level_ranks(d).and_then(|l| l.last().copied())),
            Degree(x) => Answer::Count(info(x)?.1.children.len() as u64),
            ChildRank(x) => Answer::Count(info(x)?.1.rank_in_parent),
            ChildSelect(x, i) => {
                let n = info(x)?.1;
                let degree = n.children.len() as u64;
                if i == 0 || i > degree {
                    return Err(TreeError::BadChildIndex { node: x, index: i, degree });
                }
                node(Some(n.children[i as usize - 1]))
            }
            FirstChild(x) => node(info(x)?.1.children.first().copied()),
            LastChild(x) => node(info(x)?.1.children.last().copied()),
            NextSibling(x) => {
                let n = info(x)?.1;
                node(n.parent.and_then(|p| self.nodes[p].children.get(n.rank_in_parent as usize).copied()))
            }
            PrevSibling(x) => {
                let n = info(x)?.1;
                let before = n.rank_in_parent as usize - 1;
                node(n.parent.and_then(|p| before.checked_sub(1).map(|i| self.nodes[p].children[i])))
            }
        })
    }

    fn level_ranks(&self, d: u64) -> Option<&Vec<usize>> {
        (d as usize).checked_sub(1).and_then(|i| self.levels.get(i))
    }
}
