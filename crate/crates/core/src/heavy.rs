//! Explicit degrees of heavy nodes.
//!
//! Logically this is a bit string `B` aligned with the parentheses string
//! (`B[x] = 1` iff `x` opens a node with at least `D` children) together with
//! the sequence `C` of those nodes' degrees in position order. Heavy nodes are
//! rare (at most `n / D` of them), so the pair is stored as a gap list: each
//! heavy position records the number of zero positions before it and its
//! degree, and a trailing gap covers the zeros after the last one. The list
//! is cut into segments of bounded length so edits touch one small vector.

const SEGMENT_ITEMS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Item {
    /// zero positions immediately before this one
    gap: u64,
    degree: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Segment {
    items: Vec<Item>,
    /// positions covered: sum of `gap + 1`
    span: u64,
}

/// The heavy-node index: `B` with rank/select and the degree sequence `C`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HeavyIndex {
    segments: Vec<Segment>,
    tail: u64,
}

/// Where a 1-based position falls.
enum Spot {
    /// on item `i` of segment `s`
    Item(usize, usize),
    /// inside the gap before item `i` of segment `s`
    Gap(usize, usize),
    /// inside the trailing gap
    Tail,
}

impl HeavyIndex {
    /// All-zero string of length `len`.
    pub fn zeros(len: usize) -> Self {
        Self { segments: Vec::new(), tail: len as u64 }
    }

    /// Builds the index from `(position, degree)` pairs in increasing order.
    pub fn from_sorted(len: usize, heavy: &[(usize, u64)]) -> Self {
        let mut index = Self::zeros(0);
        let mut last = 0usize;
        let mut seg = Segment::default();
        for &(pos, degree) in heavy {
            assert!(pos > last && pos <= len, "heavy positions must increase within 1..={len}");
            let gap = (pos - last - 1) as u64;
            seg.items.push(Item { gap, degree });
            seg.span += gap + 1;
            if seg.items.len() == SEGMENT_ITEMS / 2 {
                index.segments.push(std::mem::take(&mut seg));
            }
            last = pos;
        }
        if !seg.items.is_empty() {
            index.segments.push(seg);
        }
        index.tail = (len - last) as u64;
        index
    }

    pub fn len(&self) -> usize {
        (self.segments.iter().map(|s| s.span).sum::<u64>() + self.tail) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of heavy positions, `rank1(B, len)`.
    pub fn count(&self) -> usize {
        self.segments.iter().map(|s| s.items.len()).sum()
    }

    fn locate(&self, pos: usize) -> Spot {
        assert!(pos >= 1 && pos <= self.len(), "position {pos} outside 1..={}", self.len());
        let mut left = pos as u64;
        for (s, seg) in self.segments.iter().enumerate() {
            if left > seg.span {
                left -= seg.span;
                continue;
            }
            for (i, item) in seg.items.iter().enumerate() {
                if left <= item.gap {
                    return Spot::Gap(s, i);
                }
                if left == item.gap + 1 {
                    return Spot::Item(s, i);
                }
                left -= item.gap + 1;
            }
            unreachable!("segment span out of sync");
        }
        Spot::Tail
    }

    /// `B[pos]` as the stored degree, `None` for a zero.
    pub fn get(&self, pos: usize) -> Option<u64> {
        match self.locate(pos) {
            Spot::Item(s, i) => Some(self.segments[s].items[i].degree),
            _ => None,
        }
    }

    /// Number of heavy positions in `1..=pos`.
    pub fn rank1(&self, pos: usize) -> usize {
        let mut left = pos as u64;
        let mut rank = 0;
        for seg in &self.segments {
            if left >= seg.span {
                left -= seg.span;
                rank += seg.items.len();
                continue;
            }
            for item in &seg.items {
                if left < item.gap + 1 {
                    return rank;
                }
                left -= item.gap + 1;
                rank += 1;
            }
        }
        rank
    }

    /// Position of the `j`-th (1-based) heavy node.
    pub fn select1(&self, j: usize) -> Option<usize> {
        let mut pos = 0u64;
        let mut left = j.checked_sub(1)?;
        for seg in &self.segments {
            if left >= seg.items.len() {
                left -= seg.items.len();
                pos += seg.span;
                continue;
            }
            for item in &seg.items[..=left] {
                pos += item.gap + 1;
            }
            return Some(pos as usize);
        }
        None
    }

    /// `C`, the degrees of the heavy nodes in position order.
    pub fn degrees(&self) -> Vec<u64> {
        self.segments.iter().flat_map(|s| s.items.iter().map(|i| i.degree)).collect()
    }

    /// Positions and degrees of the heavy nodes.
    pub fn entries(&self) -> Vec<(usize, u64)> {
        (1..=self.count()).map(|j| self.select1(j).unwrap()).zip(self.degrees()).collect()
    }

    /// Inserts a zero so that it becomes position `pos` (`1..=len + 1`).
    pub fn insert_zero(&mut self, pos: usize) {
        assert!(pos >= 1 && pos <= self.len() + 1);
        if pos == self.len() + 1 {
            self.tail += 1;
            return;
        }
        match self.locate(pos) {
            Spot::Gap(s, i) | Spot::Item(s, i) => {
                self.segments[s].items[i].gap += 1;
                self.segments[s].span += 1;
            }
            Spot::Tail => self.tail += 1,
        }
    }

    /// Removes position `pos`, returning its degree if it was heavy.
    pub fn remove(&mut self, pos: usize) -> Option<u64> {
        match self.locate(pos) {
            Spot::Gap(s, i) => {
                self.segments[s].items[i].gap -= 1;
                self.segments[s].span -= 1;
                None
            }
            Spot::Tail => {
                self.tail -= 1;
                None
            }
            Spot::Item(s, i) => {
                let item = self.take_item(s, i);
                Some(item.degree)
            }
        }
    }

    /// Removes item `i` of segment `s`, handing its gap to the next item or
    /// the tail; the position itself disappears.
    fn take_item(&mut self, s: usize, i: usize) -> Item {
        let seg = &mut self.segments[s];
        let item = seg.items.remove(i);
        seg.span -= item.gap + 1;
        if let Some(next) = seg.items.get_mut(i) {
            next.gap += item.gap;
            seg.span += item.gap;
        } else if let Some(next) = self.segments.get_mut(s + 1) {
            next.items[0].gap += item.gap;
            next.span += item.gap;
        } else {
            self.tail += item.gap;
        }
        if self.segments[s].items.is_empty() {
            self.segments.remove(s);
        }
        item
    }

    /// Sets `B[pos]` and `C` for one position: `Some(degree)` marks it
    /// heavy, `None` clears it.
    pub fn set(&mut self, pos: usize, degree: Option<u64>) {
        match (self.locate(pos), degree) {
            (Spot::Item(s, i), Some(d)) => self.segments[s].items[i].degree = d,
            (Spot::Item(s, i), None) => {
                // drop the position, then put it back as a zero
                self.take_item(s, i);
                self.insert_zero(pos);
            }
            (Spot::Gap(s, i), Some(d)) => {
                let before = self.segments[s].items[..i].iter().map(|it| it.gap + 1).sum::<u64>();
                let start = self.segments[..s].iter().map(|sg| sg.span).sum::<u64>() + before;
                let offset = pos as u64 - start; // 1..=gap
                let seg = &mut self.segments[s];
                let next = &mut seg.items[i];
                let new = Item { gap: offset - 1, degree: d };
                next.gap -= offset;
                seg.items.insert(i, new);
                self.split_if_full(s);
            }
            (Spot::Tail, Some(d)) => {
                let offset = pos as u64 - (self.len() as u64 - self.tail);
                self.tail -= offset;
                let new = Item { gap: offset - 1, degree: d };
                match self.segments.last_mut() {
                    Some(seg) if seg.items.len() < SEGMENT_ITEMS => {
                        seg.items.push(new);
                        seg.span += offset;
                    }
                    _ => self.segments.push(Segment { items: vec![new], span: offset }),
                }
            }
            (_, None) => {}
        }
    }

    fn split_if_full(&mut self, s: usize) {
        if self.segments[s].items.len() <= SEGMENT_ITEMS {
            return;
        }
        let seg = &mut self.segments[s];
        let right: Vec<Item> = seg.items.split_off(SEGMENT_ITEMS / 2);
        let right_span: u64 = right.iter().map(|it| it.gap + 1).sum();
        seg.span -= right_span;
        self.segments.insert(s + 1, Segment { items: right, span: right_span });
    }

    pub fn heap_bits(&self) -> usize {
        let item = 8 * std::mem::size_of::<Item>();
        let seg = 8 * std::mem::size_of::<Segment>();
        self.segments.capacity() * seg + self.segments.iter().map(|s| s.items.capacity() * item).sum::<usize>()
    }
}
