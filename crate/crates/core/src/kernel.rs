//! Block-level evaluation of the base queries over a leaf segment of the
//! parentheses string.
//!
//! A block is scanned one bit at a time up to a byte boundary and one byte
//! ("chunk") at a time afterwards; per-chunk answers come from tables built
//! once for each weight function.

use std::fmt;
use std::sync::OnceLock;

/// Bits per table-driven chunk.
pub const CHUNK_BITS: usize = 8;

const NO_POS: u8 = u8::MAX;

/// The four per-character weight functions over a parentheses string
/// (`1` = open, `0` = close).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightFn {
    /// open +1, close -1 (the excess)
    Pi,
    /// open -1, close +1
    PiPrime,
    /// open 1, close 0
    Phi,
    /// open 0, close 1
    Psi,
}

impl WeightFn {
    pub const ALL: [WeightFn; 4] = [WeightFn::Pi, WeightFn::PiPrime, WeightFn::Phi, WeightFn::Psi];

    #[inline]
    pub fn value(self, bit: bool) -> i64 {
        match (self, bit) {
            (WeightFn::Pi, true) | (WeightFn::PiPrime, false) => 1,
            (WeightFn::Pi, false) | (WeightFn::PiPrime, true) => -1,
            (WeightFn::Phi, b) => b as i64,
            (WeightFn::Psi, b) => !b as i64,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightFn::Pi => "pi",
            WeightFn::PiPrime => "pi'",
            WeightFn::Phi => "phi",
            WeightFn::Psi => "psi",
        }
    }
}

impl fmt::Display for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Answers for one chunk value under one weight function. Positions are
/// 0-based within the chunk; prefixes are taken over chunk positions 1..=8.
#[derive(Clone, Copy, Debug)]
struct ChunkInfo {
    sum: i8,
    max: i8,
    min: i8,
    argmax: u8,
    argmin: u8,
    min_count: u8,
    min_mask: u8,
    // indexed by threshold + 8 for thresholds in -8..=8
    first_geq: [u8; 17],
    last_geq: [u8; 17],
}

/// Universal per-chunk tables for one weight function.
pub struct ChunkTable {
    entries: Vec<ChunkInfo>,
}

impl ChunkTable {
    fn build(f: WeightFn) -> Self {
        let entries = (0..1usize << CHUNK_BITS)
            .map(|c| {
                let mut prefix = [0i8; CHUNK_BITS];
                let mut acc = 0i64;
                for (p, slot) in prefix.iter_mut().enumerate() {
                    acc += f.value(c >> p & 1 == 1);
                    *slot = acc as i8;
                }
                let max = *prefix.iter().max().unwrap();
                let min = *prefix.iter().min().unwrap();
                let mut info = ChunkInfo {
                    sum: acc as i8,
                    max,
                    min,
                    argmax: prefix.iter().position(|&v| v == max).unwrap() as u8,
                    argmin: prefix.iter().position(|&v| v == min).unwrap() as u8,
                    min_count: prefix.iter().filter(|&&v| v == min).count() as u8,
                    min_mask: 0,
                    first_geq: [NO_POS; 17],
                    last_geq: [NO_POS; 17],
                };
                for (p, &v) in prefix.iter().enumerate() {
                    if v == min {
                        info.min_mask |= 1 << p;
                    }
                }
                for d in -8i8..=8 {
                    let slot = (d + 8) as usize;
                    info.first_geq[slot] = prefix.iter().position(|&v| v >= d).map_or(NO_POS, |p| p as u8);
                    info.last_geq[slot] = prefix.iter().rposition(|&v| v >= d).map_or(NO_POS, |p| p as u8);
                }
                info
            })
            .collect();
        Self { entries }
    }

    /// Tables for `f`, built on first use and shared afterwards.
    pub fn get(f: WeightFn) -> &'static ChunkTable {
        static TABLES: OnceLock<[ChunkTable; 4]> = OnceLock::new();
        &TABLES.get_or_init(|| WeightFn::ALL.map(ChunkTable::build))[f.index()]
    }

    #[inline]
    fn info(&self, chunk: u8) -> &ChunkInfo {
        &self.entries[chunk as usize]
    }

    pub fn heap_bits(&self) -> usize {
        8 * std::mem::size_of::<ChunkInfo>() * self.entries.len()
    }
}

/// Cached summary of a parentheses segment under `pi`, plus its length and
/// number of opens. Extremes are over the prefix values at positions
/// `1..=len`; the value before the segment is taken as zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Summary {
    pub len: usize,
    pub ones: usize,
    pub max: i64,
    pub min: i64,
    pub min_count: u64,
}

impl Summary {
    pub fn excess(&self) -> i64 {
        2 * self.ones as i64 - self.len as i64
    }

    /// Total of `f` over the segment.
    pub fn total(&self, f: WeightFn) -> i64 {
        match f {
            WeightFn::Pi => self.excess(),
            WeightFn::PiPrime => -self.excess(),
            WeightFn::Phi => self.ones as i64,
            WeightFn::Psi => (self.len - self.ones) as i64,
        }
    }

    /// Largest prefix value of `f` over the segment.
    pub fn max_of(&self, f: WeightFn) -> i64 {
        match f {
            WeightFn::Pi => self.max,
            WeightFn::PiPrime => -self.min,
            WeightFn::Phi | WeightFn::Psi => self.total(f),
        }
    }
}

/// Result of a range-minimum family query: the minimum prefix value over
/// the range, its first position and the number of positions attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinFamily {
    pub min: i64,
    pub argmin: usize,
    pub count: u64,
}

/// Result of a range-maximum query: maximum prefix value and first position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxFamily {
    pub max: i64,
    pub argmax: usize,
}

/// A leaf segment of the parentheses string with its cached summary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitBlock {
    words: Vec<u64>,
    len: usize,
    summary: Summary,
}

impl Default for BitBlock {
    fn default() -> Self {
        Self::new()
    }
}

impl BitBlock {
    pub fn new() -> Self {
        Self { words: Vec::new(), len: 0, summary: Summary::default() }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut block = Self::new();
        for b in bits {
            if block.len.is_multiple_of(64) {
                block.words.push(0);
            }
            if b {
                block.words[block.len / 64] |= 1 << (block.len % 64);
            }
            block.len += 1;
        }
        block.refresh();
        block
    }

    /// Parses `1`/`0` or `(`/`)` characters; anything else is rejected.
    pub fn parse(text: &str) -> Option<Self> {
        let bits: Option<Vec<bool>> = text
            .chars()
            .map(|c| match c {
                '1' | '(' => Some(true),
                '0' | ')' => Some(false),
                _ => None,
            })
            .collect();
        bits.map(Self::from_bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    /// Bit at 1-based position `i`.
    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i >= 1 && i <= self.len);
        self.words[(i - 1) / 64] >> ((i - 1) % 64) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (1..=self.len).map(move |i| self.bit(i))
    }

    /// Chunk number `c` (positions `8c+1..=8c+8`), zero-padded past the end.
    #[inline]
    fn chunk(&self, c: usize) -> u8 {
        (self.words[c / 8] >> (8 * (c % 8))) as u8
    }

    /// Recomputes the cached summary from the bits.
    pub fn refresh(&mut self) {
        self.summary = self.scan_summary();
    }

    fn scan_summary(&self) -> Summary {
        let mut s = Summary { len: self.len, ..Summary::default() };
        if self.len == 0 {
            return s;
        }
        s.ones = self.words.iter().map(|w| w.count_ones() as usize).sum();
        let fam = self.range_min(WeightFn::Pi, 1, self.len);
        s.min = fam.min;
        s.min_count = fam.count;
        s.max = self.range_max(WeightFn::Pi, 1, self.len).max;
        s
    }

    /// `f(P[1]) + ... + f(P[j])`.
    pub fn prefix(&self, f: WeightFn, j: usize) -> i64 {
        assert!(j <= self.len, "prefix end {j} beyond block length {}", self.len);
        let table = ChunkTable::get(f);
        let full = j / CHUNK_BITS;
        let mut acc: i64 = (0..full).map(|c| table.info(self.chunk(c)).sum as i64).sum();
        for p in full * CHUNK_BITS + 1..=j {
            acc += f.value(self.bit(p));
        }
        acc
    }

    /// `f(P[i]) + ... + f(P[j])`; the empty range `i == j + 1` sums to zero.
    pub fn sum(&self, f: WeightFn, i: usize, j: usize) -> i64 {
        assert!(i >= 1 && i <= j + 1 && j <= self.len, "bad range {i}..={j}");
        self.prefix(f, j) - self.prefix(f, i - 1)
    }

    /// Minimum `j >= i` with `prefix(f, j) >= target`.
    pub fn find_fwd(&self, f: WeightFn, i: usize, target: i64) -> Option<usize> {
        assert!(i >= 1 && i <= self.len + 1);
        let table = ChunkTable::get(f);
        let mut run = self.prefix(f, i - 1);
        let mut p = i;
        while p <= self.len && !(p - 1).is_multiple_of(CHUNK_BITS) {
            run += f.value(self.bit(p));
            if run >= target {
                return Some(p);
            }
            p += 1;
        }
        while p + CHUNK_BITS - 1 <= self.len {
            let info = table.info(self.chunk((p - 1) / CHUNK_BITS));
            if run + info.max as i64 >= target {
                let d = (target - run).clamp(-8, 8);
                return Some(p + info.first_geq[(d + 8) as usize] as usize);
            }
            run += info.sum as i64;
            p += CHUNK_BITS;
        }
        while p <= self.len {
            run += f.value(self.bit(p));
            if run >= target {
                return Some(p);
            }
            p += 1;
        }
        None
    }

    /// Maximum `j` in `1..=x` with `prefix(f, j) >= target`.
    pub fn find_bwd(&self, f: WeightFn, x: usize, target: i64) -> Option<usize> {
        assert!(x <= self.len);
        let table = ChunkTable::get(f);
        let mut run = self.prefix(f, x);
        let mut p = x;
        // bits past the last complete chunk boundary at or below x
        while p >= 1 && !p.is_multiple_of(CHUNK_BITS) {
            if run >= target {
                return Some(p);
            }
            run -= f.value(self.bit(p));
            p -= 1;
        }
        let mut c = p / CHUNK_BITS;
        while c > 0 {
            let info = table.info(self.chunk(c - 1));
            let before = run - info.sum as i64;
            if before + info.max as i64 >= target {
                let d = (target - before).clamp(-8, 8);
                return Some((c - 1) * CHUNK_BITS + info.last_geq[(d + 8) as usize] as usize + 1);
            }
            run = before;
            c -= 1;
        }
        None
    }

    /// Minimum of `prefix(f, k)` over `k` in `i..=j`, its first position and count.
    pub fn range_min(&self, f: WeightFn, i: usize, j: usize) -> MinFamily {
        assert!(i >= 1 && i <= j && j <= self.len, "bad range {i}..={j}");
        let table = ChunkTable::get(f);
        let mut best = MinFamily { min: i64::MAX, argmin: 0, count: 0 };
        let note = |v: i64, pos: usize, count: u64, best: &mut MinFamily| {
            if v < best.min {
                *best = MinFamily { min: v, argmin: pos, count };
            } else if v == best.min {
                best.count += count;
            }
        };
        let mut run = self.prefix(f, i - 1);
        let mut p = i;
        while p <= j {
            if (p - 1).is_multiple_of(CHUNK_BITS) && p + CHUNK_BITS - 1 <= j {
                let info = table.info(self.chunk((p - 1) / CHUNK_BITS));
                note(run + info.min as i64, p + info.argmin as usize, info.min_count as u64, &mut best);
                run += info.sum as i64;
                p += CHUNK_BITS;
            } else {
                run += f.value(self.bit(p));
                note(run, p, 1, &mut best);
                p += 1;
            }
        }
        best
    }

    /// Maximum of `prefix(f, k)` over `k` in `i..=j` and its first position.
    pub fn range_max(&self, f: WeightFn, i: usize, j: usize) -> MaxFamily {
        assert!(i >= 1 && i <= j && j <= self.len, "bad range {i}..={j}");
        let table = ChunkTable::get(f);
        let mut best = MaxFamily { max: i64::MIN, argmax: 0 };
        let mut run = self.prefix(f, i - 1);
        let mut p = i;
        while p <= j {
            if (p - 1).is_multiple_of(CHUNK_BITS) && p + CHUNK_BITS - 1 <= j {
                let info = table.info(self.chunk((p - 1) / CHUNK_BITS));
                if run + info.max as i64 > best.max {
                    best = MaxFamily { max: run + info.max as i64, argmax: p + info.argmax as usize };
                }
                run += info.sum as i64;
                p += CHUNK_BITS;
            } else {
                run += f.value(self.bit(p));
                if run > best.max {
                    best = MaxFamily { max: run, argmax: p };
                }
                p += 1;
            }
        }
        best
    }

    /// The `d`-th (1-based) position `k` in `i..=j` with `prefix(f, k) == value`,
    /// where `value` is at most the range minimum. When fewer than `d` such
    /// positions exist, returns `Err(count)`.
    pub fn select_min(&self, f: WeightFn, i: usize, j: usize, value: i64, d: u64) -> Result<usize, u64> {
        assert!(i >= 1 && i <= j && j <= self.len && d >= 1);
        let table = ChunkTable::get(f);
        let mut seen = 0u64;
        let mut run = self.prefix(f, i - 1);
        let mut p = i;
        while p <= j {
            if (p - 1).is_multiple_of(CHUNK_BITS) && p + CHUNK_BITS - 1 <= j {
                let info = table.info(self.chunk((p - 1) / CHUNK_BITS));
                debug_assert!(run + info.min as i64 >= value);
                if run + info.min as i64 == value {
                    let n = info.min_count as u64;
                    if seen + n >= d {
                        let nth = crate::bits::select_in_word(info.min_mask as u64, (d - seen - 1) as u32).unwrap();
                        return Ok(p + nth as usize);
                    }
                    seen += n;
                }
                run += info.sum as i64;
                p += CHUNK_BITS;
            } else {
                run += f.value(self.bit(p));
                if run == value {
                    seen += 1;
                    if seen == d {
                        return Ok(p);
                    }
                }
                p += 1;
            }
        }
        Err(seen)
    }

    /// Inserts `bit` so that it becomes position `pos` (1-based, `pos <= len + 1`).
    pub fn insert(&mut self, pos: usize, bit: bool) {
        assert!(pos >= 1 && pos <= self.len + 1, "insert position {pos} out of range");
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        let at = pos - 1;
        let w = at / 64;
        let mut carry = self.words[w] >> 63;
        let low = crate::bits::range_mask(0, (at % 64) as u32);
        let word = self.words[w];
        self.words[w] = (word & low) | ((word & !low) << 1) | ((bit as u64) << (at % 64));
        for x in &mut self.words[w + 1..] {
            let next = *x >> 63;
            *x = (*x << 1) | carry;
            carry = next;
        }
        self.len += 1;
        self.refresh();
    }

    /// Removes position `pos` and returns its bit.
    pub fn remove(&mut self, pos: usize) -> bool {
        assert!(pos >= 1 && pos <= self.len, "remove position {pos} out of range");
        let at = pos - 1;
        let w = at / 64;
        let bit = self.words[w] >> (at % 64) & 1 == 1;
        let low = crate::bits::range_mask(0, (at % 64) as u32);
        let word = self.words[w];
        self.words[w] = (word & low) | ((word >> 1) & !low);
        for idx in w + 1..self.words.len() {
            let moved = self.words[idx] & 1;
            self.words[idx - 1] |= moved << 63;
            self.words[idx] >>= 1;
        }
        self.len -= 1;
        if self.len.is_multiple_of(64) {
            self.words.pop();
        }
        // keep bits past len zero
        if let Some(last) = self.words.last_mut() {
            if !self.len.is_multiple_of(64) {
                *last &= crate::bits::range_mask(0, (self.len % 64) as u32);
            }
        }
        self.refresh();
        bit
    }

    /// Splits off positions `at+1..` into a new block.
    pub fn split_off(&mut self, at: usize) -> BitBlock {
        let right = BitBlock::from_bits((at + 1..=self.len).map(|p| self.bit(p)));
        let left = BitBlock::from_bits((1..=at).map(|p| self.bit(p)));
        *self = left;
        right
    }

    pub fn append(&mut self, other: &BitBlock) {
        let merged = BitBlock::from_bits(self.iter().chain(other.iter()));
        *self = merged;
    }

    pub fn heap_bits(&self) -> usize {
        64 * self.words.capacity()
    }

    // ---- entry-relative forms used by the public block API ----

    /// Minimum `j >= i` with `entry + f(P[i]) + ... + f(P[j]) >= d`, where
    /// `entry` is the running value before position `i`.
    pub fn fwd_search_geq(&self, f: WeightFn, i: usize, d: i64, entry: i64) -> Option<usize> {
        let base = self.prefix(f, i - 1);
        self.find_fwd(f, i, d - entry + base)
    }

    /// Maximum `j <= i` with `exit + f(P[j]) + ... + f(P[i]) >= d`.
    pub fn bwd_search_geq(&self, f: WeightFn, i: usize, d: i64, exit: i64) -> Option<usize> {
        assert!(i >= 1 && i <= self.len);
        // sum(j..=i) = prefix(i) - prefix(j-1): look for the largest j-1 in
        // 0..i with prefix(j-1) <= prefix(i) + exit - d
        let limit = self.prefix(f, i) + exit - d;
        let neg = match f {
            WeightFn::Pi => WeightFn::PiPrime,
            WeightFn::PiPrime => WeightFn::Pi,
            _ => {
                // monotone functions: scan
                return (1..=i).rev().find(|&j| exit + self.sum(f, j, i) >= d);
            }
        };
        // prefix_f(x) <= limit  <=>  prefix_neg(x) >= -limit
        match (i > 1).then(|| self.find_bwd(neg, i - 1, -limit)).flatten() {
            Some(x) => Some(x + 1),
            None if limit >= 0 => Some(1),
            None => None,
        }
    }

    /// Range-minimum family over prefix values `entry + prefix(f, k)`, `k` in `i..=j`.
    pub fn min_family(&self, f: WeightFn, i: usize, j: usize, entry: i64) -> MinFamily {
        let mut fam = self.range_min(f, i, j);
        fam.min += entry;
        fam
    }

    /// Range-maximum over prefix values `entry + prefix(f, k)`, `k` in `i..=j`.
    pub fn max_family(&self, f: WeightFn, i: usize, j: usize, entry: i64) -> MaxFamily {
        let mut fam = self.range_max(f, i, j);
        fam.max += entry;
        fam
    }

    /// The `d`-th position attaining the range minimum of `i..=j`.
    pub fn min_select(&self, f: WeightFn, i: usize, j: usize, d: u64) -> Option<usize> {
        if d == 0 {
            return None;
        }
        let fam = self.range_min(f, i, j);
        self.select_min(f, i, j, fam.min, d).ok()
    }
}

impl fmt::Display for BitBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}
