//! Partial-sums structures over small arrays, one instance per min-max node.
//!
//! All indices are 1-based to match prefix-sum conventions: `sum(0) == 0`
//! and `sum(k)` is the total. Every structure holds at most
//! [`MAX_ENTRIES`] entries so that bit strings over the entries fit in a
//! single machine word.

use thiserror::Error;

use crate::bits::{self, PackedBytes};

/// Upper bound on the number of entries of any structure in this module.
pub const MAX_ENTRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartialSumsError {
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("search threshold must be positive, got {0}")]
    NonPositiveThreshold(i64),
    #[error("entry {index} would become negative")]
    NegativeEntry { index: usize },
    #[error("capacity {cap} exceeded")]
    CapacityExceeded { cap: usize },
    #[error("split point {t} outside 0..={value}")]
    BadSplit { t: u64, value: u64 },
    #[error("update delta must be +1 or -1, got {0}")]
    BadDelta(i64),
}

pub type Result<T> = std::result::Result<T, PartialSumsError>;

fn check_index(index: usize, len: usize) -> Result<()> {
    if index == 0 || index > len {
        Err(PartialSumsError::IndexOutOfRange { index, len })
    } else {
        Ok(())
    }
}

/// Non-negative integers with prefix sums, threshold search, point updates
/// and merge/divide of adjacent entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallNonNegSums {
    entries: Vec<u64>,
    cap: usize,
}

impl SmallNonNegSums {
    pub fn new(cap: usize) -> Self {
        assert!(cap <= MAX_ENTRIES, "capacity {cap} exceeds {MAX_ENTRIES}");
        Self { entries: Vec::with_capacity(cap), cap }
    }

    pub fn from_slice(values: &[u64], cap: usize) -> Result<Self> {
        if values.len() > cap {
            return Err(PartialSumsError::CapacityExceeded { cap });
        }
        let mut s = Self::new(cap);
        s.entries.extend_from_slice(values);
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn get(&self, i: usize) -> Result<u64> {
        check_index(i, self.len())?;
        Ok(self.entries[i - 1])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.entries
    }

    /// `Z[1] + ... + Z[i]`.
    pub fn sum(&self, i: usize) -> Result<u64> {
        if i > self.len() {
            return Err(PartialSumsError::IndexOutOfRange { index: i, len: self.len() });
        }
        Ok(self.entries[..i].iter().sum())
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().sum()
    }

    /// Minimum `i` with `sum(i) >= d`, or `None` when the total is below `d`.
    pub fn search(&self, d: i64) -> Result<Option<usize>> {
        if d <= 0 {
            return Err(PartialSumsError::NonPositiveThreshold(d));
        }
        let d = d as u64;
        let mut acc = 0u64;
        for (idx, &z) in self.entries.iter().enumerate() {
            acc += z;
            if acc >= d {
                return Ok(Some(idx + 1));
            }
        }
        Ok(None)
    }

    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        check_index(i, self.len())?;
        let z = &mut self.entries[i - 1];
        let v = *z as i64 + delta;
        if v < 0 {
            return Err(PartialSumsError::NegativeEntry { index: i });
        }
        *z = v as u64;
        Ok(())
    }

    /// Replace `Z[i]` and `Z[i+1]` by their sum.
    pub fn merge(&mut self, i: usize) -> Result<()> {
        if i == 0 || i >= self.len() {
            return Err(PartialSumsError::IndexOutOfRange { index: i, len: self.len().saturating_sub(1) });
        }
        let right = self.entries.remove(i);
        self.entries[i - 1] += right;
        Ok(())
    }

    /// Replace `Z[i]` by the two entries `t` and `Z[i] - t`.
    pub fn divide(&mut self, i: usize, t: u64) -> Result<()> {
        check_index(i, self.len())?;
        let value = self.entries[i - 1];
        if t > value {
            return Err(PartialSumsError::BadSplit { t, value });
        }
        if self.len() + 1 > self.cap {
            return Err(PartialSumsError::CapacityExceeded { cap: self.cap });
        }
        self.entries[i - 1] = t;
        self.entries.insert(i, value - t);
        Ok(())
    }

    pub fn push(&mut self, value: u64) -> Result<()> {
        if self.len() + 1 > self.cap {
            return Err(PartialSumsError::CapacityExceeded { cap: self.cap });
        }
        self.entries.push(value);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<u64> {
        self.entries.pop()
    }
}

/// Signed integers with constant-time prefix sums.
///
/// Kept as an inclusive prefix cache; an update rewrites the suffix of the
/// cache, which is a handful of words for the entry counts used here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallSignedPrefixSums {
    prefix: Vec<i64>,
}

impl SmallSignedPrefixSums {
    pub fn from_slice(values: &[i64]) -> Result<Self> {
        if values.len() > MAX_ENTRIES {
            return Err(PartialSumsError::CapacityExceeded { cap: MAX_ENTRIES });
        }
        let mut acc = 0;
        let prefix = values
            .iter()
            .map(|&z| {
                acc += z;
                acc
            })
            .collect();
        Ok(Self { prefix })
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn sum(&self, i: usize) -> Result<i64> {
        match i {
            0 => Ok(0),
            _ if i <= self.len() => Ok(self.prefix[i - 1]),
            _ => Err(PartialSumsError::IndexOutOfRange { index: i, len: self.len() }),
        }
    }

    pub fn get(&self, i: usize) -> Result<i64> {
        check_index(i, self.len())?;
        Ok(self.sum(i)? - self.sum(i - 1)?)
    }

    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        check_index(i, self.len())?;
        for p in &mut self.prefix[i - 1..] {
            *p += delta;
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<i64> {
        (1..=self.len()).map(|i| self.get(i).unwrap()).collect()
    }
}

/// Array `Y` supporting point access and "add delta to `Y[i..=k]`",
/// stored as the difference array `Y[i] - Y[i-1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeAddArray {
    diffs: SmallSignedPrefixSums,
}

impl RangeAddArray {
    pub fn from_values(values: &[i64]) -> Result<Self> {
        let mut prev = 0;
        let diffs: Vec<i64> = values
            .iter()
            .map(|&y| {
                let d = y - prev;
                prev = y;
                d
            })
            .collect();
        Ok(Self { diffs: SmallSignedPrefixSums::from_slice(&diffs)? })
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn get(&self, i: usize) -> Result<i64> {
        check_index(i, self.len())?;
        self.diffs.sum(i)
    }

    pub fn suffix_add(&mut self, i: usize, delta: i64) -> Result<()> {
        self.diffs.update(i, delta)
    }

    /// Adds `delta` to the single entry `Y[i]`.
    pub fn point_add(&mut self, i: usize, delta: i64) -> Result<()> {
        self.suffix_add(i, delta)?;
        if i < self.len() {
            self.suffix_add(i + 1, -delta)?;
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<i64> {
        (1..=self.len()).map(|i| self.get(i).unwrap()).collect()
    }
}

/// Signed integers with prefix sums, positive-threshold search and unit updates.
///
/// Alongside the prefix sums `Y[i] = Z[1] + ... + Z[i]` the structure keeps
/// the record string `I` (prefix maxima of `Y`, with `Y[0] = 0` as an
/// implicit record), the gaps `Z'` between successive record values, and a
/// compressed distance array `D̂` that is zero exactly where the distance
/// `Y[prev record] - Y[i]` is zero. A threshold search reduces to a search on
/// the gaps followed by `select` on `I`.
#[derive(Clone, Debug)]
pub struct SearchableSignedSums {
    base: SmallSignedPrefixSums,
    records: u64,
    gaps: SmallNonNegSums,
    dhat: PackedBytes,
    alpha: usize,
}

impl SearchableSignedSums {
    pub fn from_slice(values: &[i64]) -> Result<Self> {
        let base = SmallSignedPrefixSums::from_slice(values)?;
        let k = base.len();
        let mut records = 0u64;
        let mut gaps = SmallNonNegSums::new(MAX_ENTRIES);
        let mut dhat = PackedBytes::default();
        let mut best = 0i64;
        for i in 1..=k {
            let y = base.sum(i)?;
            if y > best {
                records |= 1 << (i - 1);
                gaps.push((y - best) as u64)?;
                best = y;
            }
            dhat.set(i - 1, (best - y).min(k as i64) as u8);
        }
        Ok(Self { base, records, gaps, dhat, alpha: 1 })
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn sum(&self, i: usize) -> Result<i64> {
        self.base.sum(i)
    }

    pub fn get(&self, i: usize) -> Result<i64> {
        self.base.get(i)
    }

    /// Minimum `i` with `sum(i) >= d`; only positive thresholds are supported.
    pub fn search(&self, d: i64) -> Result<Option<usize>> {
        let Some(r) = self.gaps.search(d)? else {
            return Ok(None);
        };
        Ok(bits::select_in_word(self.records, (r - 1) as u32).map(|b| b as usize + 1))
    }

    /// `Z[i] += delta` for `delta` in {-1, +1}.
    pub fn update(&mut self, i: usize, delta: i64) -> Result<()> {
        if delta != 1 && delta != -1 {
            return Err(PartialSumsError::BadDelta(delta));
        }
        let k = self.len();
        check_index(i, k)?;
        self.base.update(i, delta)?;

        let j = bits::next1(self.records, i).unwrap_or(k + 1);
        let r = bits::rank1(self.records, j.min(k)) + usize::from(j > k);
        // r == gaps.len() + 1 addresses the virtual infinite gap past the last record
        let real = r <= self.gaps.len();
        if real {
            self.gaps.update(r, delta)?;
        }

        if delta == 1 && i < j {
            let l = self.dhat.first_zero(i - 1, k).map_or(k + 1, |z| z + 1);
            self.dhat.dec(i - 1, l - 1);
            if l != j {
                self.records |= 1 << (l - 1);
                if real {
                    self.gaps.divide(r, 1)?;
                } else {
                    self.gaps.push(1)?;
                }
            }
        }
        if delta == -1 {
            if i < j {
                self.dhat.saturating_inc(i - 1, j - 1, k as u8);
            }
            // i == j can also tie the record with its predecessor
            if real && self.gaps.get(r)? == 0 {
                self.records &= !(1 << (j - 1));
                if r < self.gaps.len() {
                    self.gaps.merge(r)?;
                } else {
                    self.gaps.pop();
                }
            }
        }

        let a = self.alpha;
        let exact = self.distance(a)?;
        self.dhat.set(a - 1, exact.min(k as i64) as u8);
        self.alpha = if a < k { a + 1 } else { 1 };
        Ok(())
    }

    /// `Y[prev record] - Y[i]`.
    fn distance(&self, i: usize) -> Result<i64> {
        let p = bits::prev1(self.records, i).unwrap_or(0);
        Ok(self.base.sum(p)? - self.base.sum(i)?)
    }

    pub fn values(&self) -> Vec<i64> {
        self.base.values()
    }

    /// The record string `I[1..=k]`.
    pub fn records(&self) -> Vec<bool> {
        (0..self.len()).map(|b| self.records >> b & 1 == 1).collect()
    }

    /// The gap array `Z'`.
    pub fn gaps(&self) -> &[u64] {
        self.gaps.as_slice()
    }

    /// The exact distance array `D` derived from the current prefix sums.
    pub fn distances(&self) -> Vec<i64> {
        (1..=self.len()).map(|i| self.distance(i).unwrap()).collect()
    }

    /// The maintained compressed distance array `D̂`.
    pub fn compressed_distances(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.dhat.get(i)).collect()
    }

    pub fn heap_bits(&self) -> usize {
        64 * (self.base.prefix.capacity() + self.gaps.entries.capacity()) + 64 * 8 + 64 + 64
    }
}

impl PartialEq for SearchableSignedSums {
    /// Logical equality: same entries, records and gaps. `D̂` and the repair
    /// cursor depend on update history and are not compared.
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.records == other.records && self.gaps == other.gaps
    }
}

impl SmallNonNegSums {
    pub fn heap_bits(&self) -> usize {
        64 * self.entries.capacity()
    }
}

impl SmallSignedPrefixSums {
    pub fn heap_bits(&self) -> usize {
        64 * self.prefix.capacity()
    }
}

impl RangeAddArray {
    pub fn heap_bits(&self) -> usize {
        self.diffs.heap_bits()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // The worked example: Z and its derived arrays before and after update(2, +1).
    const Z: [i64; 9] = [2, -2, -1, 3, -1, 1, 1, -3, 5];

    fn nn(values: &[u64]) -> SmallNonNegSums {
        SmallNonNegSums::from_slice(values, 16).unwrap()
    }

    #[test]
    fn nn_sum_examples() {
        assert_eq!(nn(&[2, 1, 2]).sum(2), Ok(3));
        assert_eq!(nn(&[2, 1, 2]).sum(0), Ok(0));
        assert_eq!(nn(&[3, 0, 4]).sum(3), Ok(7));
        assert!(nn(&[3, 0, 4]).sum(4).is_err());
    }

    #[test]
    fn nn_search_examples() {
        let s = nn(&[2, 1, 2]);
        assert_eq!(s.search(3), Ok(Some(2)));
        assert_eq!(s.search(6), Ok(None));
        assert_eq!(s.search(1), Ok(Some(1)));
        assert_eq!(s.search(0), Err(PartialSumsError::NonPositiveThreshold(0)));
    }

    #[test]
    fn nn_update_examples() {
        let mut s = nn(&[2, 1, 2]);
        s.update(2, 1).unwrap();
        assert_eq!(s.as_slice(), &[2, 2, 2]);
        let mut s = nn(&[2, 1, 2]);
        s.update(3, -2).unwrap();
        assert_eq!(s.as_slice(), &[2, 1, 0]);
        let mut s = nn(&[2, 1, 2]);
        assert_eq!(s.update(1, -3), Err(PartialSumsError::NegativeEntry { index: 1 }));
        assert_eq!(s.as_slice(), &[2, 1, 2]);
    }

    #[test]
    fn nn_merge_divide_examples() {
        let mut s = nn(&[2, 1, 1, 2]);
        s.merge(2).unwrap();
        assert_eq!(s.as_slice(), &[2, 2, 2]);
        assert!(nn(&[5]).merge(1).is_err());
        let mut s = nn(&[0, 7]);
        s.merge(1).unwrap();
        assert_eq!(s.as_slice(), &[7]);

        let mut s = nn(&[2, 2, 2]);
        s.divide(2, 1).unwrap();
        assert_eq!(s.as_slice(), &[2, 1, 1, 2]);
        let mut s = nn(&[4]);
        s.divide(1, 0).unwrap();
        assert_eq!(s.as_slice(), &[0, 4]);
        let mut s = nn(&[4]);
        s.divide(1, 4).unwrap();
        assert_eq!(s.as_slice(), &[4, 0]);
        assert!(nn(&[4]).divide(1, 5).is_err());
        let mut full = SmallNonNegSums::from_slice(&[1, 1], 2).unwrap();
        assert_eq!(full.divide(1, 0), Err(PartialSumsError::CapacityExceeded { cap: 2 }));
    }

    #[test]
    fn signed_prefix_examples() {
        let mut s = SmallSignedPrefixSums::from_slice(&Z).unwrap();
        assert_eq!(s.sum(3), Ok(-1));
        assert_eq!(s.sum(0), Ok(0));
        s.update(2, 1).unwrap();
        assert_eq!(s.sum(9), Ok(6));
        assert!(s.sum(10).is_err());
    }

    #[test]
    fn range_add_examples() {
        let mut a = RangeAddArray::from_values(&[0, 0, 0]).unwrap();
        a.suffix_add(2, 5).unwrap();
        assert_eq!(a.values(), vec![0, 5, 5]);

        let mut a = RangeAddArray::from_values(&[0, 0, 0]).unwrap();
        a.suffix_add(1, -1).unwrap();
        a.suffix_add(3, 1).unwrap();
        assert_eq!(a.values(), vec![-1, -1, 0]);

        assert_eq!(RangeAddArray::from_values(&[4]).unwrap().get(1), Ok(4));
        assert!(a.get(4).is_err());
    }

    #[test]
    fn searchable_sums_and_search() {
        let s = SearchableSignedSums::from_slice(&Z).unwrap();
        assert_eq!(s.sum(7), Ok(3));
        assert_eq!(s.sum(0), Ok(0));
        assert_eq!(s.sum(9), Ok(5));
        // Y = [2, 0, -1, 2, 1, 2, 3, 0, 5]
        assert_eq!(s.search(3), Ok(Some(7)));
        assert_eq!(s.search(1), Ok(Some(1)));
        assert_eq!(s.search(6), Ok(None));
        assert_eq!(s.search(0), Err(PartialSumsError::NonPositiveThreshold(0)));
    }

    #[test]
    fn searchable_worked_example() {
        let mut s = SearchableSignedSums::from_slice(&Z).unwrap();
        let bits = |v: &[u8]| v.iter().map(|&b| b == 1).collect::<Vec<_>>();
        assert_eq!(s.records(), bits(&[1, 0, 0, 0, 0, 0, 1, 0, 1]));
        assert_eq!(s.distances(), vec![0, 2, 3, 0, 1, 0, 0, 3, 0]);
        assert_eq!(s.gaps(), &[2, 1, 2]);

        s.update(2, 1).unwrap();
        assert_eq!(s.records(), bits(&[1, 0, 0, 1, 0, 0, 1, 0, 1]));
        assert_eq!(s.distances(), vec![0, 1, 2, 0, 1, 0, 0, 3, 0]);
        assert_eq!(s.gaps(), &[2, 1, 1, 2]);
        // The printed example lists Y[1] = -1 after the update; Z[1] is
        // unchanged, so the prefix sum stays 2.
        assert_eq!(s.sum(1), Ok(2));
        assert_eq!((1..=9).map(|i| s.sum(i).unwrap()).collect::<Vec<_>>(), vec![2, 1, 0, 3, 2, 3, 4, 1, 6]);

        s.update(2, -1).unwrap();
        assert_eq!(s, SearchableSignedSums::from_slice(&Z).unwrap());
        assert_eq!(s.distances(), vec![0, 2, 3, 0, 1, 0, 0, 3, 0]);
    }

    #[test]
    fn searchable_rejects_bad_delta() {
        let mut s = SearchableSignedSums::from_slice(&Z).unwrap();
        assert_eq!(s.update(1, 2), Err(PartialSumsError::BadDelta(2)));
        assert_eq!(s.update(1, 0), Err(PartialSumsError::BadDelta(0)));
        assert!(s.update(10, 1).is_err());
    }

    #[test]
    fn record_at_update_index_can_vanish() {
        // Y = [1]; decrementing ties the only record with Y[0] = 0.
        let mut s = SearchableSignedSums::from_slice(&[1]).unwrap();
        s.update(1, -1).unwrap();
        assert_eq!(s.records(), vec![false]);
        assert!(s.gaps().is_empty());
        assert_eq!(s.search(1), Ok(None));
        s.update(1, 1).unwrap();
        assert_eq!(s.records(), vec![true]);
        assert_eq!(s.gaps(), &[1]);
    }

    fn scan_search(y: &[i64], d: i64) -> Option<usize> {
        y.iter().position(|&v| v >= d).map(|p| p + 1)
    }

    fn prefix(z: &[i64]) -> Vec<i64> {
        z.iter()
            .scan(0, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
            .collect()
    }

    fn check_against_scratch(s: &SearchableSignedSums) {
        let fresh = SearchableSignedSums::from_slice(&s.values()).unwrap();
        assert_eq!(s.records(), fresh.records());
        assert_eq!(s.gaps(), fresh.gaps());
        let k = s.len();
        for (i, (&dh, &d)) in s.compressed_distances().iter().zip(s.distances().iter()).enumerate() {
            assert_eq!(dh == 0, d == 0, "D̂/D zero mismatch at {}", i + 1);
            assert!(dh as usize <= k);
        }
    }

    proptest! {
        #[test]
        fn searchable_random_updates(
            init in prop::collection::vec(-3i64..=3, 1..=64),
            ops in prop::collection::vec((0usize..64, any::<bool>()), 0..200),
        ) {
            let mut s = SearchableSignedSums::from_slice(&init).unwrap();
            let k = init.len();
            for (i, up) in ops {
                let i = i % k + 1;
                s.update(i, if up { 1 } else { -1 }).unwrap();
                check_against_scratch(&s);
                let y = prefix(&s.values());
                let top = y.iter().copied().max().unwrap_or(0).max(0);
                let mut last = 0;
                for d in 1..=top + 1 {
                    let got = s.search(d).unwrap();
                    prop_assert_eq!(got, scan_search(&y, d));
                    if let Some(g) = got {
                        prop_assert!(g >= last);
                        last = g;
                    }
                }
            }
        }

        #[test]
        fn nn_matches_scan(
            init in prop::collection::vec(0u64..10, 1..=20),
            d in 1i64..120,
        ) {
            let s = SmallNonNegSums::from_slice(&init, 64).unwrap();
            let y: Vec<i64> = prefix(&init.iter().map(|&v| v as i64).collect::<Vec<_>>());
            prop_assert_eq!(s.search(d).unwrap(), scan_search(&y, d));
            for i in 0..=init.len() {
                prop_assert_eq!(s.sum(i).unwrap() as i64, if i == 0 { 0 } else { y[i - 1] });
            }
        }

        #[test]
        fn merge_then_divide_restores(
            init in prop::collection::vec(0u64..100, 2..=20),
            at in 0usize..20,
        ) {
            let i = at % (init.len() - 1) + 1;
            let mut s = SmallNonNegSums::from_slice(&init, 64).unwrap();
            s.merge(i).unwrap();
            s.divide(i, init[i - 1]).unwrap();
            prop_assert_eq!(s.as_slice(), &init[..]);
        }

        #[test]
        fn range_add_matches_history(
            init in prop::collection::vec(-50i64..50, 1..=30),
            ops in prop::collection::vec((0usize..30, -5i64..=5), 0..40),
        ) {
            let mut a = RangeAddArray::from_values(&init).unwrap();
            let mut want = init.clone();
            for (i, delta) in ops {
                let i = i % init.len() + 1;
                a.suffix_add(i, delta).unwrap();
                for v in &mut want[i - 1..] { *v += delta; }
            }
            prop_assert_eq!(a.values(), want);
        }
    }
}
