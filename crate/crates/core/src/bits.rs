//! Word-level bit tricks shared by the partial-sums structures and the block kernel.
//!
//! Bit strings indexed from 1 are stored with index `i` at bit `i - 1` of the word.

const ONES_STEP_8: u64 = 0x0101_0101_0101_0101;
const MSBS_STEP_8: u64 = 0x8080_8080_8080_8080;

/// Position (0-based) of the `rank`-th set bit (0-based rank) of `word`.
///
/// Byte-wise popcount prefix sums locate the byte, a short loop finishes
/// inside it.
#[inline]
pub fn select_in_word(word: u64, rank: u32) -> Option<u32> {
    if rank >= word.count_ones() {
        return None;
    }
    // per-byte popcounts
    let mut s = word - ((word >> 1) & 0x5555_5555_5555_5555);
    s = (s & 0x3333_3333_3333_3333) + ((s >> 2) & 0x3333_3333_3333_3333);
    s = (s + (s >> 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    // inclusive byte prefix sums
    let prefix = s.wrapping_mul(ONES_STEP_8);
    let mut byte = 0u32;
    while ((prefix >> (8 * byte)) & 0xFF) as u32 <= rank {
        byte += 1;
    }
    let before = if byte == 0 {
        0
    } else {
        ((prefix >> (8 * (byte - 1))) & 0xFF) as u32
    };
    let mut b = (word >> (8 * byte)) & 0xFF;
    let mut left = rank - before;
    while left > 0 {
        b &= b - 1;
        left -= 1;
    }
    Some(8 * byte + b.trailing_zeros())
}

/// Mask with bits `lo..hi` (0-based, half open) set.
#[inline]
pub fn range_mask(lo: u32, hi: u32) -> u64 {
    debug_assert!(lo <= hi && hi <= 64);
    if lo == hi {
        return 0;
    }
    let upper = if hi == 64 { u64::MAX } else { (1u64 << hi) - 1 };
    upper & !((1u64 << lo) - 1)
}

/// Number of set bits among indices `1..=i` of a 1-based bit string.
#[inline]
pub fn rank1(word: u64, i: usize) -> usize {
    debug_assert!(i <= 64);
    (word & range_mask(0, i as u32)).count_ones() as usize
}

/// Smallest index `>= i` whose bit is set, 1-based.
#[inline]
pub fn next1(word: u64, i: usize) -> Option<usize> {
    if i > 64 {
        return None;
    }
    let w = word & !range_mask(0, (i - 1) as u32);
    (w != 0).then(|| w.trailing_zeros() as usize + 1)
}

/// Largest index `<= i` whose bit is set, 1-based.
#[inline]
pub fn prev1(word: u64, i: usize) -> Option<usize> {
    let w = word & range_mask(0, i.min(64) as u32);
    (w != 0).then(|| 64 - w.leading_zeros() as usize)
}

/// Up to 64 byte-wide counters packed in eight words, with word-parallel
/// range increments and decrements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PackedBytes {
    words: [u64; 8],
}

impl PackedBytes {
    pub fn get(&self, i: usize) -> u8 {
        (self.words[i / 8] >> (8 * (i % 8))) as u8
    }

    pub fn set(&mut self, i: usize, v: u8) {
        let shift = 8 * (i % 8);
        let w = &mut self.words[i / 8];
        *w = (*w & !(0xFFu64 << shift)) | ((v as u64) << shift);
    }

    fn lane_ones(word: usize, lo: usize, hi: usize) -> u64 {
        // 0x01 in every byte lane of `word` whose global index is in lo..hi
        let first = word * 8;
        let a = lo.max(first).min(first + 8) - first;
        let b = hi.max(first).min(first + 8) - first;
        if a >= b {
            return 0;
        }
        ONES_STEP_8 & range_mask(8 * a as u32, 8 * b as u32)
    }

    /// `x <- min(cap, x + 1)` on lanes `lo..hi`. Requires `cap < 128`.
    pub fn saturating_inc(&mut self, lo: usize, hi: usize, cap: u8) {
        debug_assert!(cap < 128);
        let target = ONES_STEP_8 * (cap as u64 + 1);
        for w in lo / 8..hi.div_ceil(8).min(8) {
            let inc = Self::lane_ones(w, lo, hi);
            if inc == 0 {
                continue;
            }
            let v = self.words[w] + inc;
            // lanes that overshot to cap + 1
            let x = v ^ target;
            let zero = !(((x & !MSBS_STEP_8) + !MSBS_STEP_8) | x | !MSBS_STEP_8);
            self.words[w] = v - ((zero >> 7) & inc);
        }
    }

    /// `x <- x - 1` on lanes `lo..hi`. Every lane in range must be positive.
    pub fn dec(&mut self, lo: usize, hi: usize) {
        for w in lo / 8..hi.div_ceil(8).min(8) {
            let dec = Self::lane_ones(w, lo, hi);
            debug_assert_eq!(
                {
                    let v = self.words[w];
                    let zero = !(((v & !MSBS_STEP_8) + !MSBS_STEP_8) | v | !MSBS_STEP_8);
                    (zero >> 7) & dec
                },
                0,
                "decrement of a zero lane"
            );
            self.words[w] -= dec;
        }
    }

    /// First lane in `lo..hi` holding zero.
    pub fn first_zero(&self, lo: usize, hi: usize) -> Option<usize> {
        for w in lo / 8..hi.div_ceil(8).min(8) {
            let v = self.words[w];
            let zero = !(((v & !MSBS_STEP_8) + !MSBS_STEP_8) | v | !MSBS_STEP_8);
            let hits = zero & (Self::lane_ones(w, lo, hi) << 7);
            if hits != 0 {
                return Some(w * 8 + hits.trailing_zeros() as usize / 8);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_select(word: u64, rank: u32) -> Option<u32> {
        (0..64).filter(|b| word >> b & 1 == 1).nth(rank as usize)
    }

    #[test]
    fn select_small_cases() {
        assert_eq!(select_in_word(0b1011, 0), Some(0));
        assert_eq!(select_in_word(0b1011, 1), Some(1));
        assert_eq!(select_in_word(0b1011, 2), Some(3));
        assert_eq!(select_in_word(0b1011, 3), None);
        assert_eq!(select_in_word(u64::MAX, 63), Some(63));
        assert_eq!(select_in_word(1 << 63, 0), Some(63));
    }

    #[test]
    fn next_prev_rank() {
        let w = 0b1000001u64; // indices 1 and 7
        assert_eq!(next1(w, 1), Some(1));
        assert_eq!(next1(w, 2), Some(7));
        assert_eq!(next1(w, 8), None);
        assert_eq!(prev1(w, 6), Some(1));
        assert_eq!(prev1(w, 7), Some(7));
        assert_eq!(prev1(w, 0), None);
        assert_eq!(rank1(w, 6), 1);
        assert_eq!(rank1(w, 7), 2);
        assert_eq!(next1(u64::MAX, 64), Some(64));
        assert_eq!(next1(u64::MAX, 65), None);
    }

    #[test]
    fn packed_saturation() {
        let mut p = PackedBytes::default();
        for i in 0..20 {
            p.set(i, (i % 5) as u8);
        }
        p.saturating_inc(2, 17, 4);
        for i in 0..20 {
            let v = (i % 5) as u8;
            let want = if (2..17).contains(&i) { (v + 1).min(4) } else { v };
            assert_eq!(p.get(i), want, "lane {i}");
        }
        p.set(9, 0);
        assert_eq!(p.first_zero(6, 20), Some(9));
        assert_eq!(p.first_zero(10, 12), None);
    }

    proptest! {
        #[test]
        fn select_matches_naive(word in any::<u64>(), rank in 0u32..64) {
            prop_assert_eq!(select_in_word(word, rank), naive_select(word, rank));
        }

        #[test]
        fn packed_ops_match_naive(
            init in prop::collection::vec(0u8..=16, 64),
            lo in 0usize..64, len in 0usize..64, cap in 16u8..64,
        ) {
            let hi = (lo + len).min(64);
            let mut p = PackedBytes::default();
            for (i, &v) in init.iter().enumerate() { p.set(i, v); }
            p.saturating_inc(lo, hi, cap);
            for i in 0..64 {
                let want = if (lo..hi).contains(&i) { (init[i] + 1).min(cap) } else { init[i] };
                prop_assert_eq!(p.get(i), want);
            }
            let naive_zero = (lo..hi).find(|&i| p.get(i) == 0);
            prop_assert_eq!(p.first_zero(lo, hi), naive_zero);
        }
    }
}
