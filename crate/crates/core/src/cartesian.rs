//! Balanced-parentheses encoding of a Cartesian tree over at most 64 values,
//! used for range arg-max / arg-min over the children of a min-max node.
//!
//! Values are pushed left to right on a monotone stack; every pop writes a
//! `0` and every push a `1`, and the remaining stack is closed at the end.
//! The result is a parentheses string with one open per entry, in which the
//! parent of an entry is the nearest entry to its left that beats it; it
//! determines the Cartesian tree of the values and vice versa. The best entry
//! of `a..=b` is the bottom-most survivor of the stack after pushing `b` among
//! the entries pushed since `a`, which is read off the excess profile between
//! the `a`-th and `b`-th opens.

use crate::partial_sums::MAX_ENTRIES;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    /// leftmost maximum wins
    Max,
    /// leftmost minimum wins
    Min,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartesianBp {
    bits: u128,
    len: usize,
    order: Order,
}

impl CartesianBp {
    pub fn build(values: &[i64], order: Order) -> Self {
        assert!(values.len() <= MAX_ENTRIES);
        let mut stack: Vec<i64> = Vec::with_capacity(values.len());
        let mut bits = 0u128;
        let mut pos = 0;
        for &v in values {
            while let Some(&top) = stack.last() {
                let beaten = match order {
                    Order::Max => top < v,
                    Order::Min => top > v,
                };
                if !beaten {
                    break;
                }
                stack.pop();
                pos += 1;
            }
            stack.push(v);
            bits |= 1 << pos;
            pos += 1;
        }
        // closes for the entries left on the stack
        debug_assert_eq!(pos + stack.len(), 2 * values.len());
        Self { bits, len: values.len(), order }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// The parentheses string, `1` for open.
    pub fn to_bits(&self) -> Vec<bool> {
        (0..2 * self.len).map(|p| self.bits >> p & 1 == 1).collect()
    }

    /// Index (1-based) of the best entry in `a..=b`, leftmost on ties.
    pub fn best(&self, a: usize, b: usize) -> usize {
        assert!(1 <= a && a <= b && b <= self.len, "bad range {a}..={b} over {}", self.len);
        let mut opens = 0;
        let mut excess = 0i64;
        let mut start_excess = 0;
        let mut low = i64::MAX;
        let mut low_pos = None;
        let mut p = 0;
        while opens < b {
            let open = self.bits >> p & 1 == 1;
            excess += if open { 1 } else { -1 };
            if open {
                opens += 1;
                if opens == a {
                    start_excess = excess;
                    p += 1;
                    continue;
                }
            }
            if opens >= a && excess <= low {
                low = excess;
                low_pos = Some(p);
            }
            p += 1;
        }
        match low_pos {
            Some(q) if low < start_excess => {
                // the entry pushed right after the last visit to the minimum
                (self.bits & ((1u128 << (q + 2)) - 1)).count_ones() as usize
            }
            _ => a,
        }
    }

    /// Parent of every entry in the encoded tree (`None` for the root),
    /// recovered from the parentheses string alone.
    pub fn decode_parents(&self) -> Vec<Option<usize>> {
        // the i-th open is entry i; its parent is the enclosing open
        let mut parents = vec![None; self.len];
        let mut stack: Vec<usize> = Vec::new();
        let mut entry = 0;
        for bit in self.to_bits() {
            if bit {
                entry += 1;
                parents[entry - 1] = stack.last().copied();
                stack.push(entry);
            } else {
                stack.pop();
            }
        }
        parents
    }

    pub fn heap_bits(&self) -> usize {
        128
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(values: &[i64], a: usize, b: usize, order: Order) -> usize {
        let mut best = a;
        for i in a..=b {
            let better = match order {
                Order::Max => values[i - 1] > values[best - 1],
                Order::Min => values[i - 1] < values[best - 1],
            };
            if better {
                best = i;
            }
        }
        best
    }

    #[test]
    fn small_examples() {
        let v = [1, 0, 0, 2];
        let min = CartesianBp::build(&v, Order::Min);
        assert_eq!(min.best(1, 4), 2);
        assert_eq!(min.best(3, 4), 3);
        assert_eq!(min.best(1, 1), 1);
        let max = CartesianBp::build(&v, Order::Max);
        assert_eq!(max.best(1, 3), 1);
        assert_eq!(max.best(1, 4), 4);
        assert_eq!(max.best(2, 3), 2);
        assert_eq!(max.to_bits().len(), 8);
    }

    #[test]
    fn decoded_tree_has_heap_order() {
        let v = [3, 1, 4, 1, 5, 9, 2, 6];
        let cart = CartesianBp::build(&v, Order::Max);
        let parents = cart.decode_parents();
        // top-level entries are the left-to-right maxima
        let roots: Vec<usize> = (1..=v.len()).filter(|&i| parents[i - 1].is_none()).collect();
        assert_eq!(roots, vec![1, 3, 5, 6]);
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                assert!(v[p - 1] >= v[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn best_matches_scan(values in prop::collection::vec(-4i64..4, 1..=64), a in any::<usize>(), b in any::<usize>()) {
            let n = values.len();
            let (a, b) = { let x = a % n + 1; let y = b % n + 1; (x.min(y), x.max(y)) };
            for order in [Order::Max, Order::Min] {
                let cart = CartesianBp::build(&values, order);
                prop_assert_eq!(cart.best(a, b), naive(&values, a, b, order));
                // every decoded parent beats (or ties, from the left) its child
                for (i, p) in cart.decode_parents().iter().enumerate() {
                    if let Some(p) = *p {
                        let (pv, cv) = (values[p - 1], values[i]);
                        match order {
                            Order::Max => prop_assert!(pv > cv || (pv == cv && p < i + 1)),
                            Order::Min => prop_assert!(pv < cv || (pv == cv && p < i + 1)),
                        }
                    }
                }
            }
        }
    }
}
