//! Fixed-capacity bitset over source-packet indices.

use std::fmt;

const WORDS: usize = 4;

/// Largest frame size a [`PacketSet`] can index.
pub const MAX_PACKETS: usize = WORDS * 64;

/// A set of source-packet indices `0..MAX_PACKETS`.
///
/// Used for Has sets, Wants sets, vertex packet sets and the supports of
/// coded combinations alike.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PacketSet {
    words: [u64; WORDS],
}

impl PacketSet {
    pub const fn new() -> Self {
        Self { words: [0; WORDS] }
    }

    /// The set `{0, 1, ..., n-1}`.
    ///
    /// # Panics
    /// If `n > MAX_PACKETS`.
    pub fn full(n: usize) -> Self {
        assert!(
            n <= MAX_PACKETS,
            "frame size {n} exceeds capacity {MAX_PACKETS}"
        );
        let mut s = Self::new();
        for (w, word) in s.words.iter_mut().enumerate() {
            let lo = w * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        s
    }

    pub fn singleton(p: usize) -> Self {
        let mut s = Self::new();
        s.insert(p);
        s
    }

    /// # Panics
    /// If `p >= MAX_PACKETS`.
    #[inline]
    pub fn insert(&mut self, p: usize) -> bool {
        assert!(
            p < MAX_PACKETS,
            "packet index {p} exceeds capacity {MAX_PACKETS}"
        );
        let (w, b) = (p / 64, p % 64);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    #[inline]
    pub fn remove(&mut self, p: usize) -> bool {
        if p >= MAX_PACKETS {
            return false;
        }
        let (w, b) = (p / 64, p % 64);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        was
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        p < MAX_PACKETS && self.words[p / 64] >> (p % 64) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    #[inline]
    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    #[inline]
    pub fn difference(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & !b)
    }

    #[inline]
    pub fn intersects(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    #[inline]
    pub fn is_subset(&self, other: &Self) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    #[inline]
    pub fn is_disjoint(&self, other: &Self) -> bool {
        !self.intersects(other)
    }

    /// `|self ∩ other|` without materializing the intersection.
    #[inline]
    pub fn intersection_len(&self, other: &Self) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    /// One past the largest member (0 for the empty set).
    pub fn upper_bound(&self) -> usize {
        for w in (0..WORDS).rev() {
            if self.words[w] != 0 {
                return w * 64 + 64 - self.words[w].leading_zeros() as usize;
            }
        }
        0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Iter {
        Iter {
            words: self.words,
            word: 0,
        }
    }

    #[inline]
    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        let mut words = [0; WORDS];
        for (i, w) in words.iter_mut().enumerate() {
            *w = f(self.words[i], other.words[i]);
        }
        Self { words }
    }
}

pub struct Iter {
    words: [u64; WORDS],
    word: usize,
}

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.word < WORDS {
            let w = self.words[self.word];
            if w != 0 {
                let b = w.trailing_zeros() as usize;
                self.words[self.word] &= w - 1;
                return Some(self.word * 64 + b);
            }
            self.word += 1;
        }
        None
    }
}

impl IntoIterator for &PacketSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

impl FromIterator<usize> for PacketSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = Self::new();
        for p in iter {
            s.insert(p);
        }
        s
    }
}

impl<const K: usize> From<[usize; K]> for PacketSet {
    fn from(ps: [usize; K]) -> Self {
        ps.into_iter().collect()
    }
}

impl fmt::Debug for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PacketSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn full_and_bounds() {
        assert_eq!(PacketSet::full(0).len(), 0);
        assert_eq!(PacketSet::full(30).len(), 30);
        assert_eq!(PacketSet::full(64).len(), 64);
        assert_eq!(PacketSet::full(MAX_PACKETS).len(), MAX_PACKETS);
        assert_eq!(PacketSet::full(70).upper_bound(), 70);
        assert_eq!(PacketSet::new().upper_bound(), 0);
    }

    #[test]
    fn display() {
        assert_eq!(PacketSet::from([2, 4, 8]).to_string(), "{2,4,8}");
        assert_eq!(PacketSet::new().to_string(), "{}");
    }

    #[test]
    #[should_panic]
    fn insert_out_of_capacity() {
        PacketSet::new().insert(MAX_PACKETS);
    }

    fn arb_set() -> impl Strategy<Value = BTreeSet<usize>> {
        proptest::collection::btree_set(0..MAX_PACKETS, 0..40)
    }

    proptest! {
        #[test]
        fn matches_btreeset(a in arb_set(), b in arb_set()) {
            let pa: PacketSet = a.iter().copied().collect();
            let pb: PacketSet = b.iter().copied().collect();
            let to_vec = |s: PacketSet| s.iter().collect::<Vec<_>>();
            prop_assert_eq!(to_vec(pa.union(&pb)), a.union(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(to_vec(pa.intersection(&pb)), a.intersection(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(to_vec(pa.difference(&pb)), a.difference(&b).copied().collect::<Vec<_>>());
            prop_assert_eq!(pa.is_subset(&pb), a.is_subset(&b));
            prop_assert_eq!(pa.intersects(&pb), !a.is_disjoint(&b));
            prop_assert_eq!(pa.intersection_len(&pb), a.intersection(&b).count());
            prop_assert_eq!(pa.len(), a.len());
            prop_assert_eq!(pa.upper_bound(), a.iter().next_back().map_or(0, |m| m + 1));
        }
    }
}
