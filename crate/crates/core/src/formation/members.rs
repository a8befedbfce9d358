use std::fmt;

use crate::network::{NodeId, MAX_SUS};

/// A set of SU ids stored as a bitmask; bit `i - 1` stands for SU `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct MemberSet(u64);

impl MemberSet {
    pub const EMPTY: MemberSet = MemberSet(0);

    pub fn from_bits(bits: u64) -> Self {
        MemberSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(id: NodeId) -> Self {
        assert!((1..=MAX_SUS).contains(&id), "node id {id} out of range");
        MemberSet(1 << (id - 1))
    }

    /// All SUs `1..=n`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_SUS);
        if n == MAX_SUS {
            MemberSet(u64::MAX)
        } else {
            MemberSet((1u64 << n) - 1)
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, id: NodeId) -> bool {
        (1..=MAX_SUS).contains(&id) && self.0 & (1 << (id - 1)) != 0
    }

    pub fn insert(&mut self, id: NodeId) {
        *self = self.union(MemberSet::singleton(id));
    }

    pub fn union(self, other: MemberSet) -> Self {
        MemberSet(self.0 | other.0)
    }

    pub fn intersection(self, other: MemberSet) -> Self {
        MemberSet(self.0 & other.0)
    }

    pub fn difference(self, other: MemberSet) -> Self {
        MemberSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: MemberSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: MemberSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Lowest member id, if any.
    pub fn min_id(self) -> Option<NodeId> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Member ids in ascending order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    pub fn to_vec(self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl FromIterator<NodeId> for MemberSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut set = MemberSet::EMPTY;
        for id in iter {
            set.insert(id);
        }
        set
    }
}

impl IntoIterator for MemberSet {
    type Item = NodeId;
    type IntoIter = Members;

    fn into_iter(self) -> Members {
        self.iter()
    }
}

#[derive(Debug, Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz as usize + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

/// Formats as `[1,2,5]`.
impl fmt::Display for MemberSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("]")
    }
}
