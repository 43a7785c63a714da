//! Canonical multi-indices for words of generators of a single parity.
//!
//! `Antisymmetric` indexes odd generators (a repeated index kills the word,
//! sorting produces the permutation sign through the Koszul kernel);
//! `Symmetric` indexes even generators (a plain multiset).

use super::koszul::{koszul_sign, SignFlavor};
use super::rat::Rat;
use num::One;

/// Parity class of the generators a multi-index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKind {
    Antisymmetric,
    Symmetric,
}

/// A sorted multi-index; antisymmetric ones are strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    kind: IndexKind,
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn empty(kind: IndexKind) -> Self {
        MultiIndex { kind, entries: Vec::new() }
    }

    /// Canonicalise `entries`: sort them, returning the sign of the
    /// reordering, or `None` when an antisymmetric word repeats an index.
    pub fn canonicalize(kind: IndexKind, entries: Vec<u32>) -> Option<(MultiIndex, Rat)> {
        match kind {
            IndexKind::Symmetric => {
                let mut e = entries;
                e.sort_unstable();
                Some((MultiIndex { kind, entries: e }, Rat::one()))
            }
            IndexKind::Antisymmetric => {
                let n = entries.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&i| entries[i]);
                for w in order.windows(2) {
                    if entries[w[0]] == entries[w[1]] {
                        return None;
                    }
                }
                // `order` is exactly the permutation array the sign kernel
                // expects: position i of the sorted word holds original
                // index order[i]. All generators are odd (degree 1).
                let sign = koszul_sign(SignFlavor::Graded, &order, &vec![1; n]);
                let entries = order.iter().map(|&i| entries[i]).collect();
                Some((MultiIndex { kind, entries }, sign))
            }
        }
    }

    /// Concatenate two multi-indices of the same kind and canonicalise.
    pub fn product(&self, other: &MultiIndex) -> Option<(MultiIndex, Rat)> {
        assert_eq!(self.kind, other.kind, "multi-index kind mismatch");
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        MultiIndex::canonicalize(self.kind, entries)
    }

    pub fn kind(&self) -> IndexKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }
}
