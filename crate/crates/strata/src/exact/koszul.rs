//! The sign kernel. Every graded sign in the crate comes from here.
//!
//! A permutation is given as an array `perm` with `perm[i]` = the original
//! position of the element now sitting at output position `i`. The sign of
//! the permutation acting on homogeneous elements of the given degrees is
//! the product over inversion pairs of the adjacent-swap factor, which is
//! the only place a graded swap turns into a sign.

use super::rat::Rat;
use crate::fault::{armed, Fault};
use num::One;

/// Which sign rule a reordering uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignFlavor {
    /// Graded-commutative rule: swapping degrees `a`, `b` costs `(-1)^{ab}`.
    Graded,
    /// Alternating rule: swapping degrees `a`, `b` costs `-(-1)^{ab}`.
    /// This is the graded sign times the ordinary permutation sign.
    Wedge,
}

/// The factor produced by transposing two adjacent elements.
pub fn swap_sign(flavor: SignFlavor, deg_left: i64, deg_right: i64) -> Rat {
    let both_odd = deg_left.rem_euclid(2) == 1 && deg_right.rem_euclid(2) == 1;
    let graded = if both_odd && !armed(Fault::KoszulOddSwap) {
        -Rat::one()
    } else {
        Rat::one()
    };
    match flavor {
        SignFlavor::Graded => graded,
        SignFlavor::Wedge => -graded,
    }
}

/// Sign of `perm` acting on elements with the given degrees.
///
/// `perm[i]` is the original index of the element at output position `i`;
/// `degrees` is indexed by original position. Panics if `perm` is not a
/// permutation of `0..degrees.len()`.
pub fn koszul_sign(flavor: SignFlavor, perm: &[usize], degrees: &[i64]) -> Rat {
    assert_eq!(perm.len(), degrees.len(), "permutation/degree length mismatch");
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        assert!(p < perm.len() && !seen[p], "not a permutation: {perm:?}");
        seen[p] = true;
    }
    let mut sign = Rat::one();
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                // The pair (perm[j], perm[i]) was inverted, which takes one
                // adjacent transposition of exactly these two degrees more
                // than the identity, whatever route the sort takes.
                sign *= swap_sign(flavor, degrees[perm[j]], degrees[perm[i]]);
            }
        }
    }
    sign
}

/// Stable-sort `items` by `key`, accumulating the sign of the reordering.
///
/// Returns the sorted items and the sign. Ties keep their input order and
/// contribute no sign.
pub fn sort_with_sign<T, K: Ord>(
    flavor: SignFlavor,
    items: Vec<(T, i64)>,
    key: impl Fn(&T) -> K,
) -> (Vec<(T, i64)>, Rat) {
    // Insertion sort: item counts here are tuple arities (tiny).
    let mut out: Vec<(T, i64)> = Vec::with_capacity(items.len());
    let mut sign = Rat::one();
    for (item, deg) in items {
        let k = key(&item);
        // Insert after the last element with key <= k (stability).
        let mut pos = out.len();
        while pos > 0 && key(&out[pos - 1].0) > k {
            sign *= swap_sign(flavor, out[pos - 1].1, deg);
            pos -= 1;
        }
        out.insert(pos, (item, deg));
    }
    (out, sign)
}
