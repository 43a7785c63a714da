//! Unshuffle enumeration and multiset arrangements.
//!
//! An unshuffle for block sizes `(k1, .., kr)` is a permutation of
//! `0..k1+..+kr` that is increasing inside each block. Permutations are
//! returned in the same array convention the sign kernel uses: entry `i` is
//! the original index of the element at output position `i`.

/// One unshuffle: the permutation array, blocks concatenated in order.
pub type Unshuffle = Vec<usize>;

/// All `(k1, .., kr)`-unshuffles of `0..Σki`, in lexicographic order of the
/// permutation array.
pub fn unshuffles(block_sizes: &[usize]) -> Vec<Unshuffle> {
    let total: usize = block_sizes.iter().sum();
    let mut out = Vec::new();
    let pool: Vec<usize> = (0..total).collect();
    split(&pool, block_sizes, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// The variant with repeated-block symmetry removed: whenever two adjacent
/// blocks have equal size, the first element of the earlier block is
/// required to be smaller than the first element of the later one.
pub fn strict_unshuffles(block_sizes: &[usize]) -> Vec<Unshuffle> {
    let all = unshuffles(block_sizes);
    all.into_iter()
        .filter(|perm| {
            let mut offset = 0;
            for w in block_sizes.windows(2) {
                let (k, k2) = (w[0], w[1]);
                if k == k2 && k > 0 && perm[offset] > perm[offset + k] {
                    return false;
                }
                offset += k;
            }
            true
        })
        .collect()
}

fn split(
    pool: &[usize],
    blocks: &[usize],
    acc: &mut Vec<usize>,
    out: &mut Vec<Unshuffle>,
) {
    let Some((&k, rest_blocks)) = blocks.split_first() else {
        out.push(acc.clone());
        return;
    };
    // Choose k of the pool (ascending — increasing inside the block).
    let mut choice = Vec::with_capacity(k);
    choose(pool, k, 0, &mut choice, &mut |chosen: &[usize]| {
        let rest: Vec<usize> = pool.iter().copied().filter(|i| !chosen.contains(i)).collect();
        let len_before = acc.len();
        acc.extend_from_slice(chosen);
        split(&rest, rest_blocks, acc, out);
        acc.truncate(len_before);
    });
}

fn choose(
    pool: &[usize],
    k: usize,
    start: usize,
    acc: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if acc.len() == k {
        f(acc);
        return;
    }
    for i in start..pool.len() {
        acc.push(pool[i]);
        choose(pool, k, i + 1, acc, f);
        acc.pop();
    }
}

/// All distinct arrangements of a multiset, in lexicographic order.
///
/// The uniform average over all `n!` labelled arrangements equals the
/// uniform average over these: each distinct arrangement absorbs exactly
/// `Π mult_i!` labelled ones.
pub fn multiset_arrangements<T: Clone + Ord>(word: &[T]) -> Vec<Vec<T>> {
    let mut current: Vec<T> = word.to_vec();
    current.sort();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}
