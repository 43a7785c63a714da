//! Transfer of product and bracket structure across contraction data.
//!
//! Given a contraction and a chain-level product (or Lie bracket) on the
//! big complex, a two-sided recursion produces the tower of higher
//! operations induced on the small complex together with the comparison
//! maps back into the big side, all evaluated exactly and memoised.
//! Extensions cover strict units, square-zero module coefficients, the
//! free graded-commutative enlargement of a split contraction, and a
//! perturb-then-transfer pipeline guarded by a filtration descent check.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::exact::{
    koszul_sign, minus_one_pow, ratq, sort_with_sign, unshuffles, BasisElem, Lin, SignFlavor,
};
use crate::fault::{armed, Fault};
use crate::homotopy::{
    check_filtration_descent, perturb, Complex, Contraction, DescentViolation, MapRef,
};
use crate::sh::{Flavor, OperationFamily, Sum2};

// ---- product transfer ----

/// Transfers an associative (or merely chain-level) product through a
/// contraction, producing the induced tower of multilinear operations on
/// the small complex.
///
/// The arity-one operation is the small differential; every higher
/// operation is the projection of a tree sum built from the comparison
/// maps, which in turn arise by feeding the same tree sum through the
/// homotopy.  All values are memoised per input tuple.
pub struct ProductTransfer<B: BasisElem, S: BasisElem> {
    con: Contraction<B, S>,
    mul: Rc<dyn Fn(&B, &B) -> Lin<B>>,
    arity_cap: usize,
    comparisons: Rc<RefCell<BTreeMap<(usize, Vec<S>), Lin<B>>>>,
}

impl<B: BasisElem, S: BasisElem> Clone for ProductTransfer<B, S> {
    fn clone(&self) -> Self {
        ProductTransfer {
            con: self.con.clone(),
            mul: Rc::clone(&self.mul),
            arity_cap: self.arity_cap,
            comparisons: Rc::clone(&self.comparisons),
        }
    }
}

impl<B: BasisElem, S: BasisElem> fmt::Debug for ProductTransfer<B, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductTransfer")
            .field("arity_cap", &self.arity_cap)
            .field("memoised", &self.comparisons.borrow().len())
            .finish_non_exhaustive()
    }
}

impl<B: BasisElem + 'static, S: BasisElem + 'static> ProductTransfer<B, S> {
    pub fn new(
        con: &Contraction<B, S>,
        arity_cap: usize,
        mul: impl Fn(&B, &B) -> Lin<B> + 'static,
    ) -> Self {
        ProductTransfer {
            con: con.clone(),
            mul: Rc::new(mul),
            arity_cap,
            comparisons: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    pub fn contraction(&self) -> &Contraction<B, S> {
        &self.con
    }

    /// Bilinear extension of the chain-level product.
    pub fn product(&self, a: &Lin<B>, b: &Lin<B>) -> Lin<B> {
        let mut acc = Lin::zero();
        for (x, cx) in a.iter() {
            for (y, cy) in b.iter() {
                acc.add_assign_scaled(&(self.mul)(x, y), &(cx * cy));
            }
        }
        acc
    }

    fn leading_comparison(&self, x: &S) -> Lin<B> {
        let jx = self.con.j.apply(x);
        // The seeded defect drops the leading sign of the comparison map.
        if armed(Fault::TransferSeed) {
            jx
        } else {
            jx.neg()
        }
    }

    /// Sum over the two-block splittings of the inputs, pairing lower
    /// comparison values through the product with an interleaving sign that
    /// depends on the left block length and its total degree.
    fn assemble(&self, k: usize, inputs: &[S]) -> Lin<B> {
        let mut acc: Lin<B> = Lin::zero();
        for l in 1..k {
            let m = k - l;
            let prefix_deg: i64 = inputs[..l].iter().map(BasisElem::degree).sum();
            let sign = minus_one_pow((l as i64 - 1) + (m as i64 - 1) * prefix_deg);
            let left = self.comparison(l, &inputs[..l]);
            let right = self.comparison(m, &inputs[l..]);
            acc.add_assign_scaled(&self.product(&left, &right), &sign);
        }
        acc
    }

    /// The arity-`k` component of the comparison map into the big complex.
    pub fn comparison(&self, k: usize, inputs: &[S]) -> Lin<B> {
        assert!(k >= 1 && k <= self.arity_cap, "arity {k} outside 1..={}", self.arity_cap);
        assert_eq!(inputs.len(), k, "expected {k} inputs, got {}", inputs.len());
        if k == 1 {
            return self.leading_comparison(&inputs[0]);
        }
        let key = (k, inputs.to_vec());
        if let Some(hit) = self.comparisons.borrow().get(&key) {
            return hit.clone();
        }
        let out = self.con.h.apply_lin(&self.assemble(k, inputs));
        self.comparisons.borrow_mut().insert(key, out.clone());
        out
    }

    fn comparison_fresh(&self, k: usize, inputs: &[S]) -> Lin<B> {
        if k == 1 {
            self.leading_comparison(&inputs[0])
        } else {
            self.con.h.apply_lin(&self.assemble(k, inputs))
        }
    }

    /// The arity-`k` transferred operation on the small complex.
    pub fn operation(&self, k: usize, inputs: &[S]) -> Lin<S> {
        assert!(k >= 1 && k <= self.arity_cap, "arity {k} outside 1..={}", self.arity_cap);
        assert_eq!(inputs.len(), k, "expected {k} inputs, got {}", inputs.len());
        if k == 1 {
            return self.con.small.d.apply(&inputs[0]);
        }
        self.con.p.apply_lin(&self.assemble(k, inputs))
    }

    /// Packages the transferred tower as an ordered-input operation family.
    pub fn family(&self) -> OperationFamily<S> {
        self.family_as(Flavor::Ainfty)
    }

    /// Same tower under a caller-chosen ordered-input flavor.
    pub fn family_as(&self, flavor: Flavor) -> OperationFamily<S> {
        assert!(!flavor.is_symmetric(), "product transfer yields ordered-input towers");
        let tr = self.clone();
        OperationFamily::new(flavor, self.arity_cap, move |k, xs: &[S]| tr.operation(k, xs))
    }

    /// When the big unit is fixed by the round trip through the small
    /// complex, its projection is a strict unit for the transferred tower.
    pub fn transferred_unit(&self, one: &Lin<B>) -> Option<Lin<S>> {
        let pe = self.con.p.apply_lin(one);
        let back = self.con.j.apply_lin(&pe);
        if back == *one {
            Some(pe)
        } else {
            None
        }
    }

    /// Recomputes a random sample of memoised comparison values and checks
    /// them against the stored ones.  Returns the number of keys checked.
    pub fn audit_comparisons(&self, samples: usize, seed: u64) -> Result<usize, String> {
        let mut keys: Vec<(usize, Vec<S>)> = self.comparisons.borrow().keys().cloned().collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        keys.shuffle(&mut rng);
        keys.truncate(samples);
        for (k, xs) in &keys {
            let stored = self.comparisons.borrow().get(&(*k, xs.clone())).cloned();
            let fresh = self.comparison_fresh(*k, xs);
            if stored.as_ref() != Some(&fresh) {
                return Err(format!(
                    "memoised arity-{k} comparison diverges from recomputation on ({})",
                    describe_tuple(xs)
                ));
            }
        }
        Ok(keys.len())
    }
}

// ---- bracket transfer ----

/// Transfers a graded Lie bracket through a contraction, producing the
/// induced tower of graded-symmetric operations on the small complex.
///
/// The recursion runs over all ordered two-block splittings of the inputs
/// together with all block-preserving interleavings, weighting each term by
/// the interleaving sign and by a block sign computed from the permuted
/// prefix degrees.
pub struct BracketTransfer<B: BasisElem, S: BasisElem> {
    con: Contraction<B, S>,
    bracket: Rc<dyn Fn(&B, &B) -> Lin<B>>,
    arity_cap: usize,
    comparisons: Rc<RefCell<BTreeMap<(usize, Vec<S>), Lin<B>>>>,
}

impl<B: BasisElem, S: BasisElem> Clone for BracketTransfer<B, S> {
    fn clone(&self) -> Self {
        BracketTransfer {
            con: self.con.clone(),
            bracket: Rc::clone(&self.bracket),
            arity_cap: self.arity_cap,
            comparisons: Rc::clone(&self.comparisons),
        }
    }
}

impl<B: BasisElem, S: BasisElem> fmt::Debug for BracketTransfer<B, S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BracketTransfer")
            .field("arity_cap", &self.arity_cap)
            .field("memoised", &self.comparisons.borrow().len())
            .finish_non_exhaustive()
    }
}

impl<B: BasisElem + 'static, S: BasisElem + 'static> BracketTransfer<B, S> {
    pub fn new(
        con: &Contraction<B, S>,
        arity_cap: usize,
        bracket: impl Fn(&B, &B) -> Lin<B> + 'static,
    ) -> Self {
        BracketTransfer {
            con: con.clone(),
            bracket: Rc::new(bracket),
            arity_cap,
            comparisons: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    pub fn arity_cap(&self) -> usize {
        self.arity_cap
    }

    pub fn contraction(&self) -> &Contraction<B, S> {
        &self.con
    }

    /// Bilinear extension of the chain-level bracket.
    pub fn bracket_lin(&self, a: &Lin<B>, b: &Lin<B>) -> Lin<B> {
        let mut acc = Lin::zero();
        for (x, cx) in a.iter() {
            for (y, cy) in b.iter() {
                acc.add_assign_scaled(&(self.bracket)(x, y), &(cx * cy));
            }
        }
        acc
    }

    fn leading_comparison(&self, x: &S) -> Lin<B> {
        let jx = self.con.j.apply(x);
        // The seeded defect drops the leading sign of the comparison map.
        if armed(Fault::TransferSeed) {
            jx
        } else {
            jx.neg()
        }
    }

    fn assemble(&self, k: usize, inputs: &[S]) -> Lin<B> {
        let degs: Vec<i64> = inputs.iter().map(BasisElem::degree).collect();
        let mut acc: Lin<B> = Lin::zero();
        for l in 1..k {
            let m = k - l;
            for per in unshuffles(&[l, m]) {
                let chi = koszul_sign(SignFlavor::Wedge, &per, &degs);
                let prefix_deg: i64 = per[..l].iter().map(|&i| degs[i]).sum();
                let sign = minus_one_pow((l as i64 - 1) + (m as i64 - 1) * prefix_deg);
                let left: Vec<S> = per[..l].iter().map(|&i| inputs[i].clone()).collect();
                let right: Vec<S> = per[l..].iter().map(|&i| inputs[i].clone()).collect();
                let lval = self.comparison(l, &left);
                let rval = self.comparison(m, &right);
                acc.add_assign_scaled(&self.bracket_lin(&lval, &rval), &(&chi * &sign));
            }
        }
        acc
    }

    /// The arity-`k` component of the comparison map into the big complex.
    /// Inputs are canonicalised by graded-antisymmetric sorting before the
    /// memo lookup; the recorded values live on sorted tuples only.
    pub fn comparison(&self, k: usize, inputs: &[S]) -> Lin<B> {
        assert!(k >= 1 && k <= self.arity_cap, "arity {k} outside 1..={}", self.arity_cap);
        assert_eq!(inputs.len(), k, "expected {k} inputs, got {}", inputs.len());
        if k == 1 {
            return self.leading_comparison(&inputs[0]);
        }
        let items: Vec<(S, i64)> = inputs.iter().map(|b| (b.clone(), b.degree())).collect();
        let (sorted, sign) = sort_with_sign(SignFlavor::Wedge, items, |b: &S| b.clone());
        let key: Vec<S> = sorted.into_iter().map(|(b, _)| b).collect();
        let stored = self.comparisons.borrow().get(&(k, key.clone())).cloned();
        let val = match stored {
            Some(v) => v,
            None => {
                let v = self.con.h.apply_lin(&self.assemble(k, &key));
                self.comparisons.borrow_mut().insert((k, key), v.clone());
                v
            }
        };
        val.scale(&sign)
    }

    fn comparison_fresh(&self, k: usize, inputs: &[S]) -> Lin<B> {
        if k == 1 {
            self.leading_comparison(&inputs[0])
        } else {
            self.con.h.apply_lin(&self.assemble(k, inputs))
        }
    }

    /// The arity-`k` transferred operation on the small complex.
    pub fn operation(&self, k: usize, inputs: &[S]) -> Lin<S> {
        assert!(k >= 1 && k <= self.arity_cap, "arity {k} outside 1..={}", self.arity_cap);
        assert_eq!(inputs.len(), k, "expected {k} inputs, got {}", inputs.len());
        if k == 1 {
            return self.con.small.d.apply(&inputs[0]);
        }
        self.con.p.apply_lin(&self.assemble(k, inputs))
    }

    /// Packages the transferred tower as a graded-symmetric operation family.
    pub fn family(&self) -> OperationFamily<S> {
        self.family_as(Flavor::Linfty)
    }

    /// Same tower under a caller-chosen graded-symmetric flavor.
    pub fn family_as(&self, flavor: Flavor) -> OperationFamily<S> {
        assert!(flavor.is_symmetric(), "bracket transfer yields graded-symmetric towers");
        let tr = self.clone();
        OperationFamily::new(flavor, self.arity_cap, move |k, xs: &[S]| tr.operation(k, xs))
    }

    /// Recomputes a random sample of memoised comparison values and checks
    /// them against the stored ones.  Returns the number of keys checked.
    pub fn audit_comparisons(&self, samples: usize, seed: u64) -> Result<usize, String> {
        let mut keys: Vec<(usize, Vec<S>)> = self.comparisons.borrow().keys().cloned().collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        keys.shuffle(&mut rng);
        keys.truncate(samples);
        for (k, xs) in &keys {
            let stored = self.comparisons.borrow().get(&(*k, xs.clone())).cloned();
            let fresh = self.comparison_fresh(*k, xs);
            if stored.as_ref() != Some(&fresh) {
                return Err(format!(
                    "memoised arity-{k} comparison diverges from recomputation on ({})",
                    describe_tuple(xs)
                ));
            }
        }
        Ok(keys.len())
    }
}

fn describe_tuple<S: fmt::Display>(xs: &[S]) -> String {
    xs.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
}

// ---- module coefficients ----

/// Extends a contraction of the algebra side by a square-zero module
/// summand: the projection and inclusion act as the identity on the module,
/// while the homotopy vanishes there.  Filtrations combine only when both
/// inputs carry one.
pub fn extend_contraction_by_module<BA, SA, BM>(
    con: &Contraction<BA, SA>,
    module: &Complex<BM>,
) -> Contraction<Sum2<BA, BM>, Sum2<SA, BM>>
where
    BA: BasisElem + 'static,
    SA: BasisElem + 'static,
    BM: BasisElem + 'static,
{
    let big_d = {
        let da = con.big.d.clone();
        let dm = module.d.clone();
        MapRef::new(con.big.d.degree(), move |b: &Sum2<BA, BM>| match b {
            Sum2::Alg(a) => lift_alg(&da.apply(a)),
            Sum2::Mod(m) => lift_mod(&dm.apply(m)),
        })
    };
    let small_d = {
        let da = con.small.d.clone();
        let dm = module.d.clone();
        MapRef::new(con.small.d.degree(), move |b: &Sum2<SA, BM>| match b {
            Sum2::Alg(a) => lift_alg(&da.apply(a)),
            Sum2::Mod(m) => lift_mod(&dm.apply(m)),
        })
    };
    let p = {
        let pa = con.p.clone();
        MapRef::new(con.p.degree(), move |b: &Sum2<BA, BM>| match b {
            Sum2::Alg(a) => lift_alg(&pa.apply(a)),
            Sum2::Mod(m) => Lin::basis(Sum2::Mod(m.clone())),
        })
    };
    let j = {
        let ja = con.j.clone();
        MapRef::new(con.j.degree(), move |b: &Sum2<SA, BM>| match b {
            Sum2::Alg(a) => lift_alg(&ja.apply(a)),
            Sum2::Mod(m) => Lin::basis(Sum2::Mod(m.clone())),
        })
    };
    let h = {
        let ha = con.h.clone();
        MapRef::new(con.h.degree(), move |b: &Sum2<BA, BM>| match b {
            Sum2::Alg(a) => lift_alg(&ha.apply(a)),
            Sum2::Mod(_) => Lin::zero(),
        })
    };
    let big = match (&con.big.filtration, &module.filtration) {
        (Some(fa), Some(fm)) => {
            let (fa, fm) = (Rc::clone(fa), Rc::clone(fm));
            Complex::with_filtration(big_d, move |b: &Sum2<BA, BM>| match b {
                Sum2::Alg(a) => fa(a),
                Sum2::Mod(m) => fm(m),
            })
        }
        _ => Complex::new(big_d),
    };
    let small = match (&con.small.filtration, &module.filtration) {
        (Some(fa), Some(fm)) => {
            let (fa, fm) = (Rc::clone(fa), Rc::clone(fm));
            Complex::with_filtration(small_d, move |b: &Sum2<SA, BM>| match b {
                Sum2::Alg(a) => fa(a),
                Sum2::Mod(m) => fm(m),
            })
        }
        _ => Complex::new(small_d),
    };
    Contraction { big, small, p, j, h }
}

fn lift_alg<A: BasisElem, M: BasisElem>(l: &Lin<A>) -> Lin<Sum2<A, M>> {
    l.iter().map(|(b, c)| (Sum2::Alg(b.clone()), c.clone())).collect()
}

fn lift_mod<A: BasisElem, M: BasisElem>(l: &Lin<M>) -> Lin<Sum2<A, M>> {
    l.iter().map(|(b, c)| (Sum2::Mod(b.clone()), c.clone())).collect()
}

/// Square-zero product on an algebra-plus-module sum: algebra times algebra
/// multiplies, algebra times module acts on the left, and every product
/// with a module entry on the left vanishes.
pub fn module_product<BA, BM>(
    mul: impl Fn(&BA, &BA) -> Lin<BA> + 'static,
    action: impl Fn(&BA, &BM) -> Lin<BM> + 'static,
) -> impl Fn(&Sum2<BA, BM>, &Sum2<BA, BM>) -> Lin<Sum2<BA, BM>>
where
    BA: BasisElem,
    BM: BasisElem,
{
    move |u: &Sum2<BA, BM>, v: &Sum2<BA, BM>| match (u, v) {
        (Sum2::Alg(a), Sum2::Alg(b)) => lift_alg(&mul(a, b)),
        (Sum2::Alg(a), Sum2::Mod(m)) => lift_mod(&action(a, m)),
        _ => Lin::zero(),
    }
}

/// Transfers a product together with a left module action through a
/// contraction extended by the square-zero module summand.
pub fn transfer_module<BA, SA, BM>(
    con: &Contraction<BA, SA>,
    module: &Complex<BM>,
    arity_cap: usize,
    mul: impl Fn(&BA, &BA) -> Lin<BA> + 'static,
    action: impl Fn(&BA, &BM) -> Lin<BM> + 'static,
) -> ProductTransfer<Sum2<BA, BM>, Sum2<SA, BM>>
where
    BA: BasisElem + 'static,
    SA: BasisElem + 'static,
    BM: BasisElem + 'static,
{
    let extended = extend_contraction_by_module(con, module);
    ProductTransfer::new(&extended, arity_cap, module_product(mul, action))
}

// ---- perturb-then-transfer pipeline ----

/// Why a perturbed transfer could not be set up.
#[derive(Debug, Error)]
pub enum TransferError {
    #[error("the big complex carries no filtration to control the perturbation series")]
    MissingFiltration,
    #[error(transparent)]
    Descent(#[from] DescentViolation),
}

/// Replaces the big differential, checks on the probe basis that the
/// difference strictly lowers the declared filtration, perturbs the
/// contraction, and transfers the product through the result.
pub fn perturbed_transfer<B, S>(
    con: &Contraction<B, S>,
    new_d: MapRef<B, B>,
    probe: &[B],
    guard: usize,
    arity_cap: usize,
    mul: impl Fn(&B, &B) -> Lin<B> + 'static,
) -> Result<ProductTransfer<B, S>, TransferError>
where
    B: BasisElem + 'static,
    S: BasisElem + 'static,
{
    let filt = con.big.filtration.clone().ok_or(TransferError::MissingFiltration)?;
    let t = {
        let old = con.big.d.clone();
        let new = new_d.clone();
        MapRef::new(old.degree(), move |b: &B| old.apply(b).sub(&new.apply(b)))
    };
    check_filtration_descent(&t, |b| filt(b), probe, 1)?;
    let perturbed = perturb(con, new_d, guard);
    Ok(ProductTransfer::new(&perturbed, arity_cap, mul))
}

// ---- free graded-commutative enlargement ----

/// A graded-commutative word: a weakly increasing multiset of generator
/// letters, with repeated odd letters collapsing to zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SymWord<G>(Vec<G>);

impl<G: BasisElem> SymWord<G> {
    /// The empty word.
    pub fn one() -> Self {
        SymWord(Vec::new())
    }

    /// A single-letter word.
    pub fn letter(g: G) -> Self {
        SymWord(vec![g])
    }

    pub fn letters(&self) -> &[G] {
        &self.0
    }

    /// Canonicalises an arbitrary letter sequence into a signed word.
    pub fn from_letters(letters: impl IntoIterator<Item = G>) -> Lin<SymWord<G>> {
        canonical_word(letters.into_iter().collect())
    }
}

impl<G: BasisElem> fmt::Display for SymWord<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join("⊙"))
    }
}

impl<G: BasisElem> BasisElem for SymWord<G> {
    fn degree(&self) -> i64 {
        self.0.iter().map(BasisElem::degree).sum()
    }
}

fn canonical_word<G: BasisElem>(letters: Vec<G>) -> Lin<SymWord<G>> {
    let items: Vec<(G, i64)> = letters
        .into_iter()
        .map(|g| {
            let d = g.degree();
            (g, d)
        })
        .collect();
    let (sorted, sign) = sort_with_sign(SignFlavor::Graded, items, |g: &G| g.clone());
    let letters: Vec<G> = sorted.into_iter().map(|(g, _)| g).collect();
    for pair in letters.windows(2) {
        if pair[0] == pair[1] && pair[0].degree() % 2 != 0 {
            return Lin::zero();
        }
    }
    Lin::single(SymWord(letters), sign)
}

/// Graded-commutative concatenation product on words.
pub fn sym_mul<G: BasisElem>(a: &SymWord<G>, b: &SymWord<G>) -> Lin<SymWord<G>> {
    canonical_word(a.0.iter().chain(b.0.iter()).cloned().collect())
}

/// Extends a letter operation of the given degree to words as a graded
/// derivation: it is applied to each letter in turn, with the sign picked
/// up while passing the preceding letters.
pub fn derivation_extend<G: BasisElem>(
    word: &SymWord<G>,
    op: &dyn Fn(&G) -> Lin<G>,
    op_degree: i64,
) -> Lin<SymWord<G>> {
    let mut acc: Lin<SymWord<G>> = Lin::zero();
    for (i, g) in word.0.iter().enumerate() {
        let image = op(g);
        if image.is_zero() {
            continue;
        }
        let prefix_deg: i64 = word.0[..i].iter().map(BasisElem::degree).sum();
        let pass = minus_one_pow(op_degree * prefix_deg);
        for (g2, c) in image.iter() {
            let mut letters: Vec<G> = word.0.clone();
            letters[i] = g2.clone();
            acc.add_assign_scaled(&canonical_word(letters), &(&pass * c));
        }
    }
    acc
}

/// Generator data for the free graded-commutative enlargement of a split
/// contraction: a predicate marking the contracted letters, the letter
/// differential, and the letter homotopy.
pub struct SymmetricGenerators<G: BasisElem> {
    pub in_complement: Rc<dyn Fn(&G) -> bool>,
    pub d0: Rc<dyn Fn(&G) -> Lin<G>>,
    pub h0: Rc<dyn Fn(&G) -> Lin<G>>,
}

/// Builds the contraction of the free graded-commutative algebra on the
/// generators onto the subalgebra generated by the uncontracted letters.
///
/// The differential extends as a derivation; the projection kills every
/// word containing a contracted letter; the homotopy extends as a
/// derivation scaled by the reciprocal of the number of contracted letters
/// in the word, and vanishes on words without them.
pub fn extend_contraction_symmetric<G: BasisElem + 'static>(
    gens: &SymmetricGenerators<G>,
) -> Contraction<SymWord<G>, SymWord<G>> {
    let big_d = {
        let d0 = Rc::clone(&gens.d0);
        MapRef::new(1, move |w: &SymWord<G>| derivation_extend(w, d0.as_ref(), 1))
    };
    let small_d = {
        let d0 = Rc::clone(&gens.d0);
        MapRef::new(1, move |w: &SymWord<G>| derivation_extend(w, d0.as_ref(), 1))
    };
    let p = {
        let inz = Rc::clone(&gens.in_complement);
        MapRef::new(0, move |w: &SymWord<G>| {
            if w.0.iter().any(|g| inz(g)) {
                Lin::zero()
            } else {
                Lin::basis(w.clone())
            }
        })
    };
    let j = MapRef::new(0, |w: &SymWord<G>| Lin::basis(w.clone()));
    let h = {
        let h0 = Rc::clone(&gens.h0);
        let inz = Rc::clone(&gens.in_complement);
        MapRef::new(-1, move |w: &SymWord<G>| {
            let zcount = w.0.iter().filter(|g| inz(g)).count();
            if zcount == 0 {
                return Lin::zero();
            }
            derivation_extend(w, h0.as_ref(), -1).scale(&ratq(1, zcount as i64))
        })
    };
    Contraction {
        big: Complex::new(big_d),
        small: Complex::new(small_d),
        p,
        j,
        h,
    }
}

// ---- memo audits ----

/// Recomputes a random sample of an operation family's memoised values and
/// compares them with the stored ones.  Returns the number of keys checked.
pub fn memo_audit<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
    samples: usize,
    seed: u64,
) -> Result<usize, String> {
    let mut keys = family.memo_keys();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    keys.shuffle(&mut rng);
    keys.truncate(samples);
    for (k, tuple) in &keys {
        let stored = family.op(*k, tuple).map_err(|e| e.to_string())?;
        let fresh = family.op_fresh(*k, tuple).map_err(|e| e.to_string())?;
        if stored != fresh {
            return Err(format!(
                "memoised arity-{k} value diverges from recomputation on ({})",
                describe_tuple(tuple)
            ));
        }
    }
    Ok(keys.len())
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::fault::inject;
    use crate::homotopy::{verify_contraction, SERIES_GUARD};
    use crate::sh::{
        check_skew_symmetry, linfty_residual, module_residual, skew_symmetrize, stasheff_residual,
    };
    use rand::Rng;

    // ---- exterior-algebra fixtures ----

    const LETTERS: [(u8, char); 4] = [(1, 'x'), (2, 'y'), (4, 'z'), (8, 'w')];

    /// Exterior monomial on up to four odd generators, encoded as a bit mask.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct W(u8);

    impl fmt::Display for W {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if self.0 == 0 {
                return write!(f, "1");
            }
            for (bit, name) in LETTERS {
                if self.0 & bit != 0 {
                    write!(f, "{name}")?;
                }
            }
            Ok(())
        }
    }

    impl BasisElem for W {
        fn degree(&self) -> i64 {
            i64::from(self.0.count_ones())
        }
    }

    /// Wedge of two monomials: `None` on overlap, otherwise the union mask
    /// with the sign of sorting the concatenated letters.
    fn wedge(a: u8, b: u8) -> Option<(u8, i64)> {
        if a & b != 0 {
            return None;
        }
        let mut sign = 1i64;
        for (bit, _) in LETTERS {
            if b & bit != 0 {
                let above = u32::from(a) & !((u32::from(bit) << 1) - 1);
                if above.count_ones() % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        Some((a | b, sign))
    }

    fn wedge_mul(u: &W, v: &W) -> Lin<W> {
        match wedge(u.0, v.0) {
            None => Lin::zero(),
            Some((m, s)) => Lin::single(W(m), rat(s)),
        }
    }

    /// Degree `+1` derivation generated by letter rules `letter ↦ image`.
    fn letter_d(rules: &[(u8, u8)], m: &W) -> Lin<W> {
        let mut acc = Lin::zero();
        for &(letter, image) in rules {
            if m.0 & letter == 0 {
                continue;
            }
            let prefix = m.0 & (letter - 1);
            let suffix = m.0 & !(letter | (letter - 1));
            let Some((inner, s1)) = wedge(image, suffix) else { continue };
            let Some((full, s2)) = wedge(prefix, inner) else { continue };
            let pos = if prefix.count_ones() % 2 == 1 { -1 } else { 1 };
            acc.add_term(W(full), rat(pos * s1 * s2));
        }
        acc
    }

    fn d3(m: &W) -> Lin<W> {
        letter_d(&[(4, 3)], m)
    }

    fn d4(m: &W) -> Lin<W> {
        letter_d(&[(4, 3), (8, 5)], m)
    }

    fn all_masks(n_letters: u32) -> Vec<W> {
        (0..(1u16 << n_letters)).map(|m| W(m as u8)).collect()
    }

    const NIL3_SMALL: [u8; 6] = [0, 1, 2, 5, 6, 7];

    /// Retraction of the three-generator exterior algebra with `z ↦ xy`
    /// onto its cohomology representatives.
    fn nil3_contraction() -> Contraction<W, W> {
        let d = MapRef::new(1, |m: &W| d3(m));
        let small_d = MapRef::zero(1);
        let p = MapRef::new(0, |m: &W| {
            if m.0 == 3 || m.0 == 4 {
                Lin::zero()
            } else {
                Lin::basis(*m)
            }
        });
        let j = MapRef::new(0, |m: &W| Lin::basis(*m));
        let h = MapRef::new(-1, |m: &W| {
            if m.0 == 3 {
                Lin::basis(W(4))
            } else {
                Lin::zero()
            }
        });
        Contraction {
            big: Complex::new(d),
            small: Complex::new(small_d),
            p,
            j,
            h,
        }
    }

    const TWO_STEP_SMALL: [u8; 10] = [0, 1, 2, 5, 6, 8, 9, 13, 14, 15];
    const TWO_STEP_KILLED: [u8; 6] = [3, 4, 7, 10, 11, 12];

    /// Retraction of the four-generator exterior algebra with `z ↦ xy`,
    /// `w ↦ xz` onto a ten-dimensional summand that still carries a
    /// differential (`w ↦ xz` survives projection).
    fn two_step_contraction() -> Contraction<W, W> {
        let d = MapRef::new(1, |m: &W| d4(m));
        let small_d = MapRef::new(1, |m: &W| d4(m));
        let p = MapRef::new(0, |m: &W| {
            if TWO_STEP_KILLED.contains(&m.0) {
                Lin::zero()
            } else {
                Lin::basis(*m)
            }
        });
        let j = MapRef::new(0, |m: &W| Lin::basis(*m));
        let h = MapRef::new(-1, |m: &W| match m.0 {
            3 => Lin::basis(W(4)),   // xy ↦ z
            11 => Lin::basis(W(12)), // xyw ↦ zw
            7 => Lin::basis(W(10)),  // xyz ↦ yw
            _ => Lin::zero(),
        });
        Contraction {
            big: Complex::new(d),
            small: Complex::new(small_d),
            p,
            j,
            h,
        }
    }

    fn identity_contraction(d: MapRef<W, W>) -> Contraction<W, W> {
        Contraction {
            big: Complex::new(d.clone()),
            small: Complex::new(d),
            p: MapRef::identity(),
            j: MapRef::identity(),
            h: MapRef::zero(-1),
        }
    }

    fn small_w(masks: &[u8]) -> Vec<W> {
        masks.iter().map(|&m| W(m)).collect()
    }

    // ---- tuple enumeration helpers ----

    fn all_tuples<T: Clone>(basis: &[T], k: usize) -> Vec<Vec<T>> {
        fn rec<T: Clone>(basis: &[T], k: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for b in basis {
                cur.push(b.clone());
                rec(basis, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(basis, k, &mut Vec::new(), &mut out);
        out
    }

    fn sorted_tuples<T: Clone>(basis: &[T], k: usize) -> Vec<Vec<T>> {
        fn rec<T: Clone>(
            basis: &[T],
            k: usize,
            start: usize,
            cur: &mut Vec<T>,
            out: &mut Vec<Vec<T>>,
        ) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..basis.len() {
                cur.push(basis[i].clone());
                rec(basis, k, i, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(basis, k, 0, &mut Vec::new(), &mut out);
        out
    }

    fn sample_tuples<T: Clone>(basis: &[T], k: usize, n: usize, seed: u64) -> Vec<Vec<T>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..k).map(|_| basis[rng.gen_range(0..basis.len())].clone()).collect())
            .collect()
    }

    // ---- the tests ----

    #[test]
    fn fixtures_are_contractions() {
        let report = verify_contraction(
            &nil3_contraction(),
            &all_masks(3),
            &small_w(&NIL3_SMALL),
        );
        assert!(report.is_ok(), "three-letter fixture: {report}");

        let report = verify_contraction(
            &two_step_contraction(),
            &all_masks(4),
            &small_w(&TWO_STEP_SMALL),
        );
        assert!(report.is_ok(), "four-letter fixture: {report}");
    }

    #[test]
    fn identity_retraction_transfers_the_bare_product() {
        let con = identity_contraction(MapRef::new(1, |m: &W| d3(m)));
        let tr = ProductTransfer::new(&con, 4, wedge_mul);
        let basis = all_masks(3);

        assert_eq!(tr.operation(1, &[W(4)]), Lin::basis(W(3)));
        for pair in all_tuples(&basis, 2) {
            assert_eq!(
                tr.operation(2, &pair),
                wedge_mul(&pair[0], &pair[1]),
                "binary operation at ({})",
                describe_tuple(&pair)
            );
        }
        for triple in all_tuples(&basis, 3) {
            assert!(tr.operation(3, &triple).is_zero());
            assert!(tr.comparison(3, &triple).is_zero());
        }
        let fam = tr.family();
        for k in 1..=3 {
            for tuple in all_tuples(&basis, k) {
                let res = stasheff_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({})", describe_tuple(&tuple));
            }
        }
    }

    #[test]
    fn minimal_retraction_matches_hand_computed_operations() {
        let tr = ProductTransfer::new(&nil3_contraction(), 4, wedge_mul);

        assert_eq!(tr.comparison(1, &[W(1)]), Lin::basis(W(1)).neg());
        assert_eq!(tr.comparison(2, &[W(1), W(2)]), Lin::basis(W(4)));
        assert_eq!(tr.comparison(2, &[W(2), W(1)]), Lin::basis(W(4)).neg());

        assert_eq!(
            tr.operation(2, &[W(2), W(5)]),
            Lin::basis(W(7)).neg(),
            "y · xz projects to −xyz"
        );
        assert_eq!(tr.operation(3, &[W(1), W(1), W(2)]), Lin::basis(W(5)));
        assert_eq!(tr.operation(3, &[W(1), W(2), W(2)]), Lin::basis(W(6)).neg());
        assert_eq!(
            tr.operation(3, &[W(2), W(1), W(2)]),
            Lin::basis(W(6)).scale(&rat(2))
        );

        let unit = tr.transferred_unit(&Lin::basis(W(0)));
        assert_eq!(unit, Some(Lin::basis(W(0))));
        let fam = tr.family();
        let defects = fam.check_strict_unit(&Lin::basis(W(0)), &small_w(&NIL3_SMALL));
        assert!(defects.is_empty(), "unit defects: {defects:?}");
    }

    #[test]
    fn minimal_retraction_tower_is_coherent_to_arity_four() {
        let tr = ProductTransfer::new(&nil3_contraction(), 4, wedge_mul);
        let fam = tr.family();
        let basis = small_w(&NIL3_SMALL);
        for k in 1..=4 {
            for tuple in all_tuples(&basis, k) {
                let res = stasheff_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({}): {res}", describe_tuple(&tuple));
            }
        }
        assert!(tr.audit_comparisons(50, 11).unwrap() > 0);
    }

    #[test]
    fn nonminimal_retraction_inherits_differential_and_corrects_associativity() {
        let tr = ProductTransfer::new(&two_step_contraction(), 4, wedge_mul);
        let basis = small_w(&TWO_STEP_SMALL);

        assert_eq!(tr.operation(1, &[W(8)]), Lin::basis(W(5)), "surviving differential w ↦ xz");

        // The projected product fails associativity on (x, yz, w)…
        let left = tr.operation(2, &[W(1), W(6)]);
        assert!(left.is_zero());
        let right_inner = tr.operation(2, &[W(6), W(8)]);
        assert_eq!(right_inner, Lin::basis(W(14)));
        let right = tr.operation(2, &[W(1), W(14)]);
        assert_eq!(right, Lin::basis(W(15)));

        // …and the arity-three correction repairs it inside the tower.
        assert_eq!(
            tr.operation(3, &[W(1), W(6), W(5)]),
            Lin::basis(W(15)).neg()
        );

        let fam = tr.family();
        for k in 1..=3 {
            for tuple in all_tuples(&basis, k) {
                let res = stasheff_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({}): {res}", describe_tuple(&tuple));
            }
        }
        for tuple in sample_tuples(&basis, 4, 200, 23) {
            let res = stasheff_residual(&fam, 4, &tuple).unwrap();
            assert!(res.is_zero(), "residual 4 at ({}): {res}", describe_tuple(&tuple));
        }
    }

    #[test]
    fn comparison_seed_fault_breaks_the_tower_identities() {
        let witness = [W(1), W(6), W(8)];

        let clean = ProductTransfer::new(&two_step_contraction(), 4, wedge_mul);
        let res = stasheff_residual(&clean.family(), 3, &witness).unwrap();
        assert!(res.is_zero());

        let _guard = inject(Fault::TransferSeed);
        let faulted = ProductTransfer::new(&two_step_contraction(), 4, wedge_mul);
        assert_eq!(
            faulted.comparison(1, &[W(1)]),
            Lin::basis(W(1)),
            "seeded defect flips the leading comparison sign"
        );
        let res = stasheff_residual(&faulted.family(), 3, &witness).unwrap();
        assert!(!res.is_zero(), "seeded defect must break an arity-three identity");
    }

    // ---- Lie fixtures ----

    /// Basis of the three-dimensional simple Lie algebra: 0 = E, 1 = H, 2 = F.
    fn sl2_bracket(a: u8, b: u8) -> Vec<(u8, i64)> {
        match (a, b) {
            (1, 0) => vec![(0, 2)],
            (0, 1) => vec![(0, -2)],
            (1, 2) => vec![(2, -2)],
            (2, 1) => vec![(2, 2)],
            (0, 2) => vec![(1, 1)],
            (2, 0) => vec![(1, -1)],
            _ => vec![],
        }
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct L(u8);

    impl fmt::Display for L {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}", ["E", "H", "F"][self.0 as usize])
        }
    }

    impl BasisElem for L {
        fn degree(&self) -> i64 {
            0
        }
    }

    fn sl2_bracket_lin(a: &L, b: &L) -> Lin<L> {
        sl2_bracket(a.0, b.0).into_iter().map(|(l, c)| (L(l), rat(c))).collect()
    }

    /// Lie basis element tensored with an exterior monomial.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct T(u8, u8);

    impl fmt::Display for T {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{}⊗{}", ["E", "H", "F"][self.0 as usize], W(self.1))
        }
    }

    impl BasisElem for T {
        fn degree(&self) -> i64 {
            i64::from(self.1.count_ones())
        }
    }

    fn sl2_wedge_bracket(u: &T, v: &T) -> Lin<T> {
        let Some((m, s)) = wedge(u.1, v.1) else {
            return Lin::zero();
        };
        sl2_bracket(u.0, v.0)
            .into_iter()
            .map(|(l, c)| (T(l, m), rat(c * s)))
            .collect()
    }

    /// Componentwise contraction of the Lie algebra tensored with the
    /// three-letter exterior fixture.
    fn sl2_tensor_contraction() -> Contraction<T, T> {
        fn mask_map(f: impl Fn(&W) -> Lin<W>, t: &T) -> Lin<T> {
            let label = t.0;
            f(&W(t.1)).iter().map(|(b, c)| (T(label, b.0), c.clone())).collect()
        }
        let d = MapRef::new(1, |t: &T| mask_map(d3, t));
        let small_d = MapRef::zero(1);
        let p = MapRef::new(0, |t: &T| {
            if t.1 == 3 || t.1 == 4 {
                Lin::zero()
            } else {
                Lin::basis(*t)
            }
        });
        let j = MapRef::new(0, |t: &T| Lin::basis(*t));
        let h = MapRef::new(-1, |t: &T| {
            if t.1 == 3 {
                Lin::basis(T(t.0, 4))
            } else {
                Lin::zero()
            }
        });
        Contraction {
            big: Complex::new(d),
            small: Complex::new(small_d),
            p,
            j,
            h,
        }
    }

    fn sl2_tensor_basis(masks: &[u8]) -> Vec<T> {
        let mut out = Vec::new();
        for label in 0..3u8 {
            for &m in masks {
                out.push(T(label, m));
            }
        }
        out
    }

    #[test]
    fn identity_retraction_doubles_the_transferred_bracket() {
        let con = identity_contraction_l();
        let tr = BracketTransfer::new(&con, 3, sl2_bracket_lin);

        // Ordered two-block splittings contribute the bracket twice.
        assert_eq!(
            tr.operation(2, &[L(0), L(2)]),
            Lin::basis(L(1)).scale(&rat(2)),
            "[E,F] transfers to 2H"
        );
        assert_eq!(
            tr.operation(2, &[L(1), L(0)]),
            Lin::basis(L(0)).scale(&rat(4)),
            "[H,E] transfers to 4E"
        );
        let basis = [L(0), L(1), L(2)];
        for triple in all_tuples(&basis, 3) {
            assert!(tr.operation(3, &triple).is_zero());
        }
    }

    fn identity_contraction_l() -> Contraction<L, L> {
        Contraction {
            big: Complex::new(MapRef::zero(1)),
            small: Complex::new(MapRef::zero(1)),
            p: MapRef::identity(),
            j: MapRef::identity(),
            h: MapRef::zero(-1),
        }
    }

    #[test]
    fn bracket_transfer_tower_satisfies_the_graded_jacobi_identities() {
        let con = sl2_tensor_contraction();
        let report = verify_contraction(
            &con,
            &sl2_tensor_basis(&[0, 1, 2, 3, 4, 5, 6, 7]),
            &sl2_tensor_basis(&NIL3_SMALL),
        );
        assert!(report.is_ok(), "tensor fixture: {report}");

        let tr = BracketTransfer::new(&con, 4, sl2_wedge_bracket);
        let fam = tr.family();
        let basis = sl2_tensor_basis(&NIL3_SMALL);

        for tuple in sorted_tuples(&basis, 2).into_iter().take(60) {
            let defect = check_skew_symmetry(&fam, 2, &tuple, 0).unwrap();
            assert!(defect.is_zero(), "symmetry defect at ({})", describe_tuple(&tuple));
        }
        for k in 1..=3 {
            for tuple in sorted_tuples(&basis, k) {
                let res = linfty_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({}): {res}", describe_tuple(&tuple));
            }
        }
        for tuple in sample_tuples(&basis, 4, 150, 31) {
            let res = linfty_residual(&fam, 4, &tuple).unwrap();
            assert!(res.is_zero(), "residual 4 at ({}): {res}", describe_tuple(&tuple));
        }
        assert!(tr.audit_comparisons(50, 5).unwrap() > 0);
    }

    // ---- matrix fixture for the product/bracket comparison ----

    /// Elementary 2×2 matrix tensored with an exterior monomial; the label
    /// packs row and column as `2·row + col`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct M(u8, u8);

    impl fmt::Display for M {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "m{}{}⊗{}", self.0 >> 1, self.0 & 1, W(self.1))
        }
    }

    impl BasisElem for M {
        fn degree(&self) -> i64 {
            i64::from(self.1.count_ones())
        }
    }

    fn m2_mul(u: &M, v: &M) -> Lin<M> {
        if (u.0 & 1) != (v.0 >> 1) {
            return Lin::zero();
        }
        let Some((m, s)) = wedge(u.1, v.1) else {
            return Lin::zero();
        };
        Lin::single(M((u.0 & 2) | (v.0 & 1), m), rat(s))
    }

    fn m2_comm(u: &M, v: &M) -> Lin<M> {
        m2_mul(u, v).sub(&m2_mul(v, u).scale(&minus_one_pow(u.degree() * v.degree())))
    }

    fn m2_contraction() -> Contraction<M, M> {
        fn mask_map(f: impl Fn(&W) -> Lin<W>, t: &M) -> Lin<M> {
            let label = t.0;
            f(&W(t.1)).iter().map(|(b, c)| (M(label, b.0), c.clone())).collect()
        }
        let d = MapRef::new(1, |t: &M| mask_map(d3, t));
        let small_d = MapRef::zero(1);
        let p = MapRef::new(0, |t: &M| {
            if t.1 == 3 || t.1 == 4 {
                Lin::zero()
            } else {
                Lin::basis(*t)
            }
        });
        let j = MapRef::new(0, |t: &M| Lin::basis(*t));
        let h = MapRef::new(-1, |t: &M| {
            if t.1 == 3 {
                Lin::basis(M(t.0, 4))
            } else {
                Lin::zero()
            }
        });
        Contraction {
            big: Complex::new(d),
            small: Complex::new(small_d),
            p,
            j,
            h,
        }
    }

    fn m2_basis(masks: &[u8]) -> Vec<M> {
        let mut out = Vec::new();
        for label in 0..4u8 {
            for &m in masks {
                out.push(M(label, m));
            }
        }
        out
    }

    #[test]
    fn skew_symmetrized_product_transfer_matches_bracket_transfer_with_arity_doubling() {
        let con = m2_contraction();
        let prod = ProductTransfer::new(&con, 3, m2_mul);
        let skew = skew_symmetrize(&prod.family());
        let brak = BracketTransfer::new(&con, 3, m2_comm);
        let basis = m2_basis(&NIL3_SMALL);

        // Arity k of the bracket tower equals the skew-symmetrised product
        // tower scaled by 2^(k−1).
        for pair in sorted_tuples(&basis, 2) {
            let lhs = brak.operation(2, &pair);
            let rhs = skew.op(2, &pair).unwrap().scale(&rat(2));
            assert_eq!(lhs, rhs, "arity 2 at ({})", describe_tuple(&pair));
        }
        for triple in sample_tuples(&basis, 3, 150, 43) {
            let lhs = brak.operation(3, &triple);
            let rhs = skew.op(3, &triple).unwrap().scale(&rat(4));
            assert_eq!(lhs, rhs, "arity 3 at ({})", describe_tuple(&triple));
        }
    }

    #[test]
    fn module_transfer_obeys_module_identities_and_closed_form() {
        let con = nil3_contraction();
        let module = Complex::new(MapRef::new(1, |m: &W| d3(m)));
        let tr = transfer_module(&con, &module, 4, wedge_mul, wedge_mul);
        let fam = tr.family_as(Flavor::AinftyModule);

        let mut basis: Vec<Sum2<W, W>> = Vec::new();
        for &m in &NIL3_SMALL {
            basis.push(Sum2::Alg(W(m)));
        }
        for m in all_masks(3) {
            basis.push(Sum2::Mod(m));
        }

        assert_eq!(
            tr.operation(1, &[Sum2::Mod(W(4))]),
            Lin::single(Sum2::Mod(W(3)), rat(1)),
            "module differential passes through"
        );
        for k in 1..=3 {
            for tuple in all_tuples(&basis, k) {
                let res = module_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({}): {res}", describe_tuple(&tuple));
            }
        }

        // Early module entries annihilate the operation.
        assert!(tr
            .operation(3, &[Sum2::Alg(W(1)), Sum2::Mod(W(2)), Sum2::Alg(W(2))])
            .is_zero());

        // Closed form: with a single module entry in the last slot, the
        // operation is the signed action of the algebra comparison value.
        let alg = ProductTransfer::new(&con, 4, wedge_mul);
        for k in 2..=4usize {
            for prefix in all_tuples(&small_w(&NIL3_SMALL), k - 1) {
                for omega in all_masks(3) {
                    let mut tuple: Vec<Sum2<W, W>> =
                        prefix.iter().map(|w| Sum2::Alg(*w)).collect();
                    tuple.push(Sum2::Mod(omega));
                    let got = tr.operation(k, &tuple);
                    let comp = alg.comparison(k - 1, &prefix);
                    let mut acted: Lin<Sum2<W, W>> = Lin::zero();
                    for (b, c) in comp.iter() {
                        let part: Lin<Sum2<W, W>> = wedge_mul(b, &omega)
                            .iter()
                            .map(|(m, cm)| (Sum2::Mod(*m), cm.clone()))
                            .collect();
                        acted.add_assign_scaled(&part, c);
                    }
                    let expected = acted.scale(&minus_one_pow(k as i64 - 1));
                    assert_eq!(got, expected, "closed form {k} at ({})", describe_tuple(&tuple));
                }
            }
        }
    }

    #[test]
    fn perturbed_transfer_checks_descent_then_transfers() {
        // Base: the three-letter retraction tensored with a fourth letter
        // the differential ignores, filtered by that letter's count.
        let base = || {
            let d = MapRef::new(1, |m: &W| d3(m));
            let small_d = MapRef::zero(1);
            let wcount = |m: &W| i64::from((m.0 >> 3) & 1);
            let p = MapRef::new(0, |m: &W| {
                if m.0 & 7 == 3 || m.0 & 7 == 4 {
                    Lin::zero()
                } else {
                    Lin::basis(*m)
                }
            });
            let j = MapRef::new(0, |m: &W| Lin::basis(*m));
            let h = MapRef::new(-1, |m: &W| {
                if m.0 & 7 == 3 {
                    Lin::basis(W((m.0 & 8) | 4))
                } else {
                    Lin::zero()
                }
            });
            Contraction {
                big: Complex::with_filtration(d, wcount),
                small: Complex::with_filtration(small_d, wcount),
                p,
                j,
                h,
            }
        };
        let small: Vec<W> = (0..16u8)
            .filter(|m| !(m & 7 == 3 || m & 7 == 4))
            .map(W)
            .collect();
        assert_eq!(small.len(), 12);
        let report = verify_contraction(&base(), &all_masks(4), &small);
        assert!(report.is_ok(), "filtered fixture: {report}");

        let probe = all_masks(4);
        let tr = perturbed_transfer(
            &base(),
            MapRef::new(1, |m: &W| d4(m)),
            &probe,
            SERIES_GUARD,
            3,
            wedge_mul,
        )
        .expect("descent along the added letter");

        assert_eq!(
            tr.operation(1, &[W(8)]),
            Lin::basis(W(5)),
            "perturbed differential recovers w ↦ xz"
        );
        let fam = tr.family();
        let mut nonzero_cubics = 0usize;
        for k in 1..=3 {
            for tuple in all_tuples(&small, k) {
                let res = stasheff_residual(&fam, k, &tuple).unwrap();
                assert!(res.is_zero(), "residual {k} at ({}): {res}", describe_tuple(&tuple));
                if k == 3 && !tr.operation(3, &tuple).is_zero() {
                    nonzero_cubics += 1;
                }
            }
        }
        assert!(nonzero_cubics > 0, "the perturbed tower must have cubic corrections");

        // Without a filtration the pipeline refuses to run.
        let mut unfiltered = base();
        unfiltered.big = Complex::new(unfiltered.big.d.clone());
        let err = perturbed_transfer(
            &unfiltered,
            MapRef::new(1, |m: &W| d4(m)),
            &probe,
            SERIES_GUARD,
            3,
            wedge_mul,
        )
        .unwrap_err();
        assert!(matches!(err, TransferError::MissingFiltration));

        // A perturbation that fails to lower the filtration is rejected.
        let err = perturbed_transfer(
            &base(),
            MapRef::new(1, |m: &W| letter_d(&[(4, 3), (1, 2)], m)),
            &probe,
            SERIES_GUARD,
            3,
            wedge_mul,
        )
        .unwrap_err();
        assert!(matches!(err, TransferError::Descent(_)));
    }

    // ---- free graded-commutative enlargement ----

    /// Letters for the enlargement fixture: two survivors and a contracted
    /// pair `c ↦ e`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    enum G4 {
        K0,
        K1,
        C,
        E,
    }

    impl fmt::Display for G4 {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let s = match self {
                G4::K0 => "k0",
                G4::K1 => "k1",
                G4::C => "c",
                G4::E => "e",
            };
            write!(f, "{s}")
        }
    }

    impl BasisElem for G4 {
        fn degree(&self) -> i64 {
            match self {
                G4::K0 | G4::C => 0,
                G4::K1 | G4::E => 1,
            }
        }
    }

    fn g4_generators() -> SymmetricGenerators<G4> {
        SymmetricGenerators {
            in_complement: Rc::new(|g: &G4| matches!(g, G4::C | G4::E)),
            d0: Rc::new(|g: &G4| match g {
                G4::C => Lin::basis(G4::E),
                _ => Lin::zero(),
            }),
            h0: Rc::new(|g: &G4| match g {
                G4::E => Lin::basis(G4::C),
                _ => Lin::zero(),
            }),
        }
    }

    fn g4_words(max_len: usize) -> Vec<SymWord<G4>> {
        let letters = [G4::K0, G4::K1, G4::C, G4::E];
        let mut out = Vec::new();
        for len in 0..=max_len {
            for picks in sorted_tuples(&letters, len) {
                let mut ok = true;
                for pair in picks.windows(2) {
                    if pair[0] == pair[1] && pair[0].degree() % 2 != 0 {
                        ok = false;
                    }
                }
                if ok {
                    out.push(SymWord(picks));
                }
            }
        }
        out
    }

    #[test]
    fn symmetric_extension_yields_a_contraction_with_scaled_homotopy() {
        let con = extend_contraction_symmetric(&g4_generators());
        let words = g4_words(3);
        let small_words: Vec<SymWord<G4>> = words
            .iter()
            .filter(|w| w.letters().iter().all(|g| !matches!(g, G4::C | G4::E)))
            .cloned()
            .collect();
        let report = verify_contraction(&con, &words, &small_words);
        assert!(report.is_ok(), "enlarged fixture: {report}");

        // The homotopy averages over the contracted letters: on c⊙e it
        // produces c⊙c with coefficient one half.
        let ce = SymWord(vec![G4::C, G4::E]);
        assert_eq!(
            con.h.apply(&ce),
            Lin::single(SymWord(vec![G4::C, G4::C]), ratq(1, 2))
        );

        // Words in the surviving letters pass through the homotopy as
        // coefficients, with the sign of their total degree.
        let survivors = [
            vec![],
            vec![G4::K0],
            vec![G4::K1],
            vec![G4::K0, G4::K1],
        ];
        let tails = [
            vec![G4::C],
            vec![G4::E],
            vec![G4::C, G4::C],
            vec![G4::C, G4::E],
        ];
        for s in &survivors {
            for t in &tails {
                let joined = SymWord::from_letters(s.iter().chain(t.iter()).copied());
                let lhs = con.h.apply_lin(&joined);
                let s_deg: i64 = s.iter().map(BasisElem::degree).sum();
                let mut rhs: Lin<SymWord<G4>> = Lin::zero();
                for (tail_word, c) in con.h.apply_lin(&SymWord::from_letters(t.iter().copied())).iter() {
                    let glued = SymWord::from_letters(
                        s.iter().copied().chain(tail_word.letters().iter().copied()),
                    );
                    rhs.add_assign_scaled(&glued, &(c * &minus_one_pow(s_deg)));
                }
                assert_eq!(lhs, rhs, "coefficient linearity on {joined}");
            }
        }
    }

    #[test]
    fn memo_audit_validates_and_catches_impure_evaluators() {
        let tr = ProductTransfer::new(&nil3_contraction(), 3, wedge_mul);
        let fam = tr.family();
        let basis = small_w(&NIL3_SMALL);
        for k in 1..=3 {
            for tuple in all_tuples(&basis, k) {
                fam.op(k, &tuple).unwrap();
            }
        }
        let checked = memo_audit(&fam, 50, 7).unwrap();
        assert_eq!(checked, 50);
        assert!(tr.audit_comparisons(50, 7).unwrap() > 0);

        // An evaluator with hidden state is flagged.
        let counter = Rc::new(RefCell::new(0i64));
        let c2 = Rc::clone(&counter);
        let impure = OperationFamily::new(Flavor::Ainfty, 1, move |_, xs: &[W]| {
            *c2.borrow_mut() += 1;
            Lin::basis(xs[0]).scale(&rat(*c2.borrow()))
        });
        impure.op(1, &[W(1)]).unwrap();
        assert!(memo_audit(&impure, 10, 1).is_err());
    }
}
