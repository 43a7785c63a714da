//! Normal-ordering engine for the universal envelope of a presented
//! Lie–Rinehart algebra, with its graded symmetric companion algebra.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::envelope::presentation::LrPresentation;
use crate::exact::{minus_one_pow, ratq, sort_with_sign, Poly, Rat, SignFlavor};

// ---- raw words ----

/// One letter of an unreduced envelope word.
#[derive(Debug, Clone)]
pub enum RawLetter {
    /// A base coefficient.
    Coeff(Poly),
    /// A module generator by index.
    Gen(usize),
}

/// An unreduced product of coefficients and generators.
#[derive(Debug, Clone)]
pub struct RawWord(pub Vec<RawLetter>);

impl RawWord {
    /// A word consisting of the given generators in order.
    pub fn gens(indices: &[usize]) -> Self {
        RawWord(indices.iter().map(|&i| RawLetter::Gen(i)).collect())
    }
}

/// Which reducible pair a rewriting pass contracts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Always contract the leftmost reducible pair.
    Leftmost,
    /// Always contract the rightmost reducible pair.
    Rightmost,
}

/// Default bound on rewriting steps per input word.
pub const REWRITE_GUARD: usize = 20_000;

/// Failure while operating in the envelope.
#[derive(Debug, Error)]
pub enum EnvelopeError {
    /// Rewriting exceeded the step guard; the presentation tables are
    /// inconsistent or the word is far beyond the intended size.
    #[error("normal-ordering did not terminate within {steps} steps")]
    RewriteStall { steps: usize },
    /// A differential was requested but the presentation declares none.
    #[error("the presentation declares no differential")]
    MissingDifferential,
    /// An element lay outside the filtration level it was projected at.
    #[error("element has filtration degree {found}, exceeding level {level}")]
    FiltrationViolation { found: usize, level: usize },
    /// An order test was invoked with no probes.
    #[error("order testing requires at least one probe")]
    EmptyProbes,
}

// ---- envelope elements ----

/// A normally ordered envelope element: a sum of polynomial coefficients
/// times weakly increasing generator words without odd repeats.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EnvElem {
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl EnvElem {
    /// The zero element.
    pub fn zero() -> Self {
        EnvElem::default()
    }

    /// A base coefficient as the empty word.
    pub fn scalar(coeff: Poly) -> Self {
        EnvElem::word(Vec::new(), coeff)
    }

    /// A single word with a coefficient.
    pub fn word(word: Vec<usize>, coeff: Poly) -> Self {
        let mut out = EnvElem::zero();
        out.add_word(word, &coeff);
        out
    }

    /// True when the element has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over (word, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Poly)> {
        self.terms.iter().map(|(w, c)| (w.as_slice(), c))
    }

    /// Adds `coeff`·word to the element.
    pub fn add_word(&mut self, word: Vec<usize>, coeff: &Poly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                *existing = existing.add(coeff);
                if existing.is_zero() {
                    self.terms.remove(&word);
                }
            }
            None => {
                self.terms.insert(word, coeff.clone());
            }
        }
    }

    /// Adds `scale`·`other` to the element.
    pub fn add_assign_scaled(&mut self, other: &EnvElem, scale: &Rat) {
        if scale.is_zero() {
            return;
        }
        for (word, coeff) in &other.terms {
            self.add_word(word.clone(), &coeff.scale(scale));
        }
    }

    /// Sum of two elements.
    pub fn add(&self, other: &EnvElem) -> EnvElem {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rat::one());
        out
    }

    /// Difference of two elements.
    pub fn sub(&self, other: &EnvElem) -> EnvElem {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-&Rat::one());
        out
    }

    /// Rescales every coefficient by a rational.
    pub fn scale(&self, scale: &Rat) -> EnvElem {
        let mut out = EnvElem::zero();
        out.add_assign_scaled(self, scale);
        out
    }

    /// Multiplies every coefficient by a base element on the left.
    pub fn scale_poly(&self, scale: &Poly) -> EnvElem {
        let mut out = EnvElem::zero();
        for (word, coeff) in &self.terms {
            out.add_word(word.clone(), &scale.mul(coeff));
        }
        out
    }

    /// Largest word length, i.e. the filtration degree; zero for the zero
    /// element.
    pub fn filtration_degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Renders the element with generator names from a presentation.
    pub fn render(&self, pres: &LrPresentation) -> String {
        render_terms(self.terms.iter(), pres, "")
    }
}

fn render_terms<'a>(
    terms: impl Iterator<Item = (&'a Vec<usize>, &'a Poly)>,
    pres: &LrPresentation,
    joiner: &str,
) -> String {
    let mut parts = Vec::new();
    for (word, coeff) in terms {
        let gens: Vec<&str> = word.iter().map(|&g| pres.name(g)).collect();
        if gens.is_empty() {
            parts.push(format!("({coeff})"));
        } else {
            parts.push(format!("({coeff})·{}", gens.join(joiner)));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

// ---- graded symmetric elements ----

/// An element of the graded symmetric algebra on the generators: sums of
/// coefficients times sorted words, odd squares collapsing to zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SymElem {
    terms: BTreeMap<Vec<usize>, Poly>,
}

impl SymElem {
    /// The zero element.
    pub fn zero() -> Self {
        SymElem::default()
    }

    /// A base coefficient as the empty word.
    pub fn scalar(coeff: Poly) -> Self {
        let mut out = SymElem::zero();
        if !coeff.is_zero() {
            out.terms.insert(Vec::new(), coeff);
        }
        out
    }

    /// True when the element has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over (word, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Poly)> {
        self.terms.iter().map(|(w, c)| (w.as_slice(), c))
    }

    /// Inserts `coeff`·word after graded sorting; words with a repeated odd
    /// generator vanish.
    pub fn insert_word(&mut self, pres: &LrPresentation, word: Vec<usize>, coeff: Poly) {
        if coeff.is_zero() {
            return;
        }
        let items: Vec<(usize, i64)> = word.into_iter().map(|g| (g, pres.degree(g))).collect();
        let (sorted, sign) = sort_with_sign(SignFlavor::Graded, items, |&g| g);
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 % 2 != 0 {
                return;
            }
        }
        let word: Vec<usize> = sorted.into_iter().map(|(g, _)| g).collect();
        let scaled = coeff.scale(&sign);
        match self.terms.get_mut(&word) {
            Some(existing) => {
                *existing = existing.add(&scaled);
                if existing.is_zero() {
                    self.terms.remove(&word);
                }
            }
            None => {
                self.terms.insert(word, scaled);
            }
        }
    }

    /// Adds `scale`·`other` to the element.
    pub fn add_assign_scaled(&mut self, other: &SymElem, scale: &Rat) {
        if scale.is_zero() {
            return;
        }
        for (word, coeff) in &other.terms {
            let scaled = coeff.scale(scale);
            match self.terms.get_mut(word) {
                Some(existing) => {
                    *existing = existing.add(&scaled);
                    if existing.is_zero() {
                        self.terms.remove(word);
                    }
                }
                None => {
                    self.terms.insert(word.clone(), scaled);
                }
            }
        }
    }

    /// Sum of two elements.
    pub fn add(&self, other: &SymElem) -> SymElem {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rat::one());
        out
    }

    /// Difference of two elements.
    pub fn sub(&self, other: &SymElem) -> SymElem {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-&Rat::one());
        out
    }

    /// Rescales every coefficient.
    pub fn scale(&self, scale: &Rat) -> SymElem {
        let mut out = SymElem::zero();
        out.add_assign_scaled(self, scale);
        out
    }

    /// Graded commutative product.
    pub fn mul(&self, pres: &LrPresentation, other: &SymElem) -> SymElem {
        let mut out = SymElem::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut word = w1.clone();
                word.extend_from_slice(w2);
                out.insert_word(pres, word, c1.mul(c2));
            }
        }
        out
    }

    /// Largest word length; zero for the zero element.
    pub fn top_level(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// The canonical envelope representative: each sorted symmetric word
    /// read as a normally ordered product.
    pub fn representative(&self) -> EnvElem {
        let mut out = EnvElem::zero();
        for (word, coeff) in &self.terms {
            out.add_word(word.clone(), coeff);
        }
        out
    }

    /// Renders the element with generator names from a presentation.
    pub fn render(&self, pres: &LrPresentation) -> String {
        render_terms(self.terms.iter(), pres, "⊙")
    }
}

// ---- the envelope ----

/// The universal envelope of a presented Lie–Rinehart algebra, operating on
/// normally ordered elements through a guarded rewriting system.
#[derive(Debug, Clone)]
pub struct Envelope {
    pres: Rc<LrPresentation>,
    guard: usize,
}

impl Envelope {
    /// Wraps a presentation with the default step guard.
    pub fn new(pres: LrPresentation) -> Self {
        Envelope::with_guard(pres, REWRITE_GUARD)
    }

    /// Wraps a presentation with an explicit step guard.
    pub fn with_guard(pres: LrPresentation, guard: usize) -> Self {
        Envelope {
            pres: Rc::new(pres),
            guard,
        }
    }

    /// The underlying presentation.
    pub fn presentation(&self) -> &LrPresentation {
        &self.pres
    }

    /// Rewrites a raw word into normal order: coefficients to the left,
    /// generators weakly increasing, odd squares halved into their bracket.
    pub fn normal_form(&self, raw: &RawWord, strategy: Strategy) -> Result<EnvElem, EnvelopeError> {
        let mut out = EnvElem::zero();
        let mut pending: Vec<(Vec<RawLetter>, Rat)> = vec![(raw.0.clone(), Rat::one())];
        let mut steps = 0usize;
        while let Some((letters, scale)) = pending.pop() {
            steps += 1;
            if steps > self.guard {
                return Err(EnvelopeError::RewriteStall { steps: self.guard });
            }
            match self.find_redex(&letters, strategy) {
                None => self.absorb(&mut out, letters, &scale),
                Some(pos) => {
                    for (rewritten, factor) in self.reduce_at(&letters, pos) {
                        pending.push((rewritten, &scale * &factor));
                    }
                }
            }
        }
        Ok(out)
    }

    fn is_redex(&self, left: &RawLetter, right: &RawLetter) -> bool {
        match (left, right) {
            (RawLetter::Coeff(_), RawLetter::Coeff(_)) => true,
            (RawLetter::Gen(_), RawLetter::Coeff(_)) => true,
            (RawLetter::Gen(a), RawLetter::Gen(b)) => {
                a > b || (a == b && self.pres.degree(*a) % 2 != 0)
            }
            (RawLetter::Coeff(_), RawLetter::Gen(_)) => false,
        }
    }

    fn find_redex(&self, letters: &[RawLetter], strategy: Strategy) -> Option<usize> {
        let positions = 0..letters.len().saturating_sub(1);
        let hit = |i: &usize| self.is_redex(&letters[*i], &letters[*i + 1]);
        match strategy {
            Strategy::Leftmost => positions.clone().find(|i| hit(i)),
            Strategy::Rightmost => positions.rev().find(|i| hit(i)),
        }
    }

    /// Expands the reducible pair at `pos` into replacement words with
    /// rational factors.
    fn reduce_at(&self, letters: &[RawLetter], pos: usize) -> Vec<(Vec<RawLetter>, Rat)> {
        let mut branches = Vec::new();
        let mut splice = |mid: Vec<RawLetter>, factor: Rat| {
            if factor.is_zero() {
                return;
            }
            if mid
                .iter()
                .any(|l| matches!(l, RawLetter::Coeff(c) if c.is_zero()))
            {
                return;
            }
            let mut word = Vec::with_capacity(letters.len() + mid.len());
            word.extend_from_slice(&letters[..pos]);
            word.extend(mid);
            word.extend_from_slice(&letters[pos + 2..]);
            branches.push((word, factor));
        };
        match (&letters[pos], &letters[pos + 1]) {
            (RawLetter::Coeff(c1), RawLetter::Coeff(c2)) => {
                splice(vec![RawLetter::Coeff(c1.mul(c2))], Rat::one());
            }
            (RawLetter::Gen(a), RawLetter::Coeff(c)) => {
                // q·c = c·q + q(c) over an even base.
                splice(
                    vec![RawLetter::Coeff(c.clone()), RawLetter::Gen(*a)],
                    Rat::one(),
                );
                splice(
                    vec![RawLetter::Coeff(self.pres.anchor_apply(*a, c))],
                    Rat::one(),
                );
            }
            (RawLetter::Gen(a), RawLetter::Gen(b)) if a > b => {
                // q_a·q_b = (−1)^{āb̄} q_b·q_a + [q_a, q_b].
                let sign = minus_one_pow(self.pres.degree(*a) * self.pres.degree(*b));
                splice(vec![RawLetter::Gen(*b), RawLetter::Gen(*a)], sign);
                for (g, coeff) in self.pres.bracket_gen(*a, *b).iter() {
                    splice(
                        vec![RawLetter::Coeff(coeff.clone()), RawLetter::Gen(g)],
                        Rat::one(),
                    );
                }
            }
            (RawLetter::Gen(a), RawLetter::Gen(_)) => {
                // Odd square: q·q = ½[q, q].
                for (g, coeff) in self.pres.bracket_gen(*a, *a).iter() {
                    splice(
                        vec![RawLetter::Coeff(coeff.clone()), RawLetter::Gen(g)],
                        ratq(1, 2),
                    );
                }
            }
            (RawLetter::Coeff(_), RawLetter::Gen(_)) => unreachable!("not a redex"),
        }
        branches
    }

    /// Folds a redex-free word into the accumulating element.
    fn absorb(&self, out: &mut EnvElem, letters: Vec<RawLetter>, scale: &Rat) {
        let mut coeff = Poly::one(self.pres.ctx());
        let mut word = Vec::new();
        for letter in letters {
            match letter {
                RawLetter::Coeff(c) => coeff = coeff.mul(&c),
                RawLetter::Gen(g) => word.push(g),
            }
        }
        out.add_word(word, &coeff.scale(scale));
    }

    /// Product of two normally ordered elements.
    pub fn mul(&self, x: &EnvElem, y: &EnvElem) -> Result<EnvElem, EnvelopeError> {
        let mut out = EnvElem::zero();
        for (w1, c1) in x.terms() {
            for (w2, c2) in y.terms() {
                let mut letters = vec![RawLetter::Coeff(c1.clone())];
                letters.extend(w1.iter().map(|&g| RawLetter::Gen(g)));
                letters.push(RawLetter::Coeff(c2.clone()));
                letters.extend(w2.iter().map(|&g| RawLetter::Gen(g)));
                let reduced = self.normal_form(&RawWord(letters), Strategy::Leftmost)?;
                out.add_assign_scaled(&reduced, &Rat::one());
            }
        }
        Ok(out)
    }

    /// Graded commutator of two normally ordered elements, taken termwise
    /// by word degree.
    pub fn commutator(&self, x: &EnvElem, y: &EnvElem) -> Result<EnvElem, EnvelopeError> {
        let mut out = EnvElem::zero();
        for (w1, c1) in x.terms() {
            for (w2, c2) in y.terms() {
                let a = EnvElem::word(w1.to_vec(), c1.clone());
                let b = EnvElem::word(w2.to_vec(), c2.clone());
                let forward = self.mul(&a, &b)?;
                let backward = self.mul(&b, &a)?;
                let sign =
                    minus_one_pow(self.pres.word_degree(w1) * self.pres.word_degree(w2));
                out.add_assign_scaled(&forward, &Rat::one());
                out.add_assign_scaled(&backward, &-&sign);
            }
        }
        Ok(out)
    }

    /// Applies an element to a base polynomial through the anchors,
    /// rightmost generator first.
    pub fn act_on(&self, e: &EnvElem, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.pres.ctx());
        for (word, coeff) in e.terms() {
            let mut value = f.clone();
            for &g in word.iter().rev() {
                value = self.pres.anchor_apply(g, &value);
            }
            out = out.add(&coeff.mul(&value));
        }
        out
    }

    /// Leading part of an element at the given filtration level, as a
    /// graded symmetric word.
    pub fn gr_projection(&self, e: &EnvElem, level: usize) -> Result<SymElem, EnvelopeError> {
        let found = e.filtration_degree();
        if found > level {
            return Err(EnvelopeError::FiltrationViolation { found, level });
        }
        let mut out = SymElem::zero();
        for (word, coeff) in e.terms() {
            if word.len() == level {
                out.insert_word(&self.pres, word.to_vec(), coeff.clone());
            }
        }
        Ok(out)
    }

    /// Extends the presentation's differential to the envelope as a degree
    /// one derivation that vanishes on the base.
    pub fn differential(&self, e: &EnvElem) -> Result<EnvElem, EnvelopeError> {
        if !self.pres.has_differential() {
            return Err(EnvelopeError::MissingDifferential);
        }
        let mut out = EnvElem::zero();
        for (word, coeff) in e.terms() {
            let mut prefix_degree = 0i64;
            for i in 0..word.len() {
                let image = self.pres.differential_gen(word[i]).expect("table present");
                let sign = minus_one_pow(prefix_degree);
                for (g, image_coeff) in image.iter() {
                    let mut letters = vec![RawLetter::Coeff(coeff.clone())];
                    letters.extend(word[..i].iter().map(|&w| RawLetter::Gen(w)));
                    letters.push(RawLetter::Coeff(image_coeff.clone()));
                    letters.push(RawLetter::Gen(g));
                    letters.extend(word[i + 1..].iter().map(|&w| RawLetter::Gen(w)));
                    let reduced = self.normal_form(&RawWord(letters), Strategy::Leftmost)?;
                    out.add_assign_scaled(&reduced, &sign);
                }
                prefix_degree += self.pres.degree(word[i]);
            }
        }
        Ok(out)
    }

    /// Normalizes random raw words under both strategies and compares the
    /// results; returns the number of agreeing samples or the first
    /// disagreement.
    pub fn confluence_audit(
        &self,
        samples: usize,
        max_len: usize,
        seed: u64,
    ) -> Result<usize, String> {
        let ctx = self.pres.ctx();
        let gen_count = self.pres.gen_count();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for sample in 0..samples {
            let len = rng.gen_range(1..=max_len);
            let letters: Vec<RawLetter> = (0..len)
                .map(|_| {
                    if ctx.total() > 0 && rng.gen_range(0..4u8) == 0 {
                        let v = rng.gen_range(0..ctx.total());
                        let k = rng.gen_range(0..3i64);
                        RawLetter::Coeff(Poly::var(ctx, v).add(&Poly::int(ctx, k)))
                    } else {
                        RawLetter::Gen(rng.gen_range(0..gen_count))
                    }
                })
                .collect();
            let raw = RawWord(letters);
            let left = self
                .normal_form(&raw, Strategy::Leftmost)
                .map_err(|e| format!("sample {sample} (leftmost): {e}"))?;
            let right = self
                .normal_form(&raw, Strategy::Rightmost)
                .map_err(|e| format!("sample {sample} (rightmost): {e}"))?;
            if left != right {
                return Err(format!(
                    "strategies disagree on sample {sample}: {} vs {}",
                    left.render(&self.pres),
                    right.render(&self.pres)
                ));
            }
        }
        Ok(samples)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Leftmost => write!(f, "leftmost"),
            Strategy::Rightmost => write!(f, "rightmost"),
        }
    }
}

// ---- tests ----
