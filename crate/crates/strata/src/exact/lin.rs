//! Formal rational linear combinations of ordered basis elements.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;

use super::rat::Rat;

/// A basis element of a graded vector space with canonical ordering.
pub trait BasisElem: Clone + Ord + fmt::Display + fmt::Debug {
    /// Homogeneous degree of this basis element.
    fn degree(&self) -> i64;
}

/// A finite rational linear combination of basis elements.
///
/// Zero coefficients are never stored, so equality of combinations is
/// equality of the underlying maps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lin<B: BasisElem> {
    terms: BTreeMap<B, Rat>,
}

impl<B: BasisElem> Default for Lin<B> {
    fn default() -> Self {
        Lin::zero()
    }
}

impl<B: BasisElem> Lin<B> {
    pub fn zero() -> Self {
        Lin { terms: BTreeMap::new() }
    }

    pub fn basis(b: B) -> Self {
        Lin::single(b, Rat::from_integer(1.into()))
    }

    pub fn single(b: B, c: Rat) -> Self {
        let mut l = Lin::zero();
        l.add_term(b, c);
        l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&B, &Rat)> {
        self.terms.iter()
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (B, Rat)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, b: &B) -> Rat {
        self.terms.get(b).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, b: B, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(b) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Lin<B>, c: &Rat) {
        if c.is_zero() {
            return;
        }
        for (b, a) in &other.terms {
            self.add_term(b.clone(), a * c);
        }
    }

    pub fn add(&self, other: &Lin<B>) -> Lin<B> {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rat::from_integer(1.into()));
        out
    }

    pub fn sub(&self, other: &Lin<B>) -> Lin<B> {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rat::from_integer((-1).into()));
        out
    }

    pub fn scale(&self, c: &Rat) -> Lin<B> {
        if c.is_zero() {
            return Lin::zero();
        }
        Lin {
            terms: self.terms.iter().map(|(b, a)| (b.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> Lin<B> {
        self.scale(&Rat::from_integer((-1).into()))
    }

    /// Apply a basis-defined linear map termwise.
    pub fn map<C: BasisElem>(&self, f: impl Fn(&B) -> Lin<C>) -> Lin<C> {
        let mut out = Lin::zero();
        for (b, c) in &self.terms {
            out.add_assign_scaled(&f(b), c);
        }
        out
    }

    /// Degree of a homogeneous combination; `None` for zero or mixed.
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut deg = None;
        for b in self.terms.keys() {
            match deg {
                None => deg = Some(b.degree()),
                Some(d) if d == b.degree() => {}
                _ => return None,
            }
        }
        deg
    }
}

impl<B: BasisElem> FromIterator<(B, Rat)> for Lin<B> {
    fn from_iter<I: IntoIterator<Item = (B, Rat)>>(iter: I) -> Self {
        let mut l = Lin::zero();
        for (b, c) in iter {
            l.add_term(b, c);
        }
        l
    }
}

impl<B: BasisElem> fmt::Display for Lin<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num::Signed;
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            use num::One;
            if mag.is_one() {
                write!(f, "{b}")?;
            } else {
                write!(f, "{mag}·{b}")?;
            }
        }
        Ok(())
    }
}
