//! Sparse multivariate polynomials over the rationals.
//!
//! Variables come in two blocks fixed by a [`VarCtx`]: leafwise variables
//! `x1..xn` followed by transverse variables `u1..um`. Exponent vectors are
//! dense `Vec<u32>` of length `n + m`; terms live in a `BTreeMap`, so
//! iteration order (and hence printing) is canonical.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::rat::{rat, Rat};

/// Variable context: `leaf` variables `x1..` then `trans` variables `u1..`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarCtx {
    pub leaf: usize,
    pub trans: usize,
}

impl VarCtx {
    pub fn new(leaf: usize, trans: usize) -> Self {
        VarCtx { leaf, trans }
    }

    /// Total number of variables.
    pub fn total(self) -> usize {
        self.leaf + self.trans
    }

    /// Printable name of variable `i` (leaf block first).
    pub fn var_name(self, i: usize) -> String {
        assert!(i < self.total(), "variable index {i} out of context {self:?}");
        if i < self.leaf {
            format!("x{}", i + 1)
        } else {
            format!("u{}", i - self.leaf + 1)
        }
    }

    /// Resolve a variable name like `x2` or `u1` to its index.
    pub fn var_index(self, name: &str) -> Option<usize> {
        let (block, rest) = name.split_at(1);
        let k: usize = rest.parse().ok()?;
        if k == 0 {
            return None;
        }
        match block {
            "x" if k <= self.leaf => Some(k - 1),
            "u" if k <= self.trans => Some(self.leaf + k - 1),
            _ => None,
        }
    }
}

/// A sparse polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Poly {
    ctx: VarCtx,
    terms: BTreeMap<Vec<u32>, Rat>,
}

/// Errors from [`Poly::parse`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyParseError {
    #[error("unknown variable `{name}` for context with {leaf} leaf and {trans} transverse variables")]
    UnknownVariable { name: String, leaf: usize, trans: usize },
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero denominator at byte {pos}")]
    ZeroDenominator { pos: usize },
}

impl Poly {
    pub fn zero(ctx: VarCtx) -> Self {
        Poly { ctx, terms: BTreeMap::new() }
    }

    pub fn one(ctx: VarCtx) -> Self {
        Poly::constant(ctx, Rat::one())
    }

    pub fn constant(ctx: VarCtx, c: Rat) -> Self {
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(vec![0; ctx.total()], c);
        }
        p
    }

    pub fn int(ctx: VarCtx, n: i64) -> Self {
        Poly::constant(ctx, rat(n))
    }

    /// The variable with context index `i`.
    pub fn var(ctx: VarCtx, i: usize) -> Self {
        assert!(i < ctx.total(), "variable index {i} out of context {ctx:?}");
        let mut exps = vec![0; ctx.total()];
        exps[i] = 1;
        Poly::monomial(ctx, exps, Rat::one())
    }

    pub fn monomial(ctx: VarCtx, exps: Vec<u32>, c: Rat) -> Self {
        assert_eq!(exps.len(), ctx.total(), "exponent vector length mismatch");
        let mut p = Poly::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn ctx(&self) -> VarCtx {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rat)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    /// The coefficient of the constant monomial.
    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.ctx.total()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    /// Largest total degree among monomials (zero polynomial: 0).
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    fn assert_ctx(&self, other: &Poly) {
        assert_eq!(
            self.ctx, other.ctx,
            "polynomial context mismatch: {:?} vs {:?}",
            self.ctx, other.ctx
        );
    }

    pub fn add_assign_scaled(&mut self, other: &Poly, c: &Rat) {
        self.assert_ctx(other);
        if c.is_zero() {
            return;
        }
        for (e, a) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert_with(Rat::zero);
            *entry += a * c;
            if entry.is_zero() {
                self.terms.remove(e);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_scaled(other, &Rat::one());
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_scaled(other, &-Rat::one());
        out
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rat::one())
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.ctx);
        }
        Poly {
            ctx: self.ctx,
            terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.assert_ctx(other);
        let mut out = Poly::zero(self.ctx);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let entry = out.terms.entry(exps).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(self.ctx);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        assert!(i < self.ctx.total(), "variable index {i} out of context");
        let mut out = Poly::zero(self.ctx);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            out.terms.insert(exps, c * rat(e[i] as i64));
        }
        out
    }

    /// Evaluate at a rational point (used by operator-order probes).
    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.ctx.total(), "evaluation point length mismatch");
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term *= &point[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Parse a literal like `3/2 x1^2 u2 - u1`.
    ///
    /// Juxtaposition multiplies, `^` takes a nonnegative integer power, a
    /// term may start with a rational coefficient, and `*` between factors
    /// is tolerated.
    pub fn parse(ctx: VarCtx, input: &str) -> Result<Poly, PolyParseError> {
        Parser { ctx, bytes: input.as_bytes(), pos: 0 }.parse_expr()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let has_vars = e.iter().any(|&k| k > 0);
            if !has_vars || !mag.is_one() {
                write!(f, "{mag}")?;
                if has_vars {
                    write!(f, " ")?;
                }
            }
            let mut first_var = true;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !first_var {
                    write!(f, " ")?;
                }
                first_var = false;
                write!(f, "{}", self.ctx.var_name(i))?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    ctx: VarCtx,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse_uint(&mut self) -> Result<u64, PolyParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PolyParseError::Syntax { pos: start, msg: "expected a number".into() });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| PolyParseError::Syntax { pos: start, msg: "number too large".into() })
    }

    fn parse_expr(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = Poly::zero(self.ctx);
        let mut sign = Rat::one();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            sign = -sign;
        } else if self.peek() == Some(b'+') {
            self.pos += 1;
        }
        loop {
            let term = self.parse_term()?;
            acc.add_assign_scaled(&term, &sign);
            match self.peek() {
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    sign = Rat::one();
                }
                Some(b'-') => {
                    self.pos += 1;
                    sign = -Rat::one();
                }
                Some(c) => {
                    return Err(PolyParseError::Syntax {
                        pos: self.pos,
                        msg: format!("unexpected character `{}`", c as char),
                    })
                }
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Poly, PolyParseError> {
        let mut acc = Poly::one(self.ctx);
        let mut saw_factor = false;
        loop {
            match self.peek() {
                Some(b'0'..=b'9') => {
                    let pos = self.pos;
                    let num = self.parse_uint()?;
                    let coeff = if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let den_pos = self.pos;
                        let den = self.parse_uint()?;
                        if den == 0 {
                            return Err(PolyParseError::ZeroDenominator { pos: den_pos });
                        }
                        Rat::new(num.into(), den.into())
                    } else {
                        Rat::from_integer(num.into())
                    };
                    acc = acc.scale(&coeff);
                    let _ = pos;
                    saw_factor = true;
                }
                Some(b'x') | Some(b'u') => {
                    let start = self.pos;
                    self.pos += 1;
                    while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                    let Some(i) = self.ctx.var_index(name) else {
                        return Err(PolyParseError::UnknownVariable {
                            name: name.into(),
                            leaf: self.ctx.leaf,
                            trans: self.ctx.trans,
                        });
                    };
                    let mut exp = 1;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        exp = self.parse_uint()? as u32;
                    }
                    acc = acc.mul(&Poly::var(self.ctx, i).pow(exp));
                    saw_factor = true;
                }
                Some(b'*') => {
                    self.pos += 1;
                }
                _ => break,
            }
        }
        if !saw_factor {
            return Err(PolyParseError::Syntax {
                pos: self.pos,
                msg: "expected a coefficient or a variable".into(),
            });
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat::ratq;

    fn ctx() -> VarCtx {
        VarCtx::new(2, 2)
    }

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["3/2 x1^2 u2 - u1", "u2", "0", "-x1 + x1", "5", "x1 u1 - 2 x2^3"] {
            let p = Poly::parse(ctx(), s).unwrap();
            let q = Poly::parse(ctx(), &p.to_string()).unwrap();
            assert_eq!(p, q, "round trip through `{s}` → `{p}`");
        }
        assert_eq!(Poly::parse(ctx(), "-x1 + x1").unwrap(), Poly::zero(ctx()));
    }

    #[test]
    fn parse_errors_are_specific() {
        assert!(matches!(
            Poly::parse(ctx(), "u3"),
            Err(PolyParseError::UnknownVariable { .. })
        ));
        assert!(matches!(
            Poly::parse(ctx(), "1/0"),
            Err(PolyParseError::ZeroDenominator { .. })
        ));
        assert!(matches!(Poly::parse(ctx(), "+"), Err(PolyParseError::Syntax { .. })));
        assert!(matches!(Poly::parse(ctx(), "x1 &"), Err(PolyParseError::Syntax { .. })));
    }

    #[test]
    fn ring_laws_on_samples() {
        let c = ctx();
        let p = Poly::parse(c, "x1^2 - u1").unwrap();
        let q = Poly::parse(c, "3 u2 + 1/2").unwrap();
        let r = Poly::parse(c, "x2 u1").unwrap();
        assert_eq!(p.mul(&q), q.mul(&p));
        assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
        assert_eq!(p.sub(&p), Poly::zero(c));
    }

    #[test]
    fn partial_derivatives() {
        let c = ctx();
        let p = Poly::parse(c, "3/2 x1^2 u2 - u1").unwrap();
        assert_eq!(p.partial(0), Poly::parse(c, "3 x1 u2").unwrap());
        assert_eq!(p.partial(2), Poly::parse(c, "-1").unwrap());
        assert_eq!(p.partial(3), Poly::parse(c, "3/2 x1^2").unwrap());
        // Leibniz rule on a sample.
        let q = Poly::parse(c, "x1 u1^2").unwrap();
        assert_eq!(
            p.mul(&q).partial(0),
            p.partial(0).mul(&q).add(&p.mul(&q.partial(0)))
        );
    }

    #[test]
    fn eval_matches_arithmetic() {
        let c = ctx();
        let p = Poly::parse(c, "x1^2 u2 - 2 x2").unwrap();
        let pt = [ratq(1, 2), ratq(-1, 1), ratq(0, 1), ratq(4, 1)];
        assert_eq!(p.eval(&pt), ratq(3, 1));
    }

    #[test]
    fn context_mismatch_panics() {
        let a = Poly::one(VarCtx::new(1, 1));
        let b = Poly::one(VarCtx::new(2, 1));
        assert!(std::panic::catch_unwind(|| a.add(&b)).is_err());
    }
}
