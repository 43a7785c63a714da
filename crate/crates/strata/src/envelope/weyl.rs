//! Differential operators on a polynomial base realized inside the
//! envelope of its derivation algebra: order tests, principal symbols, the
//! induced Poisson bracket, and multiderivation evaluation.

use crate::envelope::algebra::multisets;
use crate::envelope::presentation::LrPresentation;
use crate::envelope::rewrite::{EnvElem, Envelope, EnvelopeError, SymElem};
use crate::exact::{Poly, Rat, VarCtx};

use num::One;

// ---- presentations and probes ----

/// The derivation algebra of a polynomial base: one even generator per
/// variable, zero brackets, coordinate anchors.
pub fn weyl_presentation(ctx: VarCtx) -> LrPresentation {
    let total = ctx.total();
    let generators = (0..total)
        .map(|v| (format!("∂{}", ctx.var_name(v)), 0i64))
        .collect();
    let mut anchor = vec![vec![Poly::zero(ctx); total]; total];
    for (v, row) in anchor.iter_mut().enumerate() {
        row[v] = Poly::one(ctx);
    }
    LrPresentation::new(ctx, generators, Vec::new(), anchor, None)
        .expect("coordinate tables are well shaped")
}

/// All monomials of total degree at most `max_deg`, including the constant
/// one.
pub fn monomial_probes(ctx: VarCtx, max_deg: u32) -> Vec<Poly> {
    let mut out = Vec::new();
    let mut expo = vec![0u32; ctx.total()];
    walk_monomials(ctx, 0, max_deg, &mut expo, &mut out);
    out
}

fn walk_monomials(ctx: VarCtx, slot: usize, remaining: u32, expo: &mut Vec<u32>, out: &mut Vec<Poly>) {
    if slot == ctx.total() {
        out.push(Poly::monomial(ctx, expo.clone(), Rat::one()));
        return;
    }
    for e in 0..=remaining {
        expo[slot] = e;
        walk_monomials(ctx, slot + 1, remaining - e, expo, out);
    }
    expo[slot] = 0;
}

/// Default probe set for an order test at order `k`: monomials up to total
/// degree `k + 2`.
pub fn default_probes(ctx: VarCtx, k: usize) -> Vec<Poly> {
    monomial_probes(ctx, k as u32 + 2)
}

// ---- order testing ----

/// Outcome of an order test: either every commutator nest vanished, or the
/// refuting nest entries and probe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderOutcome {
    /// Every multiplication-commutator nest of length `k + 1` vanished.
    Within,
    /// The nest with these multiplier entries failed on this probe.
    Exceeded { entries: Vec<Poly>, probe: Poly },
}

impl OrderOutcome {
    /// True when the tested bound held.
    pub fn holds(&self) -> bool {
        matches!(self, OrderOutcome::Within)
    }
}

/// Tests whether an operator on the polynomial base has order at most `k`:
/// every nest of `k + 1` commutators with variable multiplications must
/// kill every probe.  Additivity in the multiplier reduces general entries
/// to variables.
pub fn order_test(
    ctx: VarCtx,
    apply: &dyn Fn(&Poly) -> Poly,
    k: usize,
    probes: &[Poly],
) -> Result<OrderOutcome, EnvelopeError> {
    if probes.is_empty() {
        return Err(EnvelopeError::EmptyProbes);
    }
    let mut outcome = OrderOutcome::Within;
    let mut prefix = Vec::new();
    multisets(ctx.total(), k + 1, &mut prefix, &mut |vars| {
        for probe in probes {
            if !variable_nest(ctx, vars, apply, probe).is_zero() {
                outcome = OrderOutcome::Exceeded {
                    entries: vars.iter().map(|&v| Poly::var(ctx, v)).collect(),
                    probe: probe.clone(),
                };
                return false;
            }
        }
        true
    });
    Ok(outcome)
}

/// Applies the commutator nest `[…[op, x_{v₀}]…, x_{v_j}]` to a probe,
/// peeling the outermost variable first.
fn variable_nest(ctx: VarCtx, vars: &[usize], apply: &dyn Fn(&Poly) -> Poly, f: &Poly) -> Poly {
    match vars.split_first() {
        None => apply(f),
        Some((&v, rest)) => {
            let xv = Poly::var(ctx, v);
            let first = variable_nest(ctx, rest, apply, &xv.mul(f));
            let second = xv.mul(&variable_nest(ctx, rest, apply, f));
            first.sub(&second)
        }
    }
}

// ---- operators ----

/// A normally ordered differential operator together with its order, read
/// off from the filtration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOp {
    elem: EnvElem,
    order: usize,
}

impl DiffOp {
    /// Wraps a normally ordered element; the order is its word length.
    pub fn new(elem: EnvElem) -> Self {
        let order = elem.filtration_degree();
        DiffOp { elem, order }
    }

    /// The underlying envelope element.
    pub fn elem(&self) -> &EnvElem {
        &self.elem
    }

    /// Declared order bound.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Applies the operator to a base polynomial.
    pub fn apply(&self, env: &Envelope, f: &Poly) -> Poly {
        env.act_on(&self.elem, f)
    }

    /// Composition of operators; the order is additive at worst.
    pub fn compose(&self, env: &Envelope, other: &DiffOp) -> Result<DiffOp, EnvelopeError> {
        let elem = env.mul(&self.elem, &other.elem)?;
        let composed = DiffOp::new(elem);
        debug_assert!(composed.order <= self.order + other.order);
        Ok(composed)
    }

    /// Commutator of operators; drops at least one order.
    pub fn commutator(&self, env: &Envelope, other: &DiffOp) -> Result<DiffOp, EnvelopeError> {
        let elem = env.commutator(&self.elem, &other.elem)?;
        let result = DiffOp::new(elem);
        debug_assert!(
            result.elem.is_zero() || result.order + 1 <= self.order + other.order
        );
        Ok(result)
    }

    /// Principal symbol at order `k`: the leading filtration part as a
    /// symmetric word.  Fails when the operator exceeds order `k`.
    pub fn symbol(&self, env: &Envelope, k: usize) -> Result<SymElem, EnvelopeError> {
        env.gr_projection(&self.elem, k)
    }
}

// ---- symbol calculus ----

/// Poisson bracket of symbols at orders `l1` and `l2`: the commutator of
/// canonical representatives, projected to order `l1 + l2 − 1`.
pub fn poisson_bracket(
    env: &Envelope,
    s1: &SymElem,
    l1: usize,
    s2: &SymElem,
    l2: usize,
) -> Result<SymElem, EnvelopeError> {
    let comm = env.commutator(&s1.representative(), &s2.representative())?;
    env.gr_projection(&comm, (l1 + l2).saturating_sub(1))
}

/// Evaluates an order-`args.len()` representative as a multiderivation:
/// nested multiplication commutators applied to the unit,
/// `([…[P, a₁]…, a_k])(1)`.  The value depends only on the symbol.
pub fn epsilon(env: &Envelope, rep: &EnvElem, args: &[Poly]) -> Result<Poly, EnvelopeError> {
    let mut current = rep.clone();
    for a in args {
        let scalar = EnvElem::scalar(a.clone());
        let left = env.mul(&current, &scalar)?;
        let right = env.mul(&scalar, &current)?;
        current = left.sub(&right);
    }
    Ok(env.act_on(&current, &Poly::one(env.presentation().ctx())))
}

// ---- tests ----
