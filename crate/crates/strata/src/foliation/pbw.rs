//! Symmetrization between graded-commutative symbols and normal-ordered
//! operators: the averaged-arrangement map, its triangular inverse, and the
//! symbol-side composition product they transport.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use num::One;

use super::basis::{j_include_basis, p_filter, NormalBasis, OpBasis};
use super::geometry::PolyFoliation;
use super::operator::{compose_lin, delta_comp_lin, normal_order, Letter};
use crate::exact::{factorial, multiset_arrangements, rat, Lin, Rat};

/// Memoized symmetrization data for one chart: the arrangement-averaged map
/// from symbols to operators, its inverse, and the induced composition
/// product on symbols.
pub struct PbwMaps {
    f: Rc<PolyFoliation>,
    fwd: RefCell<BTreeMap<OpBasis, Lin<OpBasis>>>,
    inv: RefCell<BTreeMap<OpBasis, Lin<OpBasis>>>,
    comp: RefCell<BTreeMap<(OpBasis, OpBasis), Lin<OpBasis>>>,
}

impl PbwMaps {
    /// Fresh maps over a chart.
    pub fn new(f: &Rc<PolyFoliation>) -> Self {
        PbwMaps {
            f: Rc::clone(f),
            fwd: RefCell::new(BTreeMap::new()),
            inv: RefCell::new(BTreeMap::new()),
            comp: RefCell::new(BTreeMap::new()),
        }
    }

    /// The underlying chart.
    pub fn foliation(&self) -> &Rc<PolyFoliation> {
        &self.f
    }

    /// Symmetrization: average the covariant letters of a symbol over all
    /// arrangements and normal-order each one.
    pub fn pbw(&self, b: &OpBasis) -> Lin<OpBasis> {
        if let Some(hit) = self.fwd.borrow().get(b) {
            return hit.clone();
        }
        let mut prefix = Vec::new();
        if b.exps.iter().any(|&e| e > 0) {
            prefix.push(Letter::M(b.exps.clone()));
        }
        prefix.extend(b.dx.entries().iter().map(|&k| Letter::E(k)));
        prefix.extend(b.iw.entries().iter().map(|&i| Letter::I(i)));
        let mut covariant: Vec<Letter> =
            b.dw.entries().iter().map(|&i| Letter::D(i)).collect();
        covariant.extend(b.tw.entries().iter().map(|&a| Letter::T(a)));

        let out = if covariant.len() <= 1 {
            let mut w = prefix;
            w.extend(covariant);
            normal_order(&self.f, Rat::one(), w)
        } else {
            // Each distinct arrangement stands for (∏ multiplicities!) of
            // the n! orderings being averaged.
            let mut mult_prod = Rat::one();
            let mut run = 1usize;
            for s in 1..covariant.len() {
                if covariant[s] == covariant[s - 1] {
                    run += 1;
                } else {
                    mult_prod *= factorial(run);
                    run = 1;
                }
            }
            mult_prod *= factorial(run);
            let weight = mult_prod / factorial(covariant.len());
            let mut acc = Lin::zero();
            for arr in multiset_arrangements(&covariant) {
                let mut w = prefix.clone();
                w.extend(arr);
                acc.add_assign_scaled(&normal_order(&self.f, Rat::one(), w), &weight);
            }
            acc
        };
        self.fwd.borrow_mut().insert(b.clone(), out.clone());
        out
    }

    /// Linear extension of [`PbwMaps::pbw`].
    pub fn pbw_lin(&self, l: &Lin<OpBasis>) -> Lin<OpBasis> {
        l.map(|b| self.pbw(b))
    }

    /// Inverse symmetrization, by peeling the strictly-lower-order tail.
    pub fn pbw_inv(&self, b: &OpBasis) -> Lin<OpBasis> {
        if let Some(hit) = self.inv.borrow().get(b) {
            return hit.clone();
        }
        let mut tail = self.pbw(b);
        tail.add_assign_scaled(&Lin::basis(b.clone()), &rat(-1));
        debug_assert!(
            tail.iter().all(|(t, _)| t.order() < b.order()),
            "symmetrization tail is not strictly lower order at {b}"
        );
        let mut out = Lin::basis(b.clone());
        out.add_assign_scaled(&self.pbw_inv_lin(&tail), &rat(-1));
        self.inv.borrow_mut().insert(b.clone(), out.clone());
        out
    }

    /// Linear extension of [`PbwMaps::pbw_inv`].
    pub fn pbw_inv_lin(&self, l: &Lin<OpBasis>) -> Lin<OpBasis> {
        l.map(|b| self.pbw_inv(b))
    }

    /// Composition product transported to symbols, memoized per basis pair.
    pub fn s_compose_basis(&self, a: &OpBasis, b: &OpBasis) -> Lin<OpBasis> {
        let key = (a.clone(), b.clone());
        if let Some(hit) = self.comp.borrow().get(&key) {
            return hit.clone();
        }
        let composed = compose_lin(&self.f, &self.pbw(a), &self.pbw(b));
        let out = self.pbw_inv_lin(&composed);
        self.comp.borrow_mut().insert(key, out.clone());
        out
    }

    /// Bilinear extension of [`PbwMaps::s_compose_basis`].
    pub fn s_compose(&self, a: &Lin<OpBasis>, b: &Lin<OpBasis>) -> Lin<OpBasis> {
        let mut out = Lin::zero();
        for (ba, ca) in a.iter() {
            for (bb, cb) in b.iter() {
                out.add_assign_scaled(&self.s_compose_basis(ba, bb), &(ca.clone() * cb.clone()));
            }
        }
        out
    }

    /// The differential transported to symbols: conjugate the graded
    /// commutator with the leafwise differential by the symmetrization.
    pub fn delta_comp_s(&self, b: &OpBasis) -> Lin<OpBasis> {
        self.pbw_inv_lin(&delta_comp_lin(&self.f, &self.pbw(b)))
    }

    /// Symmetrization conjugated by projection and inclusion; the identity
    /// on normal-operator symbols.
    pub fn underline_pbw(&self, nb: &NormalBasis) -> Lin<NormalBasis> {
        p_filter(&self.pbw(&j_include_basis(nb)))
    }
}

/// The terms of an operator combination sitting at one filtration order.
pub fn order_component(l: &Lin<OpBasis>, ord: i64) -> Lin<OpBasis> {
    l.iter()
        .filter(|(b, _)| b.order() == ord)
        .map(|(b, c)| (b.clone(), c.clone()))
        .collect()
}

/// The terms of a symbol combination sitting at one filtration order.
pub fn order_component_normal(l: &Lin<NormalBasis>, ord: i64) -> Lin<NormalBasis> {
    l.iter()
        .filter(|(b, _)| b.order() == ord)
        .map(|(b, c)| (b.clone(), c.clone()))
        .collect()
}

// ---- tests ----
