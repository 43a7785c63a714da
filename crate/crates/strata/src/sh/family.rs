//! Towers of multilinear operations with memoised evaluation.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::exact::{sort_with_sign, BasisElem, Lin, SignFlavor};

/// Which family of defining identities the operations are meant to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Ainfty,
    Linfty,
    AinftyModule,
    LinftyModule,
    LrInfty,
    PoissonLinfty,
}

impl Flavor {
    /// Symmetric flavors may canonicalise memo keys by sorting inputs.
    pub fn is_symmetric(self) -> bool {
        matches!(
            self,
            Flavor::Linfty | Flavor::LinftyModule | Flavor::LrInfty | Flavor::PoissonLinfty
        )
    }
}

/// Requested arity exceeds the family's cap.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("arity {requested} exceeds the operation family's cap {cap}")]
pub struct ArityError {
    pub requested: usize,
    pub cap: usize,
}

/// A family of k-ary multilinear operations of degree `2−k` on basis `B`,
/// defined on basis tuples and extended linearly.
///
/// Evaluations are memoised per tuple; for symmetric flavors the memo key
/// is the sorted tuple and the value is corrected by the alternating Koszul
/// sign of the sort (sound because those evaluators are graded
/// skew-symmetric, which the test suite checks rather than assumes).
pub struct OperationFamily<B: BasisElem> {
    pub flavor: Flavor,
    pub arity_cap: usize,
    eval: Rc<dyn Fn(usize, &[B]) -> Lin<B>>,
    memo: Rc<RefCell<BTreeMap<(usize, Vec<B>), Lin<B>>>>,
}

impl<B: BasisElem> Clone for OperationFamily<B> {
    fn clone(&self) -> Self {
        OperationFamily {
            flavor: self.flavor,
            arity_cap: self.arity_cap,
            eval: Rc::clone(&self.eval),
            memo: Rc::clone(&self.memo),
        }
    }
}

impl<B: BasisElem> fmt::Debug for OperationFamily<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperationFamily")
            .field("flavor", &self.flavor)
            .field("arity_cap", &self.arity_cap)
            .field("memoised", &self.memo.borrow().len())
            .finish()
    }
}

impl<B: BasisElem + 'static> OperationFamily<B> {
    pub fn new(
        flavor: Flavor,
        arity_cap: usize,
        eval: impl Fn(usize, &[B]) -> Lin<B> + 'static,
    ) -> Self {
        OperationFamily {
            flavor,
            arity_cap,
            eval: Rc::new(eval),
            memo: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    /// Evaluate the arity-`k` operation on a basis tuple.
    pub fn op(&self, k: usize, inputs: &[B]) -> Result<Lin<B>, ArityError> {
        if k > self.arity_cap {
            return Err(ArityError { requested: k, cap: self.arity_cap });
        }
        assert_eq!(inputs.len(), k, "arity/input length mismatch");
        if self.flavor.is_symmetric() {
            let items: Vec<(B, i64)> = inputs.iter().map(|b| (b.clone(), b.degree())).collect();
            let (sorted, sign) = sort_with_sign(SignFlavor::Wedge, items, |b| b.clone());
            let key: Vec<B> = sorted.into_iter().map(|(b, _)| b).collect();
            Ok(self.memoised(k, &key).scale(&sign))
        } else {
            Ok(self.memoised(k, inputs))
        }
    }

    fn memoised(&self, k: usize, key: &[B]) -> Lin<B> {
        if let Some(hit) = self.memo.borrow().get(&(k, key.to_vec())) {
            return hit.clone();
        }
        let out = (self.eval)(k, key);
        self.memo.borrow_mut().insert((k, key.to_vec()), out.clone());
        out
    }

    /// Evaluate bypassing the memo table (for memo audits).
    pub fn op_fresh(&self, k: usize, inputs: &[B]) -> Result<Lin<B>, ArityError> {
        if k > self.arity_cap {
            return Err(ArityError { requested: k, cap: self.arity_cap });
        }
        Ok((self.eval)(k, inputs))
    }

    /// Multilinear extension to linear combinations.
    pub fn op_lin(&self, k: usize, inputs: &[Lin<B>]) -> Result<Lin<B>, ArityError> {
        assert_eq!(inputs.len(), k, "arity/input length mismatch");
        let mut acc = Lin::zero();
        let mut tuple: Vec<B> = Vec::with_capacity(k);
        self.expand(k, inputs, &mut tuple, &num::One::one(), &mut acc)?;
        Ok(acc)
    }

    fn expand(
        &self,
        k: usize,
        inputs: &[Lin<B>],
        tuple: &mut Vec<B>,
        coeff: &crate::exact::Rat,
        acc: &mut Lin<B>,
    ) -> Result<(), ArityError> {
        if tuple.len() == k {
            acc.add_assign_scaled(&self.op(k, tuple)?, coeff);
            return Ok(());
        }
        let slot = &inputs[tuple.len()];
        for (b, c) in slot.iter() {
            tuple.push(b.clone());
            self.expand(k, inputs, tuple, &(coeff * c), acc)?;
            tuple.pop();
        }
        Ok(())
    }

    /// Memo keys currently stored (for audits).
    pub fn memo_keys(&self) -> Vec<(usize, Vec<B>)> {
        self.memo.borrow().keys().cloned().collect()
    }
}

/// A defect found while checking a strict unit.
#[derive(Debug, Clone)]
pub struct UnitDefect {
    pub description: String,
}

impl<B: BasisElem + 'static> OperationFamily<B> {
    /// Check that `e` is a strict unit: the binary operation with `e` in
    /// either slot is the identity, and every other arity vanishes when
    /// any input is `e`. Probes arities up to the cap against the supplied
    /// basis elements.
    pub fn check_strict_unit(&self, e: &Lin<B>, probes: &[B]) -> Vec<UnitDefect> {
        let mut defects = Vec::new();
        for x in probes {
            let xl = Lin::basis(x.clone());
            for (label, got) in [
                ("left", self.op_lin(2, &[e.clone(), xl.clone()])),
                ("right", self.op_lin(2, &[xl.clone(), e.clone()])),
            ] {
                match got {
                    Ok(v) if v == xl => {}
                    Ok(v) => defects.push(UnitDefect {
                        description: format!("binary {label} unit fails on {x}: got {v}"),
                    }),
                    Err(e) => defects.push(UnitDefect { description: e.to_string() }),
                }
            }
        }
        for k in (1..=self.arity_cap).filter(|&k| k != 2) {
            for x in probes {
                for slot in 0..k {
                    let mut args: Vec<Lin<B>> = vec![Lin::basis(x.clone()); k];
                    args[slot] = e.clone();
                    match self.op_lin(k, &args) {
                        Ok(v) if v.is_zero() => {}
                        Ok(v) => defects.push(UnitDefect {
                            description: format!(
                                "arity-{k} operation with the unit in slot {slot} on {x} \
                                 should vanish, got {v}"
                            ),
                        }),
                        Err(e) => defects.push(UnitDefect { description: e.to_string() }),
                    }
                }
            }
        }
        defects
    }
}
