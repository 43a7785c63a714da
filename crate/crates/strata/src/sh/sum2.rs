//! Tagged direct sums: assembling algebra-and-module data into one family.

use std::fmt;
use std::rc::Rc;

use num::One;

use crate::exact::{swap_sign, BasisElem, Lin, Rat, SignFlavor};

use super::family::{Flavor, OperationFamily};

/// Basis of a direct sum: an algebra element or a module element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sum2<A, M> {
    Alg(A),
    Mod(M),
}

impl<A: fmt::Display, M: fmt::Display> fmt::Display for Sum2<A, M> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sum2::Alg(a) => write!(f, "{a}"),
            Sum2::Mod(m) => write!(f, "⟨{m}⟩"),
        }
    }
}

impl<A: BasisElem, M: BasisElem> BasisElem for Sum2<A, M> {
    fn degree(&self) -> i64 {
        match self {
            Sum2::Alg(a) => a.degree(),
            Sum2::Mod(m) => m.degree(),
        }
    }
}

fn embed_alg<A: BasisElem, M: BasisElem>(l: &Lin<A>) -> Lin<Sum2<A, M>> {
    l.iter().map(|(b, c)| (Sum2::Alg(b.clone()), c.clone())).collect()
}

fn embed_mod<A: BasisElem, M: BasisElem>(l: &Lin<M>) -> Lin<Sum2<A, M>> {
    l.iter().map(|(b, c)| (Sum2::Mod(b.clone()), c.clone())).collect()
}

/// Assemble an associative-type tower on `A ⊕ M` from the algebra tower and
/// module operations `mu(k, a₁..a_{k−1} | m)`.
///
/// The extension is literal: all-algebra tuples evaluate the algebra tower;
/// a module element in the last slot (and nowhere else) evaluates `mu`; any
/// module element in one of the first `k−1` slots gives zero.
pub fn ainfty_module_family<A, M>(
    alpha: &OperationFamily<A>,
    mu: Rc<dyn Fn(usize, &[A], &M) -> Lin<M>>,
) -> OperationFamily<Sum2<A, M>>
where
    A: BasisElem + 'static,
    M: BasisElem + 'static,
{
    let alpha = alpha.clone();
    OperationFamily::new(Flavor::AinftyModule, alpha.arity_cap, move |k, xs: &[Sum2<A, M>]| {
        let mods = xs.iter().filter(|x| matches!(x, Sum2::Mod(_))).count();
        match mods {
            0 => {
                let as_: Vec<A> = xs
                    .iter()
                    .map(|x| match x {
                        Sum2::Alg(a) => a.clone(),
                        Sum2::Mod(_) => unreachable!(),
                    })
                    .collect();
                embed_alg(&alpha.op(k, &as_).expect("caps are shared"))
            }
            1 => match xs.last() {
                Some(Sum2::Mod(m)) => {
                    let prefix: Vec<A> = xs[..k - 1]
                        .iter()
                        .map(|x| match x {
                            Sum2::Alg(a) => a.clone(),
                            Sum2::Mod(_) => unreachable!(),
                        })
                        .collect();
                    embed_mod(&mu(k, &prefix, m))
                }
                _ => Lin::zero(),
            },
            _ => Lin::zero(),
        }
    })
}

/// Assemble a Lie-type tower on `A ⊕ M` from the Lie tower and module
/// operations `nu(k, a₁..a_{k−1} | m)`.
///
/// More than one module entry gives zero; a single module entry anywhere is
/// moved to the last slot with the alternating Koszul sign first.
pub fn linfty_module_family<A, M>(
    lambda: &OperationFamily<A>,
    nu: Rc<dyn Fn(usize, &[A], &M) -> Lin<M>>,
) -> OperationFamily<Sum2<A, M>>
where
    A: BasisElem + 'static,
    M: BasisElem + 'static,
{
    let lambda = lambda.clone();
    OperationFamily::new(Flavor::LinftyModule, lambda.arity_cap, move |k, xs: &[Sum2<A, M>]| {
        let mods = xs.iter().filter(|x| matches!(x, Sum2::Mod(_))).count();
        match mods {
            0 => {
                let as_: Vec<A> = xs
                    .iter()
                    .map(|x| match x {
                        Sum2::Alg(a) => a.clone(),
                        Sum2::Mod(_) => unreachable!(),
                    })
                    .collect();
                embed_alg(&lambda.op(k, &as_).expect("caps are shared"))
            }
            1 => {
                let pos = xs.iter().position(|x| matches!(x, Sum2::Mod(_))).unwrap();
                let Sum2::Mod(m) = &xs[pos] else { unreachable!() };
                let mut sign = Rat::one();
                for x in &xs[pos + 1..] {
                    sign *= swap_sign(SignFlavor::Wedge, m.degree(), x.degree());
                }
                let prefix: Vec<A> = xs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != pos)
                    .map(|(_, x)| match x {
                        Sum2::Alg(a) => a.clone(),
                        Sum2::Mod(_) => unreachable!(),
                    })
                    .collect();
                embed_mod(&nu(k, &prefix, m)).scale(&sign)
            }
            _ => Lin::zero(),
        }
    })
}
