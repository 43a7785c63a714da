//! Exact scalar arithmetic and combinatorial kernels.
//!
//! Everything downstream routes its sign bookkeeping through [`koszul`] and
//! its scalar arithmetic through [`Rat`]; there is exactly one place where a
//! graded swap produces a sign.

mod koszul;
mod lin;
mod multi_index;
mod poly;
mod rat;
mod unshuffle;

pub use koszul::{koszul_sign, sort_with_sign, swap_sign, SignFlavor};
pub use lin::{BasisElem, Lin};
pub use multi_index::{IndexKind, MultiIndex};
pub use poly::{Poly, PolyParseError, VarCtx};
pub use rat::{binomial, factorial, minus_one_pow, multinomial, rat, ratq, Rat};
pub use unshuffle::{multiset_arrangements, strict_unshuffles, unshuffles, Unshuffle};
