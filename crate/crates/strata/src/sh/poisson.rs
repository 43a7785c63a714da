//! Multiderivation towers on a weighted commutative algebra.

use std::rc::Rc;

use crate::exact::{minus_one_pow, BasisElem, Lin};

use super::family::{ArityError, OperationFamily};

/// A Lie-type tower `λ` on a graded commutative algebra `B` together with
/// the product of `B` and a weight function, for checking that each `λ_k`
/// is a multiderivation of the expected weight.
pub struct PoissonStructure<B: BasisElem> {
    pub lambda: OperationFamily<B>,
    pub mul: Rc<dyn Fn(&B, &B) -> Lin<B>>,
    pub weight: Rc<dyn Fn(&B) -> i64>,
}

impl<B: BasisElem> Clone for PoissonStructure<B> {
    fn clone(&self) -> Self {
        PoissonStructure {
            lambda: self.lambda.clone(),
            mul: Rc::clone(&self.mul),
            weight: Rc::clone(&self.weight),
        }
    }
}

impl<B: BasisElem + 'static> PoissonStructure<B> {
    pub fn new(
        lambda: OperationFamily<B>,
        mul: impl Fn(&B, &B) -> Lin<B> + 'static,
        weight: impl Fn(&B) -> i64 + 'static,
    ) -> Self {
        PoissonStructure { lambda, mul: Rc::new(mul), weight: Rc::new(weight) }
    }
}

/// Residual of the derivation rule for `λ_k` in the slot holding the
/// product `y′·y″` (the slot index is `before.len()`):
///
/// `λ_k(…, y′y″, …) − (−1)^{ȳ″(x̄_{s+1}+⋯+x̄_k)} λ_k(…, y′, …)·y″
///  − (−1)^{ȳ′((2−k)+x̄₁+⋯+x̄_{s−1})} y′·λ_k(…, y″, …)`.
pub fn poisson_multiderivation_residual<B: BasisElem + 'static>(
    ps: &PoissonStructure<B>,
    before: &[B],
    yp: &B,
    ypp: &B,
    after: &[B],
) -> Result<Lin<B>, ArityError> {
    let k = before.len() + 1 + after.len();
    let product = (ps.mul)(yp, ypp);
    let mut args: Vec<Lin<B>> = before.iter().cloned().map(Lin::basis).collect();
    args.push(product);
    args.extend(after.iter().cloned().map(Lin::basis));
    let mut acc = ps.lambda.op_lin(k, &args)?;

    let mut slot_args: Vec<B> = before.to_vec();
    slot_args.push(yp.clone());
    slot_args.extend_from_slice(after);
    let after_deg: i64 = after.iter().map(BasisElem::degree).sum();
    let sign1 = minus_one_pow(ypp.degree() * after_deg);
    for (t, c) in ps.lambda.op(k, &slot_args)?.iter() {
        acc.add_assign_scaled(&(ps.mul)(t, ypp), &(-(&sign1 * c)));
    }

    slot_args[before.len()] = ypp.clone();
    let before_deg: i64 = before.iter().map(BasisElem::degree).sum();
    let sign2 = minus_one_pow(yp.degree() * ((2 - k as i64) + before_deg));
    for (t, c) in ps.lambda.op(k, &slot_args)?.iter() {
        acc.add_assign_scaled(&(ps.mul)(yp, t), &(-(&sign2 * c)));
    }
    Ok(acc)
}

/// The part of `λ_k(x₁,…,x_k)` lying outside the expected weight
/// `w(x₁)+⋯+w(x_k) − k + 1`. Zero means the weight rule holds.
pub fn poisson_weight_residual<B: BasisElem + 'static>(
    ps: &PoissonStructure<B>,
    k: usize,
    inputs: &[B],
) -> Result<Lin<B>, ArityError> {
    let expected: i64 = inputs.iter().map(|b| (ps.weight)(b)).sum::<i64>() - k as i64 + 1;
    let out = ps.lambda.op(k, inputs)?;
    Ok(out
        .iter()
        .filter(|(b, _)| (ps.weight)(b) != expected)
        .map(|(b, c)| (b.clone(), c.clone()))
        .collect())
}
