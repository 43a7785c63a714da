//! Residuals of the defining identities for associative and Lie towers.

use num::One;

use crate::exact::{koszul_sign, minus_one_pow, unshuffles, BasisElem, Lin, Rat, SignFlavor};
use crate::fault::{armed, Fault};

use super::family::{ArityError, OperationFamily};
use super::sum2::Sum2;

/// Left-hand side of the arity-`k` associator-tower identity:
///
/// `Σ_{i+j=k, i≥1} (−1)^{ij} Σ_{ℓ=0}^{j} (−1)^{ℓ(i+1)+i(x̄₁+⋯+x̄_ℓ)}
///  op_{j+1}(x₁,…,x_ℓ, op_i(x_{ℓ+1},…,x_{ℓ+i}), x_{ℓ+i+1},…,x_k)`.
///
/// Zero output means the identity holds on this tuple.
pub fn stasheff_residual<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
    k: usize,
    inputs: &[B],
) -> Result<Lin<B>, ArityError> {
    assert_eq!(inputs.len(), k, "arity/input length mismatch");
    let degs: Vec<i64> = inputs.iter().map(BasisElem::degree).collect();
    let mut acc: Lin<B> = Lin::zero();
    for i in 1..=k {
        let j = k - i;
        // The seeded defect replaces the product in the exponent by a sum,
        // which changes the sign of some blocks relative to others.
        let outer = if armed(Fault::StasheffOuter) {
            minus_one_pow((i + j) as i64)
        } else {
            minus_one_pow((i * j) as i64)
        };
        for l in 0..=j {
            let prefix_deg: i64 = degs[..l].iter().sum();
            let sign = &outer
                * minus_one_pow((l * (i + 1)) as i64 + (i as i64) * prefix_deg);
            let inner = family.op(i, &inputs[l..l + i])?;
            for (b, c) in inner.iter() {
                let mut args: Vec<B> = Vec::with_capacity(j + 1);
                args.extend_from_slice(&inputs[..l]);
                args.push(b.clone());
                args.extend_from_slice(&inputs[l + i..]);
                let outer_val = family.op(j + 1, &args)?;
                acc.add_assign_scaled(&outer_val, &(&sign * c));
            }
        }
    }
    Ok(acc)
}

/// Left-hand side of the arity-`k` generalized Jacobi identity:
///
/// `Σ_{i+j=k, i≥1} (−1)^{ij} Σ_{σ} χ(σ,x)
///  op_{j+1}(op_i(x_{σ(1)},…,x_{σ(i)}), x_{σ(i+1)},…,x_{σ(k)})`
///
/// with `σ` running over the `(i,j)`-unshuffles.
pub fn linfty_residual<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
    k: usize,
    inputs: &[B],
) -> Result<Lin<B>, ArityError> {
    assert_eq!(inputs.len(), k, "arity/input length mismatch");
    let degs: Vec<i64> = inputs.iter().map(BasisElem::degree).collect();
    let mut acc: Lin<B> = Lin::zero();
    for i in 1..=k {
        let j = k - i;
        let outer = minus_one_pow((i * j) as i64);
        for sigma in unshuffles(&[i, j]) {
            let chi = koszul_sign(SignFlavor::Wedge, &sigma, &degs);
            let inner_args: Vec<B> = sigma[..i].iter().map(|&s| inputs[s].clone()).collect();
            let inner = family.op(i, &inner_args)?;
            let sign = &outer * chi;
            for (b, c) in inner.iter() {
                let mut args: Vec<B> = Vec::with_capacity(j + 1);
                args.push(b.clone());
                args.extend(sigma[i..].iter().map(|&s| inputs[s].clone()));
                let outer_val = family.op(j + 1, &args)?;
                acc.add_assign_scaled(&outer_val, &(&sign * c));
            }
        }
    }
    Ok(acc)
}

/// Residual of the direct-sum identity on a tuple of tagged inputs,
/// dispatched on the flavor of the assembled family.
pub fn module_residual<A, M>(
    oplus: &OperationFamily<Sum2<A, M>>,
    k: usize,
    inputs: &[Sum2<A, M>],
) -> Result<Lin<Sum2<A, M>>, ArityError>
where
    A: BasisElem + 'static,
    M: BasisElem + 'static,
{
    if oplus.flavor.is_symmetric() {
        linfty_residual(oplus, k, inputs)
    } else {
        stasheff_residual(oplus, k, inputs)
    }
}

/// Skew-symmetrisation: `(𝖠op)_k(x₁,…,x_k) := Σ_{σ∈S_k} χ(σ,x)
/// op_k(x_{σ(1)},…,x_{σ(k)})`.
pub fn skew_symmetrize<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
) -> OperationFamily<B> {
    let inner = family.clone();
    OperationFamily::new(
        super::family::Flavor::Linfty,
        family.arity_cap,
        move |k, xs: &[B]| {
            let degs: Vec<i64> = xs.iter().map(BasisElem::degree).collect();
            let mut acc = Lin::zero();
            for sigma in unshuffles(&vec![1; k]) {
                let chi = koszul_sign(SignFlavor::Wedge, &sigma, &degs);
                let args: Vec<B> = sigma.iter().map(|&s| xs[s].clone()).collect();
                let val = inner
                    .op(k, &args)
                    .expect("skew-symmetrisation shares the arity cap");
                acc.add_assign_scaled(&val, &chi);
            }
            acc
        },
    )
}

/// Defect of graded skew-symmetry under transposing `pos` and `pos+1`:
/// `op(x) − χ(swap)·op(swapped x)`.
pub fn check_skew_symmetry<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
    k: usize,
    inputs: &[B],
    pos: usize,
) -> Result<Lin<B>, ArityError> {
    assert!(pos + 1 < k, "transposition position out of range");
    let direct = family.op_fresh(k, inputs)?;
    let mut swapped = inputs.to_vec();
    swapped.swap(pos, pos + 1);
    let chi = crate::exact::swap_sign(
        SignFlavor::Wedge,
        inputs[pos].degree(),
        inputs[pos + 1].degree(),
    );
    let other = family.op_fresh(k, &swapped)?;
    let mut acc = direct;
    acc.add_assign_scaled(&other, &(-Rat::one() * chi));
    Ok(acc)
}
