//! Strong-homotopy structures and exact residual checkers.
//!
//! An [`OperationFamily`] is a tower of k-ary multilinear operations of
//! degree `2−k` on one basis type. The checkers in [`residual`] evaluate
//! the defining identities (associator tower, generalized Jacobi, module
//! and Lie–Rinehart couplings, multiderivation and weight rules) exactly;
//! a zero residual on a tuple means the identity holds there.

mod family;
mod lr;
mod poisson;
mod residual;
mod sum2;
mod table;

pub use family::{ArityError, Flavor, OperationFamily, UnitDefect};
pub use lr::{LrResidualReport, LrStructure};
pub use poisson::{poisson_multiderivation_residual, poisson_weight_residual, PoissonStructure};
pub use residual::{
    check_skew_symmetry, linfty_residual, module_residual, skew_symmetrize, stasheff_residual,
};
pub use sum2::{ainfty_module_family, linfty_module_family, Sum2};
pub use table::{export_table, import_table, StructureTable, TableBasis};
