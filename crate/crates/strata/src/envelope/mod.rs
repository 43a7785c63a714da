//! Differential operators over graded commutative algebras and universal
//! envelopes of presented Lie–Rinehart algebras via normal-ordering.

mod algebra;
mod presentation;
mod rewrite;
mod weyl;

pub use algebra::{
    order_test_finite, AlgebraDescriptor, AlgebraReport, AlgebraShapeError, GradedAlgebra, GB,
};
pub use presentation::{
    GenLin, GeneratorSpec, LrPresentation, PresentationError, PresentationFile,
    PresentationReport,
};
pub use rewrite::{
    EnvElem, Envelope, EnvelopeError, RawLetter, RawWord, Strategy, SymElem, REWRITE_GUARD,
};
pub use weyl::{
    default_probes, epsilon, monomial_probes, order_test, poisson_bracket, weyl_presentation,
    DiffOp,
};
