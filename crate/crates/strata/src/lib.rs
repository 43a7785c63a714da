//! Exact-arithmetic engine for homological perturbation and homotopy
//! transfer of strong-homotopy algebraic structures.
//!
//! Everything is computed over the rationals with arbitrary precision; no
//! floating-point number appears anywhere in this crate. The crate is
//! organised bottom-up:
//!
//! * [`exact`] — rationals, sparse polynomials, Koszul signs, unshuffles;
//! * [`homotopy`] — chain complexes, contractions, homological perturbation;
//! * [`sh`] — residual checkers for strong-homotopy structures
//!   (associative, Lie, their modules, Lie–Rinehart, Poisson);
//! * [`transfer`] — homotopy transfer of differential graded algebra and
//!   Lie structures along a contraction, with memoised side maps;
//! * [`envelope`] — universal envelopes of graded Lie–Rinehart algebras,
//!   normal ordering, symbols and their Poisson bracket;
//! * [`foliation`] — the concrete geometric model: leafwise forms of a
//!   polynomial foliation chart, adapted connection, normal differential
//!   operators, and the full transfer pipeline.
//!
//! Linear data is kept in ordered maps throughout, so every computation is
//! deterministic; randomised checks are seeded explicitly.

pub mod exact;
pub mod fault;
pub mod homotopy;
pub mod sh;
pub mod transfer;
pub mod envelope;
pub mod foliation;
