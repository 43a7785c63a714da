//! Polynomial foliation charts and the machinery built over them: graded
//! bases, the adapted connection, operator rewriting, the symmetrization
//! isomorphism, the symbol contraction, and the transferred operation tower.

mod basis;
mod contraction;
mod geometry;
mod operator;
mod pbw;
mod pipeline;
mod recursion;
mod scenario;

pub use basis::{
    antisym_words, dbar_form, dbar_form_lin, enumerate_forms, enumerate_normals, enumerate_ops,
    form_from_poly, form_mul, form_mul_lin, form_to_normal, iota_form, j_include, j_include_basis,
    monomials, normal_to_form, p_filter, p_filter_basis, partial_form, poly_times_form,
    poly_times_form_lin, sym_op_mul, sym_op_mul_lin, sym_words, wedge_form, FoliatedForm,
    FoliatedOperator, FormBasis, NormalBasis, NormalOperator, OpBasis,
};
pub use geometry::{
    build_adapted_connection, build_foliation, field_commutator, AdaptedConnection, Coframe,
    FoliationError, Frame, PolyFoliation,
};
pub use operator::{
    apply_op_lin, apply_op_to_form, commutator_lin, compose, compose_lin, dbar_normal,
    dbar_normal_lin, dbar_op_lin, dbar_star, delta_comp, delta_comp_lin, frame_action_on_normal,
    t_on_form, t_on_form_lin,
};
pub use contraction::{
    decompose_derivation, delta_s, delta_small, derivation_from_parts, h_s, reassembly_defects,
    symmetric_contraction, DerivationEval, DerivationParts,
};
pub use pbw::{order_component, order_component_normal, PbwMaps};
pub use pipeline::{
    run_pipeline, ModuleBracketTransfer, ModuleTransfer, Pipeline, PipelineCaps,
};
pub use recursion::{
    circledast_expansion, closed_form_alpha, order_drop_product, two_drop_display_ratio,
    ClosedForm, TopRecursion,
};
pub use scenario::{
    available_checks, run_scenario, CheckRecord, CheckStatus, Report, Scenario, ScenarioCaps,
};
