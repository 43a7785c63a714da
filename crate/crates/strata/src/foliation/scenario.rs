//! Declarative chart scenarios, the verification-check catalogue, and
//! deterministic machine-readable reports.

use std::cell::RefCell;
use std::rc::Rc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::{
    dbar_form, dbar_form_lin, enumerate_forms, enumerate_normals, enumerate_ops, p_filter,
    FormBasis, NormalBasis, OpBasis,
};
use super::contraction::{
    decompose_derivation, derivation_from_parts, reassembly_defects, symmetric_contraction,
    DerivationEval,
};
use super::geometry::{
    build_adapted_connection, build_foliation, field_commutator, FoliationError, Frame,
    PolyFoliation,
};
use super::operator::{
    apply_op_lin, apply_op_to_form, commutator_lin, compose, compose_lin, dbar_normal,
    dbar_normal_lin, dbar_op_lin, dbar_star,
};
use super::pbw::order_component_normal;
use super::pipeline::{run_pipeline, Pipeline, PipelineCaps};
use super::recursion::{circledast_expansion, closed_form_alpha, order_drop_product, ClosedForm,
    TopRecursion};
use crate::exact::{BasisElem, Lin};
use crate::homotopy::verify_contraction;
use crate::sh::{module_residual, stasheff_residual, ArityError, Sum2};

// ---- scenario description ----

fn default_arity() -> usize {
    5
}

fn default_order() -> usize {
    3
}

fn default_degree() -> u32 {
    4
}

/// Size limits for a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCaps {
    /// Highest arity of the transferred operations.
    #[serde(default = "default_arity")]
    pub max_arity: usize,
    /// Highest operator order enumerated for probe bases.
    #[serde(default = "default_order")]
    pub max_order: usize,
    /// Highest polynomial degree enumerated for probe bases.
    #[serde(default = "default_degree")]
    pub max_degree: u32,
}

impl Default for ScenarioCaps {
    fn default() -> Self {
        ScenarioCaps {
            max_arity: default_arity(),
            max_order: default_order(),
            max_degree: default_degree(),
        }
    }
}

impl From<ScenarioCaps> for PipelineCaps {
    fn from(c: ScenarioCaps) -> Self {
        PipelineCaps {
            max_arity: c.max_arity,
            max_order: c.max_order,
            max_degree: c.max_degree,
        }
    }
}

/// Declarative description of a chart and the checks to run over it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    /// Display name used in the report.
    pub name: String,
    /// Leaf dimension.
    pub n: usize,
    /// Transverse dimension.
    pub m: usize,
    /// Frame coefficient table: `m` rows of `n` polynomial strings.
    pub v_table: Vec<Vec<String>>,
    /// Size limits; defaults apply per field.
    #[serde(default)]
    pub caps: ScenarioCaps,
    /// Check names to run; empty means the full catalogue.
    #[serde(default)]
    pub checks: Vec<String>,
    /// Seed for the sampled probe tuples.
    #[serde(default)]
    pub seed: u64,
}

// ---- report types ----

/// Outcome of a single check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
}

/// One line of a verification report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Catalogue name of the check.
    pub name: String,
    /// The property the check verifies, in one sentence.
    pub property: String,
    /// Whether the property held on every probe.
    pub status: CheckStatus,
    /// Rendering of the first offending probe, when the check failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    /// Wall-clock duration, present only when timings were requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_micros: Option<u64>,
}

/// Full outcome of a scenario run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    /// Scenario display name.
    pub scenario: String,
    /// Seed the probe tuples were drawn with.
    pub seed: u64,
    /// Size limits the run used.
    pub caps: ScenarioCaps,
    /// One record per executed check, in catalogue order.
    pub records: Vec<CheckRecord>,
    /// Number of records with passing status.
    pub passed: usize,
    /// Number of records with failing status.
    pub failed: usize,
}

// ---- check context ----

struct CheckCtx {
    f: Rc<PolyFoliation>,
    caps: PipelineCaps,
    seed: u64,
    pipeline: RefCell<Option<Rc<Pipeline>>>,
}

impl CheckCtx {
    fn pipeline(&self) -> Result<Rc<Pipeline>, FoliationError> {
        if let Some(p) = self.pipeline.borrow().as_ref() {
            return Ok(Rc::clone(p));
        }
        let p = Rc::new(run_pipeline(&self.f, self.caps)?);
        *self.pipeline.borrow_mut() = Some(Rc::clone(&p));
        Ok(p)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(salt))
    }

    fn probe_degree(&self) -> u32 {
        self.caps.max_degree.min(2)
    }

    fn probe_order(&self) -> usize {
        self.caps.max_order.min(2)
    }
}

fn cap_error(e: ArityError) -> FoliationError {
    FoliationError::ArityCap { arity: e.requested, cap: e.cap }
}

fn pick_many<T: Clone>(rng: &mut ChaCha8Rng, pool: &[T], count: usize) -> Vec<T> {
    (0..count).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect()
}

fn tuple_label<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

type CheckOutcome = Result<Option<String>, FoliationError>;
type CheckFn = fn(&CheckCtx) -> CheckOutcome;

// ---- individual checks ----

fn check_commutation_table(cx: &CheckCtx) -> CheckOutcome {
    let f = &cx.f;
    for a in 0..f.m() {
        for b in 0..f.m() {
            let comm = field_commutator(
                f.ctx(),
                &f.frame_field_full(Frame::Trans(a)),
                &f.frame_field_full(Frame::Trans(b)),
            );
            let (leaf, trans) = f.frame_expand(&comm);
            if let Some(beta) = trans.iter().position(|p| !p.is_zero()) {
                return Ok(Some(format!(
                    "commutator of frame directions {}/{} leaves the leaf distribution in direction {}",
                    a + 1,
                    b + 1,
                    beta + 1
                )));
            }
            for (i, p) in leaf.iter().enumerate() {
                if p != f.r(a, b, i) {
                    return Ok(Some(format!(
                        "curvature entry ({},{},{}) disagrees with the frame commutator",
                        a + 1,
                        b + 1,
                        i + 1
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn check_connection_axioms(cx: &CheckCtx) -> CheckOutcome {
    let conn = build_adapted_connection(&cx.f)?;
    Ok(conn.verify_adapted().into_iter().next())
}

fn check_dbar_carriers(cx: &CheckCtx) -> CheckOutcome {
    let f = &cx.f;
    let ctx = f.ctx();
    for b in enumerate_forms(ctx, cx.probe_degree()) {
        if !dbar_form_lin(&dbar_form(&b)).is_zero() {
            return Ok(Some(format!("leafwise differential fails to square to zero on {b}")));
        }
    }
    let dbar_word = dbar_op_lin(f);
    for alpha in 0..f.m() {
        let t = Lin::basis(OpBasis::transverse_letter(ctx, alpha as u32));
        if !commutator_lin(f, &dbar_word, &t).is_zero() {
            return Ok(Some(format!(
                "leafwise differential fails to commute with frame letter {}",
                alpha + 1
            )));
        }
    }
    for b in enumerate_normals(ctx, cx.probe_degree(), cx.probe_order()) {
        if dbar_normal(f, &b) != dbar_star(f, &b) {
            return Ok(Some(format!(
                "normal-symbol differential disagrees with its conjugated form on {b}"
            )));
        }
        if !dbar_normal_lin(f, &dbar_normal(f, &b)).is_zero() {
            return Ok(Some(format!(
                "normal-symbol differential fails to square to zero on {b}"
            )));
        }
    }
    Ok(None)
}

fn check_derivation_split(cx: &CheckCtx) -> CheckOutcome {
    use std::rc::Rc as StdRc;
    let f = &cx.f;
    let ctx = f.ctx();
    let mut rng = cx.rng(0x0de1);
    let pool = enumerate_forms(ctx, 1);
    let pick = |deg: i64, rng: &mut ChaCha8Rng| -> Lin<FormBasis> {
        let mut out = Lin::zero();
        for b in &pool {
            if b.degree() == deg && rng.gen_range(0..3) == 0 {
                out.add_term(b.clone(), crate::exact::rat(rng.gen_range(-2..3)));
            }
        }
        out
    };
    for degree in [0i64, 1] {
        let u: Vec<_> = (0..f.n()).map(|_| pick(degree + 1, &mut rng)).collect();
        let v: Vec<_> = (0..f.n()).map(|_| pick(degree, &mut rng)).collect();
        let w: Vec<_> = (0..f.m()).map(|_| pick(degree, &mut rng)).collect();
        let d = derivation_from_parts(f, &u, &v, &w, degree);
        let parts = match decompose_derivation(f, &d, 2) {
            Ok(p) => p,
            Err(e) => {
                return Ok(Some(format!("splitting a degree-{degree} derivation failed: {e}")))
            }
        };
        if parts.u != u || parts.v != v || parts.w != w {
            return Ok(Some(format!(
                "recovered parts drifted from the generating parts at degree {degree}"
            )));
        }
        if let Some(defect) = reassembly_defects(f, &d, &parts, 2).into_iter().next() {
            return Ok(Some(defect));
        }
    }
    let ident = DerivationEval {
        degree: 0,
        eval: StdRc::new(|b: &FormBasis| Lin::basis(b.clone())),
    };
    if decompose_derivation(f, &ident, 2).is_ok() {
        return Ok(Some("the identity map was accepted as a derivation".into()));
    }
    Ok(None)
}

fn first_contraction_failure(
    con: &crate::homotopy::Contraction<OpBasis, NormalBasis>,
    cx: &CheckCtx,
) -> Option<String> {
    let ctx = cx.f.ctx();
    let big = enumerate_ops(ctx, cx.probe_degree(), cx.probe_order());
    let small = enumerate_normals(ctx, cx.probe_degree(), cx.probe_order());
    let report = verify_contraction(con, &big, &small);
    let first = report.failures().next().map(|check| match &check.counterexample {
        Some(w) => format!("{} fails: {}", check.name, w),
        None => format!("{} fails", check.name),
    });
    first
}

fn check_base_contraction(cx: &CheckCtx) -> CheckOutcome {
    Ok(first_contraction_failure(&symmetric_contraction(), cx))
}

fn check_symbol_contraction(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    Ok(first_contraction_failure(pl.transfer().contraction(), cx))
}

fn check_normal_order_iso(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let pm = pl.pm();
    let ctx = cx.f.ctx();
    for b in enumerate_ops(ctx, 1, cx.probe_order()) {
        let image = pm.pbw(&b);
        if pm.pbw_inv_lin(&image) != Lin::basis(b.clone()) {
            return Ok(Some(format!("round trip through the ordered basis moved {b}")));
        }
        for (t, _) in image.sub(&Lin::basis(b.clone())).iter() {
            if t.order() >= b.order() {
                return Ok(Some(format!(
                    "correction term {t} of {b} fails to drop the operator order"
                )));
            }
        }
    }
    for nb in enumerate_normals(ctx, 1, cx.probe_order()) {
        if pm.underline_pbw(&nb) != Lin::basis(nb.clone()) {
            return Ok(Some(format!("normal symbol {nb} is not fixed by the ordering map")));
        }
    }
    Ok(None)
}

fn check_composition_oracle(cx: &CheckCtx) -> CheckOutcome {
    let f = &cx.f;
    let ctx = f.ctx();
    let mut rng = cx.rng(0xc0a7);
    let ops = enumerate_ops(ctx, 1, cx.probe_order());
    let forms = enumerate_forms(ctx, cx.probe_degree());
    for _ in 0..8 {
        let picked = pick_many(&mut rng, &ops, 2);
        let (a, b) = (&picked[0], &picked[1]);
        let ab = compose(f, a, b);
        for w in pick_many(&mut rng, &forms, 3) {
            let lhs = apply_op_lin(f, &ab, &Lin::basis(w.clone()));
            let rhs = apply_op_lin(f, &Lin::basis(a.clone()), &apply_op_to_form(f, b, &w));
            if lhs != rhs {
                return Ok(Some(format!(
                    "composition of {a} and {b} disagrees with consecutive application on {w}"
                )));
            }
        }
    }
    for _ in 0..4 {
        let picked = pick_many(&mut rng, &ops, 3);
        let (a, b, c) = (&picked[0], &picked[1], &picked[2]);
        let lhs = compose_lin(f, &compose(f, a, b), &Lin::basis(c.clone()));
        let rhs = compose_lin(f, &Lin::basis(a.clone()), &compose(f, b, c));
        if lhs != rhs {
            return Ok(Some(format!("composition fails associativity on {a}, {b}, {c}")));
        }
    }
    Ok(None)
}

fn check_perturbed_structure(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let f = &cx.f;
    let ctx = f.ctx();
    let con = pl.transfer().contraction();
    for b in enumerate_ops(ctx, 1, cx.probe_order()) {
        if con.big.d.apply(&b) != pl.pm().delta_comp_s(&b) {
            return Ok(Some(format!(
                "perturbed differential disagrees with the conjugated composition differential on {b}"
            )));
        }
        if con.p.apply(&b) != p_filter(&Lin::basis(b.clone())) {
            return Ok(Some(format!("perturbed projection moved away from the symbol filter on {b}")));
        }
    }
    for s in enumerate_normals(ctx, 1, cx.probe_order()) {
        if con.small.d.apply(&s) != dbar_normal(f, &s) {
            return Ok(Some(format!(
                "transferred differential disagrees with the normal-symbol differential on {s}"
            )));
        }
    }
    Ok(None)
}

fn check_operation_tower(cx: &CheckCtx) -> CheckOutcome {
    if cx.caps.max_arity < 3 {
        return Ok(None);
    }
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let pool = enumerate_normals(ctx, 1, 1);
    let mut rng = cx.rng(0x70e3);
    for _ in 0..4 {
        let tuple = pick_many(&mut rng, &pool, 3);
        let res = stasheff_residual(pl.family(), 3, &tuple).map_err(cap_error)?;
        if !res.is_zero() {
            return Ok(Some(format!(
                "arity-3 associator identity fails on ({})",
                tuple_label(&tuple)
            )));
        }
    }
    if cx.caps.max_arity >= 4 {
        for _ in 0..2 {
            let tuple = pick_many(&mut rng, &pool, 4);
            let res = stasheff_residual(pl.family(), 4, &tuple).map_err(cap_error)?;
            if !res.is_zero() {
                return Ok(Some(format!(
                    "arity-4 associator identity fails on ({})",
                    tuple_label(&tuple)
                )));
            }
        }
    }
    Ok(None)
}

fn check_order_bounds(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let pool = enumerate_normals(ctx, 1, cx.probe_order());
    let mut rng = cx.rng(0x0b0d);
    for _ in 0..5 {
        let tuple = pick_many(&mut rng, &pool, 2);
        let bound: i64 = tuple.iter().map(|b| b.order()).sum();
        for (t, _) in pl.alpha(2, &tuple)?.iter() {
            if t.order() > bound {
                return Ok(Some(format!(
                    "binary operation on ({}) exceeds order {bound} at {t}",
                    tuple_label(&tuple)
                )));
            }
        }
    }
    if cx.caps.max_arity >= 3 {
        for _ in 0..4 {
            let tuple = pick_many(&mut rng, &pool, 3);
            let bound: i64 = tuple.iter().map(|b| b.order()).sum::<i64>() - 2;
            for (t, _) in pl.alpha(3, &tuple)?.iter() {
                if t.order() > bound {
                    return Ok(Some(format!(
                        "ternary operation on ({}) exceeds order {bound} at {t}",
                        tuple_label(&tuple)
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn check_order_drop_product(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let f = &cx.f;
    let ctx = f.ctx();
    let pool: Vec<OpBasis> = enumerate_ops(ctx, 1, cx.probe_order())
        .into_iter()
        .filter(|b| b.dw.is_empty())
        .collect();
    let mut rng = cx.rng(0xd909);
    for _ in 0..10 {
        let picked = pick_many(&mut rng, &pool, 2);
        let (a, b) = (&picked[0], &picked[1]);
        let engine =
            order_drop_product(pl.pm(), &Lin::basis(a.clone()), &Lin::basis(b.clone()))?;
        if engine != circledast_expansion(f, a, b) {
            return Ok(Some(format!(
                "order-drop product of {a} and {b} disagrees with its table expansion"
            )));
        }
    }
    Ok(None)
}

fn check_closed_forms(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let f = &cx.f;
    let ctx = f.ctx();
    let tr = TopRecursion::new(f);
    let pool = enumerate_normals(ctx, 1, cx.probe_order());
    let mut rng = cx.rng(0xc105);
    for _ in 0..6 {
        let tuple = pick_many(&mut rng, &pool, 2);
        let symbol = tr.alpha2_symbol(&tuple[0], &tuple[1]);
        if symbol != closed_form_alpha(f, ClosedForm::ProductSymbol, &tuple)? {
            return Ok(Some(format!(
                "symbol product on ({}) disagrees with its closed form",
                tuple_label(&tuple)
            )));
        }
        let top: i64 = tuple.iter().map(|b| b.order()).sum();
        if order_component_normal(&pl.alpha(2, &tuple)?, top) != symbol {
            return Ok(Some(format!(
                "leading binary term on ({}) is not the symbol product",
                tuple_label(&tuple)
            )));
        }
        if tr.alpha_top(&tuple)? != closed_form_alpha(f, ClosedForm::TransportOneDrop, &tuple)? {
            return Ok(Some(format!(
                "one-drop binary term on ({}) disagrees with the transport formula",
                tuple_label(&tuple)
            )));
        }
    }
    if cx.caps.max_arity >= 3 {
        for _ in 0..4 {
            let tuple = pick_many(&mut rng, &pool, 3);
            let top = tr.alpha_top(&tuple)?;
            if top != closed_form_alpha(f, ClosedForm::CurvatureTwoDrop, &tuple)? {
                return Ok(Some(format!(
                    "two-drop ternary term on ({}) disagrees with the curvature formula",
                    tuple_label(&tuple)
                )));
            }
            let bound: i64 = tuple.iter().map(|b| b.order()).sum::<i64>() - 2;
            if order_component_normal(&pl.alpha(3, &tuple)?, bound) != top {
                return Ok(Some(format!(
                    "leading ternary term on ({}) disagrees with the recursion",
                    tuple_label(&tuple)
                )));
            }
        }
    }
    Ok(None)
}

fn check_tower_vanishing(cx: &CheckCtx) -> CheckOutcome {
    if cx.caps.max_arity < 3 {
        return Ok(None);
    }
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let one = NormalBasis::one(ctx);
    let pool = enumerate_normals(ctx, 1, 1);
    let mut rng = cx.rng(0x7a21);
    for k in 3..=cx.caps.max_arity.min(4) {
        for slot in 0..k {
            for _ in 0..2 {
                let mut tuple = pick_many(&mut rng, &pool, k - 1);
                tuple.insert(slot, one.clone());
                let val = pl.alpha(k, &tuple)?;
                if !val.is_zero() {
                    return Ok(Some(format!(
                        "arity-{k} operation with a unit entry survives on ({})",
                        tuple_label(&tuple)
                    )));
                }
            }
        }
    }
    Ok(None)
}

fn check_unit_transfer(cx: &CheckCtx) -> CheckOutcome {
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let one = Lin::basis(OpBasis::one(ctx));
    if pl.transfer().transferred_unit(&one) != Some(Lin::basis(NormalBasis::one(ctx))) {
        return Ok(Some("the operator unit fails to project to a strict unit".into()));
    }
    let unit = NormalBasis::one(ctx);
    let pool = enumerate_normals(ctx, 1, cx.probe_order());
    let mut rng = cx.rng(0x0417);
    for x in pick_many(&mut rng, &pool, 6) {
        let left = pl.alpha(2, &[unit.clone(), x.clone()])?;
        let right = pl.alpha(2, &[x.clone(), unit.clone()])?;
        if left != Lin::basis(x.clone()) || right != Lin::basis(x.clone()) {
            return Ok(Some(format!("the unit fails to act as identity on {x}")));
        }
    }
    Ok(None)
}

fn check_module_tower(cx: &CheckCtx) -> CheckOutcome {
    if cx.caps.max_arity < 2 {
        return Ok(None);
    }
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let mt = pl.module_transfer();
    let normals = enumerate_normals(ctx, 1, 1);
    let forms = enumerate_forms(ctx, 1);
    let mut rng = cx.rng(0x30d1);
    let top_arity = cx.caps.max_arity.min(3);
    for k in 2..=top_arity {
        for _ in 0..3 {
            let prefix = pick_many(&mut rng, &normals, k - 1);
            let w = pick_many(&mut rng, &forms, 1).remove(0);
            let mut inputs: Vec<Sum2<NormalBasis, FormBasis>> =
                prefix.iter().cloned().map(Sum2::Alg).collect();
            inputs.push(Sum2::Mod(w.clone()));
            let via_tower = mt.operation(k, &inputs);
            let expect: Lin<Sum2<NormalBasis, FormBasis>> = pl
                .mu(k, &prefix, &w)?
                .iter()
                .map(|(m, c)| (Sum2::Mod(m.clone()), c.clone()))
                .collect();
            if via_tower != expect {
                return Ok(Some(format!(
                    "module operation of arity {k} on ({} | {w}) disagrees with its closed form",
                    tuple_label(&prefix)
                )));
            }
        }
    }
    if cx.caps.max_arity >= 3 {
        let family = mt.family();
        for _ in 0..2 {
            let prefix = pick_many(&mut rng, &normals, 2);
            let w = pick_many(&mut rng, &forms, 1).remove(0);
            let mut inputs: Vec<Sum2<NormalBasis, FormBasis>> =
                prefix.iter().cloned().map(Sum2::Alg).collect();
            inputs.push(Sum2::Mod(w.clone()));
            let res = module_residual(&family, 3, &inputs).map_err(cap_error)?;
            if !res.is_zero() {
                return Ok(Some(format!(
                    "module associator identity fails on ({} | {w})",
                    tuple_label(&prefix)
                )));
            }
        }
    }
    Ok(None)
}

fn check_enveloping_match(cx: &CheckCtx) -> CheckOutcome {
    if cx.caps.max_arity < 2 {
        return Ok(None);
    }
    let pl = cx.pipeline()?;
    let ctx = cx.f.ctx();
    let bt = pl.bracket_transfer();
    let forms = enumerate_forms(ctx, 1);
    let normals = enumerate_normals(ctx, 1, 1);
    let mut rng = cx.rng(0xe41e);
    for w in pick_many(&mut rng, &forms, 4) {
        if pl.nu(&bt, 1, &[], &w)? != dbar_form(&w) {
            return Ok(Some(format!(
                "arity-1 coefficient operation differs from the leafwise differential on {w}"
            )));
        }
    }
    for k in 2..=cx.caps.max_arity.min(3) {
        for _ in 0..3 {
            let prefix = pick_many(&mut rng, &normals, k - 1);
            let w = pick_many(&mut rng, &forms, 1).remove(0);
            let res = pl.enveloping_residual(&bt, k, &prefix, &w)?;
            if !res.is_zero() {
                return Ok(Some(format!(
                    "enveloping comparison of arity {k} fails on ({} | {w})",
                    tuple_label(&prefix)
                )));
            }
        }
    }
    Ok(None)
}

// ---- catalogue and runner ----

const CATALOG: &[(&str, &str, CheckFn)] = &[
    (
        "commutation-table",
        "frame commutators stay tangent to the leaves and match the recorded curvature table",
        check_commutation_table,
    ),
    (
        "connection-axioms",
        "the adapted connection satisfies its defining identities on frames and coframes",
        check_connection_axioms,
    ),
    (
        "dbar-carriers",
        "the leafwise differential squares to zero and commutes with the frame letters on every carrier",
        check_dbar_carriers,
    ),
    (
        "derivation-split",
        "form derivations split into contraction, leaf, and frame parts, and reassemble exactly",
        check_derivation_split,
    ),
    (
        "base-contraction",
        "the symbol contraction satisfies the projection, inclusion, and homotopy identities",
        check_base_contraction,
    ),
    (
        "symbol-contraction",
        "the perturbed contraction still satisfies the projection, inclusion, and homotopy identities",
        check_symbol_contraction,
    ),
    (
        "normal-order-iso",
        "the ordering isomorphism is triangular and round-trips every operator word",
        check_normal_order_iso,
    ),
    (
        "composition-oracle",
        "operator composition is associative and agrees with consecutive application to forms",
        check_composition_oracle,
    ),
    (
        "perturbed-structure",
        "the perturbed differential, projection, and transferred differential take their closed forms",
        check_perturbed_structure,
    ),
    (
        "operation-tower",
        "the transferred operations satisfy the associator-tower identities",
        check_operation_tower,
    ),
    (
        "order-bounds",
        "transferred operations respect the expected operator-order bounds",
        check_order_bounds,
    ),
    (
        "order-drop-product",
        "the order-drop product agrees with its expansion from the structure tables",
        check_order_drop_product,
    ),
    (
        "closed-forms",
        "leading operation terms agree with their closed local formulas",
        check_closed_forms,
    ),
    (
        "tower-vanishing",
        "higher operations vanish whenever any input is the unit",
        check_tower_vanishing,
    ),
    (
        "unit-transfer",
        "the operator unit transfers to a strict unit of the operation tower",
        check_unit_transfer,
    ),
    (
        "module-tower",
        "the form-module operations close over the comparison values and satisfy their identities",
        check_module_tower,
    ),
    (
        "enveloping-match",
        "the skew-symmetrized tower matches the rescaled bracket tower on module probes",
        check_enveloping_match,
    ),
];

/// Names and one-line properties of every available check, in run order.
pub fn available_checks() -> Vec<(&'static str, &'static str)> {
    CATALOG.iter().map(|(name, property, _)| (*name, *property)).collect()
}

/// Run a scenario and produce its deterministic report.
///
/// Checks always execute in catalogue order; an unknown requested check
/// name aborts before anything runs.
pub fn run_scenario(sc: &Scenario, with_timings: bool) -> Result<Report, FoliationError> {
    let f = build_foliation(sc.n, sc.m, &sc.v_table)?;
    for name in &sc.checks {
        if !CATALOG.iter().any(|(n, _, _)| n == name) {
            return Err(FoliationError::UnknownCheck(name.clone()));
        }
    }
    let selected: Vec<&(&str, &str, CheckFn)> = CATALOG
        .iter()
        .filter(|(n, _, _)| sc.checks.is_empty() || sc.checks.iter().any(|c| c == n))
        .collect();
    let cx = CheckCtx {
        f,
        caps: sc.caps.into(),
        seed: sc.seed,
        pipeline: RefCell::new(None),
    };
    let mut records = Vec::with_capacity(selected.len());
    let (mut passed, mut failed) = (0usize, 0usize);
    for (name, property, run) in selected {
        let started = Instant::now();
        let counterexample = run(&cx)?;
        let timing_micros = with_timings.then(|| started.elapsed().as_micros() as u64);
        let status = if counterexample.is_none() {
            passed += 1;
            CheckStatus::Pass
        } else {
            failed += 1;
            CheckStatus::Fail
        };
        records.push(CheckRecord {
            name: (*name).to_string(),
            property: (*property).to_string(),
            status,
            counterexample,
            timing_micros,
        });
    }
    Ok(Report {
        scenario: sc.name.clone(),
        seed: sc.seed,
        caps: sc.caps,
        records,
        passed,
        failed,
    })
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fault::{inject, Fault};

    fn shear_scenario() -> Scenario {
        Scenario {
            name: "shear".into(),
            n: 1,
            m: 2,
            v_table: vec![vec!["u2".into()], vec!["0".into()]],
            caps: ScenarioCaps { max_arity: 3, max_order: 2, max_degree: 3 },
            checks: Vec::new(),
            seed: 7,
        }
    }

    #[test]
    fn full_catalogue_passes_on_the_shear_chart() {
        let report = run_scenario(&shear_scenario(), false).unwrap();
        assert_eq!(report.records.len(), CATALOG.len());
        assert_eq!(report.failed, 0, "failures: {:?}", report.records);
        assert_eq!(report.passed, CATALOG.len());
        assert!(report.records.iter().all(|r| r.timing_micros.is_none()));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = serde_json::to_string(&run_scenario(&shear_scenario(), false).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(&shear_scenario(), false).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn timings_are_opt_in() {
        let mut sc = shear_scenario();
        sc.checks = vec!["commutation-table".into()];
        let report = run_scenario(&sc, true).unwrap();
        assert!(report.records[0].timing_micros.is_some());
    }

    #[test]
    fn check_selection_keeps_catalogue_order() {
        let mut sc = shear_scenario();
        sc.checks = vec!["composition-oracle".into(), "commutation-table".into()];
        let report = run_scenario(&sc, false).unwrap();
        let names: Vec<&str> = report.records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["commutation-table", "composition-oracle"]);
    }

    #[test]
    fn unknown_checks_are_rejected_before_running() {
        let mut sc = shear_scenario();
        sc.checks = vec!["no-such-check".into()];
        assert!(matches!(
            run_scenario(&sc, false),
            Err(FoliationError::UnknownCheck(name)) if name == "no-such-check"
        ));
    }

    #[test]
    fn malformed_tables_are_rejected() {
        let mut sc = shear_scenario();
        sc.v_table = vec![vec!["u2".into()]];
        assert!(matches!(
            run_scenario(&sc, false),
            Err(FoliationError::MalformedTable { .. })
        ));
    }

    #[test]
    fn injected_fault_is_caught_by_the_catalogue() {
        let mut sc = shear_scenario();
        sc.checks = vec!["order-drop-product".into()];
        let _guard = inject(Fault::CurvatureSign);
        let report = run_scenario(&sc, false).unwrap();
        assert_eq!(report.failed, 1);
        assert!(report.records[0].counterexample.is_some());
    }

    #[test]
    fn toy_chart_without_frame_directions_passes() {
        let sc = Scenario {
            name: "toy".into(),
            n: 2,
            m: 0,
            v_table: Vec::new(),
            caps: ScenarioCaps { max_arity: 3, max_order: 1, max_degree: 2 },
            checks: Vec::new(),
            seed: 1,
        };
        let report = run_scenario(&sc, false).unwrap();
        assert_eq!(report.failed, 0, "failures: {:?}", report.records);
    }
}
