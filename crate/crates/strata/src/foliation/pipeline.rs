//! End-to-end assembly over a chart: adapted connection, symmetrization
//! maps, perturbed symbol contraction, and the transferred operation tower,
//! with the form-module tower and the enveloping comparison on top.

use std::rc::Rc;

use super::basis::{dbar_form, enumerate_ops, FormBasis, NormalBasis, OpBasis};
use super::contraction::symmetric_contraction;
use super::geometry::{build_adapted_connection, AdaptedConnection, FoliationError, PolyFoliation};
use super::operator::apply_op_lin;
use super::pbw::PbwMaps;
use crate::exact::{minus_one_pow, ratq, BasisElem, Lin};
use crate::homotopy::{Complex, MapRef, SERIES_GUARD};
use crate::sh::{skew_symmetrize, ArityError, OperationFamily, Sum2};
use crate::transfer::{
    extend_contraction_by_module, module_product, perturbed_transfer, transfer_module,
    BracketTransfer, ProductTransfer,
};

/// Size limits for a pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineCaps {
    /// Highest arity of the transferred operations.
    pub max_arity: usize,
    /// Highest operator order enumerated for probe bases.
    pub max_order: usize,
    /// Highest polynomial degree enumerated for probe bases.
    pub max_degree: u32,
}

impl Default for PipelineCaps {
    fn default() -> Self {
        PipelineCaps { max_arity: 5, max_order: 3, max_degree: 4 }
    }
}

/// The transferred tower extended by the form module.
pub type ModuleTransfer =
    ProductTransfer<Sum2<OpBasis, FormBasis>, Sum2<NormalBasis, FormBasis>>;

/// The transferred bracket tower extended by the form module.
pub type ModuleBracketTransfer =
    BracketTransfer<Sum2<OpBasis, FormBasis>, Sum2<NormalBasis, FormBasis>>;

/// Everything the tower needs, assembled once per chart.
pub struct Pipeline {
    f: Rc<PolyFoliation>,
    conn: AdaptedConnection,
    pm: Rc<PbwMaps>,
    transfer: ProductTransfer<OpBasis, NormalBasis>,
    family: OperationFamily<NormalBasis>,
    caps: PipelineCaps,
}

fn cap_error(e: ArityError) -> FoliationError {
    FoliationError::ArityCap { arity: e.requested, cap: e.cap }
}

/// Build the full tower over a chart: connection, symmetrization,
/// perturbation, transfer.
pub fn run_pipeline(
    f: &Rc<PolyFoliation>,
    caps: PipelineCaps,
) -> Result<Pipeline, FoliationError> {
    let conn = build_adapted_connection(f)?;
    let pm = Rc::new(PbwMaps::new(f));
    let con = symmetric_contraction();
    let new_d = {
        let pm = Rc::clone(&pm);
        MapRef::new(1, move |b: &OpBasis| pm.delta_comp_s(b))
    };
    let probe = enumerate_ops(f.ctx(), caps.max_degree.min(2), caps.max_order);
    let mul = {
        let pm = Rc::clone(&pm);
        move |a: &OpBasis, b: &OpBasis| pm.s_compose_basis(a, b)
    };
    let transfer = perturbed_transfer(&con, new_d, &probe, SERIES_GUARD, caps.max_arity, mul)?;
    let family = transfer.family();
    Ok(Pipeline { f: Rc::clone(f), conn, pm, transfer, family, caps })
}

impl Pipeline {
    /// The underlying chart.
    pub fn foliation(&self) -> &Rc<PolyFoliation> {
        &self.f
    }

    /// The adapted connection built during validation.
    pub fn connection(&self) -> &AdaptedConnection {
        &self.conn
    }

    /// The shared symmetrization maps.
    pub fn pm(&self) -> &Rc<PbwMaps> {
        &self.pm
    }

    /// The size limits this pipeline was built with.
    pub fn caps(&self) -> PipelineCaps {
        self.caps
    }

    /// The transferred product tower.
    pub fn transfer(&self) -> &ProductTransfer<OpBasis, NormalBasis> {
        &self.transfer
    }

    /// The tower packaged as an ordered-input operation family.
    pub fn family(&self) -> &OperationFamily<NormalBasis> {
        &self.family
    }

    /// The arity-`k` transferred operation on a basis tuple.
    pub fn alpha(
        &self,
        k: usize,
        inputs: &[NormalBasis],
    ) -> Result<Lin<NormalBasis>, FoliationError> {
        self.family.op(k, inputs).map_err(cap_error)
    }

    /// The product tower extended by the form module.
    pub fn module_transfer(&self) -> ModuleTransfer {
        let module = Complex::new(MapRef::new(1, dbar_form));
        let pm = Rc::clone(&self.pm);
        let mul = move |a: &OpBasis, b: &OpBasis| pm.s_compose_basis(a, b);
        let f = Rc::clone(&self.f);
        let pm2 = Rc::clone(&self.pm);
        let action = move |a: &OpBasis, m: &FormBasis| {
            apply_op_lin(&f, &pm2.pbw(a), &Lin::basis(m.clone()))
        };
        transfer_module(
            self.transfer.contraction(),
            &module,
            self.caps.max_arity,
            mul,
            action,
        )
    }

    /// Closed form of the module operation `μ_k(x₁,…,x_{k−1} | ω)`: sign
    /// times the comparison value of the prefix, symmetrized and applied to
    /// the form.
    pub fn mu(
        &self,
        k: usize,
        prefix: &[NormalBasis],
        w: &FormBasis,
    ) -> Result<Lin<FormBasis>, FoliationError> {
        if k == 0 || k > self.caps.max_arity {
            return Err(FoliationError::ArityCap { arity: k, cap: self.caps.max_arity });
        }
        assert_eq!(prefix.len(), k - 1, "module operation takes k−1 prefix entries");
        if k == 1 {
            return Ok(dbar_form(w));
        }
        let comp = self.transfer.comparison(k - 1, prefix);
        let lifted = self.pm.pbw_lin(&comp);
        let val = apply_op_lin(&self.f, &lifted, &Lin::basis(w.clone()));
        Ok(val.scale(&minus_one_pow(k as i64 - 1)))
    }

    /// The bracket tower on the module extension: the graded commutator of
    /// the square-zero product, transferred.
    pub fn bracket_transfer(&self) -> ModuleBracketTransfer {
        let module = Complex::new(MapRef::new(1, dbar_form));
        let ext = extend_contraction_by_module(self.transfer.contraction(), &module);
        let pm = Rc::clone(&self.pm);
        let mul = move |a: &OpBasis, b: &OpBasis| pm.s_compose_basis(a, b);
        let f = Rc::clone(&self.f);
        let pm2 = Rc::clone(&self.pm);
        let action = move |a: &OpBasis, m: &FormBasis| {
            apply_op_lin(&f, &pm2.pbw(a), &Lin::basis(m.clone()))
        };
        let prod = module_product(mul, action);
        let bracket = move |a: &Sum2<OpBasis, FormBasis>, b: &Sum2<OpBasis, FormBasis>| {
            let sign = minus_one_pow(a.degree() * b.degree() + 1);
            let mut out = prod(a, b);
            out.add_assign_scaled(&prod(b, a), &sign);
            out
        };
        BracketTransfer::new(&ext, self.caps.max_arity, bracket)
    }

    /// Coefficient operation `ν_k(z₁,…,z_{k−1} | ω)`: the bracket tower on
    /// a mixed tuple, rescaled to the classical normalization.
    pub fn nu(
        &self,
        bt: &ModuleBracketTransfer,
        k: usize,
        prefix: &[NormalBasis],
        w: &FormBasis,
    ) -> Result<Lin<FormBasis>, FoliationError> {
        if k == 0 || k > self.caps.max_arity {
            return Err(FoliationError::ArityCap { arity: k, cap: self.caps.max_arity });
        }
        assert_eq!(prefix.len(), k - 1, "coefficient operation takes k−1 prefix entries");
        let mut inputs: Vec<Sum2<NormalBasis, FormBasis>> =
            prefix.iter().cloned().map(Sum2::Alg).collect();
        inputs.push(Sum2::Mod(w.clone()));
        let val = bt.operation(k, &inputs);
        let scale = ratq(1, 1i64 << (k - 1));
        let mut out = Lin::zero();
        for (b, c) in val.iter() {
            if let Sum2::Mod(m) = b {
                out.add_term(m.clone(), c.clone() * scale.clone());
            }
        }
        Ok(out)
    }

    /// Defect of the enveloping comparison: the skew-symmetrized product
    /// tower on normal symbols against the rescaled bracket tower acting on
    /// the form, both read in normal symbols.
    pub fn enveloping_residual(
        &self,
        bt: &ModuleBracketTransfer,
        k: usize,
        prefix: &[NormalBasis],
        w: &FormBasis,
    ) -> Result<Lin<NormalBasis>, FoliationError> {
        let mut inputs = prefix.to_vec();
        inputs.push(NormalBasis::from_form(w));
        let lhs = skew_symmetrize(&self.family).op(k, &inputs).map_err(cap_error)?;
        let nu_val = self.nu(bt, k, prefix, w)?;
        let rhs: Lin<NormalBasis> = nu_val
            .iter()
            .map(|(m, c)| (NormalBasis::from_form(m), c.clone()))
            .collect();
        Ok(lhs.sub(&rhs))
    }
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::super::basis::{enumerate_normals, form_to_normal, normal_to_form};
    use super::super::geometry::build_foliation;
    use super::super::pbw::order_component_normal;
    use super::super::recursion::TopRecursion;
    use super::*;
    use crate::exact::{rat, IndexKind, MultiIndex, VarCtx};
    use crate::sh::stasheff_residual;

    fn flat() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["0".into()], vec!["0".into()]]).unwrap()
    }

    fn shear() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["u2".into()], vec!["0".into()]]).unwrap()
    }

    fn twisted() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["x1 u2".into()], vec!["0".into()]]).unwrap()
    }

    fn caps(max_arity: usize) -> PipelineCaps {
        PipelineCaps { max_arity, max_order: 3, max_degree: 4 }
    }

    fn nb_tw(ctx: VarCtx, vw: Vec<u32>) -> NormalBasis {
        let mut b = NormalBasis::one(ctx);
        b.vw = MultiIndex::canonicalize(IndexKind::Symmetric, vw).unwrap().0;
        b
    }

    fn nb_dx_tw(ctx: VarCtx, vw: Vec<u32>) -> NormalBasis {
        let mut b = nb_tw(ctx, vw);
        b.dx = MultiIndex::canonicalize(IndexKind::Antisymmetric, vec![0]).unwrap().0;
        b
    }

    #[test]
    fn flat_chart_binary_operation_is_the_symbol_product() {
        let f = flat();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let tr = TopRecursion::new(&f);
        let normals = enumerate_normals(f.ctx(), 1, 1);
        for a in normals.iter().step_by(3) {
            for b in normals.iter().step_by(4) {
                let got = pl.alpha(2, &[a.clone(), b.clone()]).unwrap();
                assert_eq!(got, tr.alpha2_symbol(a, b), "mismatch at {a}, {b}");
            }
        }
    }

    #[test]
    fn flat_chart_ternary_operation_vanishes() {
        let f = flat();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let normals = enumerate_normals(f.ctx(), 1, 1);
        for a in normals.iter().step_by(4) {
            for b in normals.iter().step_by(5) {
                for c in normals.iter().step_by(6) {
                    let got = pl.alpha(3, &[a.clone(), b.clone(), c.clone()]).unwrap();
                    assert!(got.is_zero(), "nonzero ternary term at {a}, {b}, {c}: {got:?}");
                }
            }
        }
    }

    #[test]
    fn perturbed_projection_and_small_differential() {
        let f = shear();
        let pl = run_pipeline(&f, caps(2)).unwrap();
        let con = pl.transfer().contraction();
        for b in enumerate_ops(f.ctx(), 2, 2).iter().step_by(7) {
            assert_eq!(
                con.p.apply(b),
                super::super::basis::p_filter(&Lin::basis(b.clone())),
                "projection changed under perturbation at {b}"
            );
        }
        for s in enumerate_normals(f.ctx(), 2, 2).iter().step_by(5) {
            assert_eq!(
                con.small.d.apply(s),
                super::super::operator::dbar_normal(&f, s),
                "small differential mismatch at {s}"
            );
        }
    }

    #[test]
    fn binary_operation_against_composition() {
        let f = shear();
        let pl = run_pipeline(&f, caps(2)).unwrap();
        let ctx = f.ctx();
        let z = nb_tw(ctx, vec![0]);
        let x = NormalBasis::from_form(&FormBasis::variable(ctx, 0));
        let mut x_z = NormalBasis::from_form(&FormBasis::variable(ctx, 0));
        x_z.vw = z.vw.clone();
        let u2 = NormalBasis::from_form(&FormBasis::variable(ctx, 2));
        let got = pl.alpha(2, &[z.clone(), x.clone()]).unwrap();
        let mut expect = Lin::basis(x_z);
        expect.add_term(u2.clone(), rat(1));
        assert_eq!(got, expect);
        // The antisymmetrization is the frame action on the coefficient.
        let other = pl.alpha(2, &[x, z]).unwrap();
        assert_eq!(got.sub(&other), Lin::basis(u2));
    }

    #[test]
    fn ternary_top_component_matches_the_recursion() {
        for f in [shear(), twisted()] {
            let pl = run_pipeline(&f, caps(3)).unwrap();
            let tr = TopRecursion::new(&f);
            let ctx = f.ctx();
            let tuples = [
                [nb_tw(ctx, vec![0]), nb_tw(ctx, vec![1]), nb_dx_tw(ctx, vec![0])],
                [nb_tw(ctx, vec![0, 0]), nb_tw(ctx, vec![1]), nb_dx_tw(ctx, vec![1])],
                [nb_tw(ctx, vec![0]), nb_dx_tw(ctx, vec![1]), nb_tw(ctx, vec![1])],
            ];
            for tuple in &tuples {
                let engine = pl.alpha(3, tuple).unwrap();
                let top: i64 = tuple.iter().map(|b| b.order()).sum::<i64>() - 2;
                assert_eq!(
                    order_component_normal(&engine, top),
                    tr.alpha_top(tuple).unwrap(),
                    "top component mismatch on {tuple:?}"
                );
            }
        }
    }

    #[test]
    fn ternary_associator_identity_holds_on_samples() {
        let f = shear();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let ctx = f.ctx();
        let samples = [
            nb_tw(ctx, vec![0]),
            nb_tw(ctx, vec![1]),
            nb_dx_tw(ctx, vec![0]),
            NormalBasis::from_form(&FormBasis::variable(ctx, 1)),
        ];
        for a in &samples {
            for b in &samples {
                for c in &samples {
                    let res = stasheff_residual(
                        pl.family(),
                        3,
                        &[a.clone(), b.clone(), c.clone()],
                    )
                    .unwrap();
                    assert!(res.is_zero(), "associator defect at {a}, {b}, {c}: {res:?}");
                }
            }
        }
    }

    #[test]
    fn transferred_unit_is_strict() {
        let f = twisted();
        let pl = run_pipeline(&f, caps(2)).unwrap();
        let one = Lin::basis(OpBasis::one(f.ctx()));
        assert_eq!(
            pl.transfer().transferred_unit(&one),
            Some(Lin::basis(NormalBasis::one(f.ctx())))
        );
    }

    #[test]
    fn module_operations_close_over_the_comparison_values() {
        let f = shear();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let ctx = f.ctx();
        let mt = pl.module_transfer();
        let z1 = nb_tw(ctx, vec![0]);
        let z2 = nb_tw(ctx, vec![1]);
        let x_form = FormBasis::variable(ctx, 0);
        // Arity one is the leafwise differential.
        assert_eq!(pl.mu(1, &[], &x_form).unwrap(), dbar_form(&x_form));
        // Arity two applies the frame action.
        let u2_form = FormBasis::variable(ctx, 2);
        assert_eq!(pl.mu(2, &[z1.clone()], &x_form).unwrap(), Lin::basis(u2_form));
        // The closed form reproduces the transferred module tower.
        let samples = [
            (2usize, vec![z1.clone()], x_form.clone()),
            (2, vec![z2.clone()], x_form.clone()),
            (3, vec![z1.clone(), z2.clone()], x_form.clone()),
            (3, vec![z1.clone(), z1.clone()], FormBasis::coordinate_form(ctx, 0)),
        ];
        for (k, prefix, w) in samples {
            let mut inputs: Vec<Sum2<NormalBasis, FormBasis>> =
                prefix.iter().cloned().map(Sum2::Alg).collect();
            inputs.push(Sum2::Mod(w.clone()));
            let via_tower = mt.operation(k, &inputs);
            let expect: Lin<Sum2<NormalBasis, FormBasis>> = pl
                .mu(k, &prefix, &w)
                .unwrap()
                .iter()
                .map(|(m, c)| (Sum2::Mod(m.clone()), c.clone()))
                .collect();
            assert_eq!(via_tower, expect, "module tower mismatch at arity {k}");
        }
        // All-algebra tuples recover the product tower.
        let alg_inputs: Vec<Sum2<NormalBasis, FormBasis>> =
            vec![Sum2::Alg(z1.clone()), Sum2::Alg(z2.clone())];
        let via_tower = mt.operation(2, &alg_inputs);
        let expect: Lin<Sum2<NormalBasis, FormBasis>> = pl
            .alpha(2, &[z1, z2])
            .unwrap()
            .iter()
            .map(|(a, c)| (Sum2::Alg(a.clone()), c.clone()))
            .collect();
        assert_eq!(via_tower, expect);
    }

    #[test]
    fn coefficient_operations_have_classical_values() {
        let f = shear();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let ctx = f.ctx();
        let bt = pl.bracket_transfer();
        let x_form = FormBasis::variable(ctx, 0);
        // Arity one is the leafwise differential.
        assert_eq!(pl.nu(&bt, 1, &[], &x_form).unwrap(), dbar_form(&x_form));
        // Arity two is the frame derivative of the coefficient.
        let z1 = nb_tw(ctx, vec![0]);
        let u2_form = FormBasis::variable(ctx, 2);
        assert_eq!(
            pl.nu(&bt, 2, &[z1.clone()], &x_form).unwrap(),
            Lin::basis(u2_form)
        );
        // A function input multiplies: the bracket with the module is
        // one-sided.
        let u1 = NormalBasis::from_form(&FormBasis::variable(ctx, 1));
        assert_eq!(
            pl.nu(&bt, 2, &[u1], &FormBasis::one(ctx)).unwrap(),
            Lin::basis(FormBasis::variable(ctx, 1))
        );
    }

    #[test]
    fn enveloping_comparison_vanishes_on_samples() {
        let f = shear();
        let pl = run_pipeline(&f, caps(3)).unwrap();
        let ctx = f.ctx();
        let bt = pl.bracket_transfer();
        let z1 = nb_tw(ctx, vec![0]);
        let z2 = nb_tw(ctx, vec![1]);
        let forms = [
            FormBasis::one(ctx),
            FormBasis::variable(ctx, 0),
            FormBasis::variable(ctx, 1),
            FormBasis::coordinate_form(ctx, 0),
        ];
        for w in &forms {
            for z in [&z1, &z2] {
                let res = pl.enveloping_residual(&bt, 2, &[z.clone()], w).unwrap();
                assert!(res.is_zero(), "arity-2 residual at {z}, {w}: {res:?}");
            }
            let res = pl
                .enveloping_residual(&bt, 3, &[z1.clone(), z2.clone()], w)
                .unwrap();
            assert!(res.is_zero(), "arity-3 residual at {w}: {res:?}");
        }
    }

    #[test]
    fn arity_cap_is_reported() {
        let f = flat();
        let pl = run_pipeline(&f, caps(2)).unwrap();
        let ctx = f.ctx();
        let z = nb_tw(ctx, vec![0]);
        assert!(matches!(
            pl.alpha(3, &[z.clone(), z.clone(), z]),
            Err(FoliationError::ArityCap { arity: 3, cap: 2 })
        ));
    }

    #[test]
    fn normal_symbols_of_forms_round_trip() {
        let ctx = VarCtx::new(1, 2);
        for b in super::super::basis::enumerate_forms(ctx, 2).iter().step_by(3) {
            let n = form_to_normal(b);
            assert_eq!(
                normal_to_form(&Lin::basis(n)),
                Some(Lin::basis(b.clone()))
            );
        }
    }
}
