//! Rewriting engine for operator words: composition is computed by moving
//! letters into normal order with the chart's structure functions supplying
//! the correction terms.

use num::{One, Zero};

use super::basis::{
    dbar_form, form_from_poly, iota_form, p_filter, partial_form, wedge_form, FormBasis,
    NormalBasis, OpBasis,
};
use super::geometry::PolyFoliation;
use crate::exact::{minus_one_pow, IndexKind, Lin, MultiIndex, Poly, Rat, VarCtx};
use crate::fault::{armed, Fault};

// ---- letters ----

/// A single letter of an operator word, in increasing canonical rank:
/// multiplication, wedge, contraction, leaf derivative, frame derivative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Letter {
    /// Multiplication by a coefficient monomial.
    M(Vec<u32>),
    /// Left wedge with a leaf coordinate one-form.
    E(u32),
    /// Contraction with a leaf coordinate direction.
    I(u32),
    /// Covariant derivative along a leaf coordinate direction.
    D(u32),
    /// Covariant derivative along a transverse frame field.
    T(u32),
}

/// The letters of a normal-form word, leftmost first.
pub(crate) fn letters_of(b: &OpBasis) -> Vec<Letter> {
    let mut w = Vec::new();
    if b.exps.iter().any(|&e| e > 0) {
        w.push(Letter::M(b.exps.clone()));
    }
    w.extend(b.dx.entries().iter().map(|&k| Letter::E(k)));
    w.extend(b.iw.entries().iter().map(|&i| Letter::I(i)));
    w.extend(b.dw.entries().iter().map(|&i| Letter::D(i)));
    w.extend(b.tw.entries().iter().map(|&a| Letter::T(a)));
    w
}

fn word_to_basis(ctx: VarCtx, w: &[Letter]) -> OpBasis {
    let mut exps = vec![0u32; ctx.total()];
    let (mut dxv, mut iwv, mut dwv, mut twv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for l in w {
        match l {
            Letter::M(e) => {
                for (slot, x) in exps.iter_mut().zip(e.iter()) {
                    *slot += x;
                }
            }
            Letter::E(k) => dxv.push(*k),
            Letter::I(i) => iwv.push(*i),
            Letter::D(i) => dwv.push(*i),
            Letter::T(a) => twv.push(*a),
        }
    }
    let (dx, s1) = MultiIndex::canonicalize(IndexKind::Antisymmetric, dxv).expect("strict word");
    let (iw, s2) = MultiIndex::canonicalize(IndexKind::Antisymmetric, iwv).expect("strict word");
    debug_assert!(s1.is_one() && s2.is_one(), "canonical word out of order");
    let dw = MultiIndex::canonicalize(IndexKind::Symmetric, dwv).expect("word").0;
    let tw = MultiIndex::canonicalize(IndexKind::Symmetric, twv).expect("word").0;
    OpBasis {
        ctx,
        exps,
        dx,
        iw,
        dw,
        tw,
    }
}

// ---- the rewriting rules ----

fn one() -> Rat {
    Rat::one()
}

/// Words `[M(term)] ++ suffix` for every term of a polynomial.
fn poly_words(p: &Poly, suffix: &[Letter]) -> Vec<(Rat, Vec<Letter>)> {
    p.terms()
        .map(|(exps, c)| {
            let mut w = vec![Letter::M(exps.to_vec())];
            w.extend_from_slice(suffix);
            (c.clone(), w)
        })
        .collect()
}

/// Rewrite an adjacent pair of letters; `None` means the pair is already in
/// canonical order.  Each entry is a scaled word replacing the pair.
fn pair_rule(f: &PolyFoliation, a: &Letter, b: &Letter) -> Option<Vec<(Rat, Vec<Letter>)>> {
    use Letter::*;
    match (a, b) {
        // Coefficients merge.
        (M(e1), M(e2)) => {
            let sum: Vec<u32> = e1.iter().zip(e2.iter()).map(|(x, y)| x + y).collect();
            Some(vec![(one(), vec![M(sum)])])
        }
        (M(_), _) => None,

        // Wedge letters anticommute and square to zero.
        (E(i), E(j)) => match i.cmp(j) {
            std::cmp::Ordering::Less => None,
            std::cmp::Ordering::Equal => Some(vec![]),
            std::cmp::Ordering::Greater => Some(vec![(-one(), vec![E(*j), E(*i)])]),
        },
        (E(i), M(e)) => Some(vec![(one(), vec![M(e.clone()), E(*i)])]),
        (E(_), _) => None,

        // Contraction letters anticommute; against a wedge they produce the
        // pairing term.
        (I(i), I(j)) => match i.cmp(j) {
            std::cmp::Ordering::Less => None,
            std::cmp::Ordering::Equal => Some(vec![]),
            std::cmp::Ordering::Greater => Some(vec![(-one(), vec![I(*j), I(*i)])]),
        },
        (I(i), M(e)) => Some(vec![(one(), vec![M(e.clone()), I(*i)])]),
        (I(i), E(j)) => {
            let mut out = Vec::new();
            if i == j {
                out.push((one(), vec![]));
            }
            out.push((-one(), vec![E(*j), I(*i)]));
            Some(out)
        }
        (I(_), _) => None,

        // Leaf derivatives commute with wedge and contraction letters and
        // differentiate coefficients.
        (D(i), M(e)) => {
            let mut out = vec![(one(), vec![M(e.clone()), D(*i)])];
            if e[*i as usize] > 0 {
                let mut lowered = e.clone();
                lowered[*i as usize] -= 1;
                out.push((Rat::from_integer(e[*i as usize].into()), vec![M(lowered)]));
            }
            Some(out)
        }
        (D(i), E(j)) => Some(vec![(one(), vec![E(*j), D(*i)])]),
        (D(i), I(j)) => Some(vec![(one(), vec![I(*j), D(*i)])]),
        (D(i), D(j)) => {
            if i <= j {
                None
            } else {
                Some(vec![(one(), vec![D(*j), D(*i)])])
            }
        }
        (D(_), T(_)) => None,

        // Frame derivatives differentiate coefficients, rotate wedge and
        // contraction letters through the frame Jacobian, and commute with
        // leaf derivatives up to Jacobian and curvature terms.
        (T(al), M(e)) => {
            let mut out = vec![(one(), vec![M(e.clone()), T(*al)])];
            let mono = Poly::monomial(f.ctx(), e.clone(), one());
            out.extend(poly_words(&f.apply_v(*al as usize, &mono), &[]));
            Some(out)
        }
        (T(al), E(j)) => {
            let mut out = vec![(one(), vec![E(*j), T(*al)])];
            for k in 0..f.n() {
                let dv = f.v(*al as usize, *j as usize).partial(k);
                out.extend(poly_words(&dv, &[E(k as u32)]));
            }
            Some(out)
        }
        (T(al), I(j)) => {
            let mut out = vec![(one(), vec![I(*j), T(*al)])];
            for k in 0..f.n() {
                let dv = f.v(*al as usize, k).partial(*j as usize).neg();
                out.extend(poly_words(&dv, &[I(k as u32)]));
            }
            Some(out)
        }
        (T(al), D(i)) => {
            let mut out = vec![(one(), vec![D(*i), T(*al)])];
            for j in 0..f.n() {
                let dv = f.v(*al as usize, j).partial(*i as usize).neg();
                out.extend(poly_words(&dv, &[D(j as u32)]));
            }
            for k in 0..f.n() {
                for l in 0..f.n() {
                    let ddv = f
                        .v(*al as usize, l)
                        .partial(*i as usize)
                        .partial(k)
                        .neg();
                    out.extend(poly_words(&ddv, &[E(k as u32), I(l as u32)]));
                }
            }
            Some(out)
        }
        (T(al), T(be)) => {
            if al <= be {
                None
            } else {
                let mut out = vec![(one(), vec![T(*be), T(*al)])];
                let flip = armed(Fault::CurvatureSign);
                for i in 0..f.n() {
                    for (exps, c) in f.r(*al as usize, *be as usize, i).terms() {
                        let c = if flip { -c.clone() } else { c.clone() };
                        out.push((c, vec![M(exps.to_vec()), D(i as u32)]));
                    }
                }
                for k in 0..f.n() {
                    for l in 0..f.n() {
                        let th = f.theta(*al as usize, *be as usize, k, l);
                        out.extend(poly_words(th, &[E(k as u32), I(l as u32)]));
                    }
                }
                Some(out)
            }
        }
    }
}

// ---- normal ordering ----

/// Rewrite a scaled word into normal form.
pub(crate) fn normal_order(f: &PolyFoliation, coeff: Rat, word: Vec<Letter>) -> Lin<OpBasis> {
    let mut out = Lin::zero();
    let mut stack: Vec<(Rat, Vec<Letter>)> = vec![(coeff, word)];
    while let Some((c, w)) = stack.pop() {
        if c.is_zero() {
            continue;
        }
        let mut rewrite = None;
        for s in 0..w.len().saturating_sub(1) {
            if let Some(rule) = pair_rule(f, &w[s], &w[s + 1]) {
                rewrite = Some((s, rule));
                break;
            }
        }
        match rewrite {
            None => out.add_term(word_to_basis(f.ctx(), &w), c),
            Some((s, rule)) => {
                for (rc, repl) in rule {
                    let mut nw = Vec::with_capacity(w.len() + repl.len());
                    nw.extend_from_slice(&w[..s]);
                    nw.extend(repl);
                    nw.extend_from_slice(&w[s + 2..]);
                    stack.push((c.clone() * rc, nw));
                }
            }
        }
    }
    out
}

/// Composition of two normal-form words as operators.
pub fn compose(f: &PolyFoliation, a: &OpBasis, b: &OpBasis) -> Lin<OpBasis> {
    let mut w = letters_of(a);
    w.extend(letters_of(b));
    normal_order(f, Rat::one(), w)
}

/// Bilinear extension of [`compose`].
pub fn compose_lin(
    f: &PolyFoliation,
    a: &Lin<OpBasis>,
    b: &Lin<OpBasis>,
) -> Lin<OpBasis> {
    let mut out = Lin::zero();
    for (ba, ca) in a.iter() {
        for (bb, cb) in b.iter() {
            out.add_assign_scaled(&compose(f, ba, bb), &(ca.clone() * cb.clone()));
        }
    }
    out
}

/// Graded commutator of two operators with respect to composition.
pub fn commutator_lin(
    f: &PolyFoliation,
    a: &Lin<OpBasis>,
    b: &Lin<OpBasis>,
) -> Lin<OpBasis> {
    let mut out = Lin::zero();
    for (ba, ca) in a.iter() {
        for (bb, cb) in b.iter() {
            let c = ca.clone() * cb.clone();
            out.add_assign_scaled(&compose(f, ba, bb), &c);
            let sign = minus_one_pow(crate::exact::BasisElem::degree(ba)
                * crate::exact::BasisElem::degree(bb));
            out.add_assign_scaled(&compose(f, bb, ba), &(-(c * sign)));
        }
    }
    out
}

// ---- operators acting on forms ----

/// The covariant derivative of a monomial form along a transverse frame
/// field: the frame derivative of the coefficient plus the Jacobian rotation
/// of the one-form word.
pub fn t_on_form(f: &PolyFoliation, alpha: usize, b: &FormBasis) -> Lin<FormBasis> {
    let mut out = form_from_poly(&f.apply_v(alpha, &b.coefficient_poly()), &b.dx);
    for (s, &j) in b.dx.entries().iter().enumerate() {
        for k in 0..f.n() {
            let dv = f.v(alpha, j as usize).partial(k);
            if dv.is_zero() {
                continue;
            }
            let mut entries = b.dx.entries().to_vec();
            entries[s] = k as u32;
            if let Some((dx2, sign)) = MultiIndex::canonicalize(IndexKind::Antisymmetric, entries)
            {
                for (exps, c) in dv.terms() {
                    let merged: Vec<u32> =
                        b.exps.iter().zip(exps.iter()).map(|(x, y)| x + y).collect();
                    out.add_term(
                        FormBasis {
                            ctx: b.ctx,
                            exps: merged,
                            dx: dx2.clone(),
                        },
                        sign.clone() * c.clone(),
                    );
                }
            }
        }
    }
    out
}

/// Linear extension of [`t_on_form`].
pub fn t_on_form_lin(f: &PolyFoliation, alpha: usize, l: &Lin<FormBasis>) -> Lin<FormBasis> {
    l.map(|b| t_on_form(f, alpha, b))
}

/// Apply a normal-form word to a monomial form, letter by letter.
pub fn apply_op_to_form(f: &PolyFoliation, op: &OpBasis, w: &FormBasis) -> Lin<FormBasis> {
    let mut acc = Lin::basis(w.clone());
    for l in letters_of(op).into_iter().rev() {
        acc = match &l {
            Letter::M(e) => acc.map(|b| {
                let merged: Vec<u32> = b.exps.iter().zip(e.iter()).map(|(x, y)| x + y).collect();
                Lin::basis(FormBasis {
                    ctx: b.ctx,
                    exps: merged,
                    dx: b.dx.clone(),
                })
            }),
            Letter::E(k) => acc.map(|b| wedge_form(*k, b)),
            Letter::I(i) => acc.map(|b| iota_form(*i, b)),
            Letter::D(i) => acc.map(|b| partial_form(*i as usize, b)),
            Letter::T(a) => acc.map(|b| t_on_form(f, *a as usize, b)),
        };
    }
    acc
}

/// Bilinear extension of [`apply_op_to_form`].
pub fn apply_op_lin(
    f: &PolyFoliation,
    op: &Lin<OpBasis>,
    w: &Lin<FormBasis>,
) -> Lin<FormBasis> {
    let mut out = Lin::zero();
    for (bo, co) in op.iter() {
        for (bw, cw) in w.iter() {
            out.add_assign_scaled(&apply_op_to_form(f, bo, bw), &(co.clone() * cw.clone()));
        }
    }
    out
}

// ---- the leafwise differential as an operator ----

/// The leafwise differential written as an operator word.
pub fn dbar_op_lin(f: &PolyFoliation) -> Lin<OpBasis> {
    (0..f.n())
        .map(|k| {
            let mut b = OpBasis::one(f.ctx());
            b.dx = MultiIndex::canonicalize(IndexKind::Antisymmetric, vec![k as u32])
                .expect("single letter")
                .0;
            b.dw = MultiIndex::canonicalize(IndexKind::Symmetric, vec![k as u32])
                .expect("single letter")
                .0;
            (b, Rat::one())
        })
        .collect()
}

/// Graded commutator of a normal-form word with the leafwise differential.
pub fn delta_comp(f: &PolyFoliation, a: &OpBasis) -> Lin<OpBasis> {
    let d = dbar_op_lin(f);
    let al = Lin::basis(a.clone());
    let da = compose_lin(f, &d, &al);
    let ad = compose_lin(f, &al, &d);
    da.sub(&ad.scale(&minus_one_pow(crate::exact::BasisElem::degree(a))))
}

/// Linear extension of [`delta_comp`].
pub fn delta_comp_lin(f: &PolyFoliation, l: &Lin<OpBasis>) -> Lin<OpBasis> {
    l.map(|b| delta_comp(f, b))
}

// ---- differentials on normal-operator symbols ----

/// The frame action of a leaf direction on the transverse word of a symbol:
/// the projected commutator of the leaf derivative with the word's lift.
/// For the adapted connection this vanishes identically.
pub fn frame_action_on_normal(
    f: &PolyFoliation,
    k: usize,
    b: &NormalBasis,
) -> Lin<NormalBasis> {
    let mut lift = OpBasis::one(b.ctx);
    lift.tw = MultiIndex::canonicalize(IndexKind::Symmetric, b.vw.entries().to_vec())
        .expect("symmetric word")
        .0;
    let dk = OpBasis::leaf_letter(b.ctx, k as u32);
    let comm = compose(f, &dk, &lift).sub(&compose(f, &lift, &dk));
    let out = p_filter(&comm);
    debug_assert!(
        out.iter().all(|(nb, _)| nb.dx.is_empty()),
        "frame action left the coefficient stratum"
    );
    out
}

/// The differential of a symbol assembled from its coefficient differential
/// and the frame action of each leaf direction.
pub fn dbar_normal(f: &PolyFoliation, b: &NormalBasis) -> Lin<NormalBasis> {
    let mut out = Lin::zero();
    for (fb, c) in dbar_form(&b.coefficient()).iter() {
        out.add_term(
            NormalBasis {
                ctx: b.ctx,
                exps: fb.exps.clone(),
                dx: fb.dx.clone(),
                vw: b.vw.clone(),
            },
            c.clone(),
        );
    }
    for k in 0..f.n() {
        for (nb2, c) in frame_action_on_normal(f, k, b).iter() {
            let mut entries = vec![k as u32];
            entries.extend_from_slice(b.dx.entries());
            if let Some((dx, sign)) = MultiIndex::canonicalize(IndexKind::Antisymmetric, entries) {
                let merged: Vec<u32> = b
                    .exps
                    .iter()
                    .zip(nb2.exps.iter())
                    .map(|(x, y)| x + y)
                    .collect();
                out.add_term(
                    NormalBasis {
                        ctx: b.ctx,
                        exps: merged,
                        dx,
                        vw: nb2.vw.clone(),
                    },
                    c.clone() * sign,
                );
            }
        }
    }
    out
}

/// Linear extension of [`dbar_normal`].
pub fn dbar_normal_lin(f: &PolyFoliation, l: &Lin<NormalBasis>) -> Lin<NormalBasis> {
    l.map(|b| dbar_normal(f, b))
}

/// The differential of a symbol computed through the operator engine: the
/// projected commutator of the leafwise differential with the symbol's lift.
pub fn dbar_star(f: &PolyFoliation, b: &NormalBasis) -> Lin<NormalBasis> {
    let lift = super::basis::j_include_basis(b);
    p_filter(&delta_comp(f, &lift))
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::super::basis::{
        enumerate_forms, enumerate_normals, enumerate_ops, FormBasis, NormalBasis, OpBasis,
    };
    use super::super::geometry::build_foliation;
    use super::*;
    use crate::exact::{rat, ratq, BasisElem};
    use crate::fault::inject;
    use std::rc::Rc;

    fn shear() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["u2".into()], vec!["0".into()]]).unwrap()
    }

    fn twisted() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["x1 u2".into()], vec!["0".into()]]).unwrap()
    }

    fn t_letter(f: &PolyFoliation, a: u32) -> Lin<OpBasis> {
        Lin::basis(OpBasis::transverse_letter(f.ctx(), a))
    }

    #[test]
    fn frame_commutator_on_shear_chart() {
        let f = shear();
        let comm = commutator_lin(&f, &t_letter(&f, 0), &t_letter(&f, 1));
        let expect = Lin::single(OpBasis::leaf_letter(f.ctx(), 0), rat(-1));
        assert_eq!(comm, expect);
    }

    #[test]
    fn frame_commutator_on_twisted_chart() {
        let f = twisted();
        let ctx = f.ctx();
        let comm = commutator_lin(&f, &t_letter(&f, 0), &t_letter(&f, 1));
        let mut d_term = OpBasis::leaf_letter(ctx, 0);
        d_term.exps[0] = 1;
        let mut ei_term = OpBasis::contraction_letter(ctx, 0);
        ei_term.dx = MultiIndex::canonicalize(IndexKind::Antisymmetric, vec![0])
            .unwrap()
            .0;
        let mut expect = Lin::single(d_term, rat(-1));
        expect.add_term(ei_term, rat(-1));
        assert_eq!(comm, expect);
    }

    #[test]
    fn curvature_sign_fault_flips_the_commutator() {
        let f = shear();
        let base = commutator_lin(&f, &t_letter(&f, 0), &t_letter(&f, 1));
        let guard = inject(Fault::CurvatureSign);
        let flipped = commutator_lin(&f, &t_letter(&f, 0), &t_letter(&f, 1));
        drop(guard);
        assert_eq!(flipped, base.neg());
        assert_eq!(
            commutator_lin(&f, &t_letter(&f, 0), &t_letter(&f, 1)),
            base
        );
    }

    #[test]
    fn composition_matches_application() {
        for f in [shear(), twisted()] {
            let ops = enumerate_ops(f.ctx(), 1, 2);
            let forms = enumerate_forms(f.ctx(), 2);
            for a in ops.iter().step_by(23) {
                for b in ops.iter().step_by(31) {
                    let ab = compose(&f, a, b);
                    for w in forms.iter().step_by(7) {
                        let wl = Lin::basis(w.clone());
                        let direct = apply_op_lin(&f, &ab, &wl);
                        let nested =
                            apply_op_lin(&f, &Lin::basis(a.clone()), &apply_op_to_form(&f, b, w));
                        assert_eq!(direct, nested, "compose/apply mismatch at {a} ∘ {b} on {w}");
                    }
                }
            }
        }
    }

    #[test]
    fn curvature_sign_fault_breaks_composition() {
        let f = twisted();
        let a = OpBasis::transverse_letter(f.ctx(), 1);
        let b = OpBasis::transverse_letter(f.ctx(), 0);
        let w = FormBasis::variable(f.ctx(), 0);
        let _guard = inject(Fault::CurvatureSign);
        let ab = compose(&f, &a, &b);
        let direct = apply_op_lin(&f, &ab, &Lin::basis(w.clone()));
        let nested = apply_op_lin(&f, &Lin::basis(a.clone()), &apply_op_to_form(&f, &b, &w));
        assert_ne!(direct, nested, "fault should desynchronize the two paths");
    }

    #[test]
    fn composition_associates() {
        let f = twisted();
        let ops = enumerate_ops(f.ctx(), 1, 1);
        for a in ops.iter().step_by(11) {
            for b in ops.iter().step_by(13) {
                for c in ops.iter().step_by(17) {
                    let left = compose_lin(&f, &compose(&f, a, b), &Lin::basis(c.clone()));
                    let right = compose_lin(&f, &Lin::basis(a.clone()), &compose(&f, b, c));
                    assert_eq!(left, right, "associativity fails at {a}, {b}, {c}");
                }
            }
        }
    }

    #[test]
    fn differential_operator_squares_to_zero() {
        for f in [shear(), twisted()] {
            let d = dbar_op_lin(&f);
            assert!(compose_lin(&f, &d, &d).is_zero());
        }
    }

    #[test]
    fn differential_commutes_with_frame_derivatives() {
        for f in [shear(), twisted()] {
            let d = dbar_op_lin(&f);
            for a in 0..f.m() {
                let t = t_letter(&f, a as u32);
                // Odd degree on the left: [d, T] = d∘T − T∘d.
                let comm = compose_lin(&f, &d, &t).sub(&compose_lin(&f, &t, &d));
                assert!(comm.is_zero(), "[d, T{}] ≠ 0", a + 1);
            }
        }
    }

    #[test]
    fn frame_derivative_on_sample_forms() {
        let f = shear();
        let ctx = f.ctx();
        // T₁ u1 = 1.
        let u1 = FormBasis::variable(ctx, 1);
        assert_eq!(
            t_on_form(&f, 0, &u1),
            Lin::basis(FormBasis::one(ctx))
        );
        // T₁ (x1 dx1) = u2 dx1.
        let mut xdx = FormBasis::coordinate_form(ctx, 0);
        xdx.exps[0] = 1;
        let mut expect = FormBasis::coordinate_form(ctx, 0);
        expect.exps[2] = 1;
        assert_eq!(t_on_form(&f, 0, &xdx), Lin::basis(expect));
    }

    #[test]
    fn delta_matches_differential_of_application() {
        // [d, a] applied to w equals d(a w) − (−1)^{|a|} a(d w).
        let f = twisted();
        let ops = enumerate_ops(f.ctx(), 1, 2);
        let forms = enumerate_forms(f.ctx(), 1);
        for a in ops.iter().step_by(41) {
            let da = delta_comp(&f, a);
            for w in forms.iter().step_by(5) {
                let lhs = apply_op_lin(&f, &da, &Lin::basis(w.clone()));
                let mut rhs = super::super::basis::dbar_form_lin(&apply_op_to_form(&f, a, w));
                rhs.add_assign_scaled(
                    &apply_op_lin(&f, &Lin::basis(a.clone()), &dbar_form(w)),
                    &(-minus_one_pow(a.degree())),
                );
                assert_eq!(lhs, rhs, "graded commutator mismatch at {a} on {w}");
            }
        }
    }

    #[test]
    fn symbol_differentials_agree() {
        for f in [shear(), twisted()] {
            for b in enumerate_normals(f.ctx(), 2, 2) {
                let ce = dbar_normal(&f, &b);
                let star = dbar_star(&f, &b);
                assert_eq!(ce, star, "symbol differentials disagree at {b}");
            }
        }
    }

    #[test]
    fn symbol_differential_squares_to_zero() {
        let f = twisted();
        for b in enumerate_normals(f.ctx(), 2, 2) {
            let once = dbar_star(&f, &b);
            let twice: Lin<NormalBasis> = once.map(|c| dbar_star(&f, c));
            assert!(twice.is_zero(), "d² ≠ 0 at {b}");
        }
    }

    #[test]
    fn frame_action_vanishes_for_the_adapted_connection() {
        for f in [shear(), twisted()] {
            for b in enumerate_normals(f.ctx(), 1, 2) {
                for k in 0..f.n() {
                    assert!(frame_action_on_normal(&f, k, &b).is_zero());
                }
            }
        }
    }

    #[test]
    fn symbol_differential_on_samples() {
        let f = shear();
        let ctx = f.ctx();
        // A transverse coefficient is closed: d(u1 · 1̄) = 0.
        let mut u1bar = NormalBasis::one(ctx);
        u1bar.exps[1] = 1;
        assert!(dbar_star(&f, &u1bar).is_zero());
        // A bare transverse direction is closed.
        assert!(dbar_star(&f, &NormalBasis::transverse(ctx, 0)).is_zero());
        // d(x1 · 1̄) = dx1.
        let mut x1bar = NormalBasis::one(ctx);
        x1bar.exps[0] = 1;
        assert_eq!(
            dbar_star(&f, &x1bar),
            Lin::basis(NormalBasis::from_form(&FormBasis::coordinate_form(ctx, 0)))
        );
    }

    #[test]
    fn leaf_derivative_composition_halves() {
        // D ∘ x-multiplication = x-multiplication ∘ D + 1, so the engine
        // reproduces ∂(x²)/2! = x with exact rational weights.
        let f = shear();
        let ctx = f.ctx();
        let d = OpBasis::leaf_letter(ctx, 0);
        let mut x2 = OpBasis::one(ctx);
        x2.exps[0] = 2;
        let dx2 = compose(&f, &d, &x2);
        let mut swap = x2.clone();
        swap.dw = d.dw.clone();
        let mut x1 = OpBasis::one(ctx);
        x1.exps[0] = 1;
        let mut expect = Lin::basis(swap);
        expect.add_term(x1, rat(2));
        assert_eq!(dx2, expect);
        assert_eq!(ratq(2, 1), rat(2));
    }
}
