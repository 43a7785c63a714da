//! The contraction of operator symbols onto normal-operator symbols, and
//! the splitting of graded derivations of leafwise forms into contraction,
//! leaf-transport, and frame-transport parts.

use std::rc::Rc;

use super::basis::{
    dbar_form, dbar_form_lin, enumerate_forms, form_mul, form_mul_lin, iota_form, j_include_basis,
    p_filter_basis, partial_form, poly_times_form_lin, FormBasis, NormalBasis, OpBasis,
};
use super::geometry::{FoliationError, PolyFoliation};
use super::operator::t_on_form;
use crate::exact::{minus_one_pow, BasisElem, IndexKind, Lin, MultiIndex, Rat};
use crate::homotopy::{Complex, Contraction, MapRef};

// ---- the symbol differential and homotopy ----

/// The chart-independent differential on operator symbols: the coefficient
/// differential plus the odd move of contraction letters to leaf letters.
pub fn delta_s(b: &OpBasis) -> Lin<OpBasis> {
    let mut out = Lin::zero();
    // Coefficient differential.
    for k in 0..b.ctx.leaf {
        if b.exps[k] == 0 {
            continue;
        }
        let mut entries = vec![k as u32];
        entries.extend_from_slice(b.dx.entries());
        if let Some((dx, sign)) = MultiIndex::canonicalize(IndexKind::Antisymmetric, entries) {
            let mut exps = b.exps.clone();
            exps[k] -= 1;
            out.add_term(
                OpBasis {
                    ctx: b.ctx,
                    exps,
                    dx,
                    iw: b.iw.clone(),
                    dw: b.dw.clone(),
                    tw: b.tw.clone(),
                },
                sign * Rat::from_integer(b.exps[k].into()),
            );
        }
    }
    // Odd move: one contraction letter becomes a leaf letter.
    for (s, &i) in b.iw.entries().iter().enumerate() {
        let iw_rest: Vec<u32> = b
            .iw
            .entries()
            .iter()
            .enumerate()
            .filter(|(t, _)| *t != s)
            .map(|(_, &x)| x)
            .collect();
        let (iw, extra) = MultiIndex::canonicalize(IndexKind::Antisymmetric, iw_rest)
            .expect("subword of a strict word");
        debug_assert!(num::One::is_one(&extra));
        let mut dw_entries = b.dw.entries().to_vec();
        dw_entries.push(i);
        let dw = MultiIndex::canonicalize(IndexKind::Symmetric, dw_entries)
            .expect("symmetric word")
            .0;
        out.add_term(
            OpBasis {
                ctx: b.ctx,
                exps: b.exps.clone(),
                dx: b.dx.clone(),
                iw,
                dw,
                tw: b.tw.clone(),
            },
            minus_one_pow((b.dx.len() + s) as i64),
        );
    }
    out
}

/// The contracting homotopy on operator symbols: move one leaf letter back
/// to a contraction letter, averaged over the letter count.
pub fn h_s(b: &OpBasis) -> Lin<OpBasis> {
    let z = b.iw.len() + b.dw.len();
    if z == 0 {
        return Lin::zero();
    }
    let mut out = Lin::zero();
    let entries = b.dw.entries();
    let mut s = 0;
    while s < entries.len() {
        let j = entries[s];
        let mut mult = 0usize;
        while s < entries.len() && entries[s] == j {
            mult += 1;
            s += 1;
        }
        if b.iw.entries().contains(&j) {
            continue;
        }
        let mut iw_entries = b.iw.entries().to_vec();
        iw_entries.push(j);
        let (iw, _) = match MultiIndex::canonicalize(IndexKind::Antisymmetric, iw_entries) {
            Some(x) => x,
            None => continue,
        };
        let dw_rest: Vec<u32> = {
            let mut v = entries.to_vec();
            let pos = v.iter().position(|&x| x == j).expect("present");
            v.remove(pos);
            v
        };
        let dw = MultiIndex::canonicalize(IndexKind::Symmetric, dw_rest)
            .expect("symmetric word")
            .0;
        let above = b.iw.entries().iter().filter(|&&i| i > j).count();
        let sign = minus_one_pow((b.dx.len() + b.iw.len() + above) as i64);
        let coeff = crate::exact::ratq(mult as i64, z as i64) * sign;
        out.add_term(
            OpBasis {
                ctx: b.ctx,
                exps: b.exps.clone(),
                dx: b.dx.clone(),
                iw,
                dw,
                tw: b.tw.clone(),
            },
            coeff,
        );
    }
    out
}

/// The differential induced on normal-operator symbols by the projection:
/// the coefficient differential alone.
pub fn delta_small(b: &NormalBasis) -> Lin<NormalBasis> {
    dbar_form(&b.coefficient())
        .iter()
        .map(|(fb, c)| {
            (
                NormalBasis {
                    ctx: b.ctx,
                    exps: fb.exps.clone(),
                    dx: fb.dx.clone(),
                    vw: b.vw.clone(),
                },
                c.clone(),
            )
        })
        .collect()
}

/// The contraction of operator symbols onto normal-operator symbols, with
/// the operator order as filtration on the big side.
pub fn symmetric_contraction() -> Contraction<OpBasis, NormalBasis> {
    Contraction {
        big: Complex::with_filtration(MapRef::new(1, delta_s), |b: &OpBasis| b.order()),
        small: Complex::new(MapRef::new(1, delta_small)),
        p: MapRef::new(0, |b: &OpBasis| match p_filter_basis(b) {
            Some(nb) => Lin::basis(nb),
            None => Lin::zero(),
        }),
        j: MapRef::new(0, |b: &NormalBasis| Lin::basis(j_include_basis(b))),
        h: MapRef::new(-1, h_s),
    }
}

// ---- graded derivations of leafwise forms ----

/// An evaluator for a graded derivation of leafwise forms.
#[derive(Clone)]
pub struct DerivationEval {
    /// Degree shift of the derivation.
    pub degree: i64,
    /// Action on a monomial form.
    pub eval: Rc<dyn Fn(&FormBasis) -> Lin<FormBasis>>,
}

impl DerivationEval {
    /// Apply the derivation to a linear combination.
    pub fn eval_lin(&self, l: &Lin<FormBasis>) -> Lin<FormBasis> {
        l.map(|b| (self.eval)(b))
    }
}

/// The split of a graded derivation into named components: contraction
/// coefficients, leaf-transport coefficients, frame-transport coefficients,
/// and the alternative contraction coefficients of the plain-transport
/// shape.
#[derive(Clone)]
pub struct DerivationParts {
    /// Contraction coefficients, one per leaf direction.
    pub u: Vec<Lin<FormBasis>>,
    /// Leaf-transport coefficients, one per leaf direction.
    pub v: Vec<Lin<FormBasis>>,
    /// Frame-transport coefficients, one per transverse direction.
    pub w: Vec<Lin<FormBasis>>,
    /// Contraction coefficients of the plain-transport shape.
    pub w_prime: Vec<Lin<FormBasis>>,
}

/// Assemble a derivation from contraction, leaf-transport, and
/// frame-transport coefficients.
pub fn derivation_from_parts(
    f: &Rc<PolyFoliation>,
    u: &[Lin<FormBasis>],
    v: &[Lin<FormBasis>],
    w: &[Lin<FormBasis>],
    degree: i64,
) -> DerivationEval {
    let f = Rc::clone(f);
    let u = u.to_vec();
    let v = v.to_vec();
    let w = w.to_vec();
    DerivationEval {
        degree,
        eval: Rc::new(move |b: &FormBasis| {
            let mut out = Lin::zero();
            for (j, uj) in u.iter().enumerate() {
                out.add_assign_scaled(&form_mul_lin(uj, &iota_form(j as u32, b)), &Rat::from_integer(1.into()));
            }
            for (j, vj) in v.iter().enumerate() {
                out.add_assign_scaled(&form_mul_lin(vj, &partial_form(j, b)), &Rat::from_integer(1.into()));
                // Transport of the one-form letters, one homogeneous
                // component of the coefficient at a time.
                for (fb, c) in vj.iter() {
                    let scaled = dbar_form(fb).scale(&(c.clone() * minus_one_pow(fb.degree())));
                    out.add_assign_scaled(
                        &form_mul_lin(&scaled, &iota_form(j as u32, b)),
                        &Rat::from_integer(1.into()),
                    );
                }
            }
            for (be, wb) in w.iter().enumerate() {
                out.add_assign_scaled(
                    &form_mul_lin(wb, &t_on_form(&f, be, b)),
                    &Rat::from_integer(1.into()),
                );
            }
            out
        }),
    }
}

/// Split a graded derivation into its components, verifying the Leibniz
/// rule and degree homogeneity on a probe set first.
pub fn decompose_derivation(
    f: &Rc<PolyFoliation>,
    d: &DerivationEval,
    max_deg: u32,
) -> Result<DerivationParts, FoliationError> {
    let ctx = f.ctx();
    let n = f.n();
    let m = f.m();
    let probe = enumerate_forms(ctx, max_deg.min(2));

    for b in &probe {
        let db = (d.eval)(b);
        if let Some(deg) = db.homogeneous_degree() {
            if deg != b.degree() + d.degree {
                return Err(FoliationError::NotADerivation {
                    witness: format!("degree shift at {b}: got {deg}"),
                });
            }
        }
    }
    for (ia, a) in probe.iter().enumerate() {
        for b in probe.iter().skip(ia).step_by(3) {
            let lhs = form_mul(a, b).map(|c| (d.eval)(c));
            let mut rhs = form_mul_lin(&(d.eval)(a), &Lin::basis(b.clone()));
            rhs.add_assign_scaled(
                &form_mul_lin(&Lin::basis(a.clone()), &(d.eval)(b)),
                &minus_one_pow(d.degree * a.degree()),
            );
            if lhs != rhs {
                return Err(FoliationError::NotADerivation {
                    witness: format!("{a} · {b}"),
                });
            }
        }
    }

    // Frame-transport coefficients from the transverse coordinates.
    let w: Vec<Lin<FormBasis>> = (0..m)
        .map(|be| (d.eval)(&FormBasis::variable(ctx, n + be)))
        .collect();
    // Leaf-transport coefficients from the leaf coordinates, with the
    // frame contribution removed.
    let v: Vec<Lin<FormBasis>> = (0..n)
        .map(|j| {
            let mut e = (d.eval)(&FormBasis::variable(ctx, j));
            for be in 0..m {
                e.add_assign_scaled(
                    &poly_times_form_lin(f.v(be, j), &w[be]),
                    &Rat::from_integer((-1).into()),
                );
            }
            e
        })
        .collect();
    // Contraction coefficients from the failure to commute with the
    // differential on the coordinates.
    let sgn = minus_one_pow(d.degree);
    let comm_u: Vec<Lin<FormBasis>> = (0..m)
        .map(|be| dbar_form_lin(&w[be]).scale(&-sgn.clone()))
        .collect();
    let u: Vec<Lin<FormBasis>> = (0..n)
        .map(|j| {
            let mut a = (d.eval)(&FormBasis::coordinate_form(ctx, j as u32));
            a.add_assign_scaled(
                &dbar_form_lin(&(d.eval)(&FormBasis::variable(ctx, j))),
                &-sgn.clone(),
            );
            for be in 0..m {
                a.add_assign_scaled(
                    &poly_times_form_lin(f.v(be, j), &comm_u[be]),
                    &Rat::from_integer((-1).into()),
                );
            }
            a
        })
        .collect();
    // Contraction coefficients of the plain-transport shape.
    let w_prime: Vec<Lin<FormBasis>> = (0..n)
        .map(|j| {
            let mut wp = u[j].clone();
            for (fb, c) in v[j].iter() {
                wp.add_assign_scaled(
                    &dbar_form(fb),
                    &(c.clone() * minus_one_pow(fb.degree())),
                );
            }
            wp
        })
        .collect();
    Ok(DerivationParts { u, v, w, w_prime })
}

/// Compare a derivation against both reassembled shapes on a probe set;
/// returns human-readable mismatches (empty when both shapes agree).
pub fn reassembly_defects(
    f: &Rc<PolyFoliation>,
    d: &DerivationEval,
    parts: &DerivationParts,
    probe_deg: u32,
) -> Vec<String> {
    let ctx = f.ctx();
    let rebuilt = derivation_from_parts(f, &parts.u, &parts.v, &parts.w, d.degree);
    let mut bad = Vec::new();
    for b in enumerate_forms(ctx, probe_deg) {
        let want = (d.eval)(&b);
        if (rebuilt.eval)(&b) != want {
            bad.push(format!("transport shape differs at {b}"));
        }
        // Plain-transport shape: contraction with the alternative
        // coefficients, bare leaf transport, frame transport.
        let mut second = Lin::zero();
        for (j, wpj) in parts.w_prime.iter().enumerate() {
            second.add_assign_scaled(
                &form_mul_lin(wpj, &iota_form(j as u32, &b)),
                &Rat::from_integer(1.into()),
            );
        }
        for (j, vj) in parts.v.iter().enumerate() {
            second.add_assign_scaled(
                &form_mul_lin(vj, &partial_form(j, &b)),
                &Rat::from_integer(1.into()),
            );
        }
        for (be, wb) in parts.w.iter().enumerate() {
            second.add_assign_scaled(
                &form_mul_lin(wb, &t_on_form(f, be, &b)),
                &Rat::from_integer(1.into()),
            );
        }
        if second != want {
            bad.push(format!("plain shape differs at {b}"));
        }
    }
    bad
}

// ---- tests ----
