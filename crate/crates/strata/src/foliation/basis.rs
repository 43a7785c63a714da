//! Graded bases for the foliation chart: monomial leafwise forms, operator
//! words in normal form, and normal-operator symbols, together with their
//! products, contractions, and deterministic enumeration helpers.

use std::fmt;

use num::One;

use crate::exact::{BasisElem, IndexKind, Lin, MultiIndex, Poly, Rat, VarCtx};

// ---- leafwise forms ----

/// A coefficient monomial times an antisymmetric word of leafwise
/// coordinate one-forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FormBasis {
    /// Variable context of the chart.
    pub ctx: VarCtx,
    /// Exponents of the coefficient monomial, one entry per chart variable.
    pub exps: Vec<u32>,
    /// Strictly increasing word of leafwise coordinate one-forms.
    pub dx: MultiIndex,
}

impl FormBasis {
    /// The constant form `1`.
    pub fn one(ctx: VarCtx) -> Self {
        FormBasis {
            ctx,
            exps: vec![0; ctx.total()],
            dx: MultiIndex::empty(IndexKind::Antisymmetric),
        }
    }

    /// A monomial zero-form with the given exponent vector.
    pub fn monomial(ctx: VarCtx, exps: Vec<u32>) -> Self {
        assert_eq!(exps.len(), ctx.total());
        FormBasis {
            ctx,
            exps,
            dx: MultiIndex::empty(IndexKind::Antisymmetric),
        }
    }

    /// A single chart variable as a zero-form.
    pub fn variable(ctx: VarCtx, i: usize) -> Self {
        let mut exps = vec![0; ctx.total()];
        exps[i] = 1;
        FormBasis {
            ctx,
            exps,
            dx: MultiIndex::empty(IndexKind::Antisymmetric),
        }
    }

    /// The coordinate one-form `dx^j` (leaf index `j`).
    pub fn coordinate_form(ctx: VarCtx, j: u32) -> Self {
        let (dx, sign) =
            MultiIndex::canonicalize(IndexKind::Antisymmetric, vec![j]).expect("single letter");
        assert!(sign.is_one());
        FormBasis {
            ctx,
            exps: vec![0; ctx.total()],
            dx,
        }
    }

    /// Form degree: the length of the one-form word.
    pub fn form_degree(&self) -> i64 {
        self.dx.len() as i64
    }

    /// The coefficient monomial as a polynomial.
    pub fn coefficient_poly(&self) -> Poly {
        Poly::monomial(self.ctx, self.exps.clone(), Rat::one())
    }

    /// Total polynomial degree of the coefficient monomial.
    pub fn coefficient_degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

impl BasisElem for FormBasis {
    fn degree(&self) -> i64 {
        self.form_degree()
    }
}

impl fmt::Display for FormBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        push_mono_parts(&mut parts, self.ctx, &self.exps);
        push_letter_parts(&mut parts, "dx", &self.dx);
        write_parts(f, &parts)
    }
}

// ---- operator words ----

/// A differential-operator word in normal form: a form coefficient followed
/// by contraction letters, leaf covariant letters, and transverse covariant
/// letters.  The same data also names the free graded-commutative symbol on
/// those letters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OpBasis {
    /// Variable context of the chart.
    pub ctx: VarCtx,
    /// Exponents of the coefficient monomial.
    pub exps: Vec<u32>,
    /// One-form word of the coefficient (degree `+1` letters).
    pub dx: MultiIndex,
    /// Antisymmetric word of contraction letters (degree `-1`).
    pub iw: MultiIndex,
    /// Symmetric word of leaf covariant letters (degree `0`).
    pub dw: MultiIndex,
    /// Symmetric word of transverse covariant letters (degree `0`).
    pub tw: MultiIndex,
}

impl OpBasis {
    /// The identity operator `1`.
    pub fn one(ctx: VarCtx) -> Self {
        OpBasis {
            ctx,
            exps: vec![0; ctx.total()],
            dx: MultiIndex::empty(IndexKind::Antisymmetric),
            iw: MultiIndex::empty(IndexKind::Antisymmetric),
            dw: MultiIndex::empty(IndexKind::Symmetric),
            tw: MultiIndex::empty(IndexKind::Symmetric),
        }
    }

    /// A pure multiplication operator by the given form.
    pub fn from_form(b: &FormBasis) -> Self {
        OpBasis {
            ctx: b.ctx,
            exps: b.exps.clone(),
            dx: b.dx.clone(),
            iw: MultiIndex::empty(IndexKind::Antisymmetric),
            dw: MultiIndex::empty(IndexKind::Symmetric),
            tw: MultiIndex::empty(IndexKind::Symmetric),
        }
    }

    /// A single transverse covariant letter.
    pub fn transverse_letter(ctx: VarCtx, alpha: u32) -> Self {
        let mut b = OpBasis::one(ctx);
        b.tw = MultiIndex::canonicalize(IndexKind::Symmetric, vec![alpha])
            .expect("symmetric letter")
            .0;
        b
    }

    /// A single leaf covariant letter.
    pub fn leaf_letter(ctx: VarCtx, i: u32) -> Self {
        let mut b = OpBasis::one(ctx);
        b.dw = MultiIndex::canonicalize(IndexKind::Symmetric, vec![i])
            .expect("symmetric letter")
            .0;
        b
    }

    /// A single contraction letter.
    pub fn contraction_letter(ctx: VarCtx, i: u32) -> Self {
        let mut b = OpBasis::one(ctx);
        b.iw = MultiIndex::canonicalize(IndexKind::Antisymmetric, vec![i])
            .expect("single letter")
            .0;
        b
    }

    /// The form coefficient in front of the letters.
    pub fn coefficient(&self) -> FormBasis {
        FormBasis {
            ctx: self.ctx,
            exps: self.exps.clone(),
            dx: self.dx.clone(),
        }
    }

    /// Operator order: the number of contraction and covariant letters.
    pub fn order(&self) -> i64 {
        (self.iw.len() + self.dw.len() + self.tw.len()) as i64
    }

    /// Whether the word carries contraction or leaf covariant letters.
    pub fn has_leaf_letters(&self) -> bool {
        !self.iw.is_empty() || !self.dw.is_empty()
    }
}

impl BasisElem for OpBasis {
    fn degree(&self) -> i64 {
        self.dx.len() as i64 - self.iw.len() as i64
    }
}

impl fmt::Display for OpBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        push_mono_parts(&mut parts, self.ctx, &self.exps);
        push_letter_parts(&mut parts, "dx", &self.dx);
        push_letter_parts(&mut parts, "I", &self.iw);
        push_letter_parts(&mut parts, "D", &self.dw);
        push_letter_parts(&mut parts, "T", &self.tw);
        write_parts(f, &parts)
    }
}

// ---- normal-operator symbols ----

/// A normal-operator symbol: a form coefficient times a symmetric word of
/// transverse directions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NormalBasis {
    /// Variable context of the chart.
    pub ctx: VarCtx,
    /// Exponents of the coefficient monomial.
    pub exps: Vec<u32>,
    /// One-form word of the coefficient.
    pub dx: MultiIndex,
    /// Symmetric word of transverse directions.
    pub vw: MultiIndex,
}

impl NormalBasis {
    /// The unit symbol `1`.
    pub fn one(ctx: VarCtx) -> Self {
        NormalBasis {
            ctx,
            exps: vec![0; ctx.total()],
            dx: MultiIndex::empty(IndexKind::Antisymmetric),
            vw: MultiIndex::empty(IndexKind::Symmetric),
        }
    }

    /// A form as an order-zero symbol.
    pub fn from_form(b: &FormBasis) -> Self {
        NormalBasis {
            ctx: b.ctx,
            exps: b.exps.clone(),
            dx: b.dx.clone(),
            vw: MultiIndex::empty(IndexKind::Symmetric),
        }
    }

    /// A single transverse direction.
    pub fn transverse(ctx: VarCtx, alpha: u32) -> Self {
        let mut b = NormalBasis::one(ctx);
        b.vw = MultiIndex::canonicalize(IndexKind::Symmetric, vec![alpha])
            .expect("symmetric letter")
            .0;
        b
    }

    /// The form coefficient.
    pub fn coefficient(&self) -> FormBasis {
        FormBasis {
            ctx: self.ctx,
            exps: self.exps.clone(),
            dx: self.dx.clone(),
        }
    }

    /// Symbol order: the length of the transverse word.
    pub fn order(&self) -> i64 {
        self.vw.len() as i64
    }

    /// The symbol as a plain form, when it has no transverse letters.
    pub fn as_form(&self) -> Option<FormBasis> {
        if self.vw.is_empty() {
            Some(self.coefficient())
        } else {
            None
        }
    }
}

impl BasisElem for NormalBasis {
    fn degree(&self) -> i64 {
        self.dx.len() as i64
    }
}

impl fmt::Display for NormalBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        push_mono_parts(&mut parts, self.ctx, &self.exps);
        push_letter_parts(&mut parts, "dx", &self.dx);
        push_letter_parts(&mut parts, "V", &self.vw);
        write_parts(f, &parts)
    }
}

// ---- vector-space aliases ----

/// A leafwise form: a rational linear combination of monomial forms.
pub type FoliatedForm = Lin<FormBasis>;
/// A differential operator on leafwise forms, in normal-ordered coordinates.
pub type FoliatedOperator = Lin<OpBasis>;
/// A normal-operator symbol with leafwise form coefficients.
pub type NormalOperator = Lin<NormalBasis>;

// ---- display helpers ----

fn push_mono_parts(parts: &mut Vec<String>, ctx: VarCtx, exps: &[u32]) {
    for (i, &e) in exps.iter().enumerate() {
        if e == 1 {
            parts.push(ctx.var_name(i));
        } else if e > 1 {
            parts.push(format!("{}^{}", ctx.var_name(i), e));
        }
    }
}

fn push_letter_parts(parts: &mut Vec<String>, tag: &str, word: &MultiIndex) {
    for &i in word.entries() {
        parts.push(format!("{}{}", tag, i + 1));
    }
}

fn write_parts(f: &mut fmt::Formatter<'_>, parts: &[String]) -> fmt::Result {
    if parts.is_empty() {
        write!(f, "1")
    } else {
        write!(f, "{}", parts.join("·"))
    }
}

// ---- form arithmetic ----

/// Expand a polynomial against a one-form word into a linear combination.
pub fn form_from_poly(p: &Poly, dx: &MultiIndex) -> Lin<FormBasis> {
    let ctx = p.ctx();
    p.terms()
        .map(|(exps, c)| {
            (
                FormBasis {
                    ctx,
                    exps: exps.to_vec(),
                    dx: dx.clone(),
                },
                c.clone(),
            )
        })
        .collect()
}

/// Product of two monomial forms (wedge on the one-form words).
pub fn form_mul(a: &FormBasis, b: &FormBasis) -> Lin<FormBasis> {
    let (dx, sign) = match a.dx.product(&b.dx) {
        Some(p) => p,
        None => return Lin::zero(),
    };
    let exps = add_exps(&a.exps, &b.exps);
    Lin::single(
        FormBasis {
            ctx: a.ctx,
            exps,
            dx,
        },
        sign,
    )
}

/// Bilinear extension of [`form_mul`].
pub fn form_mul_lin(a: &Lin<FormBasis>, b: &Lin<FormBasis>) -> Lin<FormBasis> {
    let mut out = Lin::zero();
    for (ba, ca) in a.iter() {
        for (bb, cb) in b.iter() {
            out.add_assign_scaled(&form_mul(ba, bb), &(ca.clone() * cb.clone()));
        }
    }
    out
}

/// Multiply a monomial form by a polynomial coefficient.
pub fn poly_times_form(p: &Poly, b: &FormBasis) -> Lin<FormBasis> {
    p.terms()
        .map(|(exps, c)| {
            (
                FormBasis {
                    ctx: b.ctx,
                    exps: add_exps(exps, &b.exps),
                    dx: b.dx.clone(),
                },
                c.clone(),
            )
        })
        .collect()
}

/// Multiply a whole form by a polynomial coefficient.
pub fn poly_times_form_lin(p: &Poly, l: &Lin<FormBasis>) -> Lin<FormBasis> {
    l.map(|b| poly_times_form(p, b))
}

/// The leafwise differential of a monomial form.
pub fn dbar_form(b: &FormBasis) -> Lin<FormBasis> {
    let mut out = Lin::zero();
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
                FormBasis {
                    ctx: b.ctx,
                    exps,
                    dx,
                },
                sign * Rat::from_integer(b.exps[k].into()),
            );
        }
    }
    out
}

/// Linear extension of [`dbar_form`].
pub fn dbar_form_lin(l: &Lin<FormBasis>) -> Lin<FormBasis> {
    l.map(dbar_form)
}

/// Contraction of a monomial form with a leaf coordinate direction.
pub fn iota_form(i: u32, b: &FormBasis) -> Lin<FormBasis> {
    match b.dx.entries().iter().position(|&j| j == i) {
        None => Lin::zero(),
        Some(pos) => {
            let entries: Vec<u32> = b
                .dx
                .entries()
                .iter()
                .copied()
                .filter(|&j| j != i)
                .collect();
            let (dx, extra) = MultiIndex::canonicalize(IndexKind::Antisymmetric, entries)
                .expect("subword of a strict word");
            assert!(extra.is_one());
            Lin::single(
                FormBasis {
                    ctx: b.ctx,
                    exps: b.exps.clone(),
                    dx,
                },
                crate::exact::minus_one_pow(pos as i64),
            )
        }
    }
}

/// Left wedge with the coordinate one-form of leaf index `j`.
pub fn wedge_form(j: u32, b: &FormBasis) -> Lin<FormBasis> {
    let mut entries = vec![j];
    entries.extend_from_slice(b.dx.entries());
    match MultiIndex::canonicalize(IndexKind::Antisymmetric, entries) {
        None => Lin::zero(),
        Some((dx, sign)) => Lin::single(
            FormBasis {
                ctx: b.ctx,
                exps: b.exps.clone(),
                dx,
            },
            sign,
        ),
    }
}

/// Coefficient derivative along a leaf coordinate direction.
pub fn partial_form(i: usize, b: &FormBasis) -> Lin<FormBasis> {
    if b.exps[i] == 0 {
        return Lin::zero();
    }
    let mut exps = b.exps.clone();
    exps[i] -= 1;
    Lin::single(
        FormBasis {
            ctx: b.ctx,
            exps,
            dx: b.dx.clone(),
        },
        Rat::from_integer(b.exps[i].into()),
    )
}

fn add_exps(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b.iter()).map(|(x, y)| x + y).collect()
}

// ---- symbol product and projections ----

/// Graded-commutative product of two operator symbols.
pub fn sym_op_mul(a: &OpBasis, b: &OpBasis) -> Lin<OpBasis> {
    let (dx, s1) = match a.dx.product(&b.dx) {
        Some(p) => p,
        None => return Lin::zero(),
    };
    let (iw, s2) = match a.iw.product(&b.iw) {
        Some(p) => p,
        None => return Lin::zero(),
    };
    let (dw, s3) = a.dw.product(&b.dw).expect("symmetric words always merge");
    let (tw, s4) = a.tw.product(&b.tw).expect("symmetric words always merge");
    // The coefficient of `b` crosses the contraction letters of `a`.
    let cross = crate::exact::minus_one_pow((b.dx.len() * a.iw.len()) as i64);
    Lin::single(
        OpBasis {
            ctx: a.ctx,
            exps: add_exps(&a.exps, &b.exps),
            dx,
            iw,
            dw,
            tw,
        },
        s1 * s2 * s3 * s4 * cross,
    )
}

/// Bilinear extension of [`sym_op_mul`].
pub fn sym_op_mul_lin(a: &Lin<OpBasis>, b: &Lin<OpBasis>) -> Lin<OpBasis> {
    let mut out = Lin::zero();
    for (ba, ca) in a.iter() {
        for (bb, cb) in b.iter() {
            out.add_assign_scaled(&sym_op_mul(ba, bb), &(ca.clone() * cb.clone()));
        }
    }
    out
}

/// Projection of a word onto normal-operator symbols: words with contraction
/// or leaf covariant letters are sent to zero.
pub fn p_filter_basis(b: &OpBasis) -> Option<NormalBasis> {
    if b.has_leaf_letters() {
        None
    } else {
        Some(NormalBasis {
            ctx: b.ctx,
            exps: b.exps.clone(),
            dx: b.dx.clone(),
            vw: MultiIndex::canonicalize(IndexKind::Symmetric, b.tw.entries().to_vec())
                .expect("symmetric word")
                .0,
        })
    }
}

/// Linear extension of [`p_filter_basis`].
pub fn p_filter(l: &Lin<OpBasis>) -> Lin<NormalBasis> {
    l.map(|b| match p_filter_basis(b) {
        Some(nb) => Lin::basis(nb),
        None => Lin::zero(),
    })
}

/// Inclusion of a normal-operator symbol as a pure transverse word.
pub fn j_include_basis(b: &NormalBasis) -> OpBasis {
    OpBasis {
        ctx: b.ctx,
        exps: b.exps.clone(),
        dx: b.dx.clone(),
        iw: MultiIndex::empty(IndexKind::Antisymmetric),
        dw: MultiIndex::empty(IndexKind::Symmetric),
        tw: MultiIndex::canonicalize(IndexKind::Symmetric, b.vw.entries().to_vec())
            .expect("symmetric word")
            .0,
    }
}

/// Linear extension of [`j_include_basis`].
pub fn j_include(l: &Lin<NormalBasis>) -> Lin<OpBasis> {
    l.map(|b| Lin::basis(j_include_basis(b)))
}

/// A form regarded as an order-zero normal-operator symbol.
pub fn form_to_normal(b: &FormBasis) -> NormalBasis {
    NormalBasis::from_form(b)
}

/// A symbol of pure order zero regarded as a form; `None` when any term
/// carries transverse letters.
pub fn normal_to_form(l: &Lin<NormalBasis>) -> Option<Lin<FormBasis>> {
    let mut out = Lin::zero();
    for (b, c) in l.iter() {
        out.add_term(b.as_form()?, c.clone());
    }
    Some(out)
}

// ---- enumeration ----

/// All exponent vectors of total degree at most `max_deg`, sorted.
pub fn monomials(ctx: VarCtx, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; ctx.total()];
    fill_monomials(&mut out, &mut cur, 0, max_deg);
    out.sort();
    out
}

fn fill_monomials(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, budget: u32) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for e in 0..=budget {
        cur[pos] = e;
        fill_monomials(out, cur, pos + 1, budget - e);
    }
    cur[pos] = 0;
}

/// All strictly increasing words over `0..count` of length at most `max_len`.
pub fn antisym_words(count: usize, max_len: usize) -> Vec<MultiIndex> {
    let mut subsets: Vec<Vec<u32>> = vec![vec![]];
    for i in 0..count as u32 {
        let mut extended: Vec<Vec<u32>> = subsets
            .iter()
            .filter(|w| w.len() < max_len)
            .map(|w| {
                let mut v = w.clone();
                v.push(i);
                v
            })
            .collect();
        subsets.append(&mut extended);
    }
    subsets.sort();
    subsets
        .into_iter()
        .map(|w| {
            MultiIndex::canonicalize(IndexKind::Antisymmetric, w)
                .expect("strict word")
                .0
        })
        .collect()
}

/// All weakly increasing words over `0..count` of length at most `max_len`.
pub fn sym_words(count: usize, max_len: usize) -> Vec<MultiIndex> {
    let mut words: Vec<Vec<u32>> = vec![vec![]];
    let mut frontier: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            let lo = w.last().copied().unwrap_or(0);
            for i in lo..count as u32 {
                let mut v = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words.sort();
    words
        .into_iter()
        .map(|w| {
            MultiIndex::canonicalize(IndexKind::Symmetric, w)
                .expect("symmetric word")
                .0
        })
        .collect()
}

/// All monomial forms within the given coefficient degree.
pub fn enumerate_forms(ctx: VarCtx, max_deg: u32) -> Vec<FormBasis> {
    let mut out = Vec::new();
    for exps in monomials(ctx, max_deg) {
        for dx in antisym_words(ctx.leaf, ctx.leaf) {
            out.push(FormBasis {
                ctx,
                exps: exps.clone(),
                dx,
            });
        }
    }
    out.sort();
    out
}

/// All normal-operator symbols within the given degree and order caps.
pub fn enumerate_normals(ctx: VarCtx, max_deg: u32, max_order: usize) -> Vec<NormalBasis> {
    let mut out = Vec::new();
    for exps in monomials(ctx, max_deg) {
        for dx in antisym_words(ctx.leaf, ctx.leaf) {
            for vw in sym_words(ctx.trans, max_order) {
                out.push(NormalBasis {
                    ctx,
                    exps: exps.clone(),
                    dx: dx.clone(),
                    vw,
                });
            }
        }
    }
    out.sort();
    out
}

/// All operator words within the given degree and order caps.
pub fn enumerate_ops(ctx: VarCtx, max_deg: u32, max_order: usize) -> Vec<OpBasis> {
    let mut out = Vec::new();
    for exps in monomials(ctx, max_deg) {
        for dx in antisym_words(ctx.leaf, ctx.leaf) {
            for iw in antisym_words(ctx.leaf, max_order) {
                for dw in sym_words(ctx.leaf, max_order - iw.len()) {
                    for tw in sym_words(ctx.trans, max_order - iw.len() - dw.len()) {
                        out.push(OpBasis {
                            ctx,
                            exps: exps.clone(),
                            dx: dx.clone(),
                            iw: iw.clone(),
                            dw: dw.clone(),
                            tw,
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

// ---- tests ----
