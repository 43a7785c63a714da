//! Polynomial foliation charts: tangent frames, their structure functions,
//! and the adapted connection with its verified axioms.

use std::rc::Rc;

use crate::exact::{Poly, PolyParseError, Rat, VarCtx};

// ---- errors ----

/// Errors raised while building or running a foliation model.
#[derive(Debug, thiserror::Error)]
pub enum FoliationError {
    /// The frame table does not have the required shape.
    #[error("frame table must have {rows} rows of {cols} entries, found {found}")]
    MalformedTable {
        /// Expected number of rows.
        rows: usize,
        /// Expected number of columns.
        cols: usize,
        /// Description of what was found.
        found: String,
    },
    /// An entry of the frame table failed to parse.
    #[error("bad frame entry at row {row}, column {col}")]
    BadEntry {
        /// Row of the offending entry (0-based).
        row: usize,
        /// Column of the offending entry (0-based).
        col: usize,
        /// Parse failure.
        #[source]
        source: PolyParseError,
    },
    /// Chart dimensions outside the supported range.
    #[error("unsupported chart dimensions: {n} leaf and {m} transverse directions")]
    BadDimensions {
        /// Leaf dimension.
        n: usize,
        /// Transverse dimension.
        m: usize,
    },
    /// An intermediate result left its expected filtration stratum.
    #[error("filtration stratum violated: {detail}")]
    StratumViolation {
        /// What went out of bounds.
        detail: String,
    },
    /// A map submitted for splitting does not satisfy the Leibniz rule.
    #[error("map is not a derivation: {witness}")]
    NotADerivation {
        /// A witness pair where the Leibniz rule fails.
        witness: String,
    },
    /// A requested operation arity exceeds the configured cap.
    #[error("arity {arity} exceeds the configured cap {cap}")]
    ArityCap {
        /// Requested arity.
        arity: usize,
        /// Configured cap.
        cap: usize,
    },
    /// A scenario requested a check that does not exist.
    #[error("unknown check: {0}")]
    UnknownCheck(String),
    /// A failure inside the homotopy-transfer engine.
    #[error(transparent)]
    Transfer(#[from] crate::transfer::TransferError),
}

// ---- the chart ----

/// A polynomial foliation chart: `n` leaf coordinates, `m` transverse
/// coordinates, and a transverse frame `V_α = ∂/∂u_α + Σ_i v_α^i ∂/∂x_i`
/// whose structure functions are recorded exactly.
#[derive(Debug)]
pub struct PolyFoliation {
    ctx: VarCtx,
    /// `v[α][i]` is the leaf component `v_α^i` of the frame field `V_α`.
    v: Vec<Vec<Poly>>,
    /// `r[α][β][i]` is the leaf component of the commutator `[V_α, V_β]`.
    r: Vec<Vec<Vec<Poly>>>,
    /// `theta[α][β][k][l]` is the coefficient of the degree-zero curvature
    /// letter `dx^k ⊗ ι_l` attached to the pair `(V_α, V_β)`.
    theta: Vec<Vec<Vec<Vec<Poly>>>>,
}

impl PolyFoliation {
    /// Build a chart from the leaf components of the transverse frame and
    /// verify its commutator table.
    pub fn new(n: usize, m: usize, v: Vec<Vec<Poly>>) -> Result<Rc<Self>, FoliationError> {
        if !(1..=2).contains(&n) || m > 2 {
            return Err(FoliationError::BadDimensions { n, m });
        }
        if v.len() != m || v.iter().any(|row| row.len() != n) {
            return Err(FoliationError::MalformedTable {
                rows: m,
                cols: n,
                found: format!(
                    "{} rows of lengths {:?}",
                    v.len(),
                    v.iter().map(|r| r.len()).collect::<Vec<_>>()
                ),
            });
        }
        let ctx = VarCtx::new(n, m);
        let zero = Poly::zero(ctx);

        let mut r = vec![vec![vec![zero.clone(); n]; m]; m];
        let mut theta = vec![vec![vec![vec![zero.clone(); n]; n]; m]; m];
        let f = PolyFoliation {
            ctx,
            v: v.clone(),
            r: r.clone(),
            theta: theta.clone(),
        };
        for a in 0..m {
            for b in 0..m {
                for i in 0..n {
                    r[a][b][i] = f.apply_v(a, &v[b][i]).sub(&f.apply_v(b, &v[a][i]));
                }
                for k in 0..n {
                    for l in 0..n {
                        // Derivative of the curvature letter table in the
                        // two frame directions plus the quadratic cross
                        // terms of the frame Jacobians.
                        let mut t = f
                            .apply_v(a, &v[b][l].partial(k))
                            .sub(&f.apply_v(b, &v[a][l].partial(k)));
                        for p in 0..n {
                            t = t
                                .add(&v[b][l].partial(p).mul(&v[a][p].partial(k)))
                                .sub(&v[a][l].partial(p).mul(&v[b][p].partial(k)));
                        }
                        theta[a][b][k][l] = t;
                    }
                }
            }
        }
        let f = Rc::new(PolyFoliation { ctx, v, r, theta });

        // Closure checks: coordinate fields commute into the frame again.
        for i in 0..n {
            let ei = f.coordinate_field(i);
            for a in 0..m {
                let comm = field_commutator(ctx, &ei, &f.frame_field_full_idx(a));
                let expect: Vec<Poly> = (0..n).map(|j| f.v[a][j].partial(i)).collect();
                for j in 0..n {
                    debug_assert_eq!(comm[j], expect[j], "leaf commutator table broken");
                }
                for b in 0..m {
                    debug_assert!(
                        comm[n + b].is_zero(),
                        "leaf-frame commutator has a transverse part"
                    );
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                let comm = field_commutator(
                    ctx,
                    &f.frame_field_full_idx(a),
                    &f.frame_field_full_idx(b),
                );
                for i in 0..n {
                    debug_assert_eq!(comm[i], f.r[a][b][i], "frame commutator table broken");
                }
                for c in 0..m {
                    debug_assert!(
                        comm[n + c].is_zero(),
                        "frame commutator has a transverse part"
                    );
                }
            }
        }
        Ok(f)
    }

    /// Variable context of the chart.
    pub fn ctx(&self) -> VarCtx {
        self.ctx
    }

    /// Leaf dimension.
    pub fn n(&self) -> usize {
        self.ctx.leaf
    }

    /// Transverse dimension.
    pub fn m(&self) -> usize {
        self.ctx.trans
    }

    /// Leaf component `v_α^i` of the frame field `V_α`.
    pub fn v(&self, alpha: usize, i: usize) -> &Poly {
        &self.v[alpha][i]
    }

    /// Leaf component `i` of the commutator `[V_α, V_β]`.
    pub fn r(&self, alpha: usize, beta: usize, i: usize) -> &Poly {
        &self.r[alpha][beta][i]
    }

    /// Coefficient of the curvature letter `dx^k ⊗ ι_l` for `(V_α, V_β)`.
    pub fn theta(&self, alpha: usize, beta: usize, k: usize, l: usize) -> &Poly {
        &self.theta[alpha][beta][k][l]
    }

    /// Whether every curvature-letter coefficient vanishes.
    pub fn theta_vanishes(&self) -> bool {
        self.theta
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .all(|p| p.is_zero())
    }

    /// Whether the frame commutator table vanishes.
    pub fn r_vanishes(&self) -> bool {
        self.r.iter().flatten().flatten().all(|p| p.is_zero())
    }

    /// Apply the frame field `V_α` to a polynomial.
    pub fn apply_v(&self, alpha: usize, p: &Poly) -> Poly {
        let mut out = p.partial(self.n() + alpha);
        for i in 0..self.n() {
            out = out.add(&self.v[alpha][i].mul(&p.partial(i)));
        }
        out
    }

    /// Apply a frame direction to a polynomial.
    pub fn apply_frame(&self, fr: Frame, p: &Poly) -> Poly {
        match fr {
            Frame::Leaf(i) => p.partial(i),
            Frame::Trans(a) => self.apply_v(a, p),
        }
    }

    /// A frame direction as a full coordinate field (length `n + m`).
    pub fn frame_field_full(&self, fr: Frame) -> Vec<Poly> {
        match fr {
            Frame::Leaf(i) => self.coordinate_field(i),
            Frame::Trans(a) => self.frame_field_full_idx(a),
        }
    }

    fn coordinate_field(&self, i: usize) -> Vec<Poly> {
        let mut w = vec![Poly::zero(self.ctx); self.ctx.total()];
        w[i] = Poly::constant(self.ctx, Rat::from_integer(1.into()));
        w
    }

    fn frame_field_full_idx(&self, alpha: usize) -> Vec<Poly> {
        let mut w = vec![Poly::zero(self.ctx); self.ctx.total()];
        for i in 0..self.n() {
            w[i] = self.v[alpha][i].clone();
        }
        w[self.n() + alpha] = Poly::constant(self.ctx, Rat::from_integer(1.into()));
        w
    }

    /// Express a coordinate field in the adapted frame: returns the
    /// coefficients of the leaf directions and of the transverse frame.
    pub fn frame_expand(&self, field: &[Poly]) -> (Vec<Poly>, Vec<Poly>) {
        assert_eq!(field.len(), self.ctx.total());
        let n = self.n();
        let v_part: Vec<Poly> = (0..self.m()).map(|b| field[n + b].clone()).collect();
        let leaf_part: Vec<Poly> = (0..n)
            .map(|i| {
                let mut p = field[i].clone();
                for b in 0..self.m() {
                    p = p.sub(&v_part[b].mul(&self.v[b][i]));
                }
                p
            })
            .collect();
        (leaf_part, v_part)
    }
}

/// Commutator of two coordinate vector fields, in coordinate components.
pub fn field_commutator(ctx: VarCtx, x: &[Poly], y: &[Poly]) -> Vec<Poly> {
    (0..ctx.total())
        .map(|k| {
            let mut p = Poly::zero(ctx);
            for i in 0..ctx.total() {
                p = p.add(&x[i].mul(&y[k].partial(i)));
                p = p.sub(&y[i].mul(&x[k].partial(i)));
            }
            p
        })
        .collect()
}

/// Parse a table of polynomial strings into a verified foliation chart.
pub fn build_foliation(
    n: usize,
    m: usize,
    table: &[Vec<String>],
) -> Result<Rc<PolyFoliation>, FoliationError> {
    if !(1..=2).contains(&n) || m > 2 {
        return Err(FoliationError::BadDimensions { n, m });
    }
    let ctx = VarCtx::new(n, m);
    if table.len() != m || table.iter().any(|row| row.len() != n) {
        return Err(FoliationError::MalformedTable {
            rows: m,
            cols: n,
            found: format!(
                "{} rows of lengths {:?}",
                table.len(),
                table.iter().map(|r| r.len()).collect::<Vec<_>>()
            ),
        });
    }
    let mut v = Vec::with_capacity(m);
    for (row, entries) in table.iter().enumerate() {
        let mut parsed = Vec::with_capacity(n);
        for (col, s) in entries.iter().enumerate() {
            parsed.push(
                Poly::parse(ctx, s).map_err(|source| FoliationError::BadEntry { row, col, source })?,
            );
        }
        v.push(parsed);
    }
    PolyFoliation::new(n, m, v)
}

// ---- frame and coframe labels ----

/// A direction of the adapted tangent frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Frame {
    /// A leaf coordinate direction `∂/∂x_i`.
    Leaf(usize),
    /// A transverse frame direction `V_α`.
    Trans(usize),
}

/// A covector of the adapted coframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coframe {
    /// The leaf coordinate one-form `dx^j`.
    Dx(usize),
    /// The transverse coordinate one-form `du^β`.
    Du(usize),
}

// ---- the adapted connection ----

/// The connection adapted to the chart: it parallelizes the transverse
/// frame, acts on leaf directions through the frame Jacobians, and has
/// torsion equal to minus the frame commutator table.
#[derive(Clone)]
pub struct AdaptedConnection {
    f: Rc<PolyFoliation>,
}

impl AdaptedConnection {
    /// The underlying chart.
    pub fn foliation(&self) -> &Rc<PolyFoliation> {
        &self.f
    }

    /// Covariant derivative of a frame direction along another, expanded in
    /// the frame.
    pub fn nabla_frame(&self, x: Frame, y: Frame) -> Vec<(Frame, Poly)> {
        match (x, y) {
            (Frame::Trans(a), Frame::Leaf(j)) => (0..self.f.n())
                .map(|k| (Frame::Leaf(k), self.f.v[a][j].partial(k).neg()))
                .filter(|(_, p)| !p.is_zero())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Covariant derivative of a coframe covector along a frame direction,
    /// expanded in the coframe.
    pub fn nabla_coframe(&self, x: Frame, c: Coframe) -> Vec<(Coframe, Poly)> {
        match (x, c) {
            (Frame::Trans(a), Coframe::Dx(j)) => (0..self.f.n())
                .map(|k| (Coframe::Dx(k), self.f.v[a][j].partial(k)))
                .filter(|(_, p)| !p.is_zero())
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Torsion of the connection on a pair of frame directions.
    pub fn torsion(&self, x: Frame, y: Frame) -> Vec<(Frame, Poly)> {
        let mut acc = FrameCombo::new(self.f.ctx, self.f.n(), self.f.m());
        acc.add_terms(&self.nabla_frame(x, y), &Poly::constant(self.f.ctx, rat_one()));
        let minus = Poly::constant(self.f.ctx, -rat_one());
        acc.add_terms(&self.nabla_frame(y, x), &minus);
        let comm = field_commutator(
            self.f.ctx,
            &self.f.frame_field_full(x),
            &self.f.frame_field_full(y),
        );
        let (leaf_part, v_part) = self.f.frame_expand(&comm);
        for (i, p) in leaf_part.iter().enumerate() {
            acc.sub_poly(Frame::Leaf(i), p);
        }
        for (b, p) in v_part.iter().enumerate() {
            acc.sub_poly(Frame::Trans(b), p);
        }
        acc.into_terms()
    }

    /// Apply `∇_x` to a coframe combination with polynomial coefficients.
    fn nabla_coframe_combo(&self, x: Frame, terms: &[(Coframe, Poly)]) -> Vec<(Coframe, Poly)> {
        let mut acc = CoframeCombo::new(self.f.ctx, self.f.n(), self.f.m());
        for (c, p) in terms {
            // Leibniz: derivative of the coefficient plus the connection
            // acting on the covector.
            acc.add_poly(*c, &self.f.apply_frame(x, p));
            acc.add_terms(&self.nabla_coframe(x, *c), p);
        }
        acc.into_terms()
    }

    /// Curvature of the connection on the coframe.
    pub fn curvature_coframe(&self, x: Frame, y: Frame, c: Coframe) -> Vec<(Coframe, Poly)> {
        let one = vec![(c, Poly::constant(self.f.ctx, rat_one()))];
        let xy = self.nabla_coframe_combo(x, &self.nabla_coframe_combo(y, &one));
        let yx = self.nabla_coframe_combo(y, &self.nabla_coframe_combo(x, &one));
        let mut acc = CoframeCombo::new(self.f.ctx, self.f.n(), self.f.m());
        for (cv, p) in &xy {
            acc.add_poly(*cv, p);
        }
        for (cv, p) in &yx {
            acc.sub_poly(*cv, p);
        }
        // Subtract the derivative along the commutator, expanded in the
        // frame with polynomial coefficients.
        let comm = field_commutator(
            self.f.ctx,
            &self.f.frame_field_full(x),
            &self.f.frame_field_full(y),
        );
        let (leaf_part, v_part) = self.f.frame_expand(&comm);
        for (i, coeff) in leaf_part.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (cv, p) in self.nabla_coframe_combo(Frame::Leaf(i), &one) {
                acc.sub_poly(cv, &coeff.mul(&p));
            }
        }
        for (b, coeff) in v_part.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (cv, p) in self.nabla_coframe_combo(Frame::Trans(b), &one) {
                acc.sub_poly(cv, &coeff.mul(&p));
            }
        }
        acc.into_terms()
    }

    /// Check the defining properties of the connection; returns a list of
    /// human-readable violations (empty when all hold).
    pub fn verify_adapted(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.f.n();
        let m = self.f.m();

        // 1. Leaf directions are parallel directions for the connection.
        for i in 0..n {
            for j in 0..n {
                if !self.nabla_frame(Frame::Leaf(i), Frame::Leaf(j)).is_empty() {
                    bad.push(format!("∇ along leaf direction {i} moves leaf direction {j}"));
                }
            }
            for a in 0..m {
                if !self.nabla_frame(Frame::Leaf(i), Frame::Trans(a)).is_empty() {
                    bad.push(format!("∇ along leaf direction {i} moves frame field {a}"));
                }
            }
        }
        // 2. The transverse frame is parallel in every direction.
        for a in 0..m {
            for b in 0..m {
                if !self.nabla_frame(Frame::Trans(a), Frame::Trans(b)).is_empty() {
                    bad.push(format!("frame field {b} is not parallel along frame field {a}"));
                }
            }
        }
        // 3. Along the frame, leaf covectors move by the Lie derivative:
        //    the coefficient of dx^k in ∇_{V_α} dx^j must be ∂_k v_α^j.
        for a in 0..m {
            for j in 0..n {
                let got = self.nabla_coframe(Frame::Trans(a), Coframe::Dx(j));
                for k in 0..n {
                    let expect = self.f.v[a][j].partial(k);
                    let found = got
                        .iter()
                        .find(|(c, _)| *c == Coframe::Dx(k))
                        .map(|(_, p)| p.clone())
                        .unwrap_or_else(|| Poly::zero(self.f.ctx));
                    if found != expect {
                        bad.push(format!(
                            "∇ of dx{} along frame field {} disagrees with the Lie derivative at dx{}",
                            j + 1,
                            a + 1,
                            k + 1
                        ));
                    }
                }
                if got.iter().any(|(c, _)| matches!(c, Coframe::Du(_))) {
                    bad.push(format!(
                        "∇ of dx{} along frame field {} leaks into transverse covectors",
                        j + 1,
                        a + 1
                    ));
                }
            }
        }
        // 4. Torsion reproduces minus the frame commutator table.
        for a in 0..m {
            for b in 0..m {
                let t = self.torsion(Frame::Trans(a), Frame::Trans(b));
                for (fr, p) in &t {
                    match fr {
                        Frame::Leaf(i) => {
                            if *p != self.f.r[a][b][*i].neg() {
                                bad.push(format!(
                                    "torsion of frame pair ({}, {}) disagrees with the commutator table",
                                    a + 1,
                                    b + 1
                                ));
                            }
                        }
                        Frame::Trans(_) => bad.push(format!(
                            "torsion of frame pair ({}, {}) has a transverse part",
                            a + 1,
                            b + 1
                        )),
                    }
                }
                for i in 0..n {
                    let has = t.iter().any(|(fr, _)| *fr == Frame::Leaf(i));
                    if !has && !self.f.r[a][b][i].is_zero() {
                        bad.push(format!(
                            "torsion of frame pair ({}, {}) misses a commutator component",
                            a + 1,
                            b + 1
                        ));
                    }
                }
            }
            for i in 0..n {
                if !self.torsion(Frame::Leaf(i), Frame::Trans(a)).is_empty() {
                    bad.push(format!(
                        "mixed torsion of leaf direction {} and frame field {} is nonzero",
                        i + 1,
                        a + 1
                    ));
                }
            }
        }
        bad
    }
}

/// Build the adapted connection and verify its axioms.
pub fn build_adapted_connection(
    f: &Rc<PolyFoliation>,
) -> Result<AdaptedConnection, FoliationError> {
    let conn = AdaptedConnection { f: Rc::clone(f) };
    let bad = conn.verify_adapted();
    if let Some(first) = bad.into_iter().next() {
        return Err(FoliationError::StratumViolation { detail: first });
    }
    Ok(conn)
}

fn rat_one() -> Rat {
    Rat::from_integer(1.into())
}

// ---- small accumulators ----

struct FrameCombo {
    leaf: Vec<Poly>,
    trans: Vec<Poly>,
}

impl FrameCombo {
    fn new(ctx: VarCtx, n: usize, m: usize) -> Self {
        FrameCombo {
            leaf: vec![Poly::zero(ctx); n],
            trans: vec![Poly::zero(ctx); m],
        }
    }

    fn slot(&mut self, fr: Frame) -> &mut Poly {
        match fr {
            Frame::Leaf(i) => &mut self.leaf[i],
            Frame::Trans(a) => &mut self.trans[a],
        }
    }

    fn add_terms(&mut self, terms: &[(Frame, Poly)], scale: &Poly) {
        for (fr, p) in terms {
            let s = self.slot(*fr);
            *s = s.add(&p.mul(scale));
        }
    }

    fn sub_poly(&mut self, fr: Frame, p: &Poly) {
        let s = self.slot(fr);
        *s = s.sub(p);
    }

    fn into_terms(self) -> Vec<(Frame, Poly)> {
        let mut out = Vec::new();
        for (i, p) in self.leaf.into_iter().enumerate() {
            if !p.is_zero() {
                out.push((Frame::Leaf(i), p));
            }
        }
        for (a, p) in self.trans.into_iter().enumerate() {
            if !p.is_zero() {
                out.push((Frame::Trans(a), p));
            }
        }
        out
    }
}

struct CoframeCombo {
    dx: Vec<Poly>,
    du: Vec<Poly>,
}

impl CoframeCombo {
    fn new(ctx: VarCtx, n: usize, m: usize) -> Self {
        CoframeCombo {
            dx: vec![Poly::zero(ctx); n],
            du: vec![Poly::zero(ctx); m],
        }
    }

    fn slot(&mut self, c: Coframe) -> &mut Poly {
        match c {
            Coframe::Dx(j) => &mut self.dx[j],
            Coframe::Du(b) => &mut self.du[b],
        }
    }

    fn add_poly(&mut self, c: Coframe, p: &Poly) {
        let s = self.slot(c);
        *s = s.add(p);
    }

    fn add_terms(&mut self, terms: &[(Coframe, Poly)], scale: &Poly) {
        for (c, p) in terms {
            let s = self.slot(*c);
            *s = s.add(&p.mul(scale));
        }
    }

    fn sub_poly(&mut self, c: Coframe, p: &Poly) {
        let s = self.slot(c);
        *s = s.sub(p);
    }

    fn into_terms(self) -> Vec<(Coframe, Poly)> {
        let mut out = Vec::new();
        for (j, p) in self.dx.into_iter().enumerate() {
            if !p.is_zero() {
                out.push((Coframe::Dx(j), p));
            }
        }
        for (b, p) in self.du.into_iter().enumerate() {
            if !p.is_zero() {
                out.push((Coframe::Du(b), p));
            }
        }
        out
    }
}

// ---- tests ----

#[cfg(test)]
mod tests {
    use super::*;

    fn shear() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["u2".into()], vec!["0".into()]]).unwrap()
    }

    fn twisted() -> Rc<PolyFoliation> {
        build_foliation(1, 2, &[vec!["x1 u2".into()], vec!["0".into()]]).unwrap()
    }

    #[test]
    fn shear_commutator_table() {
        let f = shear();
        let ctx = f.ctx();
        assert_eq!(*f.r(0, 1, 0), Poly::constant(ctx, -rat_one()));
        assert_eq!(*f.r(1, 0, 0), Poly::constant(ctx, rat_one()));
        assert!(f.theta_vanishes());
        assert!(!f.r_vanishes());
    }

    #[test]
    fn twisted_commutator_and_curvature_letters() {
        let f = twisted();
        let ctx = f.ctx();
        let minus_x = Poly::parse(ctx, "-x1").unwrap();
        assert_eq!(*f.r(0, 1, 0), minus_x);
        assert_eq!(*f.theta(0, 1, 0, 0), Poly::constant(ctx, -rat_one()));
        assert_eq!(*f.theta(1, 0, 0, 0), Poly::constant(ctx, rat_one()));
        assert!(!f.theta_vanishes());
    }

    #[test]
    fn flat_chart_has_trivial_tables() {
        let f = build_foliation(1, 2, &[vec!["0".into()], vec!["0".into()]]).unwrap();
        assert!(f.r_vanishes());
        assert!(f.theta_vanishes());
    }

    #[test]
    fn frame_application() {
        let f = shear();
        let ctx = f.ctx();
        // V₁ = ∂_u1 + u2 ∂_x1 applied to x1 gives u2.
        let x1 = Poly::parse(ctx, "x1").unwrap();
        assert_eq!(f.apply_v(0, &x1), Poly::parse(ctx, "u2").unwrap());
        // V₁ applied to u1 gives 1.
        let u1 = Poly::parse(ctx, "u1").unwrap();
        assert_eq!(f.apply_v(0, &u1), Poly::constant(ctx, rat_one()));
    }

    #[test]
    fn connection_axioms_hold() {
        for f in [shear(), twisted()] {
            let conn = build_adapted_connection(&f).unwrap();
            assert!(conn.verify_adapted().is_empty());
        }
    }

    #[test]
    fn torsion_matches_commutator() {
        let f = shear();
        let conn = build_adapted_connection(&f).unwrap();
        assert!(conn.torsion(Frame::Leaf(0), Frame::Trans(0)).is_empty());
        let t = conn.torsion(Frame::Trans(0), Frame::Trans(1));
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].0, Frame::Leaf(0));
        assert_eq!(t[0].1, Poly::constant(f.ctx(), rat_one()));
    }

    #[test]
    fn coframe_curvature_on_twisted_chart() {
        let f = twisted();
        let conn = build_adapted_connection(&f).unwrap();
        let r = conn.curvature_coframe(Frame::Trans(0), Frame::Trans(1), Coframe::Dx(0));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, Coframe::Dx(0));
        assert_eq!(r[0].1, Poly::constant(f.ctx(), -rat_one()));
        // On the shear chart the frame Jacobians are constant, so the
        // coframe curvature vanishes.
        let g = shear();
        let conn2 = build_adapted_connection(&g).unwrap();
        assert!(conn2
            .curvature_coframe(Frame::Trans(0), Frame::Trans(1), Coframe::Dx(0))
            .is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_foliation(3, 1, &[vec!["0".into(), "0".into(), "0".into()]]),
            Err(FoliationError::BadDimensions { .. })
        ));
        assert!(matches!(
            build_foliation(1, 2, &[vec!["0".into()]]),
            Err(FoliationError::MalformedTable { .. })
        ));
        assert!(matches!(
            build_foliation(1, 1, &[vec!["x^".into()]]),
            Err(FoliationError::BadEntry { .. })
        ));
    }
}
