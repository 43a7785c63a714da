//! Presentations of graded Lie–Rinehart algebras: free module generators
//! over a polynomial base with bracket, anchor, and differential tables.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{minus_one_pow, Poly, PolyParseError, Rat, VarCtx};

// ---- module elements ----

/// Element of the free module over the base: a finite sum of polynomial
/// coefficients times generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GenLin {
    terms: BTreeMap<usize, Poly>,
}

impl GenLin {
    /// The zero element.
    pub fn zero() -> Self {
        GenLin::default()
    }

    /// A single generator with coefficient one.
    pub fn generator(index: usize, ctx: VarCtx) -> Self {
        GenLin::term(index, Poly::one(ctx))
    }

    /// A single generator with the given coefficient.
    pub fn term(index: usize, coeff: Poly) -> Self {
        let mut out = GenLin::zero();
        out.add_coeff(index, &coeff);
        out
    }

    /// True when every coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff`·generator to this element.
    pub fn add_coeff(&mut self, index: usize, coeff: &Poly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&index) {
            Some(existing) => {
                *existing = existing.add(coeff);
                if existing.is_zero() {
                    self.terms.remove(&index);
                }
            }
            None => {
                self.terms.insert(index, coeff.clone());
            }
        }
    }

    /// Adds `scale`·`other` to this element.
    pub fn add_assign_scaled(&mut self, other: &GenLin, scale: &Rat) {
        if scale.is_zero() {
            return;
        }
        for (index, coeff) in &other.terms {
            self.add_coeff(*index, &coeff.scale(scale));
        }
    }

    /// Adds `scale`·`other` with a polynomial scale.
    pub fn add_assign_scaled_poly(&mut self, other: &GenLin, scale: &Poly) {
        for (index, coeff) in &other.terms {
            self.add_coeff(*index, &scale.mul(coeff));
        }
    }

    /// Sum of two elements.
    pub fn add(&self, other: &GenLin) -> GenLin {
        let mut out = self.clone();
        for (index, coeff) in &other.terms {
            out.add_coeff(*index, coeff);
        }
        out
    }

    /// Difference of two elements.
    pub fn sub(&self, other: &GenLin) -> GenLin {
        let mut out = self.clone();
        for (index, coeff) in &other.terms {
            out.add_coeff(*index, &coeff.neg());
        }
        out
    }

    /// Rescales every coefficient.
    pub fn scale(&self, scale: &Rat) -> GenLin {
        let mut out = GenLin::zero();
        out.add_assign_scaled(self, scale);
        out
    }

    /// Iterates over (generator index, coefficient) pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.terms.iter().map(|(i, c)| (*i, c))
    }
}

// ---- errors and reports ----

/// Defect detected while building or parsing a presentation.
#[derive(Debug, Error)]
pub enum PresentationError {
    /// A table references a generator outside the declared list.
    #[error("generator index {index} out of range for {count} generators")]
    BadGenerator { index: usize, count: usize },
    /// A bracket key is stored on the wrong side of the diagonal.
    #[error("bracket key ({left}, {right}) must satisfy left <= right")]
    UnorderedKey { left: usize, right: usize },
    /// A self-bracket was declared for an even generator.
    #[error("self-bracket of even generator {index} must be omitted (it is zero)")]
    EvenDiagonal { index: usize },
    /// The same bracket key appeared twice.
    #[error("duplicate bracket key ({left}, {right})")]
    DuplicateKey { left: usize, right: usize },
    /// An anchor table row has the wrong number of variable slots.
    #[error("anchor row for generator {index} must have {expected} entries, found {found}")]
    BadAnchorShape {
        index: usize,
        expected: usize,
        found: usize,
    },
    /// A coefficient was built over a different variable context.
    #[error("coefficient uses a foreign variable context")]
    ForeignContext,
    /// A differential table was expected to cover every generator.
    #[error("differential table must have {expected} rows, found {found}")]
    BadDifferentialShape { expected: usize, found: usize },
    /// A serialized table mentions an unknown generator or variable name.
    #[error("unknown name `{name}` in serialized presentation")]
    UnknownName { name: String },
    /// A serialized coefficient failed to parse.
    #[error("bad coefficient `{text}`: {source}")]
    BadCoefficient {
        text: String,
        source: PolyParseError,
    },
}

/// Outcome of [`LrPresentation::verify`].
#[derive(Debug, Clone)]
pub struct PresentationReport {
    /// Human-readable description of every failed axiom instance.
    pub defects: Vec<String>,
}

impl PresentationReport {
    /// True when every axiom held on the probes.
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for PresentationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "presentation axioms hold")
        } else {
            for defect in &self.defects {
                writeln!(f, "{defect}")?;
            }
            Ok(())
        }
    }
}

// ---- the presentation ----

/// A graded Lie–Rinehart algebra presented by ordered homogeneous
/// generators of a free module over a polynomial base, together with a
/// bracket table, an anchor table, and an optional differential table.
#[derive(Debug, Clone)]
pub struct LrPresentation {
    ctx: VarCtx,
    names: Vec<String>,
    degrees: Vec<i64>,
    bracket: BTreeMap<(usize, usize), Vec<(usize, Poly)>>,
    anchor: Vec<Vec<Poly>>,
    differential: Option<Vec<Vec<(usize, Poly)>>>,
}

impl LrPresentation {
    /// Builds a presentation after shape-checking all tables.  Bracket keys
    /// must be stored with `left <= right`; the transposed values follow by
    /// graded antisymmetry.
    pub fn new(
        ctx: VarCtx,
        generators: Vec<(String, i64)>,
        bracket: Vec<((usize, usize), Vec<(usize, Poly)>)>,
        anchor: Vec<Vec<Poly>>,
        differential: Option<Vec<Vec<(usize, Poly)>>>,
    ) -> Result<Self, PresentationError> {
        let count = generators.len();
        let check_gen = |index: usize| {
            if index >= count {
                Err(PresentationError::BadGenerator { index, count })
            } else {
                Ok(())
            }
        };
        let check_poly = |p: &Poly| {
            if p.ctx() == ctx {
                Ok(())
            } else {
                Err(PresentationError::ForeignContext)
            }
        };
        let (names, degrees): (Vec<String>, Vec<i64>) = generators.into_iter().unzip();

        let mut table = BTreeMap::new();
        for ((left, right), expansion) in bracket {
            check_gen(left)?;
            check_gen(right)?;
            if left > right {
                return Err(PresentationError::UnorderedKey { left, right });
            }
            if left == right && degrees[left] % 2 == 0 {
                return Err(PresentationError::EvenDiagonal { index: left });
            }
            for (index, coeff) in &expansion {
                check_gen(*index)?;
                check_poly(coeff)?;
            }
            if table.insert((left, right), expansion).is_some() {
                return Err(PresentationError::DuplicateKey { left, right });
            }
        }

        if anchor.len() != count {
            return Err(PresentationError::BadAnchorShape {
                index: anchor.len(),
                expected: count,
                found: anchor.len(),
            });
        }
        for (index, row) in anchor.iter().enumerate() {
            if row.len() != ctx.total() {
                return Err(PresentationError::BadAnchorShape {
                    index,
                    expected: ctx.total(),
                    found: row.len(),
                });
            }
            for coeff in row {
                check_poly(coeff)?;
            }
        }

        if let Some(rows) = &differential {
            if rows.len() != count {
                return Err(PresentationError::BadDifferentialShape {
                    expected: count,
                    found: rows.len(),
                });
            }
            for row in rows {
                for (index, coeff) in row {
                    check_gen(*index)?;
                    check_poly(coeff)?;
                }
            }
        }

        Ok(LrPresentation {
            ctx,
            names,
            degrees,
            bracket: table,
            anchor,
            differential,
        })
    }

    /// Variable context of the polynomial base.
    pub fn ctx(&self) -> VarCtx {
        self.ctx
    }

    /// Number of generators.
    pub fn gen_count(&self) -> usize {
        self.names.len()
    }

    /// Name of a generator.
    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Degree of a generator.
    pub fn degree(&self, index: usize) -> i64 {
        self.degrees[index]
    }

    /// Degree of a word of generators.
    pub fn word_degree(&self, word: &[usize]) -> i64 {
        word.iter().map(|&g| self.degrees[g]).sum()
    }

    /// True when a differential table is present.
    pub fn has_differential(&self) -> bool {
        self.differential.is_some()
    }

    /// Bracket of two generators, using graded antisymmetry for keys stored
    /// on the other side of the diagonal.
    pub fn bracket_gen(&self, left: usize, right: usize) -> GenLin {
        let (key, sign) = if left <= right {
            ((left, right), Rat::one())
        } else {
            (
                (right, left),
                minus_one_pow(1 + self.degrees[left] * self.degrees[right]),
            )
        };
        let mut out = GenLin::zero();
        if let Some(expansion) = self.bracket.get(&key) {
            for (index, coeff) in expansion {
                out.add_coeff(*index, &coeff.scale(&sign));
            }
        }
        out
    }

    /// Applies the anchor of a generator to a base element.
    pub fn anchor_apply(&self, index: usize, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.ctx);
        for (v, coeff) in self.anchor[index].iter().enumerate() {
            if !coeff.is_zero() {
                out = out.add(&coeff.mul(&f.partial(v)));
            }
        }
        out
    }

    /// Applies the anchor of a module element to a base element.
    pub fn element_anchor(&self, x: &GenLin, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.ctx);
        for (index, coeff) in x.iter() {
            out = out.add(&coeff.mul(&self.anchor_apply(index, f)));
        }
        out
    }

    /// Bracket of two module elements, expanding coefficients through the
    /// anchors:
    /// `[c·q, c'·r] = c·q(c')·r + c·c'·[q, r] − (−1)^{q̄r̄}·c'·r(c)·q`.
    pub fn element_bracket(&self, x: &GenLin, y: &GenLin) -> GenLin {
        let mut out = GenLin::zero();
        for (a, ca) in x.iter() {
            for (b, cb) in y.iter() {
                out.add_coeff(b, &ca.mul(&self.anchor_apply(a, cb)));
                out.add_assign_scaled_poly(&self.bracket_gen(a, b), &ca.mul(cb));
                let sign = minus_one_pow(1 + self.degrees[a] * self.degrees[b]);
                out.add_coeff(a, &cb.mul(&self.anchor_apply(b, ca)).scale(&sign));
            }
        }
        out
    }

    /// Differential of a generator, if a table is present.
    pub fn differential_gen(&self, index: usize) -> Option<GenLin> {
        self.differential.as_ref().map(|rows| {
            let mut out = GenLin::zero();
            for (g, coeff) in &rows[index] {
                out.add_coeff(*g, coeff);
            }
            out
        })
    }

    /// Differential of a module element, extended base-linearly.
    pub fn differential_apply(&self, x: &GenLin) -> Option<GenLin> {
        self.differential.as_ref()?;
        let mut out = GenLin::zero();
        for (index, coeff) in x.iter() {
            let image = self.differential_gen(index).expect("table present");
            out.add_assign_scaled_poly(&image, coeff);
        }
        Some(out)
    }

    /// Checks the presentation axioms exactly on the given base probes:
    /// degree homogeneity, vanishing anchors of odd generators, the anchor
    /// as a bracket morphism, graded Jacobi on generator triples, and — when
    /// a differential table is present — that it squares to zero, derives
    /// the bracket, and has anchor-free image.
    pub fn verify(&self, probes: &[Poly]) -> PresentationReport {
        let mut defects = Vec::new();
        let count = self.gen_count();

        for ((left, right), expansion) in &self.bracket {
            let want = self.degrees[*left] + self.degrees[*right];
            for (index, coeff) in expansion {
                if !coeff.is_zero() && self.degrees[*index] != want {
                    defects.push(format!(
                        "bracket [{}, {}] expansion term {} has degree {} instead of {}",
                        self.names[*left],
                        self.names[*right],
                        self.names[*index],
                        self.degrees[*index],
                        want
                    ));
                }
            }
        }

        for index in 0..count {
            if self.degrees[index] % 2 != 0 && self.anchor[index].iter().any(|c| !c.is_zero()) {
                defects.push(format!(
                    "odd generator {} has a nonzero anchor",
                    self.names[index]
                ));
            }
        }

        for a in 0..count {
            for b in 0..count {
                for f in probes {
                    let lhs = self.element_anchor(&self.bracket_gen(a, b), f);
                    let sign = minus_one_pow(self.degrees[a] * self.degrees[b]);
                    let rhs = self
                        .anchor_apply(a, &self.anchor_apply(b, f))
                        .sub(&self.anchor_apply(b, &self.anchor_apply(a, f)).scale(&sign));
                    if lhs != rhs {
                        defects.push(format!(
                            "anchor fails to intertwine [{}, {}] on probe {}",
                            self.names[a], self.names[b], f
                        ));
                    }
                }
            }
        }

        for a in 0..count {
            for b in 0..count {
                for c in 0..count {
                    let qa = GenLin::generator(a, self.ctx);
                    let qb = GenLin::generator(b, self.ctx);
                    let qc = GenLin::generator(c, self.ctx);
                    let lhs = self.element_bracket(&qa, &self.element_bracket(&qb, &qc));
                    let first = self.element_bracket(&self.element_bracket(&qa, &qb), &qc);
                    let second = self
                        .element_bracket(&qb, &self.element_bracket(&qa, &qc))
                        .scale(&minus_one_pow(self.degrees[a] * self.degrees[b]));
                    if lhs != first.add(&second) {
                        defects.push(format!(
                            "graded Jacobi fails on ({}, {}, {})",
                            self.names[a], self.names[b], self.names[c]
                        ));
                    }
                }
            }
        }

        if self.differential.is_some() {
            for a in 0..count {
                let image = self.differential_gen(a).expect("table present");
                for (index, coeff) in image.iter() {
                    if !coeff.is_zero() && self.degrees[index] != self.degrees[a] + 1 {
                        defects.push(format!(
                            "differential of {} has a term of degree {} instead of {}",
                            self.names[a],
                            self.degrees[index],
                            self.degrees[a] + 1
                        ));
                    }
                }
                let twice = self.differential_apply(&image).expect("table present");
                if !twice.is_zero() {
                    defects.push(format!("differential fails to square to zero on {}", self.names[a]));
                }
                for f in probes {
                    if !self.element_anchor(&image, f).is_zero() {
                        defects.push(format!(
                            "differential image of {} has a nonzero anchor on probe {}",
                            self.names[a], f
                        ));
                    }
                }
            }
            for a in 0..count {
                for b in 0..count {
                    let qa = GenLin::generator(a, self.ctx);
                    let qb = GenLin::generator(b, self.ctx);
                    let lhs = self
                        .differential_apply(&self.bracket_gen(a, b))
                        .expect("table present");
                    let da = self.differential_gen(a).expect("table present");
                    let db = self.differential_gen(b).expect("table present");
                    let rhs = self.element_bracket(&da, &qb).add(
                        &self
                            .element_bracket(&qa, &db)
                            .scale(&minus_one_pow(self.degrees[a])),
                    );
                    if lhs != rhs {
                        defects.push(format!(
                            "differential fails the bracket derivation rule on ({}, {})",
                            self.names[a], self.names[b]
                        ));
                    }
                }
            }
        }

        PresentationReport { defects }
    }

    /// Serializes the presentation into its file form.
    pub fn to_file(&self) -> PresentationFile {
        let poly_map = |row: &[(usize, Poly)]| -> BTreeMap<String, String> {
            row.iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(g, c)| (self.names[*g].clone(), c.to_string()))
                .collect()
        };
        PresentationFile {
            leaf_vars: self.ctx.leaf,
            trans_vars: self.ctx.trans,
            generators: self
                .names
                .iter()
                .zip(&self.degrees)
                .map(|(name, degree)| GeneratorSpec {
                    name: name.clone(),
                    degree: *degree,
                })
                .collect(),
            bracket: self
                .bracket
                .iter()
                .map(|((a, b), expansion)| BracketEntry {
                    left: self.names[*a].clone(),
                    right: self.names[*b].clone(),
                    value: poly_map(expansion),
                })
                .collect(),
            anchor: self
                .anchor
                .iter()
                .enumerate()
                .map(|(index, row)| {
                    let cols = row
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(v, c)| (self.ctx.var_name(v), c.to_string()))
                        .collect();
                    (self.names[index].clone(), cols)
                })
                .collect(),
            differential: self.differential.as_ref().map(|rows| {
                rows.iter()
                    .enumerate()
                    .map(|(index, row)| (self.names[index].clone(), poly_map(row)))
                    .collect()
            }),
        }
    }

    /// Reconstructs a presentation from its file form.
    pub fn from_file(file: &PresentationFile) -> Result<Self, PresentationError> {
        let ctx = VarCtx::new(file.leaf_vars, file.trans_vars);
        let names: Vec<String> = file.generators.iter().map(|g| g.name.clone()).collect();
        let find = |name: &str| -> Result<usize, PresentationError> {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| PresentationError::UnknownName {
                    name: name.to_string(),
                })
        };
        let parse = |text: &str| -> Result<Poly, PresentationError> {
            Poly::parse(ctx, text).map_err(|source| PresentationError::BadCoefficient {
                text: text.to_string(),
                source,
            })
        };
        let parse_row = |row: &BTreeMap<String, String>| -> Result<Vec<(usize, Poly)>, PresentationError> {
            row.iter()
                .map(|(name, text)| Ok((find(name)?, parse(text)?)))
                .collect()
        };

        let mut bracket = Vec::new();
        for entry in &file.bracket {
            let left = find(&entry.left)?;
            let right = find(&entry.right)?;
            bracket.push(((left, right), parse_row(&entry.value)?));
        }

        let mut anchor = vec![vec![Poly::zero(ctx); ctx.total()]; names.len()];
        for (gen_name, cols) in &file.anchor {
            let index = find(gen_name)?;
            for (var_name, text) in cols {
                let v = ctx
                    .var_index(var_name)
                    .ok_or_else(|| PresentationError::UnknownName {
                        name: var_name.clone(),
                    })?;
                anchor[index][v] = parse(text)?;
            }
        }

        let differential = match &file.differential {
            None => None,
            Some(rows) => {
                let mut table = vec![Vec::new(); names.len()];
                for (gen_name, row) in rows {
                    let index = find(gen_name)?;
                    table[index] = parse_row(row)?;
                }
                Some(table)
            }
        };

        LrPresentation::new(
            ctx,
            file.generators
                .iter()
                .map(|g| (g.name.clone(), g.degree))
                .collect(),
            bracket,
            anchor,
            differential,
        )
    }
}

// ---- file form ----

/// One named homogeneous generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    /// Display name, unique within the presentation.
    pub name: String,
    /// Homogeneous degree.
    pub degree: i64,
}

/// One stored bracket `[left, right]` with `left <= right` in generator
/// order; values map generator names to polynomial coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketEntry {
    /// Name of the left generator.
    pub left: String,
    /// Name of the right generator.
    pub right: String,
    /// Expansion of the bracket in the generators.
    pub value: BTreeMap<String, String>,
}

/// Serialized form of a presentation: tables keyed by generator and
/// variable names, coefficients as polynomial strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresentationFile {
    /// Number of leaf-block variables.
    pub leaf_vars: usize,
    /// Number of transverse-block variables.
    pub trans_vars: usize,
    /// Ordered generator list.
    pub generators: Vec<GeneratorSpec>,
    /// Bracket table; missing pairs are zero.
    #[serde(default)]
    pub bracket: Vec<BracketEntry>,
    /// Anchor table: generator name → variable name → coefficient.
    #[serde(default)]
    pub anchor: BTreeMap<String, BTreeMap<String, String>>,
    /// Optional differential table: generator name → expansion.
    #[serde(default)]
    pub differential: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

// ---- tests ----
