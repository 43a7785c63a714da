//! Finite-dimensional graded commutative algebras given by structure
//! constants, with an exact multiplication-commutator order test.

use std::fmt;

use num::Zero;
use thiserror::Error;

use crate::exact::{minus_one_pow, BasisElem, Lin, Rat, VarCtx};

// ---- basis labels ----

/// Basis label of a finite-dimensional graded algebra: position and degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct GB(pub usize, pub i64);

impl fmt::Display for GB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0 + 1)
    }
}

impl BasisElem for GB {
    fn degree(&self) -> i64 {
        self.1
    }
}

// ---- the algebra ----

/// Shape defect in a structure-constant table.
#[derive(Debug, Error)]
pub enum AlgebraShapeError {
    /// The table is not a square array of the declared dimension.
    #[error("structure table must be {expected}x{expected}, found a row of length {found}")]
    BadShape { expected: usize, found: usize },
    /// A product expansion references a basis index outside the algebra.
    #[error("basis index {index} out of range for dimension {dim}")]
    BadIndex { index: usize, dim: usize },
}

/// A finite-dimensional graded commutative unital algebra described by the
/// products of its basis elements.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    degrees: Vec<i64>,
    unit: usize,
    table: Vec<Vec<Vec<(usize, Rat)>>>,
}

impl GradedAlgebra {
    /// Builds the algebra from basis degrees, the unit's basis index, and
    /// the full multiplication table `table[i][j]` = expansion of eᵢ·eⱼ.
    pub fn new(
        degrees: Vec<i64>,
        unit: usize,
        table: Vec<Vec<Vec<(usize, Rat)>>>,
    ) -> Result<Self, AlgebraShapeError> {
        let dim = degrees.len();
        if unit >= dim {
            return Err(AlgebraShapeError::BadIndex { index: unit, dim });
        }
        if table.len() != dim {
            return Err(AlgebraShapeError::BadShape {
                expected: dim,
                found: table.len(),
            });
        }
        for row in &table {
            if row.len() != dim {
                return Err(AlgebraShapeError::BadShape {
                    expected: dim,
                    found: row.len(),
                });
            }
            for cell in row {
                for (index, _) in cell {
                    if *index >= dim {
                        return Err(AlgebraShapeError::BadIndex { index: *index, dim });
                    }
                }
            }
        }
        Ok(GradedAlgebra {
            degrees,
            unit,
            table,
        })
    }

    /// Number of basis elements.
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    /// Degree of the `i`-th basis element.
    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    /// The `i`-th basis label.
    pub fn basis(&self, i: usize) -> GB {
        GB(i, self.degrees[i])
    }

    /// All basis labels in order.
    pub fn basis_elems(&self) -> Vec<GB> {
        (0..self.dim()).map(|i| self.basis(i)).collect()
    }

    /// The multiplicative unit as an element.
    pub fn unit_elem(&self) -> Lin<GB> {
        Lin::basis(self.basis(self.unit))
    }

    /// Bilinear product of two elements.
    pub fn mul(&self, x: &Lin<GB>, y: &Lin<GB>) -> Lin<GB> {
        let mut out = Lin::zero();
        for (bx, cx) in x.iter() {
            for (by, cy) in y.iter() {
                let c = cx * cy;
                for (index, s) in &self.table[bx.0][by.0] {
                    out.add_term(self.basis(*index), &c * s);
                }
            }
        }
        out
    }

    /// Checks unit laws, degree additivity, graded commutativity, and
    /// associativity exactly over the whole basis.
    pub fn verify(&self) -> AlgebraReport {
        let mut defects = Vec::new();
        let dim = self.dim();
        for i in 0..dim {
            let ei = Lin::basis(self.basis(i));
            let left = self.mul(&self.unit_elem(), &ei);
            let right = self.mul(&ei, &self.unit_elem());
            if left != ei || right != ei {
                defects.push(format!("unit law fails on e{}", i + 1));
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let want = self.degrees[i] + self.degrees[j];
                for (index, c) in &self.table[i][j] {
                    if !c.is_zero() && self.degrees[*index] != want {
                        defects.push(format!(
                            "degree of e{}·e{} expansion term e{} is {} instead of {}",
                            i + 1,
                            j + 1,
                            index + 1,
                            self.degrees[*index],
                            want
                        ));
                    }
                }
                let ei = Lin::basis(self.basis(i));
                let ej = Lin::basis(self.basis(j));
                let forward = self.mul(&ei, &ej);
                let backward = self
                    .mul(&ej, &ei)
                    .scale(&minus_one_pow(self.degrees[i] * self.degrees[j]));
                if forward != backward {
                    defects.push(format!("graded commutativity fails on e{}·e{}", i + 1, j + 1));
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let ei = Lin::basis(self.basis(i));
                    let ej = Lin::basis(self.basis(j));
                    let ek = Lin::basis(self.basis(k));
                    let left = self.mul(&self.mul(&ei, &ej), &ek);
                    let right = self.mul(&ei, &self.mul(&ej, &ek));
                    if left != right {
                        defects.push(format!(
                            "associativity fails on (e{}·e{})·e{}",
                            i + 1,
                            j + 1,
                            k + 1
                        ));
                    }
                }
            }
        }
        AlgebraReport { defects }
    }
}

/// Outcome of [`GradedAlgebra::verify`].
#[derive(Debug, Clone)]
pub struct AlgebraReport {
    /// Human-readable description of every failed law.
    pub defects: Vec<String>,
}

impl AlgebraReport {
    /// True when no law failed.
    pub fn is_ok(&self) -> bool {
        self.defects.is_empty()
    }
}

impl fmt::Display for AlgebraReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            write!(f, "algebra laws hold")
        } else {
            for defect in &self.defects {
                writeln!(f, "{defect}")?;
            }
            Ok(())
        }
    }
}

/// Coefficient algebra a family of operators acts on: either a polynomial
/// algebra in even variables or a finite-dimensional graded algebra.
#[derive(Debug, Clone)]
pub enum AlgebraDescriptor {
    /// Polynomial algebra over ℚ with the given variable context.
    Polynomial(VarCtx),
    /// Finite-dimensional graded commutative algebra.
    Finite(GradedAlgebra),
}

impl AlgebraDescriptor {
    /// Defects of the described algebra; polynomial algebras have none.
    pub fn verify(&self) -> Vec<String> {
        match self {
            AlgebraDescriptor::Polynomial(_) => Vec::new(),
            AlgebraDescriptor::Finite(alg) => alg.verify().defects,
        }
    }
}

// ---- order test ----

/// Exact order test on a finite-dimensional algebra: `op` has order at most
/// `k` iff every nest of `k + 1` graded multiplication commutators kills
/// every basis element.  `op_degree` is the degree by which `op` shifts.
pub fn order_test_finite(
    alg: &GradedAlgebra,
    op: &dyn Fn(&Lin<GB>) -> Lin<GB>,
    op_degree: i64,
    k: usize,
) -> bool {
    let basis = alg.basis_elems();
    let mut entries = Vec::new();
    multisets(basis.len(), k + 1, &mut entries, &mut |choice| {
        let picked: Vec<GB> = choice.iter().map(|&i| basis[i]).collect();
        for probe in &basis {
            let value = nest_value(alg, &picked, op, op_degree, probe);
            if !value.is_zero() {
                return false;
            }
        }
        true
    })
}

/// Applies the commutator nest `[…[[op, a₀], a₁]…]` to a basis element,
/// peeling the outermost entry first.
fn nest_value(
    alg: &GradedAlgebra,
    entries: &[GB],
    op: &dyn Fn(&Lin<GB>) -> Lin<GB>,
    op_degree: i64,
    probe: &GB,
) -> Lin<GB> {
    match entries.split_first() {
        None => op(&Lin::basis(*probe)),
        Some((a, rest)) => {
            let inner_degree = op_degree + rest.iter().map(|g| g.1).sum::<i64>();
            let scaled = alg.mul(&Lin::basis(*a), &Lin::basis(*probe));
            let first = nest_lin(alg, rest, op, op_degree, &scaled);
            let second = alg.mul(&Lin::basis(*a), &nest_value(alg, rest, op, op_degree, probe));
            first.sub(&second.scale(&minus_one_pow(a.1 * inner_degree)))
        }
    }
}

fn nest_lin(
    alg: &GradedAlgebra,
    entries: &[GB],
    op: &dyn Fn(&Lin<GB>) -> Lin<GB>,
    op_degree: i64,
    x: &Lin<GB>,
) -> Lin<GB> {
    let mut out = Lin::zero();
    for (b, c) in x.iter() {
        out.add_assign_scaled(&nest_value(alg, entries, op, op_degree, b), c);
    }
    out
}

/// Runs `visit` on every weakly increasing index tuple of the given length;
/// stops early and returns false as soon as one visit does.
pub(crate) fn multisets(
    count: usize,
    len: usize,
    prefix: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if prefix.len() == len {
        return visit(prefix);
    }
    let start = prefix.last().copied().unwrap_or(0);
    for i in start..count {
        prefix.push(i);
        let ok = multisets(count, len, prefix, visit);
        prefix.pop();
        if !ok {
            return false;
        }
    }
    true
}

// ---- tests ----
