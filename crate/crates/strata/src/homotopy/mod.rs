//! Chain complexes, contractions, and homological perturbation.
//!
//! Maps are basis-defined evaluators with shared memo tables; a
//! [`Contraction`] packages a big complex, a small one, projection `p`,
//! inclusion `j` and homotopy `h` subject to `p∘j = id`,
//! `h∘d + d∘h = id − j∘p` and the side conditions `h² = 0`, `h∘j = 0`,
//! `p∘h = 0`. [`perturb`] applies the perturbation lemma: given a new
//! differential on the big side whose difference from the old one descends
//! a bounded-below filtration, it produces the perturbed contraction with
//! all five structure maps corrected by a geometric series that terminates
//! exactly.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use num::One;
use thiserror::Error;

use crate::exact::{BasisElem, Lin, Rat};
use crate::fault::{armed, Fault};

// ---- linear maps ----

/// A degree-homogeneous linear map defined on basis elements, memoised.
pub struct MapRef<B: BasisElem, C: BasisElem> {
    degree: i64,
    eval: Rc<dyn Fn(&B) -> Lin<C>>,
    memo: Rc<RefCell<BTreeMap<B, Lin<C>>>>,
}

impl<B: BasisElem, C: BasisElem> Clone for MapRef<B, C> {
    fn clone(&self) -> Self {
        MapRef {
            degree: self.degree,
            eval: Rc::clone(&self.eval),
            memo: Rc::clone(&self.memo),
        }
    }
}

impl<B: BasisElem, C: BasisElem> fmt::Debug for MapRef<B, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapRef")
            .field("degree", &self.degree)
            .field("memoised", &self.memo.borrow().len())
            .finish()
    }
}

impl<B: BasisElem + 'static, C: BasisElem + 'static> MapRef<B, C> {
    pub fn new(degree: i64, eval: impl Fn(&B) -> Lin<C> + 'static) -> Self {
        MapRef {
            degree,
            eval: Rc::new(eval),
            memo: Rc::new(RefCell::new(BTreeMap::new())),
        }
    }

    /// The zero map of the given degree.
    pub fn zero(degree: i64) -> Self {
        MapRef::new(degree, |_| Lin::zero())
    }

    /// A map given by a finite table; missing entries are zero.
    pub fn from_table(degree: i64, table: BTreeMap<B, Lin<C>>) -> Self {
        MapRef::new(degree, move |b| table.get(b).cloned().unwrap_or_default())
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Evaluate on a basis element (memoised).
    pub fn apply(&self, b: &B) -> Lin<C> {
        if let Some(hit) = self.memo.borrow().get(b) {
            return hit.clone();
        }
        let out = (self.eval)(b);
        self.memo.borrow_mut().insert(b.clone(), out.clone());
        out
    }

    /// Evaluate bypassing (and not populating) the memo table.
    pub fn apply_fresh(&self, b: &B) -> Lin<C> {
        (self.eval)(b)
    }

    /// Linear extension to combinations.
    pub fn apply_lin(&self, l: &Lin<B>) -> Lin<C> {
        let mut out = Lin::zero();
        for (b, c) in l.iter() {
            out.add_assign_scaled(&self.apply(b), c);
        }
        out
    }

    /// Keys currently memoised (for memo audits).
    pub fn memo_keys(&self) -> Vec<B> {
        self.memo.borrow().keys().cloned().collect()
    }
}

impl<B: BasisElem + 'static> MapRef<B, B> {
    pub fn identity() -> Self {
        MapRef::new(0, |b: &B| Lin::basis(b.clone()))
    }
}

// ---- complexes and contractions ----

/// A chain complex presented by its differential, with an optional
/// bounded-below filtration used by perturbation-hypothesis checks.
pub struct Complex<B: BasisElem> {
    pub d: MapRef<B, B>,
    pub filtration: Option<Rc<dyn Fn(&B) -> i64>>,
}

impl<B: BasisElem> Clone for Complex<B> {
    fn clone(&self) -> Self {
        Complex {
            d: self.d.clone(),
            filtration: self.filtration.clone(),
        }
    }
}

impl<B: BasisElem + 'static> Complex<B> {
    pub fn new(d: MapRef<B, B>) -> Self {
        Complex { d, filtration: None }
    }

    pub fn with_filtration(d: MapRef<B, B>, filt: impl Fn(&B) -> i64 + 'static) -> Self {
        Complex { d, filtration: Some(Rc::new(filt)) }
    }
}

/// Contraction data: a retraction of the big complex onto the small one.
pub struct Contraction<B: BasisElem, S: BasisElem> {
    pub big: Complex<B>,
    pub small: Complex<S>,
    pub p: MapRef<B, S>,
    pub j: MapRef<S, B>,
    pub h: MapRef<B, B>,
}

impl<B: BasisElem, S: BasisElem> Clone for Contraction<B, S> {
    fn clone(&self) -> Self {
        Contraction {
            big: self.big.clone(),
            small: self.small.clone(),
            p: self.p.clone(),
            j: self.j.clone(),
            h: self.h.clone(),
        }
    }
}

// ---- verification ----

/// Result of one verified identity.
#[derive(Debug, Clone)]
pub struct AxiomCheck {
    pub name: String,
    pub ok: bool,
    /// Rendering of the first offending input and the defect, if any.
    pub counterexample: Option<String>,
}

/// Outcome of [`verify_contraction`]: one entry per identity.
#[derive(Debug, Clone, Default)]
pub struct ContractionReport {
    pub checks: Vec<AxiomCheck>,
}

impl ContractionReport {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }

    fn record<B: BasisElem>(
        &mut self,
        name: &str,
        mut defects: impl Iterator<Item = (String, Lin<B>)>,
    ) {
        match defects.next() {
            None => self.checks.push(AxiomCheck { name: name.into(), ok: true, counterexample: None }),
            Some((input, defect)) => self.checks.push(AxiomCheck {
                name: name.into(),
                ok: false,
                counterexample: Some(format!("input {input}: defect {defect}")),
            }),
        }
    }
}

impl fmt::Display for ContractionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.counterexample {
                None => writeln!(f, "ok   {}", c.name)?,
                Some(ce) => writeln!(f, "FAIL {} ({ce})", c.name)?,
            }
        }
        Ok(())
    }
}

/// Check every contraction identity on the given bases, including that each
/// map shifts degree by its declared amount.
pub fn verify_contraction<B: BasisElem + 'static, S: BasisElem + 'static>(
    con: &Contraction<B, S>,
    big_basis: &[B],
    small_basis: &[S],
) -> ContractionReport {
    let mut report = ContractionReport::default();
    let d = &con.big.d;
    let dd = &con.small.d;
    let (p, j, h) = (&con.p, &con.j, &con.h);

    let defects_big = |f: &dyn Fn(&B) -> Lin<B>| -> Vec<(String, Lin<B>)> {
        big_basis
            .iter()
            .filter_map(|b| {
                let v = f(b);
                (!v.is_zero()).then(|| (b.to_string(), v))
            })
            .collect()
    };
    let defects_small_out = |f: &dyn Fn(&S) -> Lin<S>| -> Vec<(String, Lin<S>)> {
        small_basis
            .iter()
            .filter_map(|s| {
                let v = f(s);
                (!v.is_zero()).then(|| (s.to_string(), v))
            })
            .collect()
    };

    report.record(
        "differential squares to zero (big side)",
        defects_big(&|b| d.apply_lin(&d.apply(b))).into_iter(),
    );
    report.record(
        "differential squares to zero (small side)",
        defects_small_out(&|s| dd.apply_lin(&dd.apply(s))).into_iter(),
    );
    report.record(
        "projection is a chain map",
        big_basis
            .iter()
            .filter_map(|b| {
                let v = p.apply_lin(&d.apply(b)).sub(&dd.apply_lin(&p.apply(b)));
                (!v.is_zero()).then(|| (b.to_string(), v))
            })
            .collect::<Vec<_>>()
            .into_iter(),
    );
    report.record(
        "inclusion is a chain map",
        small_basis
            .iter()
            .filter_map(|s| {
                let v = d.apply_lin(&j.apply(s)).sub(&j.apply_lin(&dd.apply(s)));
                (!v.is_zero()).then(|| (s.to_string(), v))
            })
            .collect::<Vec<_>>()
            .into_iter(),
    );
    report.record(
        "projection retracts the inclusion",
        defects_small_out(&|s| p.apply_lin(&j.apply(s)).sub(&Lin::basis(s.clone()))).into_iter(),
    );
    report.record(
        "homotopy relation",
        defects_big(&|b| {
            let lhs = h.apply_lin(&d.apply(b)).add(&d.apply_lin(&h.apply(b)));
            let rhs = Lin::basis(b.clone()).sub(&j.apply_lin(&p.apply(b)));
            lhs.sub(&rhs)
        })
        .into_iter(),
    );
    report.record(
        "homotopy squares to zero",
        defects_big(&|b| h.apply_lin(&h.apply(b))).into_iter(),
    );
    report.record(
        "homotopy annihilates the image of the inclusion",
        small_basis
            .iter()
            .filter_map(|s| {
                let v = h.apply_lin(&j.apply(s));
                (!v.is_zero()).then(|| (s.to_string(), v))
            })
            .collect::<Vec<_>>()
            .into_iter(),
    );
    report.record(
        "projection annihilates the image of the homotopy",
        big_basis
            .iter()
            .filter_map(|b| {
                let v = p.apply_lin(&h.apply(b));
                (!v.is_zero()).then(|| (b.to_string(), v))
            })
            .collect::<Vec<_>>()
            .into_iter(),
    );

    // Degree homogeneity of each map's outputs.
    let mut degree_defects: Vec<(String, Lin<B>)> = Vec::new();
    for b in big_basis {
        for (name, out, shift) in [
            ("differential", d.apply(b), d.degree()),
            ("homotopy", h.apply(b), h.degree()),
        ] {
            for (c, _) in out.iter() {
                if c.degree() != b.degree() + shift {
                    degree_defects
                        .push((format!("{name} at {b}"), Lin::basis(c.clone())));
                }
            }
        }
        for (c, _) in p.apply(b).iter() {
            if c.degree() != b.degree() + p.degree() {
                degree_defects.push((format!("projection at {b}"), Lin::zero()));
            }
        }
    }
    for s in small_basis {
        for (c, _) in j.apply(s).iter() {
            if c.degree() != s.degree() + j.degree() {
                degree_defects.push((format!("inclusion at {s}"), Lin::basis(c.clone())));
            }
        }
    }
    report.record("maps are degree-homogeneous", degree_defects.into_iter());

    report
}

// ---- perturbation ----

/// Failure modes of the perturbation series.
#[derive(Debug, Error)]
pub enum PerturbError {
    #[error(
        "perturbation series did not terminate within {guard} steps at basis element `{element}`; \
         the difference of differentials must strictly descend a bounded-below filtration"
    )]
    SeriesGuardExceeded { guard: usize, element: String },
}

/// Hard bound on perturbation-series length; exceeding it is an error, not
/// a truncation.
pub const SERIES_GUARD: usize = 64;

/// Apply the perturbation lemma.
///
/// `new_d` is the perturbed differential on the big side. Writing `t` for
/// (old differential − new differential) and `X := Σ_i t(h t)^i` (a finite
/// sum whenever `t∘h` is locally nilpotent), the output contraction is
///
/// * big differential: `new_d`,
/// * small differential: `d_small − p∘X∘j`,
/// * projection: `p + p∘X∘h`,
/// * inclusion: `j + h∘X∘j`,
/// * homotopy: `h + h∘X∘h`.
///
/// Series evaluation is lazy per basis element and memoised; a series
/// longer than `guard` terms aborts with [`PerturbError::SeriesGuardExceeded`].
pub fn perturb<B: BasisElem + 'static, S: BasisElem + 'static>(
    con: &Contraction<B, S>,
    new_d: MapRef<B, B>,
    guard: usize,
) -> Contraction<B, S> {
    let old_d = con.big.d.clone();
    let t = {
        let new_d = new_d.clone();
        let old_d = old_d.clone();
        MapRef::new(1, move |b: &B| old_d.apply(b).sub(&new_d.apply(b)))
    };
    let x = {
        let t = t.clone();
        let h = con.h.clone();
        MapRef::new(1, move |b: &B| {
            match x_series(&t, &h, b, guard) {
                Ok(v) => v,
                Err(e) => panic!("{e}"),
            }
        })
    };

    let p_t = {
        let (p, h, x) = (con.p.clone(), con.h.clone(), x.clone());
        MapRef::new(0, move |b: &B| {
            p.apply(b).add(&p.apply_lin(&x.apply_lin(&h.apply(b))))
        })
    };
    let j_t = {
        let (j, h, x) = (con.j.clone(), con.h.clone(), x.clone());
        MapRef::new(0, move |s: &S| {
            j.apply(s).add(&h.apply_lin(&x.apply_lin(&j.apply(s))))
        })
    };
    let h_t = {
        let (h, x) = (con.h.clone(), x.clone());
        MapRef::new(-1, move |b: &B| {
            let correction = h.apply_lin(&x.apply_lin(&h.apply(b)));
            if armed(Fault::PerturbHomotopy) {
                h.apply(b).sub(&correction)
            } else {
                h.apply(b).add(&correction)
            }
        })
    };
    let dd_t = {
        let (p, j, x, dd) = (con.p.clone(), con.j.clone(), x, con.small.d.clone());
        MapRef::new(1, move |s: &S| {
            dd.apply(s).sub(&p.apply_lin(&x.apply_lin(&j.apply(s))))
        })
    };

    Contraction {
        big: Complex { d: new_d, filtration: con.big.filtration.clone() },
        small: Complex { d: dd_t, filtration: con.small.filtration.clone() },
        p: p_t,
        j: j_t,
        h: h_t,
    }
}

/// The series `X b = Σ_i t (h t)^i b`, with an explicit termination guard.
pub fn x_series<B: BasisElem + 'static>(
    t: &MapRef<B, B>,
    h: &MapRef<B, B>,
    b: &B,
    guard: usize,
) -> Result<Lin<B>, PerturbError> {
    let mut acc = Lin::zero();
    let mut w = Lin::basis(b.clone());
    for _ in 0..=guard {
        let tw = t.apply_lin(&w);
        if tw.is_zero() {
            return Ok(acc);
        }
        acc.add_assign_scaled(&tw, &Rat::one());
        w = h.apply_lin(&tw);
        if w.is_zero() {
            return Ok(acc);
        }
    }
    Err(PerturbError::SeriesGuardExceeded { guard, element: b.to_string() })
}

/// The same series summed in the other association, `Σ_i (t h)^i t b`.
/// Exposed so tests can confirm both forms agree extensionally.
pub fn x_series_alt<B: BasisElem + 'static>(
    t: &MapRef<B, B>,
    h: &MapRef<B, B>,
    b: &B,
    guard: usize,
) -> Result<Lin<B>, PerturbError> {
    let mut acc = Lin::zero();
    let mut w = t.apply(b);
    for _ in 0..=guard {
        if w.is_zero() {
            return Ok(acc);
        }
        acc.add_assign_scaled(&w, &Rat::one());
        w = t.apply_lin(&h.apply_lin(&w));
    }
    Err(PerturbError::SeriesGuardExceeded { guard, element: b.to_string() })
}

// ---- filtration checks ----

/// A filtration-descent violation: some output term failed to drop.
#[derive(Debug, Error)]
#[error(
    "filtration descent violated: `{input}` at level {input_level} maps onto `{output}` at level \
     {output_level}, required drop ≥ {min_drop}"
)]
pub struct DescentViolation {
    pub input: String,
    pub input_level: i64,
    pub output: String,
    pub output_level: i64,
    pub min_drop: i64,
}

/// Check that every output term of `map` on `basis` sits at least
/// `min_drop` filtration levels below its input (`min_drop = 0` checks
/// preservation).
pub fn check_filtration_descent<B: BasisElem + 'static>(
    map: &MapRef<B, B>,
    filt: impl Fn(&B) -> i64,
    basis: &[B],
    min_drop: i64,
) -> Result<(), DescentViolation> {
    for b in basis {
        let lb = filt(b);
        for (c, _) in map.apply(b).iter() {
            let lc = filt(c);
            if lb - lc < min_drop {
                return Err(DescentViolation {
                    input: b.to_string(),
                    input_level: lb,
                    output: c.to_string(),
                    output_level: lc,
                    min_drop,
                });
            }
        }
    }
    Ok(())
}
