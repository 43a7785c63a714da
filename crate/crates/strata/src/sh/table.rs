//! Serialisable tables of operation values.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{sort_with_sign, BasisElem, Lin, Rat, SignFlavor};

use super::family::{Flavor, OperationFamily};

/// A basis element reconstructed from a table: a display name plus its
/// degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TableBasis(pub String, pub i64);

impl fmt::Display for TableBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl BasisElem for TableBasis {
    fn degree(&self) -> i64 {
        self.1
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableElem {
    pub elem: String,
    pub degree: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableTerm {
    pub elem: String,
    pub degree: i64,
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub arity: usize,
    pub inputs: Vec<TableElem>,
    pub output: Vec<TableTerm>,
}

/// The values of an operation family on an explicit list of tuples, with
/// exact rational coefficients rendered as strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureTable {
    pub flavor: Flavor,
    pub arity_cap: usize,
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot parse coefficient {text:?}")]
    BadCoefficient { text: String },
    #[error("entry lists arity {arity} but {len} inputs")]
    ArityMismatch { arity: usize, len: usize },
}

/// Record the family's values on the given tuples. For symmetric flavors
/// each tuple is first brought to sorted order (the stored value is then
/// the value on the sorted tuple, which determines all reorderings).
pub fn export_table<B: BasisElem + 'static>(
    family: &OperationFamily<B>,
    tuples: &[(usize, Vec<B>)],
) -> StructureTable {
    let mut entries = Vec::with_capacity(tuples.len());
    for (k, tuple) in tuples {
        let tuple = if family.flavor.is_symmetric() {
            let items: Vec<(B, i64)> = tuple.iter().map(|b| (b.clone(), b.degree())).collect();
            let (sorted, _) = sort_with_sign(SignFlavor::Wedge, items, |b| b.clone());
            sorted.into_iter().map(|(b, _)| b).collect()
        } else {
            tuple.clone()
        };
        let value = family.op(*k, &tuple).expect("exported tuples respect the cap");
        entries.push(TableEntry {
            arity: *k,
            inputs: tuple
                .iter()
                .map(|b| TableElem { elem: b.to_string(), degree: b.degree() })
                .collect(),
            output: value
                .iter()
                .map(|(b, c)| TableTerm {
                    elem: b.to_string(),
                    degree: b.degree(),
                    coeff: c.to_string(),
                })
                .collect(),
        });
    }
    StructureTable { flavor: family.flavor, arity_cap: family.arity_cap, entries }
}

/// Rebuild an operation family from a table. Tuples not present in the
/// table evaluate to zero; for symmetric flavors lookups are made in
/// sorted order, matching how [`export_table`] stores them.
pub fn import_table(table: &StructureTable) -> Result<OperationFamily<TableBasis>, TableError> {
    let mut map: BTreeMap<(usize, Vec<TableBasis>), Lin<TableBasis>> = BTreeMap::new();
    for entry in &table.entries {
        if entry.arity != entry.inputs.len() {
            return Err(TableError::ArityMismatch {
                arity: entry.arity,
                len: entry.inputs.len(),
            });
        }
        let key: Vec<TableBasis> = entry
            .inputs
            .iter()
            .map(|e| TableBasis(e.elem.clone(), e.degree))
            .collect();
        let mut value = Lin::zero();
        for term in &entry.output {
            let coeff = Rat::from_str(&term.coeff)
                .map_err(|_| TableError::BadCoefficient { text: term.coeff.clone() })?;
            value.add_assign_scaled(
                &Lin::basis(TableBasis(term.elem.clone(), term.degree)),
                &coeff,
            );
        }
        map.insert((entry.arity, key), value);
    }
    Ok(OperationFamily::new(table.flavor, table.arity_cap, move |k, xs: &[TableBasis]| {
        map.get(&(k, xs.to_vec())).cloned().unwrap_or_else(Lin::zero)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratq};
    use crate::sh::residual::stasheff_residual;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
    struct E(u8, u8);

    impl fmt::Display for E {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "E{}{}", self.0, self.1)
        }
    }

    impl BasisElem for E {
        fn degree(&self) -> i64 {
            i64::from(self.0) - i64::from(self.1)
        }
    }

    fn basis() -> Vec<E> {
        vec![E(0, 0), E(0, 1), E(1, 0), E(1, 1)]
    }

    fn endo_dga(cap: usize) -> OperationFamily<E> {
        OperationFamily::new(Flavor::Ainfty, cap, |k, xs: &[E]| match k {
            1 => {
                let left = if xs[0].1 == 1 { Lin::basis(E(xs[0].0, 0)) } else { Lin::zero() };
                let right = if xs[0].0 == 0 { Lin::basis(E(1, xs[0].1)) } else { Lin::zero() };
                right.sub(&left.scale(&crate::exact::minus_one_pow(xs[0].degree())))
            }
            2 => {
                if xs[0].1 == xs[1].0 {
                    Lin::basis(E(xs[0].0, xs[1].1))
                } else {
                    Lin::zero()
                }
            }
            _ => Lin::zero(),
        })
    }

    fn all_small_tuples(cap: usize) -> Vec<(usize, Vec<E>)> {
        let mut tuples = Vec::new();
        for b in basis() {
            tuples.push((1, vec![b]));
        }
        for a in basis() {
            for b in basis() {
                tuples.push((2, vec![a, b]));
            }
        }
        let _ = cap;
        tuples
    }

    #[test]
    fn export_import_round_trips_through_json() {
        let f = endo_dga(3);
        let table = export_table(&f, &all_small_tuples(3));
        let json = serde_json::to_string_pretty(&table).unwrap();
        let back: StructureTable = serde_json::from_str(&json).unwrap();
        let g = import_table(&back).unwrap();
        // The imported family evaluates identically under renaming.
        for (k, tuple) in all_small_tuples(3) {
            let named: Vec<TableBasis> = tuple
                .iter()
                .map(|b| TableBasis(b.to_string(), b.degree()))
                .collect();
            let want = f.op(k, &tuple).unwrap();
            let got = g.op(k, &named).unwrap();
            let want_named: Lin<TableBasis> = want
                .iter()
                .map(|(b, c)| (TableBasis(b.to_string(), b.degree()), c.clone()))
                .collect();
            assert_eq!(got, want_named);
        }
        // And still satisfies the defining identities on imported data.
        for (_, tuple) in all_small_tuples(3).iter().filter(|(k, _)| *k == 2) {
            let named: Vec<TableBasis> = tuple
                .iter()
                .map(|b| TableBasis(b.to_string(), b.degree()))
                .collect();
            let r = stasheff_residual(&g, 2, &named).unwrap();
            assert!(r.is_zero(), "{tuple:?}: {r}");
        }
    }

    #[test]
    fn fractional_coefficients_survive_the_round_trip() {
        let f = OperationFamily::new(Flavor::Ainfty, 1, |_, xs: &[E]| {
            Lin::single(xs[0], ratq(-3, 2))
        });
        let table = export_table(&f, &[(1, vec![E(0, 1)])]);
        assert_eq!(table.entries[0].output[0].coeff, "-3/2");
        let g = import_table(&table).unwrap();
        let v = g.op(1, &[TableBasis("E01".into(), -1)]).unwrap();
        assert_eq!(v.coeff(&TableBasis("E01".into(), -1)), ratq(-3, 2));
    }

    #[test]
    fn bad_coefficients_are_reported() {
        let table = StructureTable {
            flavor: Flavor::Ainfty,
            arity_cap: 1,
            entries: vec![TableEntry {
                arity: 1,
                inputs: vec![TableElem { elem: "x".into(), degree: 0 }],
                output: vec![TableTerm {
                    elem: "x".into(),
                    degree: 0,
                    coeff: "one half".into(),
                }],
            }],
        };
        match import_table(&table) {
            Err(TableError::BadCoefficient { text }) => assert_eq!(text, "one half"),
            other => panic!("expected a coefficient error, got {other:?}"),
        }
    }

    #[test]
    fn arity_mismatches_are_reported() {
        let table = StructureTable {
            flavor: Flavor::Ainfty,
            arity_cap: 2,
            entries: vec![TableEntry { arity: 2, inputs: vec![], output: vec![] }],
        };
        assert!(matches!(
            import_table(&table),
            Err(TableError::ArityMismatch { arity: 2, len: 0 })
        ));
    }

    #[test]
    fn symmetric_tables_store_sorted_tuples() {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
        struct G(i64);
        impl fmt::Display for G {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "g{}", self.0)
            }
        }
        impl BasisElem for G {
            fn degree(&self) -> i64 {
                self.0
            }
        }
        let f = OperationFamily::new(Flavor::Linfty, 2, |_, xs: &[G]| {
            Lin::basis(G(xs[0].0.min(xs[1].0)))
        });
        let table = export_table(&f, &[(2, vec![G(2), G(0)])]);
        assert_eq!(table.entries[0].inputs[0].elem, "g0");
        let g = import_table(&table).unwrap();
        // Lookup of the unsorted order picks up the alternating sign.
        let v = g
            .op(2, &[TableBasis("g2".into(), 2), TableBasis("g0".into(), 0)])
            .unwrap();
        assert_eq!(v, Lin::single(TableBasis("g0".into(), 0), rat(-1)));
    }
}
