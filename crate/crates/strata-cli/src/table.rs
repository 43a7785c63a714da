//! Golden operation tables: exhaustive low-complexity evaluations of a
//! chart's transferred tower, serialized as structure constants.

use strata::exact::BasisElem;
use strata::foliation::{
    build_foliation, enumerate_normals, run_pipeline, FoliationError, NormalBasis, PipelineCaps,
    Scenario,
};
use strata::sh::{export_table, StructureTable};

/// Tabulates the transferred operations of `scenario`'s chart for every
/// arity up to `arity`.
///
/// Inputs range over the basis with operator order ≤ 1 and coefficient
/// degree ≤ 1 (further capped by the scenario), keeping only tuples whose
/// output degree is realizable; ternary and higher tuples restrict to
/// constant coefficients so tables stay reviewable.
pub fn build_table(scenario: &Scenario, arity: usize) -> Result<StructureTable, FoliationError> {
    let caps: PipelineCaps = scenario.caps.into();
    if arity == 0 || arity > caps.max_arity {
        return Err(FoliationError::ArityCap { arity, cap: caps.max_arity });
    }
    let f = build_foliation(scenario.n, scenario.m, &scenario.v_table)?;
    let pipeline = run_pipeline(&f, caps)?;
    let pool = enumerate_normals(f.ctx(), caps.max_degree.min(1), caps.max_order.min(1));
    let leaf_dim = f.n() as i64;

    let mut tuples: Vec<(usize, Vec<NormalBasis>)> = Vec::new();
    for k in 1..=arity {
        let coeff_cap: u32 = if k <= 2 { 1 } else { 0 };
        let mut odometer = vec![0usize; k];
        loop {
            let combo: Vec<NormalBasis> =
                odometer.iter().map(|&i| pool[i].clone()).collect();
            if admissible(&combo, k, leaf_dim, coeff_cap) {
                tuples.push((k, combo));
            }
            let mut pos = k;
            while pos > 0 {
                odometer[pos - 1] += 1;
                if odometer[pos - 1] < pool.len() {
                    break;
                }
                odometer[pos - 1] = 0;
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
    }
    Ok(export_table(pipeline.family(), &tuples))
}

fn admissible(combo: &[NormalBasis], k: usize, leaf_dim: i64, coeff_cap: u32) -> bool {
    let degree_sum: i64 = combo.iter().map(BasisElem::degree).sum();
    let out_degree = degree_sum + 2 - k as i64;
    if out_degree < 0 || out_degree > leaf_dim {
        return false;
    }
    let coeff_sum: u32 = combo
        .iter()
        .map(|b| b.coefficient().coefficient_degree())
        .sum();
    coeff_sum <= coeff_cap
}
