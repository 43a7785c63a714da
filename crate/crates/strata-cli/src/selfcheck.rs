//! Built-in verification suite: bundled charts through the full check
//! catalogue, envelope and symbol-calculus audits, the transferred
//! bracket tower, and fault-detection drills.

use std::rc::Rc;
use std::time::Instant;

use anyhow::{bail, Result};

use strata::envelope::{
    poisson_bracket, weyl_presentation, EnvElem, Envelope, LrPresentation, RawLetter, RawWord,
    Strategy, SymElem,
};
use strata::exact::{rat, Lin, Poly, VarCtx};
use strata::fault::{inject, Fault};
use strata::foliation::{
    build_foliation, commutator_lin, j_include_basis, order_component, p_filter, run_pipeline,
    run_scenario, sym_op_mul, CheckStatus, FoliationError, FormBasis, NormalBasis, OpBasis,
    PipelineCaps, Scenario, ScenarioCaps,
};
use strata::sh::{poisson_multiderivation_residual, poisson_weight_residual, PoissonStructure};
use strata::transfer::BracketTransfer;

// ---- suite driver ----

const PARTS: [&str; 7] = [
    "scenario:flat",
    "scenario:shear",
    "scenario:twisted",
    "scenario:toy",
    "envelope",
    "poisson",
    "faults",
];

type PartOutcome = (usize, usize, Vec<String>);

/// Runs the selected parts (all by default), printing one line per part,
/// and returns the total number of failed checks.
pub fn run(only: Option<&[String]>, fault: Option<Fault>, timings: bool) -> Result<usize> {
    if let Some(list) = only {
        for name in list {
            if !PARTS.contains(&name.as_str()) {
                bail!(
                    "unknown selfcheck part {name:?}; available: {}",
                    PARTS.join(", ")
                );
            }
        }
    }
    let wanted = |name: &str| only.map_or(true, |list| list.iter().any(|x| x == name));
    let fault_mode = fault.is_some();
    let _guard = fault.map(inject);

    let (mut parts_run, mut total_passed, mut total_failed) = (0usize, 0usize, 0usize);
    for part in PARTS {
        if !wanted(part) {
            continue;
        }
        if part == "faults" && fault_mode {
            // The drill arms its own faults; nesting would disarm the outer one.
            println!("skip faults (an external fault is armed)");
            continue;
        }
        let started = Instant::now();
        let (passed, failed, failures) = run_part(part, fault_mode)?;
        parts_run += 1;
        let timing = if timings {
            format!(" [{} ms]", started.elapsed().as_millis())
        } else {
            String::new()
        };
        let verdict = if failed == 0 { "ok" } else { "FAIL" };
        println!("{verdict} {part} — {passed}/{} checks{timing}", passed + failed);
        for line in failures {
            println!("    {line}");
        }
        total_passed += passed;
        total_failed += failed;
    }
    println!("selfcheck: {parts_run} parts, {total_passed} passed, {total_failed} failed");
    Ok(total_failed)
}

fn run_part(name: &str, fault_mode: bool) -> Result<PartOutcome> {
    match name {
        "scenario:flat" => scenario_part(&flat_scenario(), fault_mode),
        "scenario:shear" => scenario_part(&shear_scenario(), fault_mode),
        "scenario:twisted" => scenario_part(&twisted_scenario(), fault_mode),
        "scenario:toy" => scenario_part(&toy_scenario(), fault_mode),
        "envelope" => Ok(envelope_part()),
        "poisson" => poisson_part(fault_mode),
        "faults" => Ok(faults_part()),
        other => unreachable!("part {other} is not in the suite"),
    }
}

// ---- bundled charts ----

fn chart(name: &str, n: usize, m: usize, rows: &[&[&str]], seed: u64) -> Scenario {
    Scenario {
        name: name.to_string(),
        n,
        m,
        v_table: rows
            .iter()
            .map(|row| row.iter().map(|s| s.to_string()).collect())
            .collect(),
        caps: ScenarioCaps { max_arity: 3, max_order: 2, max_degree: 3 },
        checks: Vec::new(),
        seed,
    }
}

fn flat_scenario() -> Scenario {
    chart("flat", 1, 2, &[&["0"], &["0"]], 11)
}

fn shear_scenario() -> Scenario {
    chart("shear", 1, 2, &[&["u2"], &["0"]], 7)
}

fn twisted_scenario() -> Scenario {
    chart("twisted", 1, 2, &[&["x1 u2"], &["0"]], 13)
}

fn toy_scenario() -> Scenario {
    chart("tangent-toy", 2, 0, &[], 5)
}

fn scenario_part(scenario: &Scenario, fault_mode: bool) -> Result<PartOutcome> {
    match run_scenario(scenario, false) {
        Ok(report) => {
            let failures = report
                .records
                .iter()
                .filter(|r| r.status == CheckStatus::Fail)
                .map(|r| {
                    format!(
                        "{}: {}",
                        r.name,
                        r.counterexample.as_deref().unwrap_or("no witness")
                    )
                })
                .collect();
            Ok((report.passed, report.failed, failures))
        }
        Err(err) if fault_mode => Ok((0, 1, vec![format!("run error: {err}")])),
        Err(err) => Err(err.into()),
    }
}

// ---- envelope and symbol calculus ----

fn envelope_part() -> PartOutcome {
    let mut passed = 0usize;
    let mut failures: Vec<String> = Vec::new();
    let mut check = |name: &str, outcome: Result<(), String>| match outcome {
        Ok(()) => passed += 1,
        Err(detail) => failures.push(format!("{name}: {detail}")),
    };

    let weyl_env = Envelope::new(weyl_presentation(VarCtx::new(2, 0)));
    let line_env = Envelope::new(weyl_presentation(VarCtx::new(1, 0)));
    let sl2_env = Envelope::new(sl2_presentation(VarCtx::new(1, 0)));

    check(
        "weyl rewrite confluence",
        weyl_env.confluence_audit(100, 5, 0xe1).map(|_| ()),
    );
    check(
        "sl2 rewrite confluence",
        sl2_env.confluence_audit(100, 5, 0x51).map(|_| ()),
    );
    check("principal-symbol multiplicativity", gr_multiplicative(&weyl_env));
    check("even symbols commute", even_symbols_commute(&weyl_env));
    check(
        "odd symbols anticommute",
        if odd_pair_anticommutes() {
            Ok(())
        } else {
            Err("q1·q2 + q2·q1 ≠ 0".to_string())
        },
    );
    check("symbol-bracket antisymmetry", bracket_antisymmetry(&line_env));
    check("symbol-bracket Jacobi", bracket_jacobi(&line_env));
    check("symbol-bracket Leibniz", bracket_leibniz(&line_env));

    let failed = failures.len();
    (passed, failed, failures)
}

fn sl2_presentation(ctx: VarCtx) -> LrPresentation {
    LrPresentation::new(
        ctx,
        vec![
            ("e".to_string(), 0),
            ("f".to_string(), 0),
            ("h".to_string(), 0),
        ],
        vec![
            ((0, 1), vec![(2, Poly::one(ctx))]),
            ((0, 2), vec![(0, Poly::int(ctx, -2))]),
            ((1, 2), vec![(1, Poly::int(ctx, 2))]),
        ],
        vec![vec![Poly::zero(ctx); ctx.total()]; 3],
        None,
    )
    .expect("sl2 is a presentation")
}

fn odd_pair_presentation(ctx: VarCtx) -> LrPresentation {
    LrPresentation::new(
        ctx,
        vec![("q1".to_string(), 1), ("q2".to_string(), 1)],
        Vec::new(),
        vec![vec![Poly::zero(ctx); ctx.total()]; 2],
        None,
    )
    .expect("two anticommuting odd generators form a presentation")
}

fn sym_word(pres: &LrPresentation, word: Vec<usize>) -> SymElem {
    let mut s = SymElem::zero();
    s.insert_word(pres, word, Poly::one(pres.ctx()));
    s
}

fn normalized(env: &Envelope, word: &RawWord) -> Result<EnvElem, String> {
    env.normal_form(word, Strategy::Leftmost).map_err(|e| e.to_string())
}

fn gr_multiplicative(env: &Envelope) -> Result<(), String> {
    let ctx = env.presentation().ctx();
    let probes = [
        RawWord::gens(&[0]),
        RawWord::gens(&[0, 1]),
        RawWord::gens(&[1, 1, 0]),
        RawWord(vec![
            RawLetter::Gen(0),
            RawLetter::Coeff(Poly::var(ctx, 0)),
            RawLetter::Gen(1),
        ]),
    ];
    for wa in &probes {
        for wb in &probes {
            let a = normalized(env, wa)?;
            let b = normalized(env, wb)?;
            let (la, lb) = (a.filtration_degree(), b.filtration_degree());
            let ab = env.mul(&a, &b).map_err(|e| e.to_string())?;
            let lhs = env.gr_projection(&ab, la + lb).map_err(|e| e.to_string())?;
            let ga = env.gr_projection(&a, la).map_err(|e| e.to_string())?;
            let gb = env.gr_projection(&b, lb).map_err(|e| e.to_string())?;
            let rhs = ga.mul(env.presentation(), &gb);
            if lhs != rhs {
                return Err(format!(
                    "gr(xy) ≠ gr(x)·gr(y) for {} and {}",
                    a.render(env.presentation()),
                    b.render(env.presentation())
                ));
            }
        }
    }
    Ok(())
}

fn even_symbols_commute(env: &Envelope) -> Result<(), String> {
    let pres = env.presentation();
    let ctx = pres.ctx();
    let mut with_coeff = SymElem::zero();
    with_coeff.insert_word(pres, vec![0, 1], Poly::var(ctx, 1));
    let symbols = [
        sym_word(pres, vec![0]),
        sym_word(pres, vec![1, 1]),
        with_coeff,
    ];
    for s in &symbols {
        for t in &symbols {
            if s.mul(pres, t) != t.mul(pres, s) {
                return Err(format!(
                    "{} and {} fail to commute",
                    s.render(pres),
                    t.render(pres)
                ));
            }
        }
    }
    Ok(())
}

fn odd_pair_anticommutes() -> bool {
    let pres = odd_pair_presentation(VarCtx::new(1, 0));
    let q1 = sym_word(&pres, vec![0]);
    let q2 = sym_word(&pres, vec![1]);
    q1.mul(&pres, &q2).add(&q2.mul(&pres, &q1)).is_zero()
}

/// The order-graded sample symbols the bracket axioms run over.
fn bracket_family(env: &Envelope) -> Vec<(SymElem, usize)> {
    let pres = env.presentation();
    let ctx = pres.ctx();
    let x = Poly::var(ctx, 0);
    let mut x_xi = SymElem::zero();
    x_xi.insert_word(pres, vec![0], x.clone());
    vec![
        (sym_word(pres, vec![0]), 1),
        (x_xi, 1),
        (sym_word(pres, vec![0, 0]), 2),
        (SymElem::scalar(x), 0),
    ]
}

fn bracket_antisymmetry(env: &Envelope) -> Result<(), String> {
    let family = bracket_family(env);
    for (s, ls) in &family {
        for (t, lt) in &family {
            let forward = poisson_bracket(env, s, *ls, t, *lt).map_err(|e| e.to_string())?;
            let backward = poisson_bracket(env, t, *lt, s, *ls).map_err(|e| e.to_string())?;
            if forward != backward.scale(&rat(-1)) {
                return Err(format!(
                    "{{{}, {}}} is not antisymmetric",
                    s.render(env.presentation()),
                    t.render(env.presentation())
                ));
            }
        }
    }
    Ok(())
}

fn bracket_jacobi(env: &Envelope) -> Result<(), String> {
    let family = bracket_family(env);
    let level = |a: usize, b: usize| (a + b).saturating_sub(1);
    for (s, ls) in &family {
        for (t, lt) in &family {
            for (u, lu) in &family {
                let inner = poisson_bracket(env, t, *lt, u, *lu).map_err(|e| e.to_string())?;
                let lhs =
                    poisson_bracket(env, s, *ls, &inner, level(*lt, *lu)).map_err(|e| e.to_string())?;
                let st = poisson_bracket(env, s, *ls, t, *lt).map_err(|e| e.to_string())?;
                let first =
                    poisson_bracket(env, &st, level(*ls, *lt), u, *lu).map_err(|e| e.to_string())?;
                let su = poisson_bracket(env, s, *ls, u, *lu).map_err(|e| e.to_string())?;
                let second =
                    poisson_bracket(env, t, *lt, &su, level(*ls, *lu)).map_err(|e| e.to_string())?;
                if lhs != first.add(&second) {
                    return Err("Jacobi identity fails on the sample family".to_string());
                }
            }
        }
    }
    Ok(())
}

fn bracket_leibniz(env: &Envelope) -> Result<(), String> {
    let pres = env.presentation();
    let family = bracket_family(env);
    for (s, ls) in &family {
        for (t, lt) in &family {
            for (u, lu) in &family {
                let tu = t.mul(pres, u);
                let lhs = poisson_bracket(env, s, *ls, &tu, lt + lu).map_err(|e| e.to_string())?;
                let st = poisson_bracket(env, s, *ls, t, *lt).map_err(|e| e.to_string())?;
                let su = poisson_bracket(env, s, *ls, u, *lu).map_err(|e| e.to_string())?;
                let rhs = st.mul(pres, u).add(&t.mul(pres, &su));
                if lhs != rhs {
                    return Err("Leibniz rule fails on the sample family".to_string());
                }
            }
        }
    }
    Ok(())
}

// ---- transferred bracket tower ----

fn poisson_part(fault_mode: bool) -> Result<PartOutcome> {
    match poisson_residuals() {
        Ok(outcome) => Ok(outcome),
        Err(err) if fault_mode => Ok((0, 1, vec![format!("pipeline error: {err}")])),
        Err(err) => Err(err.into()),
    }
}

fn poisson_residuals() -> Result<PartOutcome, FoliationError> {
    let f = build_foliation(1, 2, &[vec!["u2".to_string()], vec!["0".to_string()]])?;
    let caps = PipelineCaps { max_arity: 4, max_order: 2, max_degree: 2 };
    let pipeline = run_pipeline(&f, caps)?;
    let fc = Rc::clone(pipeline.foliation());
    let bracket = move |a: &OpBasis, b: &OpBasis| {
        let comm = commutator_lin(&fc, &Lin::basis(a.clone()), &Lin::basis(b.clone()));
        order_component(&comm, a.order() + b.order() - 1)
    };
    let tower = BracketTransfer::new(pipeline.transfer().contraction(), caps.max_arity, bracket);
    let structure = PoissonStructure::new(
        tower.family(),
        |a: &NormalBasis, b: &NormalBasis| {
            p_filter(&sym_op_mul(&j_include_basis(a), &j_include_basis(b)))
        },
        |b: &NormalBasis| b.order(),
    );
    let cap_error = |e: strata::sh::ArityError| FoliationError::ArityCap {
        arity: e.requested,
        cap: e.cap,
    };

    let ctx = f.ctx();
    let v1 = NormalBasis::transverse(ctx, 0);
    let v2 = NormalBasis::transverse(ctx, 1);
    let x = NormalBasis::from_form(&FormBasis::variable(ctx, 0));
    let u1 = NormalBasis::from_form(&FormBasis::variable(ctx, 1));
    let dx = NormalBasis::from_form(&FormBasis::coordinate_form(ctx, 0));

    let mut passed = 0usize;
    let mut failures: Vec<String> = Vec::new();

    let derivation_probes: Vec<(Vec<NormalBasis>, NormalBasis, NormalBasis, Vec<NormalBasis>)> = vec![
        (vec![], v1.clone(), x.clone(), vec![]),
        (vec![], x.clone(), dx.clone(), vec![]),
        (vec![], v1.clone(), x.clone(), vec![v2.clone()]),
        (vec![v1.clone()], x.clone(), u1.clone(), vec![]),
        (vec![], v1.clone(), dx.clone(), vec![v2.clone()]),
        (vec![dx.clone()], v1.clone(), v2.clone(), vec![]),
        (vec![v1.clone(), v2.clone()], x.clone(), u1.clone(), vec![]),
        (vec![v1.clone()], x.clone(), dx.clone(), vec![v2.clone()]),
        (vec![v1.clone(), v2.clone()], x.clone(), dx.clone(), vec![u1.clone()]),
    ];
    for (before, yp, ypp, after) in &derivation_probes {
        let k = before.len() + 1 + after.len();
        let residual = poisson_multiderivation_residual(&structure, before, yp, ypp, after)
            .map_err(cap_error)?;
        if residual.is_zero() {
            passed += 1;
        } else {
            failures.push(format!(
                "multiderivation rule fails at arity {k} on ({yp})·({ypp}): {residual}"
            ));
        }
    }

    let weight_probes: Vec<Vec<NormalBasis>> = vec![
        vec![v1.clone(), x.clone()],
        vec![v1.clone(), v2.clone()],
        vec![v1.clone(), dx.clone()],
        vec![x.clone(), u1.clone()],
        vec![v1.clone(), v2.clone(), x.clone()],
        vec![v1.clone(), v2.clone(), dx.clone()],
        vec![v1.clone(), x.clone(), dx.clone()],
        vec![v1.clone(), v2.clone(), x.clone(), dx.clone()],
        vec![v1.clone(), v2.clone(), u1.clone(), dx.clone()],
    ];
    for inputs in &weight_probes {
        let k = inputs.len();
        let residual = poisson_weight_residual(&structure, k, inputs).map_err(cap_error)?;
        if residual.is_zero() {
            passed += 1;
        } else {
            let labels: Vec<String> = inputs.iter().map(|b| b.to_string()).collect();
            failures.push(format!(
                "weight rule fails at arity {k} on ({}): {residual}",
                labels.join(", ")
            ));
        }
    }

    let failed = failures.len();
    Ok((passed, failed, failures))
}

// ---- fault-detection drill ----

fn faults_part() -> PartOutcome {
    let mut passed = 0usize;
    let mut failures: Vec<String> = Vec::new();
    for fault in Fault::ALL {
        let (detector, detected) = {
            let _guard = inject(fault);
            detect(fault)
        };
        if detected {
            passed += 1;
        } else {
            failures.push(format!("{}: not caught by {detector}", fault.name()));
        }
    }
    let failed = failures.len();
    (passed, failed, failures)
}

fn detect(fault: Fault) -> (&'static str, bool) {
    match fault {
        Fault::KoszulOddSwap => ("odd-symbol anticommutativity", !odd_pair_anticommutes()),
        Fault::PerturbHomotopy => ("symbol-contraction", shear_check_fails("symbol-contraction")),
        Fault::StasheffOuter => ("operation-tower", shear_check_fails("operation-tower")),
        Fault::TransferSeed => ("closed-forms", shear_check_fails("closed-forms")),
        Fault::CurvatureSign => ("order-drop-product", shear_check_fails("order-drop-product")),
    }
}

fn shear_check_fails(check: &str) -> bool {
    let mut scenario = shear_scenario();
    scenario.checks = vec![check.to_string()];
    match run_scenario(&scenario, false) {
        Ok(report) => report.failed > 0,
        Err(_) => true,
    }
}
