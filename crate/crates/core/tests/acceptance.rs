//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use common::systems::{certificate_exists, random};
use common::{bind_affine, dnf, fm_confirms, load, q, solver_cmd, z, CORPUS, TIMEOUT_MS};
use linrank::loop_ir::DnfProgram;
use linrank::motzkin::generate_constraint;
use linrank::oracle::fourier_motzkin_feasible;
use linrank::prover::{prove_program, OutputFormat, ProveOutcome, ProveStatus, ProverConfig};
use linrank::ranking::{certify, ordinal_cmp, OrdinalValue, RankingFunction};
use linrank::solver::{emit, run_solver, substitute, validate_model, SolverResult};
use linrank::template::TemplateKind;
use linrank::Model;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn config(kinds: &[TemplateKind]) -> ProverConfig {
    ProverConfig {
        templates: kinds.to_vec(),
        solver_cmd: solver_cmd(),
        timeout_ms: TIMEOUT_MS,
        grid_bound: 0,
        emit_dir: None,
        format: OutputFormat::Machine,
        parallel: false,
    }
}

fn run(name: &str, kind: TemplateKind) -> ProveOutcome {
    prove_program(name, &load(name), &config(&[kind]))
}

/// Terminating outcomes are collected for the soundness criterion.
struct Ledger {
    proved: Vec<(String, TemplateKind, RankingFunction)>,
}

impl Ledger {
    fn expect_terminating(&mut self, name: &str, kind: TemplateKind) -> Check {
        let o = run(name, kind);
        match &o.status {
            ProveStatus::Terminating { function, .. } => {
                self.proved.push((name.to_string(), kind, (**function).clone()));
                Ok(())
            }
            _ => Err(format!("{name} + {kind}: expected Terminating, got {}", describe(&o))),
        }
    }
}

fn describe(o: &ProveOutcome) -> String {
    let verdicts: Vec<String> = o.per_template.iter().map(|a| format!("{}={}", a.template, a.verdict)).collect();
    match &o.status {
        ProveStatus::Terminating { template, assignment, .. } => {
            let nu: Vec<String> =
                assignment.iter().map(|(k, v)| format!("{k}={}", linrank::rational::fmt_ratio(v))).collect();
            format!("Terminating via {template} [{}]", nu.join(", "))
        }
        ProveStatus::Unknown => format!("Unknown [{}]", verdicts.join(", ")),
        ProveStatus::InputError(e) => format!("InputError({e})"),
        ProveStatus::SolverError(e) => format!("SolverError({e})"),
    }
}

fn expect_unsat(name: &str, kind: TemplateKind) -> Check {
    let d = dnf(name);
    let c = generate_constraint(&d, &kind.build().map_err(|e| e.to_string())?);
    match run_solver(&solver_cmd(), &emit(&c), TIMEOUT_MS) {
        SolverResult::Unsat => Ok(()),
        SolverResult::Sat(m) => {
            let t = kind.build().unwrap();
            let params: Vec<String> = t.all_params(&d.space).iter().map(|p| p.name().to_string()).collect();
            let nu = m.restrict(params.iter().map(String::as_str));
            let witness = match linrank::ranking::extract(&t, &d.space, &nu) {
                Ok(r) => r.render(&d.space),
                Err(e) => e.to_string(),
            };
            let confirmed = match fm_confirms(&d, &t, &nu) {
                Ok(()) => "confirmed by elimination".to_string(),
                Err(e) => format!("NOT confirmed: {e}"),
            };
            Err(format!("{name} + {kind}: Sat with {witness} ({confirmed})"))
        }
        other => Err(format!("{name} + {kind}: {other:?}")),
    }
}

/// Substitutes a concrete template assignment and asks the solver for the
/// multipliers alone.
fn completeness(d: &DnfProgram, kind: TemplateKind, nu: &Model) -> Check {
    let t = kind.build().map_err(|e| e.to_string())?;
    let c = generate_constraint(d, &t);
    let rest = substitute(&c, nu);
    let mut free = BTreeSet::new();
    rest.root.collect_vars(&mut free);
    if let Some(v) = free.iter().find(|v| !(v.starts_with("lam_") || v.starts_with("mu_"))) {
        return Err(format!("{kind}: parameter {v} left unbound"));
    }
    match run_solver(&solver_cmd(), &emit(&rest), TIMEOUT_MS) {
        SolverResult::Sat(m) if validate_model(&rest, &m) => Ok(()),
        SolverResult::Sat(_) => Err(format!("{kind}: multiplier model fails exact validation")),
        other => {
            let why = fm_confirms(d, &t, nu).err().unwrap_or_else(|| "elimination finds no escape".into());
            Err(format!("{kind}: multipliers-only constraint is {} ({why})", other.verdict()))
        }
    }
}

fn all(checks: impl IntoIterator<Item = Check>) -> Check {
    let errs: Vec<String> = checks.into_iter().filter_map(Result::err).collect();
    if errs.is_empty() {
        Ok(())
    } else {
        Err(errs.join("; "))
    }
}

fn criterion_1(l: &mut Ledger) -> Check {
    let d = dnf("fig1");
    let mut nu = Model::new();
    bind_affine(&mut nu, &d.space, "f_1", &[z(0), z(-1)], z(1));
    bind_affine(&mut nu, &d.space, "f_2", &[z(1), z(0)], z(1));
    nu.insert("delta_1", q(1, 2));
    nu.insert("delta_2", q(1, 2));
    all([l.expect_terminating("fig1", TemplateKind::Multiphase(2)), completeness(&d, TemplateKind::Multiphase(2), &nu)])
}

fn criterion_2(l: &mut Ledger) -> Check {
    let d = dnf("twobranch");
    let mut nu = Model::new();
    bind_affine(&mut nu, &d.space, "f", &[z(1), z(0)], z(1));
    nu.insert("delta", q(1, 2));
    all([l.expect_terminating("twobranch", TemplateKind::Pr), completeness(&d, TemplateKind::Pr, &nu)])
}

fn criterion_3(l: &mut Ledger) -> Check {
    let d = dnf("pieces");
    let mut nu = Model::new();
    bind_affine(&mut nu, &d.space, "f_1", &[z(1), z(0)], z(0));
    bind_affine(&mut nu, &d.space, "f_2", &[z(0), z(1)], z(0));
    bind_affine(&mut nu, &d.space, "g_1", &[z(-1), z(1)], z(0));
    bind_affine(&mut nu, &d.space, "g_2", &[z(1), z(-1)], z(0));
    nu.insert("delta", q(1, 2));
    let mut checks = vec![
        l.expect_terminating("pieces", TemplateKind::Piecewise(2)),
        completeness(&d, TemplateKind::Piecewise(2), &nu),
    ];
    for k in 1..=3 {
        checks.push(expect_unsat("pieces", TemplateKind::Multiphase(k)));
        checks.push(expect_unsat("pieces", TemplateKind::Lexicographic(k)));
    }
    all(checks)
}

fn criterion_4() -> Check {
    all((1..=3).map(|k| expect_unsat("rotation", TemplateKind::Multiphase(k))))
}

fn criterion_5(l: &mut Ledger) -> Check {
    let d = dnf("reset");
    let mut nu = Model::new();
    bind_affine(&mut nu, &d.space, "f_1", &[z(0), z(1)], z(0));
    bind_affine(&mut nu, &d.space, "f_2", &[z(1), z(0)], z(0));
    nu.insert("delta_1", q(1, 2));
    nu.insert("delta_2", q(1, 2));
    all([l.expect_terminating("reset", TemplateKind::Multiphase(2)), completeness(&d, TemplateKind::Multiphase(2), &nu)])
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut disagreements = Vec::new();
    let total = 120;
    for tag in 0..total {
        let (sys, ground) = random(&mut rng, tag);
        let fm = fourier_motzkin_feasible(&ground).map_err(|e| e.to_string())?;
        let cert = certificate_exists(&sys)?;
        if cert == fm {
            disagreements.push(tag);
        }
    }
    if disagreements.is_empty() {
        Ok(())
    } else {
        Err(format!("{} of {total} systems disagree: {disagreements:?}", disagreements.len()))
    }
}

fn criterion_7(l: &Ledger) -> Check {
    if l.proved.is_empty() {
        return Err("no Terminating outcomes to certify".into());
    }
    all(l.proved.iter().map(|(name, kind, r)| {
        let report = certify(r, &dnf(name), 10);
        if report.passed() {
            Ok(())
        } else {
            Err(format!("{name} + {kind}: {} violations of {}", report.violations.len(), report.pairs_checked))
        }
    }))
}

fn random_ordinal(rng: &mut ChaCha8Rng) -> OrdinalValue {
    let n = rng.gen_range(0..=4);
    let digits: std::collections::BTreeMap<u32, BigUint> =
        (0..n).map(|_| (rng.gen_range(0..6u32), BigUint::from(rng.gen_range(1u32..=3)))).collect();
    OrdinalValue::from_digits(digits)
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let (a, b) = (random_ordinal(&mut rng), random_ordinal(&mut rng));
        let ab = ordinal_cmp(&a, &b);
        if ab.reverse() != ordinal_cmp(&b, &a) || (ab == Ordering::Equal) != (a == b) {
            return Err(format!("antisymmetry/totality fails on {a} and {b}"));
        }
        let top = a.terms().iter().chain(b.terms()).map(|t| t.0).max().unwrap_or(0);
        let dense = |o: &OrdinalValue| (0..=top).rev().map(|e| o.coefficient(e)).collect::<Vec<_>>();
        if ab != dense(&a).cmp(&dense(&b)) {
            return Err(format!("{a} vs {b} disagrees with digit comparison"));
        }
    }
    for _ in 0..1000 {
        let (a, b, c) = (random_ordinal(&mut rng), random_ordinal(&mut rng), random_ordinal(&mut rng));
        if ordinal_cmp(&a, &b) != Ordering::Greater
            && ordinal_cmp(&b, &c) != Ordering::Greater
            && ordinal_cmp(&a, &c) == Ordering::Greater
        {
            return Err(format!("transitivity fails on {a}, {b}, {c}"));
        }
    }
    let verdict = |name: &str, kind: TemplateKind| {
        let c = generate_constraint(&dnf(name), &kind.build().unwrap());
        run_solver(&solver_cmd(), &emit(&c), TIMEOUT_MS).verdict()
    };
    for name in CORPUS {
        let pr = verdict(name, TemplateKind::Pr);
        for kind in [TemplateKind::Multiphase(1), TemplateKind::Lexicographic(1)] {
            let v = verdict(name, kind);
            if v != pr || !matches!(v, "sat" | "unsat") {
                return Err(format!("{name}: pr={pr} but {kind}={v}"));
            }
        }
    }
    Ok(())
}

fn main() {
    let mut ledger = Ledger { proved: Vec::new() };
    let results: Vec<(&str, Check)> = vec![
        ("1 fig1 + multiphase(2) terminates; given assignment completes", criterion_1(&mut ledger)),
        ("2 twobranch + pr terminates; given assignment completes", criterion_2(&mut ledger)),
        ("3 pieces + piecewise(2) terminates; multiphase/lex(1..3) unsat", criterion_3(&mut ledger)),
        ("4 rotation + multiphase(1..3) unsat", criterion_4()),
        ("5 reset + multiphase(2) terminates; given assignment completes", criterion_5(&mut ledger)),
        ("6 transposition vs elimination on random systems", criterion_6()),
        ("7 every terminating outcome certifies at bound 10", criterion_7(&ledger)),
        ("8 ordinal order laws; one-phase and one-component match pr", criterion_8()),
    ];
    let mut failed = 0;
    for (label, r) in &results {
        match r {
            Ok(()) => println!("PASS criterion {label}"),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {label}: {e}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
