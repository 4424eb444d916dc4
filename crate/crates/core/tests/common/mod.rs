#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;
use std::sync::OnceLock;

use linrank::loop_ir::{to_dnf, to_nnf, AffineExpr, DnfProgram, Formula, LoopProgram, Polyhedron, StateSpace, VarRef};
use linrank::oracle::{fourier_motzkin_feasible, GroundRow, GroundSystem};
use linrank::template::RankingTemplate;
use linrank::{Model, Rational};

pub const TIMEOUT_MS: u64 = 120_000;

/// `$LINRANK_SOLVER`, else cvc5 through the bundled wrapper when its Python
/// bindings are importable, else the built-in default.
pub fn solver_cmd() -> String {
    static CMD: OnceLock<String> = OnceLock::new();
    CMD.get_or_init(|| {
        if let Ok(cmd) = std::env::var(linrank::solver::SOLVER_ENV) {
            return cmd;
        }
        let has_cvc5 = Command::new("python3")
            .args(["-c", "import cvc5"])
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false);
        if has_cvc5 {
            let script = repo_root().join("tools/cvc5_smt2.py");
            format!("python3 {} {{file}}", script.display())
        } else {
            linrank::solver::DEFAULT_SOLVER_CMD.to_string()
        }
    })
    .clone()
}

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub const CORPUS: [&str; 5] = ["fig1", "twobranch", "rotation", "reset", "pieces"];

pub fn corpus_path(name: &str) -> PathBuf {
    repo_root().join("corpus").join(format!("{name}.llp"))
}

pub fn load(name: &str) -> LoopProgram {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    LoopProgram::parse(&text).expect("corpus parses")
}

pub fn dnf(name: &str) -> DnfProgram {
    load(name).to_dnf().expect("dnf")
}

pub fn q(n: i64, d: i64) -> Rational {
    linrank::rational::ratio(n, d)
}

pub fn z(n: i64) -> Rational {
    linrank::rational::int(n)
}

/// Binds the components of symbol `sym`: one coefficient per variable, then the constant.
pub fn bind_affine(m: &mut Model, space: &StateSpace, sym: &str, coeffs: &[Rational], constant: Rational) {
    assert_eq!(coeffs.len(), space.dim());
    for (name, c) in space.names().iter().zip(coeffs) {
        m.insert(format!("s_{sym}_{name}"), c.clone());
    }
    m.insert(format!("t_{sym}"), constant);
}

fn ground_row(e: &AffineExpr, n: usize, strict: bool) -> GroundRow {
    let mut coeffs = vec![Rational::from_integer(0.into()); 2 * n];
    for (v, c) in e.coeffs() {
        let col = if v.primed { n + v.index } else { v.index };
        coeffs[col] = c.clone();
    }
    GroundRow::new(coeffs, -e.constant_term().clone(), strict)
}

pub fn ground_system(n: usize, polys: &[&Polyhedron]) -> GroundSystem {
    let mut rows = Vec::new();
    for p in polys {
        rows.extend(p.nonstrict.iter().map(|e| ground_row(e, n, false)));
        rows.extend(p.strict.iter().map(|e| ground_row(e, n, true)));
    }
    GroundSystem::new(2 * n, rows)
}

/// Independent check that `T ⊆ ν(T_template)`: every disjunct conjoined with
/// the negation of every instantiated clause must be empty, decided by
/// Fourier-Motzkin elimination.
pub fn fm_confirms(d: &DnfProgram, t: &RankingTemplate, nu: &Model) -> Result<(), String> {
    let n = d.space.dim();
    for (j, clause) in t.clauses.iter().enumerate() {
        let lits: Vec<Formula> =
            clause.literals().iter().map(|a| a.instantiate(&d.space, nu).expect("bound")).collect();
        let neg = to_dnf(&d.space, &to_nnf(&Formula::Not(Box::new(Formula::Or(lits))))).expect("dnf");
        for (i, p) in d.disjuncts.iter().enumerate() {
            for piece in &neg.disjuncts {
                let sys = ground_system(n, &[p, piece]);
                if fourier_motzkin_feasible(&sys).expect("small system") {
                    return Err(format!("disjunct {i} escapes clause {j}"));
                }
            }
        }
    }
    Ok(())
}

pub fn pre(i: usize) -> VarRef {
    VarRef::pre(i)
}

pub fn post(i: usize) -> VarRef {
    VarRef::post(i)
}

pub mod systems {
    use std::collections::BTreeMap;

    use linrank::constraint::ExistsConstraint;
    use linrank::loop_ir::VarRef;
    use linrank::motzkin::{apply_motzkin, MotzkinRow, MotzkinSystem, ParamLin};
    use linrank::oracle::{GroundRow, GroundSystem};
    use linrank::solver::{emit, run_solver, SolverResult};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    use super::{solver_cmd, z, TIMEOUT_MS};

    /// A random parameter-free system over `(x; x')` with `vars` pre-state
    /// columns in use; coefficients and constants are drawn from [-3, 3].
    pub fn random(rng: &mut ChaCha8Rng, tag: usize) -> (MotzkinSystem, GroundSystem) {
        let vars = rng.gen_range(1..=3);
        let nrows = rng.gen_range(1..=5);
        let mut rows = Vec::new();
        let mut ground = Vec::new();
        for _ in 0..nrows {
            let coeffs: Vec<i64> = (0..vars).map(|_| rng.gen_range(-3..=3)).collect();
            let constant = rng.gen_range(-3..=3);
            let strict = rng.gen_bool(0.5);
            rows.push(row(&coeffs, constant, strict));
            ground.push(GroundRow::new(coeffs.iter().map(|&c| z(c)).collect(), z(constant), strict));
        }
        let sys = MotzkinSystem { dim: vars, rows, origin_disjunct: tag, origin_clause: 0 };
        (sys, GroundSystem::new(vars, ground))
    }

    pub fn row(coeffs: &[i64], constant: i64, strict: bool) -> MotzkinRow {
        let coeffs: BTreeMap<VarRef, ParamLin> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (VarRef::pre(i), ParamLin::constant(z(c))))
            .collect();
        MotzkinRow { coeffs, constant: ParamLin::constant(z(constant)), strict }
    }

    /// Whether the transposition certificate of `s` exists, according to the solver.
    pub fn certificate_exists(s: &MotzkinSystem) -> Result<bool, String> {
        let c = ExistsConstraint::new(apply_motzkin(s), s.multiplier_names());
        match run_solver(&solver_cmd(), &emit(&c), TIMEOUT_MS) {
            SolverResult::Sat(m) => {
                if !linrank::solver::validate_model(&c, &m) {
                    return Err("model fails exact validation".into());
                }
                Ok(true)
            }
            SolverResult::Unsat => Ok(false),
            other => Err(format!("solver: {other:?}")),
        }
    }
}
