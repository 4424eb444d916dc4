//! SMT-LIB 2 (QF_NRA) serialization and an external solver process driver.

mod sexp;

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::constraint::{Constraint, ExistsConstraint, Term};
use crate::model::Model;
use crate::rational::Rational;

pub use sexp::{parse_sexps, Sexp};

pub const SOLVER_ENV: &str = "LINRANK_SOLVER";
pub const DEFAULT_SOLVER_CMD: &str = "z3 -smt2 {file}";

/// The solver command from the environment, falling back to z3.
pub fn default_solver_cmd() -> String {
    std::env::var(SOLVER_ENV).unwrap_or_else(|_| DEFAULT_SOLVER_CMD.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryScript {
    pub text: String,
    pub var_order: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResult {
    Sat(Model),
    Unsat,
    Unknown(String),
    Timeout,
    ProcessError(String),
}

impl SolverResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            SolverResult::Sat(_) => "sat",
            SolverResult::Unsat => "unsat",
            SolverResult::Unknown(_) => "unknown",
            SolverResult::Timeout => "timeout",
            SolverResult::ProcessError(_) => "error",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("non-rational model value for `{0}`")]
    NonRational(String),
    #[error("malformed model: {0}")]
    Malformed(String),
}

fn render_rational(out: &mut String, r: &Rational) {
    let mag = r.abs();
    let body = if mag.is_integer() {
        mag.numer().to_string()
    } else {
        format!("(/ {} {})", mag.numer(), mag.denom())
    };
    if r.is_negative() {
        let _ = write!(out, "(- {body})");
    } else {
        out.push_str(&body);
    }
}

fn render_term(out: &mut String, t: &Term) {
    match t {
        Term::Const(c) => render_rational(out, c),
        Term::Var(v) => out.push_str(v),
        Term::Add(ps) => {
            out.push_str("(+");
            for p in ps {
                out.push(' ');
                render_term(out, p);
            }
            out.push(')');
        }
        Term::Mul(a, b) => {
            out.push_str("(* ");
            render_term(out, a);
            out.push(' ');
            render_term(out, b);
            out.push(')');
        }
    }
}

fn render_constraint(out: &mut String, c: &Constraint) {
    match c {
        Constraint::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Constraint::Cmp(a, op, b) => {
            let _ = write!(out, "({} ", op.smt_symbol());
            render_term(out, a);
            out.push(' ');
            render_term(out, b);
            out.push(')');
        }
        Constraint::And(ps) | Constraint::Or(ps) => {
            out.push_str(if matches!(c, Constraint::And(_)) { "(and" } else { "(or" });
            for p in ps {
                out.push(' ');
                render_constraint(out, p);
            }
            out.push(')');
        }
    }
}

/// Deterministic QF_NRA script: declarations in constraint order, one
/// assertion per top-level conjunct, then a model request.
pub fn emit(c: &ExistsConstraint) -> QueryScript {
    let mut text = String::new();
    text.push_str("(set-option :produce-models true)\n(set-logic QF_NRA)\n");
    for v in &c.vars {
        let _ = writeln!(text, "(declare-fun {v} () Real)");
    }
    let conjuncts: Vec<&Constraint> = match &c.root {
        Constraint::And(ps) => ps.iter().collect(),
        other => vec![other],
    };
    for p in conjuncts {
        text.push_str("(assert ");
        render_constraint(&mut text, p);
        text.push_str(")\n");
    }
    text.push_str("(check-sat)\n");
    if !c.vars.is_empty() {
        let _ = writeln!(text, "(get-value ({}))", c.vars.join(" "));
    }
    text.push_str("(exit)\n");
    QueryScript { text, var_order: c.vars.clone() }
}

/// Runs `cmd` on `q`. A `{file}` placeholder in the command is replaced by a
/// temporary file holding the script; otherwise the script goes to stdin.
pub fn run_solver(cmd: &str, q: &QueryScript, timeout_ms: u64) -> SolverResult {
    run_solver_cancellable(cmd, q, timeout_ms, None)
}

pub fn run_solver_cancellable(
    cmd: &str,
    q: &QueryScript,
    timeout_ms: u64,
    cancel: Option<&AtomicBool>,
) -> SolverResult {
    let mut words = cmd.split_whitespace();
    let Some(program) = words.next() else {
        return SolverResult::ProcessError("empty solver command".into());
    };
    let args: Vec<&str> = words.collect();
    let uses_file = args.iter().any(|a| a.contains("{file}"));
    let file = if uses_file {
        let mut f = match tempfile::Builder::new().prefix("linrank-").suffix(".smt2").tempfile() {
            Ok(f) => f,
            Err(e) => return SolverResult::ProcessError(format!("temp file: {e}")),
        };
        if let Err(e) = f.write_all(q.text.as_bytes()).and_then(|_| f.flush()) {
            return SolverResult::ProcessError(format!("temp file: {e}"));
        }
        Some(f)
    } else {
        None
    };
    let path = file.as_ref().map(|f| f.path().display().to_string()).unwrap_or_default();
    let mut command = Command::new(program);
    command
        .args(args.iter().map(|a| a.replace("{file}", &path)))
        .stdin(if uses_file { Stdio::null() } else { Stdio::piped() })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => return SolverResult::ProcessError(format!("cannot run `{program}`: {e}")),
    };
    let stdout = child.stdout.take().expect("piped stdout");
    let stderr = child.stderr.take().expect("piped stderr");
    let read_all = |mut r: Box<dyn Read + Send>| {
        std::thread::spawn(move || {
            let mut s = String::new();
            let _ = r.read_to_string(&mut s);
            s
        })
    };
    let out_reader = read_all(Box::new(stdout));
    let err_reader = read_all(Box::new(stderr));
    if let Some(mut stdin) = child.stdin.take() {
        let text = q.text.clone();
        std::thread::spawn(move || {
            let _ = stdin.write_all(text.as_bytes());
        });
    }

    let deadline = Instant::now() + Duration::from_millis(timeout_ms);
    let status = loop {
        let now = Instant::now();
        if now >= deadline || cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            let _ = child.kill();
            let _ = child.wait();
            let _ = out_reader.join();
            let _ = err_reader.join();
            return if now >= deadline {
                SolverResult::Timeout
            } else {
                SolverResult::Unknown("cancelled".into())
            };
        }
        let slice = (deadline - now).min(Duration::from_millis(20));
        match child.wait_timeout(slice) {
            Ok(Some(status)) => break status,
            Ok(None) => continue,
            Err(e) => return SolverResult::ProcessError(format!("wait: {e}")),
        }
    };
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    drop(file);
    interpret_output(&out, &err, status.success(), &q.var_order)
}

fn interpret_output(out: &str, err: &str, success: bool, var_order: &[String]) -> SolverResult {
    let first = out.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    match first {
        "sat" => {
            let rest = out.trim_start().strip_prefix("sat").unwrap_or("");
            match parse_model(rest) {
                Ok(m) => match var_order.iter().find(|v| !m.contains(v)) {
                    None => SolverResult::Sat(m.restrict(var_order.iter().map(String::as_str))),
                    Some(v) => SolverResult::Unknown(format!("model lacks a value for `{v}`")),
                },
                Err(ModelError::NonRational(v)) => {
                    SolverResult::Unknown(format!("non-rational model (`{v}`)"))
                }
                Err(e) => SolverResult::Unknown(e.to_string()),
            }
        }
        "unsat" => SolverResult::Unsat,
        "unknown" => SolverResult::Unknown(err.trim().to_string()),
        "timeout" => SolverResult::Timeout,
        other if !success && other.is_empty() => {
            SolverResult::ProcessError(format!("solver failed: {}", err.trim()))
        }
        other => SolverResult::Unknown(format!(
            "unexpected solver output `{other}`{}",
            if err.trim().is_empty() { String::new() } else { format!(": {}", err.trim()) }
        )),
    }
}

/// Reads a `get-value` or `get-model` response into exact rationals.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let exprs = parse_sexps(text).map_err(ModelError::Malformed)?;
    let mut model = Model::new();
    for e in &exprs {
        let Sexp::List(items) = e else { continue };
        let items: &[Sexp] = match items.first() {
            Some(Sexp::Atom(a)) if a == "model" => &items[1..],
            _ => items,
        };
        for item in items {
            let Sexp::List(parts) = item else {
                return Err(ModelError::Malformed(format!("unexpected `{item}`")));
            };
            match parts.as_slice() {
                [Sexp::Atom(name), value] => {
                    model.insert(name.clone(), value_of(name, value)?);
                }
                [Sexp::Atom(kw), Sexp::Atom(name), Sexp::List(args), _sort, value]
                    if kw == "define-fun" && args.is_empty() =>
                {
                    model.insert(name.clone(), value_of(name, value)?);
                }
                [Sexp::Atom(kw), ..] if kw == "error" => {
                    return Err(ModelError::Malformed(item.to_string()));
                }
                _ => return Err(ModelError::Malformed(format!("unexpected `{item}`"))),
            }
        }
    }
    Ok(model)
}

fn value_of(name: &str, v: &Sexp) -> Result<Rational, ModelError> {
    let bad = || ModelError::Malformed(format!("value of `{name}`: {v}"));
    match v {
        Sexp::Atom(a) => parse_decimal(a).ok_or_else(bad),
        Sexp::List(items) => {
            let Some(Sexp::Atom(head)) = items.first() else { return Err(bad()) };
            let args = items[1..]
                .iter()
                .map(|a| value_of(name, a))
                .collect::<Result<Vec<_>, _>>();
            match (head.as_str(), items.len()) {
                ("-", 2) => Ok(-args?.remove(0)),
                ("-", n) if n > 2 => {
                    let args = args?;
                    Ok(args[1..].iter().fold(args[0].clone(), |acc, x| acc - x))
                }
                ("+", n) if n >= 2 => Ok(args?.into_iter().sum()),
                ("*", n) if n >= 2 => Ok(args?.into_iter().product()),
                ("/", 3) => {
                    let args = args?;
                    if args[1].is_zero() {
                        return Err(bad());
                    }
                    Ok(&args[0] / &args[1])
                }
                ("root-obj", _) | ("root-object", _) | ("algebraic", _) => {
                    Err(ModelError::NonRational(name.to_string()))
                }
                _ => Err(bad()),
            }
        }
    }
}

/// `12`, `-3`, `1.25` as exact rationals.
fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let numer: num_bigint::BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = num_bigint::BigInt::from(10u32).pow(frac_part.len() as u32);
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

/// Constant-folds the variables bound by `partial`.
pub fn substitute(c: &ExistsConstraint, partial: &Model) -> ExistsConstraint {
    c.substitute(partial)
}

/// Exact validation of a solver model against the constraint it came from.
pub fn validate_model(c: &ExistsConstraint, m: &Model) -> bool {
    substitute(c, m).root == Constraint::Bool(true)
}
