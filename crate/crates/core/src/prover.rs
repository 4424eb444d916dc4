//! The synthesis loop: try each template of the pool in order, solve the
//! transformed constraint, read back a ranking function and certify it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::loop_ir::{DnfProgram, LoopProgram};
use crate::model::Model;
use crate::motzkin::generate_constraint;
use crate::rational::fmt_ratio;
use crate::ranking::{certify, extract, CertReport, RankingFunction};
use crate::solver::{default_solver_cmd, emit, run_solver_cancellable, validate_model, SolverResult};
use crate::template::{parse_pool, TemplateError, TemplateKind, DEFAULT_POOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Human,
    Machine,
}

#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub templates: Vec<TemplateKind>,
    pub solver_cmd: String,
    pub timeout_ms: u64,
    /// 0 disables certification.
    pub grid_bound: u32,
    pub emit_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub parallel: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        Self {
            templates: parse_pool(DEFAULT_POOL).expect("default pool parses"),
            solver_cmd: default_solver_cmd(),
            timeout_ms: 60_000,
            grid_bound: 10,
            emit_dir: None,
            format: OutputFormat::Human,
            parallel: false,
        }
    }
}

impl ProverConfig {
    pub fn with_templates(mut self, list: &str) -> Result<Self, TemplateError> {
        self.templates = parse_pool(list)?;
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct TemplateAttempt {
    pub template: TemplateKind,
    pub verdict: String,
    pub detail: Option<String>,
    pub elapsed: Duration,
}

impl TemplateAttempt {
    /// The solver run itself failed, as opposed to answering.
    pub fn is_failure(&self) -> bool {
        matches!(self.verdict.as_str(), "error" | "invalid-model")
    }
}

#[derive(Debug, Clone)]
pub enum ProveStatus {
    Terminating {
        template: TemplateKind,
        function: Box<RankingFunction>,
        assignment: Model,
        certification: Option<CertReport>,
    },
    Unknown,
    InputError(String),
    SolverError(String),
}

#[derive(Debug, Clone)]
pub struct ProveOutcome {
    pub program: String,
    pub status: ProveStatus,
    pub per_template: Vec<TemplateAttempt>,
    /// Set when the program parsed, for rendering.
    pub source: Option<LoopProgram>,
}

impl ProveOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            ProveStatus::Terminating { .. } => 0,
            ProveStatus::Unknown => 1,
            ProveStatus::InputError(_) => 2,
            ProveStatus::SolverError(_) => 3,
        }
    }

    pub fn is_terminating(&self) -> bool {
        matches!(self.status, ProveStatus::Terminating { .. })
    }

    pub fn verdicts(&self) -> Vec<(TemplateKind, String)> {
        self.per_template.iter().map(|a| (a.template, a.verdict.clone())).collect()
    }
}

fn program_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "program".into())
}

/// Reads, parses and proves the program in `file`.
pub fn prove(file: &Path, cfg: &ProverConfig) -> ProveOutcome {
    let name = program_name(file);
    let input_error = |msg: String| ProveOutcome {
        program: name.clone(),
        status: ProveStatus::InputError(msg),
        per_template: Vec::new(),
        source: None,
    };
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return input_error(format!("{}: {e}", file.display())),
    };
    let program = match LoopProgram::parse(&text) {
        Ok(p) => p,
        Err(e) => return input_error(format!("{}:{e}", file.display())),
    };
    prove_program(&name, &program, cfg)
}

pub fn prove_program(name: &str, program: &LoopProgram, cfg: &ProverConfig) -> ProveOutcome {
    let mut outcome = ProveOutcome {
        program: name.to_string(),
        status: ProveStatus::Unknown,
        per_template: Vec::new(),
        source: Some(program.clone()),
    };
    let dnf = match program.to_dnf() {
        Ok(d) => d,
        Err(e) => {
            outcome.status = ProveStatus::InputError(e.to_string());
            return outcome;
        }
    };

    let winner = if cfg.parallel {
        run_parallel(name, &dnf, cfg, &mut outcome.per_template)
    } else {
        let mut found = None;
        for (i, kind) in cfg.templates.iter().enumerate() {
            let (attempt, result) = attempt(name, i, *kind, &dnf, cfg, None);
            outcome.per_template.push(attempt);
            if let Some(r) = result {
                found = Some((*kind, r));
                break;
            }
        }
        found
    };

    outcome.status = match winner {
        Some((template, (function, assignment))) => {
            let certification = (cfg.grid_bound > 0).then(|| certify(&function, &dnf, cfg.grid_bound));
            match &certification {
                Some(report) if !report.passed() => {
                    let v = &report.violations[0];
                    ProveStatus::SolverError(format!(
                        "certificate from {template} failed on {} of {} grid pairs; first at {:?} -> {:?}: {}",
                        report.violations.len(),
                        report.pairs_checked,
                        v.state.iter().map(fmt_ratio).collect::<Vec<_>>(),
                        v.next.iter().map(fmt_ratio).collect::<Vec<_>>(),
                        v.reason
                    ))
                }
                _ => ProveStatus::Terminating { template, function: Box::new(function), assignment, certification },
            }
        }
        None if !outcome.per_template.is_empty()
            && outcome.per_template.iter().all(|a| a.is_failure()) =>
        {
            let details: Vec<String> =
                outcome.per_template.iter().filter_map(|a| a.detail.clone()).collect();
            ProveStatus::SolverError(format!("every solver run failed: {}", details.join("; ")))
        }
        None => ProveStatus::Unknown,
    };
    outcome
}

type Found = (RankingFunction, Model);

fn run_parallel(
    name: &str,
    dnf: &DnfProgram,
    cfg: &ProverConfig,
    attempts: &mut Vec<TemplateAttempt>,
) -> Option<(TemplateKind, Found)> {
    let n = cfg.templates.len();
    let cancel: Vec<AtomicBool> = (0..n).map(|_| AtomicBool::new(false)).collect();
    let results: Vec<(TemplateAttempt, Option<Found>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .templates
            .iter()
            .enumerate()
            .map(|(i, kind)| {
                let cancel = &cancel;
                scope.spawn(move || {
                    let r = attempt(name, i, *kind, dnf, cfg, Some(&cancel[i]));
                    if r.1.is_some() {
                        // later pool entries can no longer win
                        cancel[i + 1..].iter().for_each(|c| c.store(true, Ordering::Relaxed));
                    }
                    r
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("prover worker panicked")).collect()
    });
    let mut winner = None;
    for (i, (a, found)) in results.into_iter().enumerate() {
        attempts.push(a);
        if winner.is_none() {
            if let Some(f) = found {
                winner = Some((cfg.templates[i], f));
            }
        }
    }
    winner
}

fn attempt(
    name: &str,
    index: usize,
    kind: TemplateKind,
    dnf: &DnfProgram,
    cfg: &ProverConfig,
    cancel: Option<&AtomicBool>,
) -> (TemplateAttempt, Option<Found>) {
    let start = Instant::now();
    let done = |verdict: &str, detail: Option<String>| TemplateAttempt {
        template: kind,
        verdict: verdict.to_string(),
        detail,
        elapsed: start.elapsed(),
    };
    let template = match kind.build() {
        Ok(t) => t,
        Err(e) => return (done("error", Some(e.to_string())), None),
    };
    let constraint = generate_constraint(dnf, &template);
    let script = emit(&constraint);
    if let Some(dir) = &cfg.emit_dir {
        let file = dir.join(format!("{name}_{}_{index}.smt2", kind.to_string().replace(':', "-")));
        if let Err(e) = std::fs::create_dir_all(dir).and_then(|_| std::fs::write(&file, &script.text)) {
            return (done("error", Some(format!("cannot write {}: {e}", file.display()))), None);
        }
    }
    match run_solver_cancellable(&cfg.solver_cmd, &script, cfg.timeout_ms, cancel) {
        SolverResult::Sat(model) => {
            if !validate_model(&constraint, &model) {
                return (done("invalid-model", Some("solver model violates the constraint".into())), None);
            }
            let params: Vec<String> =
                template.all_params(&dnf.space).iter().map(|p| p.name().to_string()).collect();
            let assignment = model.restrict(params.iter().map(String::as_str));
            match extract(&template, &dnf.space, &assignment) {
                Ok(f) => (done("sat", None), Some((f, assignment))),
                Err(e) => (done("invalid-model", Some(e.to_string())), None),
            }
        }
        SolverResult::Unsat => (done("unsat", None), None),
        SolverResult::Unknown(why) => (done("unknown", Some(why)), None),
        SolverResult::Timeout => (done("timeout", None), None),
        SolverResult::ProcessError(why) => (done("error", Some(why)), None),
    }
}

pub fn render_human(o: &ProveOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "program: {}", o.program);
    for a in &o.per_template {
        let _ = write!(s, "  {:<14} {:<13} {:>8.3}s", a.template.to_string(), a.verdict, a.elapsed.as_secs_f64());
        if let Some(d) = &a.detail {
            let _ = write!(s, "  ({d})");
        }
        s.push('\n');
    }
    match &o.status {
        ProveStatus::Terminating { template, function, certification, .. } => {
            let _ = writeln!(s, "result: TERMINATING (template {template})");
            if let Some(p) = &o.source {
                let _ = writeln!(s, "  {}", function.render(&p.space));
            }
            if let Some(c) = certification {
                let _ = writeln!(s, "  certified: rank decreases on all {} grid pairs", c.pairs_checked);
            }
        }
        ProveStatus::Unknown => {
            let _ = writeln!(
                s,
                "result: UNKNOWN (no ranking function of the tried shapes; this is not a nontermination verdict)"
            );
        }
        ProveStatus::InputError(e) => {
            let _ = writeln!(s, "result: INPUT ERROR: {e}");
        }
        ProveStatus::SolverError(e) => {
            let _ = writeln!(s, "result: SOLVER ERROR: {e}");
        }
    }
    s
}

pub fn render_machine(o: &ProveOutcome, grid_bound: u32) -> Value {
    let templates: Vec<Value> = o
        .per_template
        .iter()
        .map(|a| {
            json!({
                "template": a.template.to_string(),
                "verdict": a.verdict,
                "detail": a.detail,
                "millis": a.elapsed.as_millis() as u64,
            })
        })
        .collect();
    let mut doc = json!({
        "program": o.program,
        "templates": templates,
    });
    let status = match &o.status {
        ProveStatus::Terminating { template, function, assignment, certification } => {
            doc["template"] = json!(template.to_string());
            doc["assignment"] =
                Value::Object(assignment.iter().map(|(k, v)| (k.clone(), json!(fmt_ratio(v)))).collect());
            if let Some(p) = &o.source {
                doc["ranking_function"] = json!(function.render(&p.space));
            }
            doc["certification"] = match certification {
                Some(c) => json!({
                    "bound": grid_bound,
                    "pairs_checked": c.pairs_checked,
                    "violations": c.violations.len(),
                }),
                None => Value::Null,
            };
            "terminating"
        }
        ProveStatus::Unknown => "unknown",
        ProveStatus::InputError(e) => {
            doc["error"] = json!(e);
            "input-error"
        }
        ProveStatus::SolverError(e) => {
            doc["error"] = json!(e);
            "solver-error"
        }
    };
    doc["status"] = json!(status);
    doc
}
