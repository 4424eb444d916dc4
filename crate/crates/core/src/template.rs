//! Linear ranking templates in conjunctive normal form.
//!
//! Every atom has the shape `Σ (α_f·f(x) + β_f·f(x')) + Σ γ_d·d ▷ 0` with
//! `▷ ∈ {≥, >}`, where each affine-linear symbol `f` stands for `s_fᵀx + t_f`.
//! Each template also records how to read a ranking function back out of a
//! satisfying assignment.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use thiserror::Error;

use crate::loop_ir::{AffineExpr, AtomRel, Formula, StateSpace, VarRef, DEFAULT_DNF_CAP};
use crate::model::Model;
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template size must be at least 1")]
    ZeroSize,
    #[error("template would have {clauses} clauses, more than the cap of {cap}")]
    TooLarge { clauses: usize, cap: usize },
    #[error("invalid template specifier `{0}`")]
    BadSpec(String),
    #[error("assignment has no value for `{0}`")]
    MissingAssignment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Parameter(String);

impl Parameter {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Stands for `s_fᵀx + t_f`; the component parameters are named after the
/// program variables once a state space is known.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineSymbol(String);

impl AffineSymbol {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn coeff_param(&self, space: &StateSpace, index: usize) -> Parameter {
        Parameter(format!("s_{}_{}", self.0, space.names()[index]))
    }

    pub fn const_param(&self) -> Parameter {
        Parameter(format!("t_{}", self.0))
    }

    /// `s_f` entries in state-space order, then `t_f`.
    pub fn params(&self, space: &StateSpace) -> Vec<Parameter> {
        (0..space.dim())
            .map(|i| self.coeff_param(space, i))
            .chain(std::iter::once(self.const_param()))
            .collect()
    }
}

impl fmt::Display for AffineSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateRel {
    Ge,
    Gt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateAtom {
    /// `f ↦ (α_f, β_f)`, coefficients of `f(x)` and `f(x')`.
    pub fun_coeffs: BTreeMap<AffineSymbol, (Rational, Rational)>,
    pub par_coeffs: BTreeMap<Parameter, Rational>,
    pub rel: TemplateRel,
}

impl TemplateAtom {
    fn build(
        funs: &[(&AffineSymbol, i64, i64)],
        pars: &[(&Parameter, i64)],
        rel: TemplateRel,
    ) -> Self {
        let mut fun_coeffs: BTreeMap<AffineSymbol, (Rational, Rational)> = BTreeMap::new();
        for (f, a, b) in funs {
            let e = fun_coeffs.entry((*f).clone()).or_insert((Rational::zero(), Rational::zero()));
            e.0 += Rational::from_integer((*a).into());
            e.1 += Rational::from_integer((*b).into());
        }
        fun_coeffs.retain(|_, (a, b)| !(a.is_zero() && b.is_zero()));
        let mut par_coeffs: BTreeMap<Parameter, Rational> = BTreeMap::new();
        for (d, g) in pars {
            *par_coeffs.entry((*d).clone()).or_insert_with(Rational::zero) +=
                Rational::from_integer((*g).into());
        }
        par_coeffs.retain(|_, g| !g.is_zero());
        let atom = Self { fun_coeffs, par_coeffs, rel };
        debug_assert!(!atom.fun_coeffs.is_empty() || !atom.par_coeffs.is_empty());
        atom
    }

    /// True when no symbol occurs with a nonzero coefficient.
    pub fn is_state_free(&self) -> bool {
        self.fun_coeffs.is_empty()
    }

    /// `d > 0`
    pub fn positive_param(d: &Parameter) -> Self {
        Self::build(&[], &[(d, 1)], TemplateRel::Gt)
    }

    /// `f(x) > 0`
    pub fn positive(f: &AffineSymbol) -> Self {
        Self::build(&[(f, 1, 0)], &[], TemplateRel::Gt)
    }

    /// `f(x) ≥ 0`
    pub fn nonnegative(f: &AffineSymbol) -> Self {
        Self::build(&[(f, 1, 0)], &[], TemplateRel::Ge)
    }

    /// `f(x) < 0`, written `-f(x) > 0`
    pub fn negative(f: &AffineSymbol) -> Self {
        Self::build(&[(f, -1, 0)], &[], TemplateRel::Gt)
    }

    /// `f(x') < 0`, written `-f(x') > 0`
    pub fn negative_post(f: &AffineSymbol) -> Self {
        Self::build(&[(f, 0, -1)], &[], TemplateRel::Gt)
    }

    /// `g(x') < f(x) - d`, written `f(x) - g(x') - d > 0`
    pub fn decrease_to(f: &AffineSymbol, g: &AffineSymbol, d: &Parameter) -> Self {
        Self::build(&[(f, 1, 0), (g, 0, -1)], &[(d, -1)], TemplateRel::Gt)
    }

    /// `f(x') < f(x) - d`
    pub fn decrease(f: &AffineSymbol, d: &Parameter) -> Self {
        Self::decrease_to(f, f, d)
    }

    /// `f(x') ≤ f(x)`
    pub fn nonincrease(f: &AffineSymbol) -> Self {
        Self::build(&[(f, 1, -1)], &[], TemplateRel::Ge)
    }

    fn mentions(&self, f: &AffineSymbol) -> bool {
        self.fun_coeffs.contains_key(f)
    }

    /// The atom with all parameters replaced by values from `nu`.
    pub fn instantiate(&self, space: &StateSpace, nu: &Model) -> Result<Formula, TemplateError> {
        let mut e = AffineExpr::zero();
        for (f, (alpha, beta)) in &self.fun_coeffs {
            let value = |p: &Parameter| {
                nu.get(p.name()).cloned().ok_or_else(|| TemplateError::MissingAssignment(p.0.clone()))
            };
            let t = value(&f.const_param())?;
            for i in 0..space.dim() {
                let s = value(&f.coeff_param(space, i))?;
                e.add_term(VarRef::pre(i), alpha * &s);
                e.add_term(VarRef::post(i), beta * &s);
            }
            e.add_constant(&((alpha + beta) * t));
        }
        for (d, gamma) in &self.par_coeffs {
            let v = nu
                .get(d.name())
                .ok_or_else(|| TemplateError::MissingAssignment(d.0.clone()))?;
            e.add_constant(&(gamma * v));
        }
        let rel = match self.rel {
            TemplateRel::Ge => AtomRel::Ge,
            TemplateRel::Gt => AtomRel::Gt,
        };
        Ok(if e.is_constant() {
            Formula::Const(rel.holds(e.constant_term()))
        } else {
            Formula::Atom(e, rel)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateClause {
    literals: Vec<TemplateAtom>,
    state_free: bool,
}

impl TemplateClause {
    pub fn new(literals: Vec<TemplateAtom>) -> Self {
        assert!(!literals.is_empty(), "template clauses are nonempty");
        let state_free = literals.iter().all(TemplateAtom::is_state_free);
        Self { literals, state_free }
    }

    pub fn literals(&self) -> &[TemplateAtom] {
        &self.literals
    }

    pub fn is_state_free(&self) -> bool {
        self.state_free
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    Pr,
    Multiphase(usize),
    Piecewise(usize),
    Lexicographic(usize),
    MultiphaseLex(usize, usize),
}

impl TemplateKind {
    pub fn build(self) -> Result<RankingTemplate, TemplateError> {
        match self {
            TemplateKind::Pr => Ok(pr_template()),
            TemplateKind::Multiphase(k) => multiphase(k),
            TemplateKind::Piecewise(k) => piecewise(k),
            TemplateKind::Lexicographic(k) => lexicographic(k),
            TemplateKind::MultiphaseLex(k, l) => multiphase_lex(k, l),
        }
    }

    pub fn describe(self) -> String {
        match self {
            TemplateKind::Pr => "linear".into(),
            TemplateKind::Multiphase(k) => format!("{k}-phase"),
            TemplateKind::Piecewise(k) => format!("{k}-piece"),
            TemplateKind::Lexicographic(k) => format!("{k}-lexicographic"),
            TemplateKind::MultiphaseLex(k, l) => format!("{k}-lexicographic {l}-phase"),
        }
    }
}

/// Specifier syntax: `pr`, `phase:K`, `piece:K`, `lex:K`, `phaselex:KxL`.
impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateKind::Pr => write!(f, "pr"),
            TemplateKind::Multiphase(k) => write!(f, "phase:{k}"),
            TemplateKind::Piecewise(k) => write!(f, "piece:{k}"),
            TemplateKind::Lexicographic(k) => write!(f, "lex:{k}"),
            TemplateKind::MultiphaseLex(k, l) => write!(f, "phaselex:{k}x{l}"),
        }
    }
}

impl FromStr for TemplateKind {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut kinds = parse_spec(s)?;
        if kinds.len() == 1 {
            Ok(kinds.pop().unwrap())
        } else {
            Err(TemplateError::BadSpec(s.to_string()))
        }
    }
}

/// Expands one specifier, including ranges such as `phase:2..4`.
pub fn parse_spec(spec: &str) -> Result<Vec<TemplateKind>, TemplateError> {
    let bad = || TemplateError::BadSpec(spec.to_string());
    let spec = spec.trim();
    if spec == "pr" {
        return Ok(vec![TemplateKind::Pr]);
    }
    let (name, arg) = spec.split_once(':').ok_or_else(bad)?;
    let size = |s: &str| -> Result<usize, TemplateError> {
        let k: usize = s.trim().parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(TemplateError::ZeroSize);
        }
        Ok(k)
    };
    let range = |s: &str| -> Result<Vec<usize>, TemplateError> {
        match s.split_once("..") {
            Some((lo, hi)) => {
                let (lo, hi) = (size(lo)?, size(hi)?);
                if lo > hi {
                    return Err(bad());
                }
                Ok((lo..=hi).collect())
            }
            None => Ok(vec![size(s)?]),
        }
    };
    let kinds = match name {
        "phase" => range(arg)?.into_iter().map(TemplateKind::Multiphase).collect(),
        "piece" => range(arg)?.into_iter().map(TemplateKind::Piecewise).collect(),
        "lex" => range(arg)?.into_iter().map(TemplateKind::Lexicographic).collect(),
        "phaselex" => {
            let (k, l) = arg.split_once('x').ok_or_else(bad)?;
            vec![TemplateKind::MultiphaseLex(size(k)?, size(l)?)]
        }
        _ => return Err(bad()),
    };
    Ok(kinds)
}

/// Parses a comma-separated pool of specifiers, preserving order.
pub fn parse_pool(list: &str) -> Result<Vec<TemplateKind>, TemplateError> {
    let mut out = Vec::new();
    for item in list.split(',').filter(|s| !s.trim().is_empty()) {
        out.extend(parse_spec(item)?);
    }
    if out.is_empty() {
        return Err(TemplateError::BadSpec(list.to_string()));
    }
    Ok(out)
}

pub const DEFAULT_POOL: &str = "pr,phase:2,phase:3,piece:2,lex:2,lex:3,phaselex:2x2";

/// Which symbols and parameters make up the ranking function of each kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extraction {
    Pr { f: AffineSymbol, delta: Parameter },
    Multiphase { fs: Vec<AffineSymbol>, deltas: Vec<Parameter> },
    Piecewise { fs: Vec<AffineSymbol>, gs: Vec<AffineSymbol>, delta: Parameter },
    Lexicographic { fs: Vec<AffineSymbol>, deltas: Vec<Parameter> },
    MultiphaseLex { fs: Vec<Vec<AffineSymbol>>, deltas: Vec<Vec<Parameter>> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingTemplate {
    pub kind: TemplateKind,
    pub params: Vec<Parameter>,
    pub funs: Vec<AffineSymbol>,
    pub clauses: Vec<TemplateClause>,
    pub extraction: Extraction,
}

impl RankingTemplate {
    /// Parameters `D` followed by every symbol component, in declaration order.
    pub fn all_params(&self, space: &StateSpace) -> Vec<Parameter> {
        let mut out = self.params.clone();
        for f in &self.funs {
            out.extend(f.params(space));
        }
        out
    }

    /// The relation `ν(T)` as a loop formula over `x` and `x'`.
    pub fn instantiate(&self, space: &StateSpace, nu: &Model) -> Result<Formula, TemplateError> {
        let mut conj = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            let mut lits = c
                .literals()
                .iter()
                .map(|a| a.instantiate(space, nu))
                .collect::<Result<Vec<_>, _>>()?;
            conj.push(if lits.len() == 1 { lits.pop().unwrap() } else { Formula::Or(lits) });
        }
        Ok(Formula::And(conj))
    }

    /// True when a clause mentions `f` in any literal.
    pub fn clause_mentions(&self, clause: usize, f: &AffineSymbol) -> bool {
        self.clauses[clause].literals().iter().any(|a| a.mentions(f))
    }
}

fn deltas(prefix: &str, k: usize) -> Vec<Parameter> {
    (1..=k).map(|i| Parameter(format!("{prefix}_{i}"))).collect()
}

fn symbols(prefix: &str, k: usize) -> Vec<AffineSymbol> {
    (1..=k).map(|i| AffineSymbol(format!("{prefix}_{i}"))).collect()
}

fn single(a: TemplateAtom) -> TemplateClause {
    TemplateClause::new(vec![a])
}

/// `δ > 0 ∧ f(x) > 0 ∧ f(x') < f(x) - δ`
pub fn pr_template() -> RankingTemplate {
    let f = AffineSymbol::new("f");
    let delta = Parameter::new("delta");
    RankingTemplate {
        kind: TemplateKind::Pr,
        clauses: vec![
            single(TemplateAtom::positive_param(&delta)),
            single(TemplateAtom::positive(&f)),
            single(TemplateAtom::decrease(&f, &delta)),
        ],
        params: vec![delta.clone()],
        funs: vec![f.clone()],
        extraction: Extraction::Pr { f, delta },
    }
}

pub fn multiphase(k: usize) -> Result<RankingTemplate, TemplateError> {
    if k == 0 {
        return Err(TemplateError::ZeroSize);
    }
    let ds = deltas("delta", k);
    let fs = symbols("f", k);
    let mut clauses: Vec<TemplateClause> =
        ds.iter().map(|d| single(TemplateAtom::positive_param(d))).collect();
    clauses.push(TemplateClause::new(fs.iter().map(TemplateAtom::positive).collect()));
    clauses.push(single(TemplateAtom::decrease(&fs[0], &ds[0])));
    for i in 1..k {
        clauses.push(TemplateClause::new(vec![
            TemplateAtom::decrease(&fs[i], &ds[i]),
            TemplateAtom::positive(&fs[i - 1]),
        ]));
    }
    Ok(RankingTemplate {
        kind: TemplateKind::Multiphase(k),
        params: ds.clone(),
        funs: fs.clone(),
        clauses,
        extraction: Extraction::Multiphase { fs, deltas: ds },
    })
}

pub fn piecewise(k: usize) -> Result<RankingTemplate, TemplateError> {
    if k == 0 {
        return Err(TemplateError::ZeroSize);
    }
    let delta = Parameter::new("delta");
    let fs = symbols("f", k);
    let gs = symbols("g", k);
    let mut clauses = vec![single(TemplateAtom::positive_param(&delta))];
    for i in 0..k {
        for j in 0..k {
            clauses.push(TemplateClause::new(vec![
                TemplateAtom::negative(&gs[i]),
                TemplateAtom::negative_post(&gs[j]),
                TemplateAtom::decrease_to(&fs[i], &fs[j], &delta),
            ]));
        }
    }
    clauses.extend(fs.iter().map(|f| single(TemplateAtom::positive(f))));
    clauses.push(TemplateClause::new(gs.iter().map(TemplateAtom::nonnegative).collect()));
    let mut funs = fs.clone();
    funs.extend(gs.iter().cloned());
    Ok(RankingTemplate {
        kind: TemplateKind::Piecewise(k),
        params: vec![delta.clone()],
        funs,
        clauses,
        extraction: Extraction::Piecewise { fs, gs, delta },
    })
}

pub fn lexicographic(k: usize) -> Result<RankingTemplate, TemplateError> {
    if k == 0 {
        return Err(TemplateError::ZeroSize);
    }
    let ds = deltas("delta", k);
    let fs = symbols("f", k);
    let mut clauses: Vec<TemplateClause> =
        ds.iter().map(|d| single(TemplateAtom::positive_param(d))).collect();
    clauses.extend(fs.iter().map(|f| single(TemplateAtom::positive(f))));
    for i in 0..k - 1 {
        let mut lits = vec![TemplateAtom::nonincrease(&fs[i])];
        lits.extend((0..i).map(|j| TemplateAtom::decrease(&fs[j], &ds[j])));
        clauses.push(TemplateClause::new(lits));
    }
    clauses.push(TemplateClause::new(
        fs.iter().zip(&ds).map(|(f, d)| TemplateAtom::decrease(f, d)).collect(),
    ));
    Ok(RankingTemplate {
        kind: TemplateKind::Lexicographic(k),
        params: ds.clone(),
        funs: fs.clone(),
        clauses,
        extraction: Extraction::Lexicographic { fs, deltas: ds },
    })
}

/// Clause count of the distributed composed template, or `None` on overflow.
fn multiphase_lex_size(k: usize, l: usize) -> Option<usize> {
    let mut n = k.checked_mul(l)?.checked_add(k)?;
    for i in 1..k {
        n = n.checked_add(l.checked_pow(u32::try_from(i).ok()?)?)?;
    }
    n.checked_add(l.checked_pow(u32::try_from(k).ok()?)?)
}

/// A k-component lexicographic template whose components are l-phase functions.
///
/// The defining formula has disjunctions of conjunctions; they are distributed
/// into CNF here, so the clause count grows like `l^k`.
pub fn multiphase_lex(k: usize, l: usize) -> Result<RankingTemplate, TemplateError> {
    if k == 0 || l == 0 {
        return Err(TemplateError::ZeroSize);
    }
    let cap = DEFAULT_DNF_CAP;
    match multiphase_lex_size(k, l) {
        Some(n) if n <= cap => {}
        Some(n) => return Err(TemplateError::TooLarge { clauses: n, cap }),
        None => return Err(TemplateError::TooLarge { clauses: usize::MAX, cap }),
    }
    let fs: Vec<Vec<AffineSymbol>> = (1..=k)
        .map(|i| (1..=l).map(|j| AffineSymbol(format!("f_{i}_{j}"))).collect())
        .collect();
    let ds: Vec<Vec<Parameter>> = (1..=k)
        .map(|i| (1..=l).map(|j| Parameter(format!("delta_{i}_{j}"))).collect())
        .collect();

    // component i does not increase: a conjunction of l clauses
    let nonincrease = |i: usize| -> Vec<Vec<TemplateAtom>> {
        (0..l)
            .map(|j| {
                let mut c = vec![TemplateAtom::nonincrease(&fs[i][j])];
                if j > 0 {
                    c.push(TemplateAtom::positive(&fs[i][j - 1]));
                }
                c
            })
            .collect()
    };
    // component i decreases as a multiphase function
    let decrease = |i: usize| -> Vec<Vec<TemplateAtom>> {
        (0..l)
            .map(|j| {
                let mut c = vec![TemplateAtom::decrease(&fs[i][j], &ds[i][j])];
                if j > 0 {
                    c.push(TemplateAtom::positive(&fs[i][j - 1]));
                }
                c
            })
            .collect()
    };

    let mut clauses: Vec<TemplateClause> = ds
        .iter()
        .flatten()
        .map(|d| single(TemplateAtom::positive_param(d)))
        .collect();
    for row in &fs {
        clauses.push(TemplateClause::new(row.iter().map(TemplateAtom::positive).collect()));
    }
    for i in 0..k - 1 {
        let mut alternatives = vec![nonincrease(i)];
        alternatives.extend((0..i).map(decrease));
        clauses.extend(distribute(&alternatives).into_iter().map(TemplateClause::new));
    }
    let alternatives: Vec<_> = (0..k).map(decrease).collect();
    clauses.extend(distribute(&alternatives).into_iter().map(TemplateClause::new));

    Ok(RankingTemplate {
        kind: TemplateKind::MultiphaseLex(k, l),
        params: ds.iter().flatten().cloned().collect(),
        funs: fs.iter().flatten().cloned().collect(),
        clauses,
        extraction: Extraction::MultiphaseLex { fs, deltas: ds },
    })
}

/// CNF of `⋁_a ⋀_c clause(a, c)`: one clause per choice of a conjunct from
/// every alternative, in odometer order.
fn distribute(alternatives: &[Vec<Vec<TemplateAtom>>]) -> Vec<Vec<TemplateAtom>> {
    let mut acc: Vec<Vec<TemplateAtom>> = vec![Vec::new()];
    for alt in alternatives {
        let mut next = Vec::with_capacity(acc.len() * alt.len());
        for prefix in &acc {
            for clause in alt {
                let mut c = prefix.clone();
                c.extend(clause.iter().cloned());
                next.push(c);
            }
        }
        acc = next;
    }
    acc
}
