//! Linear loop programs: a transition relation over `x` and `x'` written as a
//! boolean combination of affine inequalities, and its union-of-polyhedra form.

mod normal;
mod parse;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

pub use normal::{to_dnf, to_dnf_with_cap, to_nnf, DEFAULT_DNF_CAP};
pub use parse::{parse_program, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
    #[error("disjunctive normal form exceeds {cap} disjuncts")]
    DnfTooLarge { cap: usize },
}

/// Ordered program variables; the position of a name is its coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSpace {
    names: Vec<String>,
}

impl StateSpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, LoopError> {
        let mut out: Vec<String> = Vec::new();
        for name in names {
            let name = name.into();
            if out.contains(&name) {
                return Err(LoopError::DuplicateVariable(name));
            }
            out.push(name);
        }
        Ok(Self { names: out })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, v: VarRef) -> String {
        if v.primed {
            format!("{}'", self.names[v.index])
        } else {
            self.names[v.index].clone()
        }
    }
}

/// A coordinate of the pair `(x, x')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub index: usize,
    pub primed: bool,
}

impl VarRef {
    pub fn pre(index: usize) -> Self {
        Self { index, primed: false }
    }

    pub fn post(index: usize) -> Self {
        Self { index, primed: true }
    }
}

/// `Σ c_v · v + constant` over the variables of a state space and their primed copies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineExpr {
    coeffs: BTreeMap<VarRef, Rational>,
    constant: Rational,
}

impl AffineExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: VarRef) -> Self {
        Self::term(v, Rational::from_integer(1.into()))
    }

    pub fn term(v: VarRef, c: Rational) -> Self {
        let mut e = Self::zero();
        e.add_term(v, c);
        e
    }

    pub fn coeffs(&self) -> &BTreeMap<VarRef, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, v: VarRef) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, v: VarRef, c: Rational) {
        let slot = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            out.add_term(*v, c.clone());
        }
        out.constant += &other.constant;
        out
    }

    pub fn scale(&self, k: &Rational) -> AffineExpr {
        if k.is_zero() {
            return AffineExpr::zero();
        }
        AffineExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn neg(&self) -> AffineExpr {
        AffineExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, -c)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        self.add(&other.neg())
    }

    /// Evaluates at `(x, x')`; both slices are indexed by the state space.
    pub fn eval(&self, x: &[Rational], xp: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let val = if v.primed { &xp[v.index] } else { &x[v.index] };
            acc += c * val;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomRel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl AtomRel {
    pub fn holds(self, value: &Rational) -> bool {
        match self {
            AtomRel::Le => !value.is_positive(),
            AtomRel::Lt => value.is_negative(),
            AtomRel::Ge => !value.is_negative(),
            AtomRel::Gt => value.is_positive(),
            AtomRel::Eq => value.is_zero(),
            AtomRel::Ne => !value.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            AtomRel::Le => "<=",
            AtomRel::Lt => "<",
            AtomRel::Ge => ">=",
            AtomRel::Gt => ">",
            AtomRel::Eq => "==",
            AtomRel::Ne => "!=",
        }
    }
}

/// Boolean combination of atoms `expr rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Atom(AffineExpr, AtomRel),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn atom(e: AffineExpr, rel: AtomRel) -> Self {
        Formula::Atom(e, rel)
    }

    /// Truth value at `(x, x')`. Slices must have the state-space dimension.
    pub fn holds(&self, x: &[Rational], xp: &[Rational]) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Atom(e, rel) => rel.holds(&e.eval(x, xp)),
            Formula::And(cs) => cs.iter().all(|c| c.holds(x, xp)),
            Formula::Or(cs) => cs.iter().any(|c| c.holds(x, xp)),
            Formula::Not(c) => !c.holds(x, xp),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Const(_) => true,
            Formula::Atom(_, rel) => matches!(rel, AtomRel::Le | AtomRel::Lt),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().all(Formula::is_nnf),
            Formula::Not(_) => false,
        }
    }
}

/// Evaluates `f` with variables bound by name.
pub fn eval_formula(
    f: &Formula,
    space: &StateSpace,
    point: &BTreeMap<String, Rational>,
    primed: &BTreeMap<String, Rational>,
) -> Result<bool, LoopError> {
    let lookup = |m: &BTreeMap<String, Rational>| -> Result<Vec<Rational>, LoopError> {
        space
            .names()
            .iter()
            .map(|n| m.get(n).cloned().ok_or_else(|| LoopError::MissingBinding(n.clone())))
            .collect()
    };
    let x = lookup(point)?;
    let xp = lookup(primed)?;
    Ok(f.holds(&x, &xp))
}

/// `nonstrict` rows mean `e <= 0`, `strict` rows mean `e < 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polyhedron {
    pub nonstrict: Vec<AffineExpr>,
    pub strict: Vec<AffineExpr>,
}

impl Polyhedron {
    pub fn contains(&self, x: &[Rational], xp: &[Rational]) -> bool {
        self.nonstrict.iter().all(|e| !e.eval(x, xp).is_positive())
            && self.strict.iter().all(|e| e.eval(x, xp).is_negative())
    }

    pub fn row_count(&self) -> usize {
        self.nonstrict.len() + self.strict.len()
    }

    fn conjoin(&self, other: &Polyhedron) -> Polyhedron {
        let mut out = self.clone();
        out.nonstrict.extend(other.nonstrict.iter().cloned());
        out.strict.extend(other.strict.iter().cloned());
        out
    }
}

/// A loop relation as a nonempty union of polyhedra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DnfProgram {
    pub space: StateSpace,
    pub disjuncts: Vec<Polyhedron>,
}

impl DnfProgram {
    pub fn contains(&self, x: &[Rational], xp: &[Rational]) -> bool {
        self.disjuncts.iter().any(|p| p.contains(x, xp))
    }

    pub fn is_conjunctive(&self) -> bool {
        self.disjuncts.len() == 1
    }
}

/// A parsed program file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopProgram {
    pub space: StateSpace,
    pub body: Formula,
}

impl LoopProgram {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let (space, body) = parse_program(text)?;
        Ok(Self { space, body })
    }

    pub fn to_dnf(&self) -> Result<DnfProgram, LoopError> {
        to_dnf(&self.space, &to_nnf(&self.body))
    }
}

impl fmt::Display for LoopProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print::program(&self.space, &self.body))
    }
}

pub use print::{expr_to_string, formula_to_string};
