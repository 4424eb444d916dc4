//! Quantifier-free nonlinear real arithmetic over solver variables.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::Model;
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no value for solver variable `{0}`")]
pub struct UnboundVariable(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Rational),
    Var(String),
    Add(Vec<Term>),
    Mul(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn zero() -> Self {
        Term::Const(Rational::zero())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Term::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Sum with constant folding; zero summands are dropped.
    pub fn sum(parts: impl IntoIterator<Item = Term>) -> Term {
        let mut constant = Rational::zero();
        let mut rest = Vec::new();
        for p in parts {
            match p {
                Term::Const(c) => constant += c,
                Term::Add(inner) => {
                    for q in inner {
                        match q {
                            Term::Const(c) => constant += c,
                            other => rest.push(other),
                        }
                    }
                }
                other => rest.push(other),
            }
        }
        if !constant.is_zero() {
            rest.push(Term::Const(constant));
        }
        match rest.len() {
            0 => Term::zero(),
            1 => rest.pop().unwrap(),
            _ => Term::Add(rest),
        }
    }

    /// Product with constant folding; a constant factor is kept on the left.
    pub fn product(a: Term, b: Term) -> Term {
        match (a, b) {
            (Term::Const(x), Term::Const(y)) => Term::Const(x * y),
            (Term::Const(c), t) | (t, Term::Const(c)) => {
                if c.is_zero() {
                    Term::zero()
                } else if c.is_one() {
                    t
                } else {
                    Term::Mul(Box::new(Term::Const(c)), Box::new(t))
                }
            }
            (a, b) => Term::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn scaled(c: Rational, t: Term) -> Term {
        Term::product(Term::Const(c), t)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Add(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
            Term::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn substitute(&self, m: &Model) -> Term {
        match self {
            Term::Const(_) => self.clone(),
            Term::Var(v) => match m.get(v) {
                Some(c) => Term::Const(c.clone()),
                None => self.clone(),
            },
            Term::Add(ps) => Term::sum(ps.iter().map(|p| p.substitute(m))),
            Term::Mul(a, b) => Term::product(a.substitute(m), b.substitute(m)),
        }
    }

    pub fn eval(&self, m: &Model) -> Result<Rational, UnboundVariable> {
        match self {
            Term::Const(c) => Ok(c.clone()),
            Term::Var(v) => m.get(v).cloned().ok_or_else(|| UnboundVariable(v.clone())),
            Term::Add(ps) => ps.iter().try_fold(Rational::zero(), |acc, p| Ok(acc + p.eval(m)?)),
            Term::Mul(a, b) => Ok(a.eval(m)? * b.eval(m)?),
        }
    }

    fn products<'a>(&'a self, out: &mut Vec<(&'a Term, &'a Term)>) {
        match self {
            Term::Const(_) | Term::Var(_) => {}
            Term::Add(ps) => ps.iter().for_each(|p| p.products(out)),
            Term::Mul(a, b) => {
                out.push((a, b));
                a.products(out);
                b.products(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }

    pub fn smt_symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    Bool(bool),
    Cmp(Term, CmpOp, Term),
    And(Vec<Constraint>),
    Or(Vec<Constraint>),
}

impl Constraint {
    /// Comparison, folded to a constant when both sides are ground.
    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Constraint {
        match (lhs.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Constraint::Bool(op.holds(a, b)),
            _ => Constraint::Cmp(lhs, op, rhs),
        }
    }

    pub fn and(parts: impl IntoIterator<Item = Constraint>) -> Constraint {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Constraint::Bool(true) => {}
                Constraint::Bool(false) => return Constraint::Bool(false),
                Constraint::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Constraint::Bool(true),
            1 => out.pop().unwrap(),
            _ => Constraint::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Constraint>) -> Constraint {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Constraint::Bool(false) => {}
                Constraint::Bool(true) => return Constraint::Bool(true),
                Constraint::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Constraint::Bool(false),
            1 => out.pop().unwrap(),
            _ => Constraint::Or(out),
        }
    }

    pub fn substitute(&self, m: &Model) -> Constraint {
        match self {
            Constraint::Bool(_) => self.clone(),
            Constraint::Cmp(a, op, b) => Constraint::cmp(a.substitute(m), *op, b.substitute(m)),
            Constraint::And(ps) => Constraint::and(ps.iter().map(|p| p.substitute(m))),
            Constraint::Or(ps) => Constraint::or(ps.iter().map(|p| p.substitute(m))),
        }
    }

    pub fn eval(&self, m: &Model) -> Result<bool, UnboundVariable> {
        Ok(match self {
            Constraint::Bool(b) => *b,
            Constraint::Cmp(a, op, b) => op.holds(&a.eval(m)?, &b.eval(m)?),
            Constraint::And(ps) => {
                for p in ps {
                    if !p.eval(m)? {
                        return Ok(false);
                    }
                }
                true
            }
            Constraint::Or(ps) => {
                for p in ps {
                    if p.eval(m)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Constraint::Bool(_) => {}
            Constraint::Cmp(a, _, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Constraint::And(ps) | Constraint::Or(ps) => ps.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    /// Every multiplication node, outermost first.
    pub fn products(&self) -> Vec<(&Term, &Term)> {
        let mut out = Vec::new();
        self.walk_products(&mut out);
        out
    }

    fn walk_products<'a>(&'a self, out: &mut Vec<(&'a Term, &'a Term)>) {
        match self {
            Constraint::Bool(_) => {}
            Constraint::Cmp(a, _, b) => {
                a.products(out);
                b.products(out);
            }
            Constraint::And(ps) | Constraint::Or(ps) => ps.iter().for_each(|p| p.walk_products(out)),
        }
    }
}

/// A purely existential constraint together with its declared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistsConstraint {
    pub root: Constraint,
    /// Declaration order: template parameters, symbol components, multipliers.
    pub vars: Vec<String>,
}

impl ExistsConstraint {
    pub fn new(root: Constraint, vars: Vec<String>) -> Self {
        Self { root, vars }
    }

    /// Folds the bound variables away; the remaining declarations are the unbound ones.
    pub fn substitute(&self, partial: &Model) -> ExistsConstraint {
        ExistsConstraint {
            root: self.root.substitute(partial),
            vars: self.vars.iter().filter(|v| !partial.contains(v)).cloned().collect(),
        }
    }

    /// Exact check of a full model, independent of any solver.
    pub fn check_model(&self, m: &Model) -> Result<bool, UnboundVariable> {
        self.root.eval(m)
    }

    pub fn is_ground(&self) -> bool {
        matches!(self.root, Constraint::Bool(_))
    }
}
