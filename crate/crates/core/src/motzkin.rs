//! From `∀x,x'. loop(x,x') → template(x,x')` to a purely existential
//! constraint, one transposition certificate per (loop disjunct, template clause).
//!
//! A system `A·(x;x') ≤ b ∧ C·(x;x') < d` has no solution iff there are
//! `λ ≥ 0`, `μ ≥ 0` with `λᵀA + μᵀC = 0`, `λᵀb + μᵀd ≤ 0` and
//! `(λᵀb < 0 ∨ μ ≠ 0)`. Template atoms contribute rows whose entries are
//! affine in the template parameters, so the certificate is bilinear.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::constraint::{CmpOp, Constraint, ExistsConstraint, Term};
use crate::loop_ir::{AffineExpr, DnfProgram, Polyhedron, StateSpace, VarRef};
use crate::rational::Rational;
use crate::template::{Parameter, RankingTemplate, TemplateAtom, TemplateClause, TemplateRel};

/// An affine expression over template parameters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParamLin {
    coeffs: BTreeMap<Parameter, Rational>,
    constant: Rational,
}

impl ParamLin {
    pub fn constant(c: Rational) -> Self {
        Self { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn coeffs(&self) -> &BTreeMap<Parameter, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_param(&mut self, p: &Parameter, c: &Rational) {
        let slot = self.coeffs.entry(p.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(p);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn neg(&self) -> ParamLin {
        ParamLin {
            coeffs: self.coeffs.iter().map(|(p, c)| (p.clone(), -c)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn to_term(&self) -> Term {
        Term::sum(
            self.coeffs
                .iter()
                .map(|(p, c)| Term::scaled(c.clone(), Term::var(p.name())))
                .chain(std::iter::once(Term::Const(self.constant.clone()))),
        )
    }
}

/// `Σ coeffs[v]·v ≤ constant` (or `<` when strict) over `(x; x')`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotzkinRow {
    pub coeffs: BTreeMap<VarRef, ParamLin>,
    pub constant: ParamLin,
    pub strict: bool,
}

impl MotzkinRow {
    /// A loop row `e ≤ 0` / `e < 0`.
    pub fn from_loop(e: &AffineExpr, strict: bool) -> Self {
        MotzkinRow {
            coeffs: e
                .coeffs()
                .iter()
                .map(|(v, c)| (*v, ParamLin::constant(c.clone())))
                .collect(),
            constant: ParamLin::constant(-e.constant_term()),
            strict,
        }
    }

    pub fn coeff(&self, v: VarRef) -> ParamLin {
        self.coeffs.get(&v).cloned().unwrap_or_default()
    }
}

/// The atom's left-hand side as per-variable parameter coefficients plus a
/// parameter constant, with `f(x) = s_fᵀx + t_f` expanded.
pub fn expand_atom(a: &TemplateAtom, space: &StateSpace) -> (BTreeMap<VarRef, ParamLin>, ParamLin) {
    let mut coeffs: BTreeMap<VarRef, ParamLin> = BTreeMap::new();
    let mut constant = ParamLin::default();
    for (f, (alpha, beta)) in &a.fun_coeffs {
        for i in 0..space.dim() {
            let s = f.coeff_param(space, i);
            for (v, k) in [(VarRef::pre(i), alpha), (VarRef::post(i), beta)] {
                if !k.is_zero() {
                    coeffs.entry(v).or_default().add_param(&s, k);
                }
            }
        }
        constant.add_param(&f.const_param(), &(alpha + beta));
    }
    for (d, gamma) in &a.par_coeffs {
        constant.add_param(d, gamma);
    }
    coeffs.retain(|_, p| !p.is_zero());
    (coeffs, constant)
}

/// Row for the negated atom: `¬(e ≥ 0)` is `e < 0` and `¬(e > 0)` is `e ≤ 0`.
pub fn negate_atom(a: &TemplateAtom, space: &StateSpace) -> MotzkinRow {
    let (coeffs, constant) = expand_atom(a, space);
    MotzkinRow {
        coeffs,
        constant: constant.neg(),
        strict: a.rel == TemplateRel::Ge,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MotzkinSystem {
    pub dim: usize,
    pub rows: Vec<MotzkinRow>,
    pub origin_disjunct: usize,
    pub origin_clause: usize,
}

impl MotzkinSystem {
    pub fn strict_count(&self) -> usize {
        self.rows.iter().filter(|r| r.strict).count()
    }

    pub fn multiplier_name(&self, r: usize) -> String {
        let prefix = if self.rows[r].strict { "mu" } else { "lam" };
        format!("{prefix}_{}_{}_{r}", self.origin_disjunct, self.origin_clause)
    }

    pub fn multiplier_names(&self) -> Vec<String> {
        (0..self.rows.len()).map(|r| self.multiplier_name(r)).collect()
    }
}

/// Loop rows of `p` followed by the negation of every literal of `c`.
pub fn build_system(
    space: &StateSpace,
    p: &Polyhedron,
    c: &TemplateClause,
    disjunct: usize,
    clause: usize,
) -> MotzkinSystem {
    let mut rows: Vec<MotzkinRow> = p.nonstrict.iter().map(|e| MotzkinRow::from_loop(e, false)).collect();
    rows.extend(p.strict.iter().map(|e| MotzkinRow::from_loop(e, true)));
    rows.extend(c.literals().iter().map(|a| negate_atom(a, space)));
    MotzkinSystem { dim: space.dim(), rows, origin_disjunct: disjunct, origin_clause: clause }
}

/// The existential transposition certificate for infeasibility of `s`.
pub fn apply_motzkin(s: &MotzkinSystem) -> Constraint {
    let names = s.multiplier_names();
    let mult = |r: usize| Term::var(&names[r]);
    let mut parts = Vec::new();
    for r in 0..s.rows.len() {
        parts.push(Constraint::cmp(mult(r), CmpOp::Ge, Term::zero()));
    }
    let columns = (0..s.dim).flat_map(|i| [VarRef::pre(i), VarRef::post(i)]);
    for v in columns {
        let lhs = Term::sum(
            s.rows
                .iter()
                .enumerate()
                .map(|(r, row)| bilinear(mult(r), &row.coeff(v))),
        );
        parts.push(Constraint::cmp(lhs, CmpOp::Eq, Term::zero()));
    }
    let weighted = |filter: &dyn Fn(&MotzkinRow) -> bool| {
        Term::sum(
            s.rows
                .iter()
                .enumerate()
                .filter(|(_, row)| filter(row))
                .map(|(r, row)| bilinear(mult(r), &row.constant)),
        )
    };
    parts.push(Constraint::cmp(weighted(&|_| true), CmpOp::Le, Term::zero()));
    // μ ≠ 0 is Σμ > 0 under μ ≥ 0
    let nonstrict_sum = weighted(&|row| !row.strict);
    let strict_mass = Term::sum(
        s.rows.iter().enumerate().filter(|(_, row)| row.strict).map(|(r, _)| mult(r)),
    );
    parts.push(Constraint::or([
        Constraint::cmp(nonstrict_sum, CmpOp::Lt, Term::zero()),
        Constraint::cmp(strict_mass, CmpOp::Gt, Term::zero()),
    ]));
    Constraint::and(parts)
}

fn bilinear(multiplier: Term, coeff: &ParamLin) -> Term {
    if coeff.is_constant() {
        Term::scaled(coeff.constant_part().clone(), multiplier)
    } else {
        Term::product(multiplier, coeff.to_term())
    }
}

/// A state-free clause asserted directly over the parameters.
fn direct_clause(c: &TemplateClause) -> Constraint {
    Constraint::or(c.literals().iter().map(|a| {
        let lhs = Term::sum(a.par_coeffs.iter().map(|(d, g)| Term::scaled(g.clone(), Term::var(d.name()))));
        let op = match a.rel {
            TemplateRel::Ge => CmpOp::Ge,
            TemplateRel::Gt => CmpOp::Gt,
        };
        Constraint::cmp(lhs, op, Term::zero())
    }))
}

/// All Motzkin systems of `(d, t)` in (disjunct, clause) order.
pub fn systems(d: &DnfProgram, t: &RankingTemplate) -> Vec<MotzkinSystem> {
    let mut out = Vec::new();
    for (i, p) in d.disjuncts.iter().enumerate() {
        for (j, c) in t.clauses.iter().enumerate() {
            if !c.is_state_free() {
                out.push(build_system(&d.space, p, c, i, j));
            }
        }
    }
    out
}

/// The existential constraint whose models are exactly the template
/// assignments (plus certificates) covering the loop relation.
pub fn generate_constraint(d: &DnfProgram, t: &RankingTemplate) -> ExistsConstraint {
    let mut parts: Vec<Constraint> = t
        .clauses
        .iter()
        .filter(|c| c.is_state_free())
        .map(direct_clause)
        .collect();
    let mut vars: Vec<String> = t.all_params(&d.space).iter().map(|p| p.name().to_string()).collect();
    for s in systems(d, t) {
        parts.push(apply_motzkin(&s));
        vars.extend(s.multiplier_names());
    }
    ExistsConstraint::new(Constraint::and(parts), vars)
}
