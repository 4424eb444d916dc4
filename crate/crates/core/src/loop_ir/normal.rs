use super::{AffineExpr, AtomRel, DnfProgram, Formula, LoopError, Polyhedron, StateSpace};
use crate::rational::int;

pub const DEFAULT_DNF_CAP: usize = 4096;

/// Negation normal form with only `<=` / `<` atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, negated: bool) -> Formula {
    match f {
        Formula::Const(b) => Formula::Const(*b != negated),
        Formula::Not(c) => nnf(c, !negated),
        Formula::And(cs) => {
            let parts = cs.iter().map(|c| nnf(c, negated)).collect();
            if negated {
                Formula::Or(parts)
            } else {
                Formula::And(parts)
            }
        }
        Formula::Or(cs) => {
            let parts = cs.iter().map(|c| nnf(c, negated)).collect();
            if negated {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Atom(e, rel) => nnf_atom(e, *rel, negated),
    }
}

fn nnf_atom(e: &AffineExpr, rel: AtomRel, negated: bool) -> Formula {
    use AtomRel::*;
    let le = |x: AffineExpr| Formula::Atom(x, Le);
    let lt = |x: AffineExpr| Formula::Atom(x, Lt);
    match (rel, negated) {
        (Le, false) => le(e.clone()),
        (Lt, false) => lt(e.clone()),
        (Ge, false) => le(e.neg()),
        (Gt, false) => lt(e.neg()),
        // not (e <= 0)  <=>  -e < 0
        (Le, true) => lt(e.neg()),
        (Lt, true) => le(e.neg()),
        (Ge, true) => lt(e.clone()),
        (Gt, true) => le(e.clone()),
        (Eq, false) | (Ne, true) => Formula::And(vec![le(e.clone()), le(e.neg())]),
        (Ne, false) | (Eq, true) => Formula::Or(vec![lt(e.clone()), lt(e.neg())]),
    }
}

/// Distributes an NNF formula into a union of polyhedra.
pub fn to_dnf(space: &StateSpace, f: &Formula) -> Result<DnfProgram, LoopError> {
    to_dnf_with_cap(space, f, DEFAULT_DNF_CAP)
}

pub fn to_dnf_with_cap(
    space: &StateSpace,
    f: &Formula,
    cap: usize,
) -> Result<DnfProgram, LoopError> {
    debug_assert!(f.is_nnf(), "to_dnf expects NNF input");
    let mut disjuncts = dnf(f, cap)?;
    if disjuncts.is_empty() {
        // the empty relation, kept as one infeasible polyhedron: 1 <= 0
        disjuncts.push(Polyhedron {
            nonstrict: vec![AffineExpr::constant(int(1))],
            strict: vec![],
        });
    }
    Ok(DnfProgram { space: space.clone(), disjuncts })
}

fn dnf(f: &Formula, cap: usize) -> Result<Vec<Polyhedron>, LoopError> {
    match f {
        Formula::Const(true) => Ok(vec![Polyhedron::default()]),
        Formula::Const(false) => Ok(vec![]),
        Formula::Atom(e, AtomRel::Le) => {
            Ok(vec![Polyhedron { nonstrict: vec![e.clone()], strict: vec![] }])
        }
        Formula::Atom(e, AtomRel::Lt) => {
            Ok(vec![Polyhedron { nonstrict: vec![], strict: vec![e.clone()] }])
        }
        Formula::Atom(..) | Formula::Not(_) => dnf(&to_nnf(f), cap),
        Formula::Or(cs) => {
            let mut out = Vec::new();
            for c in cs {
                out.extend(dnf(c, cap)?);
                if out.len() > cap {
                    return Err(LoopError::DnfTooLarge { cap });
                }
            }
            Ok(out)
        }
        Formula::And(cs) => {
            let mut acc = vec![Polyhedron::default()];
            for c in cs {
                let rhs = dnf(c, cap)?;
                if acc.len().saturating_mul(rhs.len()) > cap {
                    return Err(LoopError::DnfTooLarge { cap });
                }
                acc = acc.iter().flat_map(|a| rhs.iter().map(move |b| a.conjoin(b))).collect();
            }
            Ok(acc)
        }
    }
}
