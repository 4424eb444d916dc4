//! Solver-free ground truth: exact Fourier–Motzkin feasibility for mixed
//! strict/non-strict systems, and enumeration of the loop relation on an
//! integer grid.

use std::rc::Rc;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::loop_ir::{DnfProgram, Formula};
use crate::rational::{int, Rational};

pub const DEFAULT_ROW_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("Fourier-Motzkin elimination exceeded {cap} rows")]
pub struct RowExplosion {
    pub cap: usize,
}

/// `coeffs·x ≤ constant`, or `<` when strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundRow {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub strict: bool,
}

impl GroundRow {
    pub fn new(coeffs: Vec<Rational>, constant: Rational, strict: bool) -> Self {
        Self { coeffs, constant, strict }
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        if self.strict {
            lhs < self.constant
        } else {
            lhs <= self.constant
        }
    }

    /// Scaled so the first nonzero coefficient (or the constant) has magnitude 1.
    fn normalized(mut self) -> Self {
        let pivot = self
            .coeffs
            .iter()
            .find(|c| !c.is_zero())
            .or(Some(&self.constant).filter(|c| !c.is_zero()))
            .map(|c| c.abs());
        if let Some(p) = pivot {
            for c in &mut self.coeffs {
                *c /= &p;
            }
            self.constant /= &p;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSystem {
    pub vars: usize,
    pub rows: Vec<GroundRow>,
}

impl GroundSystem {
    pub fn new(vars: usize, rows: Vec<GroundRow>) -> Self {
        assert!(rows.iter().all(|r| r.coeffs.len() == vars), "row width must match variable count");
        Self { vars, rows }
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|r| r.holds(x))
    }
}

pub fn fourier_motzkin_feasible(s: &GroundSystem) -> Result<bool, RowExplosion> {
    fourier_motzkin_feasible_with_cap(s, DEFAULT_ROW_CAP)
}

/// Decides `∃x ∈ ℚᵐ` satisfying every row, eliminating variables from the last.
pub fn fourier_motzkin_feasible_with_cap(s: &GroundSystem, cap: usize) -> Result<bool, RowExplosion> {
    let mut rows: Vec<GroundRow> = s.rows.iter().cloned().map(GroundRow::normalized).collect();
    dedup(&mut rows);
    for k in (0..s.vars).rev() {
        if rows.iter().any(ground_contradiction) {
            return Ok(false);
        }
        let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.coeffs[k].is_positive() {
                upper.push(r);
            } else if r.coeffs[k].is_negative() {
                lower.push(r);
            } else {
                rest.push(r);
            }
        }
        for lo in &lower {
            for up in &upper {
                // lo has a < 0 and up has b > 0: b·lo + (-a)·up cancels x_k
                let a = -&lo.coeffs[k];
                let b = &up.coeffs[k];
                let coeffs: Vec<Rational> =
                    lo.coeffs.iter().zip(&up.coeffs).map(|(l, u)| b * l + &a * u).collect();
                let constant = b * &lo.constant + &a * &up.constant;
                rest.push(GroundRow::new(coeffs, constant, lo.strict || up.strict).normalized());
                if rest.len() > cap {
                    return Err(RowExplosion { cap });
                }
            }
        }
        rows = rest;
        dedup(&mut rows);
    }
    Ok(!rows.iter().any(ground_contradiction))
}

fn ground_contradiction(r: &GroundRow) -> bool {
    r.coeffs.iter().all(Zero::is_zero)
        && if r.strict { !r.constant.is_positive() } else { r.constant.is_negative() }
}

fn dedup(rows: &mut Vec<GroundRow>) {
    let mut seen = std::collections::HashSet::new();
    rows.retain(|r| seen.insert(r.clone()));
}

/// Integer points of `[-bound, bound]^n` in lexicographic order.
pub fn grid_points(dim: usize, bound: u32) -> impl Iterator<Item = Vec<Rational>> {
    let b = i64::from(bound);
    let total = (2 * b + 1).checked_pow(dim as u32).expect("grid too large");
    (0..total).map(move |mut code| {
        let mut p = vec![Rational::zero(); dim];
        for slot in p.iter_mut().rev() {
            *slot = int(code % (2 * b + 1) - b);
            code /= 2 * b + 1;
        }
        p
    })
}

/// All integer pairs `(x, x')` in `[-bound, bound]^{2n}` that lie in the relation.
pub fn grid_pairs(d: &DnfProgram, bound: u32) -> impl Iterator<Item = (Vec<Rational>, Vec<Rational>)> + '_ {
    let n = d.space.dim();
    let post: Rc<Vec<Vec<Rational>>> = Rc::new(grid_points(n, bound).collect());
    grid_points(n, bound).flat_map(move |x| {
        // disjuncts whose pre-state rows already hold at x
        let live: Vec<usize> = d
            .disjuncts
            .iter()
            .enumerate()
            .filter(|(_, p)| pre_rows_hold(p, &x))
            .map(|(i, _)| i)
            .collect();
        let post = Rc::clone(&post);
        let count = if live.is_empty() { 0 } else { post.len() };
        (0..count).filter_map(move |j| {
            let xp = &post[j];
            live.iter()
                .any(|&i| d.disjuncts[i].contains(&x, xp))
                .then(|| (x.clone(), xp.clone()))
        })
    })
}

fn pre_rows_hold(p: &crate::loop_ir::Polyhedron, x: &[Rational]) -> bool {
    let only_pre = |e: &&crate::loop_ir::AffineExpr| e.coeffs().keys().all(|v| !v.primed);
    let zeros = vec![Rational::zero(); x.len()];
    p.nonstrict.iter().filter(only_pre).all(|e| !e.eval(x, &zeros).is_positive())
        && p.strict.iter().filter(only_pre).all(|e| e.eval(x, &zeros).is_negative())
}

/// Relation pairs on the grid where `inst` does not hold.
pub fn check_inclusion(inst: &Formula, d: &DnfProgram, bound: u32) -> Vec<(Vec<Rational>, Vec<Rational>)> {
    grid_pairs(d, bound).filter(|(x, xp)| !inst.holds(x, xp)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_ir::LoopProgram;

    fn row(coeffs: &[i64], c: i64, strict: bool) -> GroundRow {
        GroundRow::new(coeffs.iter().map(|&a| int(a)).collect(), int(c), strict)
    }

    #[test]
    fn bounds_conflict() {
        let s = GroundSystem::new(1, vec![row(&[1], 0, false), row(&[-1], -1, false)]);
        assert!(!fourier_motzkin_feasible(&s).unwrap());
    }

    #[test]
    fn strict_conflict() {
        let s = GroundSystem::new(1, vec![row(&[1], 0, true), row(&[-1], 0, true)]);
        assert!(!fourier_motzkin_feasible(&s).unwrap());
        let s = GroundSystem::new(1, vec![row(&[1], 0, false), row(&[-1], 0, false)]);
        assert!(fourier_motzkin_feasible(&s).unwrap());
    }

    #[test]
    fn feasible_with_witness() {
        let s = GroundSystem::new(
            2,
            vec![row(&[1, 0], 1, false), row(&[-1, 0], 0, false), row(&[-1, 1], 0, true)],
        );
        assert!(s.satisfied_by(&[int(1), int(0)]));
        assert!(fourier_motzkin_feasible(&s).unwrap());
    }

    #[test]
    fn ground_rows_only() {
        assert!(fourier_motzkin_feasible(&GroundSystem::new(0, vec![row(&[], 0, false)])).unwrap());
        assert!(!fourier_motzkin_feasible(&GroundSystem::new(0, vec![row(&[], 0, true)])).unwrap());
        assert!(fourier_motzkin_feasible(&GroundSystem::new(2, vec![])).unwrap());
    }

    #[test]
    fn explosion_guard() {
        // 3 variables, many rows with mixed signs on every variable
        let mut rows = Vec::new();
        for a in [-2i64, -1, 1, 2] {
            for b in [-1i64, 1] {
                for c in [-1i64, 1] {
                    rows.push(row(&[a, b, c], 5, false));
                }
            }
        }
        let s = GroundSystem::new(3, rows);
        assert_eq!(fourier_motzkin_feasible_with_cap(&s, 10), Err(RowExplosion { cap: 10 }));
        assert!(fourier_motzkin_feasible(&s).unwrap());
    }

    fn fig1() -> DnfProgram {
        LoopProgram::parse("vars q, y; loop (q > 0 && q' == q - y && y' == y + 1);").unwrap().to_dnf().unwrap()
    }

    #[test]
    fn fig1_grid() {
        let d = fig1();
        let pairs: Vec<_> = grid_pairs(&d, 2).collect();
        assert!(pairs.contains(&(vec![int(1), int(0)], vec![int(1), int(1)])));
        assert!(pairs.iter().all(|(x, _)| x[0] > int(0)));
        assert!(pairs.iter().all(|(x, xp)| d.contains(x, xp)));
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(sorted, pairs);
        // q in 1..=2, y in -2..=2, with q' = q - y and y' = y + 1 inside the box
        let expected = (1..=2)
            .flat_map(|q| (-2..=2).map(move |y| (q, y)))
            .filter(|&(q, y): &(i64, i64)| (q - y).abs() <= 2 && (y + 1).abs() <= 2)
            .count();
        assert_eq!(pairs.len(), expected);
    }

    #[test]
    fn empty_relation_grid() {
        let d = LoopProgram::parse("vars q; loop (q > 0 && q <= -1);").unwrap().to_dnf().unwrap();
        assert_eq!(grid_pairs(&d, 3).count(), 0);
    }

    #[test]
    fn grid_point_order() {
        let pts: Vec<_> = grid_points(2, 1).collect();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![int(-1), int(-1)]);
        assert_eq!(pts[1], vec![int(-1), int(0)]);
        assert_eq!(pts[8], vec![int(1), int(1)]);
    }
}
