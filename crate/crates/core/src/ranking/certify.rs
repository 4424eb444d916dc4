use std::collections::HashSet;

use super::function::{evaluate, RankingFunction};
use crate::loop_ir::DnfProgram;
use crate::oracle::grid_pairs;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: Vec<Rational>,
    pub next: Vec<Rational>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CertReport {
    pub pairs_checked: usize,
    pub violations: Vec<Violation>,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `ρ(x) > ρ(x')` on every relation pair of the integer grid
/// `[-bound, bound]^{2n}`.
///
/// An undefined rank at `x'` is only a violation when `x'` itself has a
/// successor on the grid.
pub fn certify(r: &RankingFunction, d: &DnfProgram, bound: u32) -> CertReport {
    let pairs: Vec<(Vec<Rational>, Vec<Rational>)> = grid_pairs(d, bound).collect();
    let has_successor: HashSet<&Vec<Rational>> = pairs.iter().map(|(x, _)| x).collect();
    let mut report = CertReport { pairs_checked: pairs.len(), violations: Vec::new() };
    for (x, xp) in &pairs {
        let violation = |reason: String| Violation { state: x.clone(), next: xp.clone(), reason };
        let Some(rank) = evaluate(r, x) else {
            report.violations.push(violation("rank undefined at the source state".into()));
            continue;
        };
        match evaluate(r, xp) {
            None if has_successor.contains(xp) => {
                report.violations.push(violation("rank undefined at a successor that continues".into()));
            }
            None => {}
            Some(next) if next >= rank => {
                report.violations.push(violation(format!("rank does not decrease: {rank} -> {next}")));
            }
            Some(_) => {}
        }
    }
    report
}
