use num_traits::{One, Signed, Zero};

use super::{AffineExpr, Formula, StateSpace};
use crate::rational::fmt_ratio;

/// Renders in the program-file expression syntax, e.g. `-q + q' + 1/2`.
pub fn expr_to_string(space: &StateSpace, e: &AffineExpr) -> String {
    let mut out = String::new();
    for (v, c) in e.coeffs() {
        push_term(&mut out, c, Some(&space.name(*v)));
    }
    if !e.constant_term().is_zero() || out.is_empty() {
        push_term(&mut out, e.constant_term(), None);
    }
    out
}

fn push_term(out: &mut String, c: &crate::rational::Rational, var: Option<&str>) {
    let first = out.is_empty();
    let mag = c.abs();
    if c.is_negative() {
        out.push_str(if first { "-" } else { " - " });
    } else if !first {
        out.push_str(" + ");
    }
    match var {
        Some(name) if mag.is_one() => out.push_str(name),
        Some(name) => {
            out.push_str(&fmt_ratio(&mag));
            out.push('*');
            out.push_str(name);
        }
        None => out.push_str(&fmt_ratio(&mag)),
    }
}

pub fn formula_to_string(space: &StateSpace, f: &Formula) -> String {
    match f {
        Formula::Const(true) => "0 <= 0".into(),
        Formula::Const(false) => "0 < 0".into(),
        Formula::Atom(e, rel) => format!("{} {} 0", expr_to_string(space, e), rel.symbol()),
        Formula::Not(c) => format!("!({})", formula_to_string(space, c)),
        Formula::And(cs) => cs
            .iter()
            .map(|c| match c {
                Formula::And(_) | Formula::Or(_) => format!("({})", formula_to_string(space, c)),
                _ => formula_to_string(space, c),
            })
            .collect::<Vec<_>>()
            .join(" && "),
        Formula::Or(cs) => cs
            .iter()
            .map(|c| match c {
                Formula::Or(_) => format!("({})", formula_to_string(space, c)),
                _ => formula_to_string(space, c),
            })
            .collect::<Vec<_>>()
            .join(" || "),
    }
}

pub(super) fn program(space: &StateSpace, body: &Formula) -> String {
    format!("vars {};\nloop ({});\n", space.names().join(", "), formula_to_string(space, body))
}
