use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use thiserror::Error;

use super::ordinal::OrdinalValue;
use crate::loop_ir::{expr_to_string, AffineExpr, StateSpace, VarRef};
use crate::model::Model;
use crate::rational::{ceil, fmt_ratio, Rational};
use crate::template::{AffineSymbol, Extraction, Parameter, RankingTemplate};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankingError {
    #[error("assignment has no value for `{0}`")]
    MissingBinding(String),
    #[error("step size `{name}` = {value} is not positive")]
    NonPositiveStep { name: String, value: String },
}

/// `coeffsᵀx + constant` with concrete rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteAffine {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl ConcreteAffine {
    pub fn new(coeffs: Vec<Rational>, constant: Rational) -> Self {
        Self { coeffs, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.coeffs.len(), "state dimension mismatch");
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum::<Rational>() + &self.constant
    }

    fn resolve(sym: &AffineSymbol, space: &StateSpace, nu: &Model) -> Result<Self, RankingError> {
        let get = |p: Parameter| {
            nu.get(p.name()).cloned().ok_or_else(|| RankingError::MissingBinding(p.name().to_string()))
        };
        let coeffs = (0..space.dim())
            .map(|i| get(sym.coeff_param(space, i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { coeffs, constant: get(sym.const_param())? })
    }

    pub fn render(&self, space: &StateSpace) -> String {
        let mut e = AffineExpr::constant(self.constant.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            e.add_term(VarRef::pre(i), c.clone());
        }
        expr_to_string(space, &e)
    }
}

/// `⌈f(x)/δ⌉` when `f(x) > 0`, else 0.
pub fn ordinal_equiv(f: &ConcreteAffine, delta: &Rational, x: &[Rational]) -> Result<BigUint, RankingError> {
    if !delta.is_positive() {
        return Err(RankingError::NonPositiveStep { name: "delta".into(), value: fmt_ratio(delta) });
    }
    Ok(hat(f, delta, x))
}

fn hat(f: &ConcreteAffine, delta: &Rational, x: &[Rational]) -> BigUint {
    let v = f.eval(x);
    if v.is_positive() {
        ceil(&(v / delta)).to_biguint().expect("positive ceiling")
    } else {
        BigUint::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankingFunction {
    Pr { f: ConcreteAffine, delta: Rational },
    Multiphase { fs: Vec<ConcreteAffine>, deltas: Vec<Rational> },
    Piecewise { fs: Vec<ConcreteAffine>, gs: Vec<ConcreteAffine>, delta: Rational },
    Lexicographic { fs: Vec<ConcreteAffine>, deltas: Vec<Rational> },
    MultiphaseLex { fs: Vec<Vec<ConcreteAffine>>, deltas: Vec<Vec<Rational>> },
}

fn step(d: &Parameter, nu: &Model) -> Result<Rational, RankingError> {
    let v = nu.get(d.name()).cloned().ok_or_else(|| RankingError::MissingBinding(d.name().to_string()))?;
    if !v.is_positive() {
        return Err(RankingError::NonPositiveStep { name: d.name().to_string(), value: fmt_ratio(&v) });
    }
    Ok(v)
}

/// Reads the ranking function of `t` out of an assignment to its parameters.
pub fn extract(t: &RankingTemplate, space: &StateSpace, nu: &Model) -> Result<RankingFunction, RankingError> {
    let fun = |s: &AffineSymbol| ConcreteAffine::resolve(s, space, nu);
    let funs = |ss: &[AffineSymbol]| ss.iter().map(fun).collect::<Result<Vec<_>, _>>();
    let steps = |ds: &[Parameter]| ds.iter().map(|d| step(d, nu)).collect::<Result<Vec<_>, _>>();
    Ok(match &t.extraction {
        Extraction::Pr { f, delta } => RankingFunction::Pr { f: fun(f)?, delta: step(delta, nu)? },
        Extraction::Multiphase { fs, deltas } => {
            RankingFunction::Multiphase { fs: funs(fs)?, deltas: steps(deltas)? }
        }
        Extraction::Piecewise { fs, gs, delta } => {
            RankingFunction::Piecewise { fs: funs(fs)?, gs: funs(gs)?, delta: step(delta, nu)? }
        }
        Extraction::Lexicographic { fs, deltas } => {
            RankingFunction::Lexicographic { fs: funs(fs)?, deltas: steps(deltas)? }
        }
        Extraction::MultiphaseLex { fs, deltas } => RankingFunction::MultiphaseLex {
            fs: fs.iter().map(|row| funs(row)).collect::<Result<_, _>>()?,
            deltas: deltas.iter().map(|row| steps(row)).collect::<Result<_, _>>()?,
        },
    })
}

/// Index of the first positive function: the active phase.
fn active_phase(fs: &[ConcreteAffine], x: &[Rational]) -> Option<usize> {
    fs.iter().position(|f| f.eval(x).is_positive())
}

/// The ordinal rank of state `x`; `None` where a piecewise function has no
/// applicable piece.
pub fn evaluate(r: &RankingFunction, x: &[Rational]) -> Option<OrdinalValue> {
    Some(match r {
        RankingFunction::Pr { f, delta } => OrdinalValue::natural(hat(f, delta, x)),
        RankingFunction::Multiphase { fs, deltas } => match active_phase(fs, x) {
            Some(i) => {
                let k = fs.len() as u32;
                OrdinalValue::from_digits([
                    (1, BigUint::from(k - 1 - i as u32)),
                    (0, hat(&fs[i], &deltas[i], x)),
                ])
            }
            None => OrdinalValue::zero(),
        },
        RankingFunction::Piecewise { fs, gs, delta } => {
            let best = fs
                .iter()
                .zip(gs)
                .filter(|(_, g)| !g.eval(x).is_negative())
                .map(|(f, _)| hat(f, delta, x))
                .max()?;
            OrdinalValue::natural(best)
        }
        RankingFunction::Lexicographic { fs, deltas } => {
            let k = fs.len() as u32;
            OrdinalValue::from_digits(
                fs.iter().zip(deltas).enumerate().map(|(i, (f, d))| (k - 1 - i as u32, hat(f, d, x))),
            )
        }
        RankingFunction::MultiphaseLex { fs, deltas } => {
            let k = fs.len() as u32;
            let mut digits = Vec::new();
            for (i, (row, ds)) in fs.iter().zip(deltas).enumerate() {
                let base = 2 * (k - 1 - i as u32);
                if let Some(p) = active_phase(row, x) {
                    let l = row.len() as u32;
                    digits.push((base + 1, BigUint::from(l - 1 - p as u32)));
                    digits.push((base, hat(&row[p], &ds[p], x)));
                }
            }
            OrdinalValue::from_digits(digits)
        }
    })
}

fn render_funs(out: &mut Vec<String>, space: &StateSpace, name: &str, fs: &[ConcreteAffine]) {
    let args = space.names().join(", ");
    for (i, f) in fs.iter().enumerate() {
        out.push(format!("{name}_{}({args}) = {}", i + 1, f.render(space)));
    }
}

impl RankingFunction {
    pub fn kind_name(&self) -> String {
        match self {
            RankingFunction::Pr { .. } => "linear".into(),
            RankingFunction::Multiphase { fs, .. } => format!("{}-phase", fs.len()),
            RankingFunction::Piecewise { fs, .. } => format!("{}-piece", fs.len()),
            RankingFunction::Lexicographic { fs, .. } => format!("{}-lexicographic", fs.len()),
            RankingFunction::MultiphaseLex { fs, .. } => {
                format!("{}-lexicographic {}-phase", fs.len(), fs.first().map_or(0, Vec::len))
            }
        }
    }

    /// e.g. `2-phase: f_1(q, y) = -y + 1, f_2(q, y) = q + 1, delta_1 = 1/2, delta_2 = 1/2`
    pub fn render(&self, space: &StateSpace) -> String {
        let args = space.names().join(", ");
        let mut parts = Vec::new();
        let steps = |out: &mut Vec<String>, name: &str, ds: &[Rational]| {
            for (i, d) in ds.iter().enumerate() {
                out.push(format!("{name}_{} = {}", i + 1, fmt_ratio(d)));
            }
        };
        match self {
            RankingFunction::Pr { f, delta } => {
                parts.push(format!("f({args}) = {}", f.render(space)));
                parts.push(format!("delta = {}", fmt_ratio(delta)));
            }
            RankingFunction::Multiphase { fs, deltas } | RankingFunction::Lexicographic { fs, deltas } => {
                render_funs(&mut parts, space, "f", fs);
                steps(&mut parts, "delta", deltas);
            }
            RankingFunction::Piecewise { fs, gs, delta } => {
                render_funs(&mut parts, space, "f", fs);
                render_funs(&mut parts, space, "g", gs);
                parts.push(format!("delta = {}", fmt_ratio(delta)));
            }
            RankingFunction::MultiphaseLex { fs, deltas } => {
                for (i, (row, ds)) in fs.iter().zip(deltas).enumerate() {
                    for (j, (f, d)) in row.iter().zip(ds).enumerate() {
                        parts.push(format!("f_{}_{}({args}) = {}", i + 1, j + 1, f.render(space)));
                        parts.push(format!("delta_{}_{} = {}", i + 1, j + 1, fmt_ratio(d)));
                    }
                }
            }
        }
        format!("{}: {}", self.kind_name(), parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::template::{multiphase, piecewise, pr_template};

    fn aff(coeffs: &[i64], c: i64) -> ConcreteAffine {
        ConcreteAffine::new(coeffs.iter().map(|&a| int(a)).collect(), int(c))
    }

    fn nat(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn ordinal_equivalents() {
        let f = aff(&[1], 0);
        assert_eq!(ordinal_equiv(&f, &ratio(1, 2), &[int(3)]).unwrap(), nat(6));
        assert_eq!(ordinal_equiv(&f, &ratio(1, 2), &[int(-1)]).unwrap(), nat(0));
        let g = aff(&[1], 1);
        assert_eq!(ordinal_equiv(&g, &ratio(1, 2), &[ratio(5, 2)]).unwrap(), nat(7));
        assert!(ordinal_equiv(&f, &int(0), &[int(1)]).is_err());
        assert!(ordinal_equiv(&f, &int(-1), &[int(1)]).is_err());
    }

    fn fig1_space() -> StateSpace {
        StateSpace::new(["q", "y"]).unwrap()
    }

    fn model(entries: &[(&str, Rational)]) -> Model {
        entries.iter().map(|(n, v)| (n.to_string(), v.clone())).collect()
    }

    fn fig1_multiphase_model() -> Model {
        model(&[
            ("delta_1", ratio(1, 2)),
            ("delta_2", ratio(1, 2)),
            ("s_f_1_q", int(0)),
            ("s_f_1_y", int(-1)),
            ("t_f_1", int(1)),
            ("s_f_2_q", int(1)),
            ("s_f_2_y", int(0)),
            ("t_f_2", int(1)),
        ])
    }

    #[test]
    fn extract_fig1_multiphase() {
        let r = extract(&multiphase(2).unwrap(), &fig1_space(), &fig1_multiphase_model()).unwrap();
        assert_eq!(
            r,
            RankingFunction::Multiphase {
                fs: vec![aff(&[0, -1], 1), aff(&[1, 0], 1)],
                deltas: vec![ratio(1, 2), ratio(1, 2)],
            }
        );
        assert_eq!(
            r.render(&fig1_space()),
            "2-phase: f_1(q, y) = -y + 1, f_2(q, y) = q + 1, delta_1 = 1/2, delta_2 = 1/2"
        );
    }

    #[test]
    fn evaluate_fig1_multiphase() {
        let r = extract(&multiphase(2).unwrap(), &fig1_space(), &fig1_multiphase_model()).unwrap();
        let omega_plus_6 = OrdinalValue::from_digits([(1, nat(1)), (0, nat(6))]);
        assert_eq!(evaluate(&r, &[int(5), int(-2)]), Some(omega_plus_6));
        assert_eq!(evaluate(&r, &[int(5), int(2)]), Some(OrdinalValue::natural(12u32)));
        assert_eq!(evaluate(&r, &[int(-5), int(2)]), Some(OrdinalValue::zero()));
    }

    #[test]
    fn extract_pieces() {
        let space = StateSpace::new(["p", "q"]).unwrap();
        let nu = model(&[
            ("delta", ratio(1, 2)),
            ("s_f_1_p", int(1)),
            ("s_f_1_q", int(0)),
            ("t_f_1", int(0)),
            ("s_f_2_p", int(0)),
            ("s_f_2_q", int(1)),
            ("t_f_2", int(0)),
            ("s_g_1_p", int(-1)),
            ("s_g_1_q", int(1)),
            ("t_g_1", int(0)),
            ("s_g_2_p", int(1)),
            ("s_g_2_q", int(-1)),
            ("t_g_2", int(0)),
        ]);
        let r = extract(&piecewise(2).unwrap(), &space, &nu).unwrap();
        assert_eq!(
            r,
            RankingFunction::Piecewise {
                fs: vec![aff(&[1, 0], 0), aff(&[0, 1], 0)],
                gs: vec![aff(&[-1, 1], 0), aff(&[1, -1], 0)],
                delta: ratio(1, 2),
            }
        );
        // p=3, q=5: g_1 = 2 ≥ 0 selects f_1 = 3, g_2 < 0
        assert_eq!(evaluate(&r, &[int(3), int(5)]), Some(OrdinalValue::natural(6u32)));
        let empty = RankingFunction::Piecewise { fs: vec![aff(&[1], 0)], gs: vec![aff(&[1], 0)], delta: int(1) };
        assert_eq!(evaluate(&empty, &[int(-1)]), None);
    }

    #[test]
    fn extract_pr_example() {
        let nu = model(&[("delta", ratio(1, 2)), ("s_f_q", int(1)), ("s_f_y", int(0)), ("t_f", int(1))]);
        let r = extract(&pr_template(), &fig1_space(), &nu).unwrap();
        assert_eq!(r, RankingFunction::Pr { f: aff(&[1, 0], 1), delta: ratio(1, 2) });
        for y in [-4, 0, 7] {
            assert_eq!(evaluate(&r, &[int(3), int(y)]), Some(OrdinalValue::natural(8u32)));
        }
    }

    #[test]
    fn extract_errors() {
        let mut nu = model(&[("delta", int(0)), ("s_f_q", int(1)), ("s_f_y", int(0)), ("t_f", int(1))]);
        assert!(matches!(
            extract(&pr_template(), &fig1_space(), &nu),
            Err(RankingError::NonPositiveStep { .. })
        ));
        nu.insert("delta", int(1));
        let missing = nu.restrict(["delta", "s_f_q"]);
        assert_eq!(
            extract(&pr_template(), &fig1_space(), &missing),
            Err(RankingError::MissingBinding("s_f_y".into()))
        );
    }

    #[test]
    fn lexicographic_and_composed_values() {
        let lex = RankingFunction::Lexicographic {
            fs: vec![aff(&[1, 0], 0), aff(&[0, 1], 0)],
            deltas: vec![int(1), int(1)],
        };
        assert_eq!(
            evaluate(&lex, &[int(2), int(3)]),
            Some(OrdinalValue::from_digits([(1, nat(2)), (0, nat(3))]))
        );
        let composed = RankingFunction::MultiphaseLex {
            fs: vec![vec![aff(&[1, 0], 0), aff(&[0, 1], 0)], vec![aff(&[0, 1], 0), aff(&[1, 0], 0)]],
            deltas: vec![vec![int(1), int(1)], vec![int(1), int(1)]],
        };
        // component 1 in phase 2 (x ≤ 0 < y), component 2 in phase 1
        assert_eq!(
            evaluate(&composed, &[int(-1), int(4)]),
            Some(OrdinalValue::from_digits([(2, nat(4)), (1, nat(1)), (0, nat(4))]))
        );
    }
}
