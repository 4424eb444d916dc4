use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// An ordinal below `ω^ω` in Cantor normal form: `Σ ω^e·c` with strictly
/// descending exponents and positive coefficients. The empty sum is 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct OrdinalValue {
    terms: Vec<(u32, BigUint)>,
}

impl OrdinalValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn omega() -> Self {
        Self { terms: vec![(1, BigUint::one())] }
    }

    pub fn natural(n: impl Into<BigUint>) -> Self {
        Self::from_digits([(0, n.into())])
    }

    /// Builds `Σ ω^e·c` from digits with pairwise distinct exponents, in any
    /// order; zero coefficients are dropped.
    pub fn from_digits(digits: impl IntoIterator<Item = (u32, BigUint)>) -> Self {
        let mut terms: Vec<(u32, BigUint)> =
            digits.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        assert!(
            terms.windows(2).all(|w| w[0].0 != w[1].0),
            "exponents of a normal form must be distinct"
        );
        Self { terms }
    }

    /// Accepts only a valid normal form.
    pub fn new(terms: Vec<(u32, BigUint)>) -> Option<Self> {
        let descending = terms.windows(2).all(|w| w[0].0 > w[1].0);
        let positive = terms.iter().all(|(_, c)| !c.is_zero());
        (descending && positive).then_some(Self { terms })
    }

    pub fn terms(&self) -> &[(u32, BigUint)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exponent: u32) -> BigUint {
        self.terms
            .iter()
            .find(|(e, _)| *e == exponent)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }
}

impl Ord for OrdinalValue {
    fn cmp(&self, other: &Self) -> Ordering {
        // lexicographic on (exponent, coefficient); a proper prefix is smaller
        for (a, b) in self.terms.iter().zip(&other.terms) {
            match a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for OrdinalValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn ordinal_cmp(a: &OrdinalValue, b: &OrdinalValue) -> Ordering {
    a.cmp(b)
}

impl fmt::Display for OrdinalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let base = match e {
                0 => String::new(),
                1 => "ω".to_string(),
                e => format!("ω^{e}"),
            };
            match (base.is_empty(), c.is_one()) {
                (true, _) => write!(f, "{c}")?,
                (false, true) => f.write_str(&base)?,
                (false, false) => write!(f, "{base}·{c}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(terms: &[(u32, u64)]) -> OrdinalValue {
        OrdinalValue::new(terms.iter().map(|&(e, c)| (e, BigUint::from(c))).collect()).unwrap()
    }

    #[test]
    fn omega_dominates_naturals() {
        assert_eq!(ordinal_cmp(&OrdinalValue::omega(), &o(&[(0, 1_000_000)])), Ordering::Greater);
    }

    #[test]
    fn same_leading_term() {
        assert_eq!(ordinal_cmp(&o(&[(1, 1), (0, 6)]), &o(&[(1, 1), (0, 5)])), Ordering::Greater);
        assert_eq!(ordinal_cmp(&o(&[(1, 1)]), &o(&[(1, 1), (0, 1)])), Ordering::Less);
    }

    #[test]
    fn higher_exponent_wins() {
        assert_eq!(ordinal_cmp(&o(&[(2, 1)]), &o(&[(1, 9), (0, 9)])), Ordering::Greater);
        assert_eq!(ordinal_cmp(&OrdinalValue::zero(), &o(&[(0, 1)])), Ordering::Less);
    }

    #[test]
    fn normal_form_validation() {
        assert!(OrdinalValue::new(vec![(0, BigUint::from(1u8)), (1, BigUint::from(1u8))]).is_none());
        assert!(OrdinalValue::new(vec![(1, BigUint::zero())]).is_none());
        let built = OrdinalValue::from_digits([(0, BigUint::from(6u8)), (1, BigUint::one()), (3, BigUint::zero())]);
        assert_eq!(built, o(&[(1, 1), (0, 6)]));
    }

    #[test]
    fn rendering() {
        assert_eq!(o(&[(2, 3), (1, 1), (0, 5)]).to_string(), "ω^2·3 + ω + 5");
        assert_eq!(OrdinalValue::zero().to_string(), "0");
    }
}
