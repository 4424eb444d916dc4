//! Ranking functions read back from template assignments, their ordinal
//! values, and grid certification.

mod certify;
mod function;
mod ordinal;

pub use certify::{certify, CertReport, Violation};
pub use function::{evaluate, extract, ordinal_equiv, ConcreteAffine, RankingError, RankingFunction};
pub use ordinal::{ordinal_cmp, OrdinalValue};
