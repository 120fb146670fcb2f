// Negated comparisons deliberately reject NaN; series coefficients keep
// their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod approx;
pub mod catalog;
pub mod error;
pub mod fit;
pub mod harness;
pub mod montecarlo;
pub mod precision;
pub mod quadrature;
pub mod severity;
pub mod specfun;

pub use error::{Error, Result};
pub use severity::{Family, FamilyTag, SeverityModel};
