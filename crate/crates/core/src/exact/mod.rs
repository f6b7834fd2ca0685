//! Exact and certified arithmetic.
//!
//! Rationals are arbitrary precision. Irrational values are either elements
//! of a real quadratic field ([`QuadExt`]) or expression trees over
//! rationals with square roots, cube roots and tagged polynomial roots
//! ([`AlgebraicExpr`]), evaluated by outward-rounded interval arithmetic.
//! Equality is only ever concluded from an exact normal form.

pub mod expr;
pub mod field;
pub mod interval;
pub mod poly;
pub mod quad;

pub use expr::{certified_compare, interval_eval, AlgebraicExpr};
pub use field::FieldElem;
pub use interval::Enclosure;
pub use poly::{sturm_isolate, IsolatingInterval, Poly};
pub use quad::{quad_arith, QuadExt, QuadOp};

use num_bigint::BigInt;
use thiserror::Error;

pub type Rational = num_rational::BigRational;

/// Working precision, in bits, when nothing else is requested.
pub const DEFAULT_PRECISION_BITS: u32 = 64;
/// No enclosure is ever refined beyond this many bits.
pub const PRECISION_CAP: u32 = 4096;
pub const PRECISION_ENV: &str = "HEILBRONN_PRECISION_BITS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("elements of Q(sqrt {0}) and Q(sqrt {1}) do not mix")]
    MismatchedFields(BigInt, BigInt),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("comparison undecided at the {0}-bit precision cap")]
    Undecided(u32),
    #[error("requested precision {0} exceeds the cap")]
    PrecisionCap(u32),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("invalid root tag: {0}")]
    BadRootTag(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Default precision, overridable through `HEILBRONN_PRECISION_BITS`.
pub fn default_precision_bits() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&b| (1..=PRECISION_CAP).contains(&b))
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

/// `p / q` as a rational.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}
