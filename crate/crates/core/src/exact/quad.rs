//! Elements `a + b sqrt(d)` of a real quadratic field.

use super::{ExactError, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Eq, Hash)]
pub struct QuadExt {
    pub d: BigInt,
    pub a: Rational,
    pub b: Rational,
}

impl PartialEq for QuadExt {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && (self.b.is_zero() || self.d == other.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Field arithmetic on two elements of the same field (a rational operand
/// fits any field).
pub fn quad_arith(op: QuadOp, u: &QuadExt, v: &QuadExt) -> Result<QuadExt, ExactError> {
    match op {
        QuadOp::Add => u.add(v),
        QuadOp::Sub => u.sub(v),
        QuadOp::Mul => u.mul(v),
        QuadOp::Div => u.div(v),
    }
}

impl QuadExt {
    /// `a + b sqrt(d)`; `d` must be a squarefree positive integer.
    pub fn new(d: impl Into<BigInt>, a: Rational, b: Rational) -> Result<Self, ExactError> {
        let d = d.into();
        if !d.is_positive() || !is_squarefree(&d) {
            return Err(ExactError::Domain(format!("{d} is not a squarefree positive integer")));
        }
        if d.is_one() {
            return Ok(QuadExt::rational(a + b));
        }
        Ok(QuadExt { d, a, b })
    }

    pub fn rational(a: Rational) -> Self {
        QuadExt {
            d: BigInt::one(),
            a,
            b: Rational::zero(),
        }
    }

    /// `k * sqrt(d)` written in lowest terms for any nonnegative rational
    /// radicand.
    pub fn sqrt_of(r: &Rational) -> Result<Self, ExactError> {
        if r.is_negative() {
            return Err(ExactError::Domain(format!("sqrt of {r}")));
        }
        // sqrt(p/q) = sqrt(p q) / q
        let pq = r.numer() * r.denom();
        let (s, d) = square_split(&pq);
        let coef = Rational::new(s, r.denom().clone());
        if d.is_one() {
            Ok(QuadExt::rational(coef))
        } else {
            Ok(QuadExt {
                d,
                a: Rational::zero(),
                b: coef,
            })
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn common_d(&self, other: &QuadExt) -> Result<BigInt, ExactError> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Ok(other.d.clone()),
            (false, true) => Ok(self.d.clone()),
            (false, false) if self.d == other.d => Ok(self.d.clone()),
            _ => Err(ExactError::MismatchedFields(self.d.clone(), other.d.clone())),
        }
    }

    fn build(d: BigInt, a: Rational, b: Rational) -> QuadExt {
        if b.is_zero() {
            QuadExt::rational(a)
        } else {
            QuadExt { d, a, b }
        }
    }

    pub fn add(&self, other: &QuadExt) -> Result<QuadExt, ExactError> {
        let d = self.common_d(other)?;
        Ok(QuadExt::build(d, &self.a + &other.a, &self.b + &other.b))
    }

    pub fn neg(&self) -> QuadExt {
        QuadExt::build(self.d.clone(), -&self.a, -&self.b)
    }

    pub fn sub(&self, other: &QuadExt) -> Result<QuadExt, ExactError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &QuadExt) -> Result<QuadExt, ExactError> {
        let d = self.common_d(other)?;
        let dr = Rational::from_integer(d.clone());
        let a = &self.a * &other.a + &self.b * &other.b * dr;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(QuadExt::build(d, a, b))
    }

    /// `a - b sqrt(d)`.
    pub fn conj(&self) -> QuadExt {
        QuadExt::build(self.d.clone(), self.a.clone(), -&self.b)
    }

    /// `a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn inv(&self) -> Result<QuadExt, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let n = self.norm();
        let c = self.conj();
        Ok(QuadExt::build(c.d, c.a / &n, c.b / n))
    }

    pub fn div(&self, other: &QuadExt) -> Result<QuadExt, ExactError> {
        self.common_d(other)?;
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, k: i32) -> Result<QuadExt, ExactError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = QuadExt::rational(Rational::one());
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with d b^2
        let a2 = &self.a * &self.a;
        let db2 = &self.b * &self.b * Rational::from_integer(self.d.clone());
        match a2.cmp(&db2) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_exact(&self, other: &QuadExt) -> Result<Ordering, ExactError> {
        Ok(self.sub(other)?.signum())
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.b.is_zero() {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * self.d.to_f64().unwrap_or(f64::NAN).sqrt()
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{} ", self.a)?;
            f.write_str(if self.b.is_negative() { "- " } else { "+ " })?;
            write!(f, "{}*sqrt({})", self.b.abs(), self.d)
        } else {
            write!(f, "{}*sqrt({})", self.b, self.d)
        }
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Writes `n = s^2 * d` with `d` squarefree as far as trial division up to
/// a million can tell (a leftover cofactor is kept whole unless it is a
/// perfect square).
pub fn square_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.abs();
    let mut s = BigInt::one();
    let mut d = BigInt::one();
    if rest.is_zero() {
        return (BigInt::zero(), BigInt::one());
    }
    let mut p = 2u64;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0u32;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            s *= pb.pow(e / 2);
            if e % 2 == 1 {
                d *= &pb;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = rest.sqrt();
    if &r * &r == rest {
        s *= r;
    } else {
        d *= rest;
    }
    (s, d)
}

pub fn is_squarefree(n: &BigInt) -> bool {
    square_split(n).0.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn scaling_the_n8_value() {
        let delta8 = QuadExt::new(13, q(-1, 36), q(1, 36)).unwrap();
        let r = quad_arith(QuadOp::Mul, &delta8, &QuadExt::rational(q(36, 1))).unwrap();
        assert_eq!(r, QuadExt::new(13, q(-1, 1), q(1, 1)).unwrap());
    }

    #[test]
    fn norm_identity() {
        let u = QuadExt::new(65, q(3, 8), q(-1, 40)).unwrap();
        let p = u.mul(&u.conj()).unwrap();
        assert!(p.is_rational());
        assert_eq!(p.a, u.norm());
    }

    #[test]
    fn n9_value_in_floating_point() {
        let d9 = QuadExt::new(65, q(-11, 64), q(9, 320)).unwrap();
        assert!((d9.to_f64() - 0.0548759).abs() < 1e-7);
    }

    #[test]
    fn mismatched_fields_and_zero_division() {
        let a = QuadExt::new(13, q(0, 1), q(1, 1)).unwrap();
        let b = QuadExt::new(65, q(0, 1), q(1, 1)).unwrap();
        assert!(matches!(a.add(&b), Err(ExactError::MismatchedFields(..))));
        assert_eq!(a.div(&QuadExt::rational(q(0, 1))), Err(ExactError::DivisionByZero));
        // rationals mix with anything
        assert!(a.add(&QuadExt::rational(q(1, 2))).is_ok());
    }

    #[test]
    fn exact_sign() {
        // 9/16 - 3 sqrt(65)/80 ~ 0.2602 > 0
        let y = QuadExt::new(65, q(9, 16), q(-3, 80)).unwrap();
        assert_eq!(y.signum(), Ordering::Greater);
        // 1 - sqrt(2) < 0
        assert_eq!(QuadExt::new(2, q(1, 1), q(-1, 1)).unwrap().signum(), Ordering::Less);
    }

    #[test]
    fn radicands_are_reduced() {
        let r = QuadExt::sqrt_of(&q(12, 1)).unwrap();
        assert_eq!((r.d.clone(), r.b.clone()), (BigInt::from(3), q(2, 1)));
        let r = QuadExt::sqrt_of(&q(1, 3)).unwrap();
        assert_eq!((r.d.clone(), r.b.clone()), (BigInt::from(3), q(1, 3)));
        assert!(QuadExt::sqrt_of(&q(9, 4)).unwrap().is_rational());
        assert!(QuadExt::new(12, q(0, 1), q(1, 1)).is_err());
    }

    #[test]
    fn inverse() {
        let u = QuadExt::new(3, q(1, 2), q(1, 3)).unwrap();
        let one = u.mul(&u.inv().unwrap()).unwrap();
        assert_eq!(one, QuadExt::rational(q(1, 1)));
    }
}
