//! Rational interval arithmetic with outward rounding to a dyadic grid.
//!
//! Every operation takes a working precision `w` and rounds its result
//! outward to multiples of `2^-w`, so endpoint sizes stay bounded no matter
//! how deep the expression is.

use super::{ExactError, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Enclosure {
    pub lo: Rational,
    pub hi: Rational,
}

fn scale(w: u32) -> BigInt {
    BigInt::one() << w
}

fn floor_to(q: &Rational, w: u32) -> Rational {
    let s = scale(w);
    Rational::new((q * Rational::from_integer(s.clone())).floor().to_integer(), s)
}

fn ceil_to(q: &Rational, w: u32) -> Rational {
    let s = scale(w);
    Rational::new((q * Rational::from_integer(s.clone())).ceil().to_integer(), s)
}

impl Enclosure {
    pub fn exact(v: Rational) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Enclosure { lo, hi }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, v: &Rational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset_of(&self, other: &Enclosure) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / Rational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// Outward rounding onto the `2^-w` grid.
    pub fn round(&self, w: u32) -> Enclosure {
        Enclosure {
            lo: floor_to(&self.lo, w),
            hi: ceil_to(&self.hi, w),
        }
    }

    pub fn add(&self, o: &Enclosure, w: u32) -> Enclosure {
        Enclosure::new(&self.lo + &o.lo, &self.hi + &o.hi).round(w)
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-&self.hi, -&self.lo)
    }

    pub fn sub(&self, o: &Enclosure, w: u32) -> Enclosure {
        self.add(&o.neg(), w)
    }

    pub fn mul(&self, o: &Enclosure, w: u32) -> Enclosure {
        let p = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        Enclosure::new(lo, hi).round(w)
    }

    /// Fails when the interval touches zero.
    pub fn recip(&self, w: u32) -> Result<Enclosure, ExactError> {
        if self.contains_zero() {
            return Err(ExactError::DivisionByZero);
        }
        Ok(Enclosure::new(self.hi.recip(), self.lo.recip()).round(w))
    }

    pub fn div(&self, o: &Enclosure, w: u32) -> Result<Enclosure, ExactError> {
        Ok(self.mul(&o.recip(w + 4)?, w))
    }

    /// Square root; a negative lower end is clamped to zero, a negative
    /// upper end is a domain error.
    pub fn sqrt(&self, w: u32) -> Result<Enclosure, ExactError> {
        if self.hi.is_negative() {
            return Err(ExactError::Domain(format!("sqrt of negative enclosure [{}, {}]", self.lo, self.hi)));
        }
        let s2 = Rational::from_integer(scale(2 * w));
        let lo = if self.lo.is_positive() {
            (&self.lo * &s2).floor().to_integer().sqrt()
        } else {
            BigInt::zero()
        };
        let hi_scaled = (&self.hi * &s2).ceil().to_integer();
        let mut hi = hi_scaled.sqrt();
        if &hi * &hi < hi_scaled {
            hi += 1;
        }
        Ok(Enclosure::new(Rational::new(lo, scale(w)), Rational::new(hi, scale(w))))
    }

    /// Real cube root.
    pub fn cbrt(&self, w: u32) -> Enclosure {
        let s3 = Rational::from_integer(scale(3 * w));
        let down = |q: &Rational| -> BigInt {
            // floor(cbrt(q * 2^3w))
            let v = (q * &s3).floor().to_integer();
            let mut r = v.cbrt();
            while &r * &r * &r > v {
                r -= 1;
            }
            while (&r + 1) * (&r + 1) * (&r + 1) <= v {
                r += 1;
            }
            r
        };
        let up = |q: &Rational| -> BigInt {
            let v = (q * &s3).ceil().to_integer();
            let mut r = v.cbrt();
            while &r * &r * &r < v {
                r += 1;
            }
            while (&r - 1) * (&r - 1) * (&r - 1) >= v {
                r -= 1;
            }
            r
        };
        Enclosure::new(Rational::new(down(&self.lo), scale(w)), Rational::new(up(&self.hi), scale(w)))
    }

    pub fn powi(&self, k: u32, w: u32) -> Enclosure {
        let mut acc = Enclosure::exact(Rational::one());
        for _ in 0..k {
            acc = acc.mul(self, w);
        }
        if k % 2 == 0 && k > 0 && self.contains_zero() {
            acc.lo = Rational::zero();
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn sqrt_three_enclosure() {
        let e = Enclosure::exact(q(3, 1)).sqrt(64).unwrap();
        assert!(e.lo_f64() <= 3f64.sqrt() && 3f64.sqrt() <= e.hi_f64());
        assert!(&e.lo * &e.lo <= q(3, 1) && &e.hi * &e.hi >= q(3, 1));
        assert!(e.width() <= Rational::new(BigInt::one(), scale(63)));
    }

    #[test]
    fn cube_roots_bracket() {
        for v in [q(2, 1), q(-5, 3), q(27, 8)] {
            let e = Enclosure::exact(v.clone()).cbrt(50);
            assert!(&e.lo * &e.lo * &e.lo <= v && &e.hi * &e.hi * &e.hi >= v, "{v}");
        }
    }

    #[test]
    fn division_by_interval_with_zero() {
        let z = Enclosure::new(q(-1, 10), q(1, 10));
        assert_eq!(Enclosure::exact(q(1, 1)).div(&z, 20), Err(ExactError::DivisionByZero));
    }

    #[test]
    fn negative_sqrt_rejected() {
        assert!(Enclosure::new(q(-2, 1), q(-1, 1)).sqrt(10).is_err());
        let e = Enclosure::new(q(-1, 100), q(1, 4)).sqrt(10).unwrap();
        assert!(e.lo.is_zero() && e.hi >= q(1, 2));
    }

    #[test]
    fn even_power_is_nonnegative() {
        let e = Enclosure::new(q(-1, 1), q(2, 1)).powi(2, 10);
        assert_eq!(e.lo, q(0, 1));
        assert!(e.hi >= q(4, 1));
    }
}
