//! Dense univariate polynomials over the rationals and Sturm root isolation.

use super::{ExactError, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// `coeffs[k]` multiplies `x^k`; no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        Poly::from_ints(&[0, 1])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial has none.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Sign of the value at `x`: -1, 0 or 1.
    pub fn sign_at(&self, x: &Rational) -> i32 {
        let v = self.eval(x);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rational::zero(); len];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Poly::new(out)
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::default();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Quotient and remainder of Euclidean division.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), ExactError> {
        let dd = divisor.degree().ok_or(ExactError::DivisionByZero)?;
        let lead = divisor.lead().unwrap().clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::default(), self.clone()));
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * d;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly, ExactError> {
        Ok(self.div_rem(divisor)?.1)
    }

    pub fn monic(&self) -> Poly {
        match self.lead() {
            Some(l) => self.scale(&l.recip()),
            None => Poly::default(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Inverse of `self` modulo `m`, if they are coprime.
    pub fn inv_mod(&self, m: &Poly) -> Option<Poly> {
        // extended Euclid tracking the coefficient of self
        let (mut r0, mut r1) = (m.clone(), self.rem(m).ok()?);
        let (mut s0, mut s1) = (Poly::default(), Poly::constant(Rational::one()));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1).ok()?;
            let s = s0.sub(&q.mul(&s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        let inv = s0.scale(&r0.coeffs[0].recip());
        inv.rem(m).ok()
    }

    /// `self / gcd(self, self')`.
    pub fn squarefree_part(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).expect("nonzero gcd").0
    }

    /// Polynomial composition `self(other)`.
    pub fn compose(&self, other: &Poly) -> Poly {
        let mut acc = Poly::default();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(other).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Scales to coprime integer coefficients with positive leading term.
    pub fn primitive(&self) -> Vec<BigInt> {
        use num_integer::Integer;
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * &den).to_integer()).collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return ints;
        }
        if ints.last().is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        ints.into_iter().map(|c| c / &g).collect()
    }

    /// Cauchy bound: every real root lies strictly inside `(-B, B)`.
    fn root_bound(&self) -> Rational {
        let lead = self.lead().expect("nonzero").abs();
        let mut m = Rational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let r = c.abs() / &lead;
            if r > m {
                m = r;
            }
        }
        (m + Rational::one()).ceil() + Rational::one()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    f.write_str("x")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Sturm sequence of a squarefree polynomial.
#[derive(Debug, Clone)]
pub struct SturmChain {
    seq: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].rem(&seq[n - 1]).expect("nonzero").neg();
            seq.push(r);
        }
        seq.pop();
        SturmChain { seq }
    }

    /// Number of sign changes at `x`, zeros skipped.
    pub fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last = 0;
        for p in &self.seq {
            let s = p.sign_at(x);
            if s != 0 {
                if last != 0 && s != last {
                    count += 1;
                }
                last = s;
            }
        }
        count
    }

    /// Distinct real roots in `(lo, hi]`.
    pub fn count(&self, lo: &Rational, hi: &Rational) -> usize {
        self.variations(lo) - self.variations(hi)
    }
}

/// A rational interval holding exactly one real root of `poly`, with `poly`
/// nonzero at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IsolatingInterval {
    pub lo: Rational,
    pub hi: Rational,
    pub poly: Poly,
}

impl IsolatingInterval {
    /// Checks the isolation claim for an arbitrary polynomial and interval.
    pub fn new(poly: Poly, lo: Rational, hi: Rational) -> Result<Self, ExactError> {
        if poly.is_zero() {
            return Err(ExactError::ZeroPolynomial);
        }
        if lo >= hi {
            return Err(ExactError::BadRootTag(format!("empty interval [{lo}, {hi}]")));
        }
        if poly.sign_at(&lo) == 0 || poly.sign_at(&hi) == 0 {
            return Err(ExactError::BadRootTag("root at an interval end".into()));
        }
        let sq = poly.squarefree_part();
        let roots = SturmChain::new(&sq).count(&lo, &hi);
        if roots != 1 {
            return Err(ExactError::BadRootTag(format!(
                "{roots} roots of {poly} in [{lo}, {hi}]"
            )));
        }
        Ok(IsolatingInterval { lo, hi, poly })
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// One bisection step, or the exact root if the midpoint is one.
    pub fn bisect(&mut self) -> Option<Rational> {
        let sq = self.poly.squarefree_part();
        let mid = (&self.lo + &self.hi) / Rational::from_integer(2.into());
        let sm = sq.sign_at(&mid);
        if sm == 0 {
            return Some(mid);
        }
        if sm == sq.sign_at(&self.lo) {
            self.lo = mid;
        } else {
            self.hi = mid;
        }
        None
    }

    /// Bisects until the width is at most `2^-bits`. Returns the exact root
    /// if one is hit.
    pub fn refine_to(&mut self, bits: u32) -> Option<Rational> {
        let target = Rational::new(BigInt::one(), BigInt::one() << bits);
        let sq = self.poly.squarefree_part();
        let mut s_lo = sq.sign_at(&self.lo);
        let two = Rational::from_integer(2.into());
        while self.width() > target {
            let mid = (&self.lo + &self.hi) / &two;
            let sm = sq.sign_at(&mid);
            if sm == 0 {
                return Some(mid);
            }
            if sm == s_lo {
                self.lo = mid;
                s_lo = sm;
            } else {
                self.hi = mid;
            }
        }
        None
    }

    pub fn midpoint_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        ((&self.lo + &self.hi) / Rational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

/// Isolates every real root of `poly`, sorted ascending with pairwise
/// disjoint closed intervals.
pub fn sturm_isolate(poly: &Poly) -> Result<Vec<IsolatingInterval>, ExactError> {
    if poly.is_zero() {
        return Err(ExactError::ZeroPolynomial);
    }
    let sq = poly.squarefree_part();
    if sq.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let chain = SturmChain::new(&sq);
    let b = sq.root_bound();
    let mut pending = vec![(-b.clone(), b)];
    let mut found = Vec::new();
    while let Some((lo, hi)) = pending.pop() {
        match chain.count(&lo, &hi) {
            0 => {}
            1 => found.push((lo, hi)),
            _ => {
                let mid = split_point(&sq, &lo, &hi);
                pending.push((lo, mid.clone()));
                pending.push((mid, hi));
            }
        }
    }
    found.sort();
    let mut out = Vec::with_capacity(found.len());
    for (lo, hi) in found {
        let mut iv = IsolatingInterval {
            lo: lo.clone(),
            hi: hi.clone(),
            poly: sq.clone(),
        };
        // shrink off both original ends so neighbours become disjoint
        while iv.lo == lo || iv.hi == hi {
            if let Some(r) = iv.bisect() {
                let eps = iv.width() / Rational::from_integer(4.into());
                iv.lo = &r - &eps;
                iv.hi = &r + &eps;
                break;
            }
        }
        iv.poly = poly.clone();
        out.push(iv);
    }
    Ok(out)
}

/// A point of `(lo, hi)` that is not a root, near the midpoint.
fn split_point(p: &Poly, lo: &Rational, hi: &Rational) -> Rational {
    let w = hi - lo;
    for k in [2i64, 3, 5, 7, 11, 13] {
        let m = lo + &w * Rational::new(BigInt::from(k / 2 + 1), BigInt::from(k + 2));
        if p.sign_at(&m) != 0 {
            return m;
        }
    }
    // finitely many roots: one of a handful of further points works
    let mut k = 17i64;
    loop {
        let m = lo + &w * Rational::new(BigInt::from(k), BigInt::from(2 * k + 1));
        if p.sign_at(&m) != 0 {
            return m;
        }
        k += 2;
    }
}
