//! Exact normal forms: quadratic-field elements and polynomials in a single
//! tagged real root, reduced modulo its defining polynomial.

use super::interval::Enclosure;
use super::poly::{IsolatingInterval, Poly};
use super::quad::QuadExt;
use super::{ExactError, Rational, PRECISION_CAP};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldElem {
    Quad(QuadExt),
    /// `residue(r)` where `r` is the root isolated by `tag`.
    Root {
        tag: Arc<IsolatingInterval>,
        residue: Poly,
    },
}

impl FieldElem {
    pub fn rational(r: Rational) -> Self {
        FieldElem::Quad(QuadExt::rational(r))
    }

    pub fn root(tag: Arc<IsolatingInterval>) -> Self {
        FieldElem::Root {
            residue: Poly::x().rem(&tag.poly).expect("nonzero tag polynomial"),
            tag,
        }
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            FieldElem::Quad(q) if q.is_rational() => Some(q.a.clone()),
            FieldElem::Root { residue, .. } => match residue.degree() {
                None => Some(Rational::zero()),
                Some(0) => Some(residue.coeffs()[0].clone()),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Quad(q) => q.is_zero(),
            FieldElem::Root { residue, .. } => residue.is_zero(),
        }
    }

    /// Lifts a rational into the root's polynomial ring.
    fn lift(&self, tag: &Arc<IsolatingInterval>) -> Option<Poly> {
        match self {
            FieldElem::Quad(q) if q.is_rational() => Some(Poly::constant(q.a.clone())),
            FieldElem::Root { tag: t, residue } if same_root(t, tag) => Some(residue.clone()),
            _ => None,
        }
    }

    fn binary(
        &self,
        other: &FieldElem,
        quad: impl Fn(&QuadExt, &QuadExt) -> Result<QuadExt, ExactError>,
        root: impl Fn(&Poly, &Poly, &Poly) -> Option<Poly>,
    ) -> Option<FieldElem> {
        if let (FieldElem::Quad(a), FieldElem::Quad(b)) = (self, other) {
            return quad(a, b).ok().map(FieldElem::Quad);
        }
        let tag = match (self, other) {
            (FieldElem::Root { tag, .. }, _) | (_, FieldElem::Root { tag, .. }) => tag.clone(),
            _ => unreachable!(),
        };
        let a = self.lift(&tag)?;
        let b = other.lift(&tag)?;
        let residue = root(&a, &b, &tag.poly)?.rem(&tag.poly).ok()?;
        Some(FieldElem::Root { tag, residue })
    }

    pub fn add(&self, other: &FieldElem) -> Option<FieldElem> {
        self.binary(other, |a, b| a.add(b), |a, b, _| Some(a.add(b)))
    }

    pub fn sub(&self, other: &FieldElem) -> Option<FieldElem> {
        self.binary(other, |a, b| a.sub(b), |a, b, _| Some(a.sub(b)))
    }

    pub fn mul(&self, other: &FieldElem) -> Option<FieldElem> {
        self.binary(other, |a, b| a.mul(b), |a, b, _| Some(a.mul(b)))
    }

    /// `None` also when the divisor is not invertible in the residue ring.
    pub fn div(&self, other: &FieldElem) -> Option<FieldElem> {
        self.binary(other, |a, b| a.div(b), |a, b, m| Some(a.mul(&b.inv_mod(m)?)))
    }

    pub fn neg(&self) -> FieldElem {
        match self {
            FieldElem::Quad(q) => FieldElem::Quad(q.neg()),
            FieldElem::Root { tag, residue } => FieldElem::Root {
                tag: tag.clone(),
                residue: residue.neg(),
            },
        }
    }

    pub fn pow(&self, k: i32) -> Option<FieldElem> {
        let base = if k < 0 {
            FieldElem::rational(Rational::one()).div(self)?
        } else {
            self.clone()
        };
        let mut acc = FieldElem::rational(Rational::one());
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Some(acc)
    }

    /// Enclosure at working precision `w`.
    pub fn enclose(&self, w: u32) -> Result<Enclosure, ExactError> {
        match self {
            FieldElem::Quad(q) => {
                let a = Enclosure::exact(q.a.clone());
                if q.is_rational() {
                    return Ok(a);
                }
                let s = Enclosure::exact(Rational::from_integer(q.d.clone())).sqrt(w + 8)?;
                Ok(a.add(&s.mul(&Enclosure::exact(q.b.clone()), w + 4), w))
            }
            FieldElem::Root { tag, residue } => {
                let mut iv = (**tag).clone();
                if let Some(r) = iv.refine_to(w + 8) {
                    return Ok(Enclosure::exact(residue.eval(&r)));
                }
                let x = Enclosure::new(iv.lo, iv.hi);
                let mut acc = Enclosure::exact(Rational::zero());
                for c in residue.coeffs().iter().rev() {
                    acc = acc.mul(&x, w + 4).add(&Enclosure::exact(c.clone()), w + 4);
                }
                Ok(acc.round(w))
            }
        }
    }

    /// Exact sign, refining the root when necessary.
    pub fn signum(&self) -> Result<Ordering, ExactError> {
        match self {
            FieldElem::Quad(q) => Ok(q.signum()),
            FieldElem::Root { residue, .. } => {
                if residue.is_zero() {
                    return Ok(Ordering::Equal);
                }
                let mut w = 64;
                loop {
                    let e = self.enclose(w)?;
                    if e.lo > Rational::zero() {
                        return Ok(Ordering::Greater);
                    }
                    if e.hi < Rational::zero() {
                        return Ok(Ordering::Less);
                    }
                    if e.is_point() {
                        return Ok(Ordering::Equal);
                    }
                    if w >= PRECISION_CAP {
                        return Err(ExactError::Undecided(PRECISION_CAP));
                    }
                    w = (2 * w).min(PRECISION_CAP);
                }
            }
        }
    }
}

/// Whether two tags isolate the same root of the same polynomial.
pub fn same_root(a: &IsolatingInterval, b: &IsolatingInterval) -> bool {
    if a.poly != b.poly {
        return false;
    }
    if a == b {
        return true;
    }
    let mut iv = a.clone();
    for _ in 0..4 * PRECISION_CAP {
        if iv.hi < b.lo || iv.lo > b.hi {
            return false;
        }
        if iv.lo >= b.lo && iv.hi <= b.hi {
            return true;
        }
        if let Some(r) = iv.bisect() {
            return b.lo <= r && r <= b.hi;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_tag() -> Arc<IsolatingInterval> {
        let p = Poly::from_ints(&[-1, 11, -27, 19]);
        Arc::new(IsolatingInterval::new(p, Rational::new(1.into(), 2.into()), Rational::new(3.into(), 5.into())).unwrap())
    }

    #[test]
    fn cubic_relation_reduces_to_zero() {
        let f = FieldElem::root(f_tag());
        let c = |k: i64| FieldElem::rational(Rational::from_integer(k.into()));
        // 19 f^3 - 27 f^2 + 11 f - 1
        let v = c(19)
            .mul(&f.pow(3).unwrap())
            .unwrap()
            .sub(&c(27).mul(&f.pow(2).unwrap()).unwrap())
            .unwrap()
            .add(&c(11).mul(&f).unwrap())
            .unwrap()
            .sub(&c(1))
            .unwrap();
        assert!(v.is_zero());
        assert_eq!(v.signum().unwrap(), Ordering::Equal);
    }

    #[test]
    fn sign_of_root_expression() {
        let f = FieldElem::root(f_tag());
        let half = FieldElem::rational(Rational::new(1.into(), 2.into()));
        assert_eq!(f.sub(&half).unwrap().signum().unwrap(), Ordering::Greater);
        let e = f.sub(&half).unwrap().enclose(64).unwrap();
        assert!((e.mid_f64() - 0.0838590090).abs() < 1e-9);
    }

    #[test]
    fn inverse_in_residue_ring() {
        let f = FieldElem::root(f_tag());
        let one = FieldElem::rational(Rational::one());
        let inv = one.div(&f).unwrap();
        assert!(inv.mul(&f).unwrap().sub(&one).unwrap().is_zero());
    }

    #[test]
    fn different_roots_do_not_mix() {
        let p = Poly::from_ints(&[-1, 11, -27, 19]);
        let other = Arc::new(
            IsolatingInterval::new(p, Rational::new(13.into(), 20.into()), Rational::new(4.into(), 5.into())).unwrap(),
        );
        assert!(FieldElem::root(f_tag()).add(&FieldElem::root(other)).is_none());
        let narrower = Arc::new(
            IsolatingInterval::new(
                f_tag().poly.clone(),
                Rational::new(29.into(), 50.into()),
                Rational::new(59.into(), 100.into()),
            )
            .unwrap(),
        );
        assert!(same_root(&f_tag(), &narrower));
    }
}
