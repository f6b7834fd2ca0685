//! Closed-form expression trees, their s-expression syntax, certified
//! interval evaluation and comparison.

use super::field::FieldElem;
use super::interval::Enclosure;
use super::poly::{IsolatingInterval, Poly};
use super::quad::QuadExt;
use super::{ExactError, Rational, PRECISION_CAP};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraicExpr {
    Rat(Rational),
    Add(Vec<AlgebraicExpr>),
    Mul(Vec<AlgebraicExpr>),
    Sub(Box<AlgebraicExpr>, Box<AlgebraicExpr>),
    Div(Box<AlgebraicExpr>, Box<AlgebraicExpr>),
    Neg(Box<AlgebraicExpr>),
    Sqrt(Box<AlgebraicExpr>),
    Cbrt(Box<AlgebraicExpr>),
    Pow(Box<AlgebraicExpr>, i32),
    /// The unique root of a polynomial in an isolating interval.
    Root(Arc<IsolatingInterval>),
}

use AlgebraicExpr as E;

impl AlgebraicExpr {
    pub fn rat(p: i64, q: i64) -> Self {
        E::Rat(Rational::new(p.into(), q.into()))
    }

    pub fn int(k: i64) -> Self {
        E::Rat(Rational::from_integer(k.into()))
    }

    pub fn sqrt(self) -> Self {
        E::Sqrt(Box::new(self))
    }

    pub fn cbrt(self) -> Self {
        E::Cbrt(Box::new(self))
    }

    pub fn pow(self, k: i32) -> Self {
        E::Pow(Box::new(self), k)
    }

    /// `sqrt(k)` for an integer `k`.
    pub fn sqrt_int(k: i64) -> Self {
        E::int(k).sqrt()
    }

    pub fn root(poly: Poly, lo: Rational, hi: Rational) -> Result<Self, ExactError> {
        Ok(E::Root(Arc::new(IsolatingInterval::new(poly, lo, hi)?)))
    }

    pub fn from_quad(q: &QuadExt) -> Self {
        if q.is_rational() {
            return E::Rat(q.a.clone());
        }
        let surd = E::Mul(vec![E::Rat(q.b.clone()), E::Rat(Rational::from_integer(q.d.clone())).sqrt()]);
        if q.a.is_zero() {
            surd
        } else {
            E::Add(vec![E::Rat(q.a.clone()), surd])
        }
    }

    /// Exact normal form when the expression lives in a quadratic field or
    /// in the polynomial ring of a single tagged root.
    pub fn normal_form(&self) -> Option<FieldElem> {
        match self {
            E::Rat(r) => Some(FieldElem::rational(r.clone())),
            E::Add(xs) => {
                let mut acc = FieldElem::rational(Rational::zero());
                for x in xs {
                    acc = acc.add(&x.normal_form()?)?;
                }
                Some(acc)
            }
            E::Mul(xs) => {
                let mut acc = FieldElem::rational(Rational::one());
                for x in xs {
                    acc = acc.mul(&x.normal_form()?)?;
                }
                Some(acc)
            }
            E::Sub(a, b) => a.normal_form()?.sub(&b.normal_form()?),
            E::Div(a, b) => a.normal_form()?.div(&b.normal_form()?),
            E::Neg(a) => Some(a.normal_form()?.neg()),
            E::Sqrt(a) => {
                let r = a.normal_form()?.as_rational()?;
                QuadExt::sqrt_of(&r).ok().map(FieldElem::Quad)
            }
            E::Cbrt(a) => {
                let r = a.normal_form()?.as_rational()?;
                exact_cbrt(&r).map(FieldElem::rational)
            }
            E::Pow(a, k) => a.normal_form()?.pow(*k),
            E::Root(tag) => Some(FieldElem::root(tag.clone())),
        }
    }

    /// Enclosure at working precision `w`, rounded outward after every
    /// operation.
    pub fn enclose(&self, w: u32) -> Result<Enclosure, ExactError> {
        Ok(match self {
            E::Rat(r) => Enclosure::exact(r.clone()).round(w),
            E::Add(xs) => {
                let mut acc = Enclosure::exact(Rational::zero());
                for x in xs {
                    acc = acc.add(&x.enclose(w)?, w);
                }
                acc
            }
            E::Mul(xs) => {
                let mut acc = Enclosure::exact(Rational::one());
                for x in xs {
                    acc = acc.mul(&x.enclose(w)?, w);
                }
                acc
            }
            E::Sub(a, b) => a.enclose(w)?.sub(&b.enclose(w)?, w),
            E::Div(a, b) => a.enclose(w)?.div(&b.enclose(w)?, w)?,
            E::Neg(a) => a.enclose(w)?.neg(),
            E::Sqrt(a) => a.enclose(w)?.sqrt(w)?,
            E::Cbrt(a) => a.enclose(w)?.cbrt(w),
            E::Pow(a, k) => {
                let p = a.enclose(w)?.powi(k.unsigned_abs(), w);
                if *k < 0 {
                    p.recip(w)?
                } else {
                    p
                }
            }
            E::Root(tag) => {
                let mut iv = (**tag).clone();
                match iv.refine_to(w) {
                    Some(r) => Enclosure::exact(r),
                    None => Enclosure::new(iv.lo, iv.hi),
                }
            }
        })
    }

    /// Raw enclosure, escalating the working precision past transient
    /// failures (a divisor enclosure touching zero).
    fn enclose_escalating(&self, start: u32) -> Result<(Enclosure, u32), ExactError> {
        let mut w = start.min(PRECISION_CAP);
        loop {
            match self.enclose(w) {
                Ok(e) => return Ok((e, w)),
                Err(ExactError::DivisionByZero) if w < PRECISION_CAP => {}
                Err(e) => return Err(e),
            }
            w = (2 * w).min(PRECISION_CAP);
        }
    }

    pub fn to_f64(&self) -> f64 {
        interval_eval(self, 60).map(|e| e.mid_f64()).unwrap_or(f64::NAN)
    }
}

fn exact_cbrt(r: &Rational) -> Option<Rational> {
    let root = |v: &BigInt| {
        let c = v.cbrt();
        (&c * &c * &c == *v).then_some(c)
    };
    Some(Rational::new(root(r.numer())?, root(r.denom())?))
}

/// Certified enclosure of width at most `2^(1 - precision_bits)`.
///
/// Values with a rational normal form come back as a point. Otherwise the
/// result is the closed dyadic cell `[k, k + 1] / 2^p` containing the value,
/// so enclosures at increasing precision are nested. A value too close to a
/// cell boundary to place at the precision cap gets the two cells around
/// that boundary.
pub fn interval_eval(e: &AlgebraicExpr, precision_bits: u32) -> Result<Enclosure, ExactError> {
    if precision_bits > PRECISION_CAP {
        return Err(ExactError::PrecisionCap(precision_bits));
    }
    if let Some(r) = e.normal_form().and_then(|f| f.as_rational()) {
        return Ok(Enclosure::exact(r));
    }
    let p = precision_bits;
    let cell = Rational::new(BigInt::one(), BigInt::one() << p);
    let mut w = p + 16;
    loop {
        let (raw, used) = e.enclose_escalating(w)?;
        if raw.is_point() {
            return Ok(raw);
        }
        let snapped = raw.round(p);
        if snapped.width() <= cell || used >= PRECISION_CAP {
            return Ok(snapped);
        }
        w = (2 * used).min(PRECISION_CAP);
    }
}

/// Exact comparison within a shared normal form, otherwise by separating
/// enclosures at increasing precision up to the cap.
pub fn certified_compare(a: &AlgebraicExpr, b: &AlgebraicExpr) -> Result<Ordering, ExactError> {
    if let (Some(x), Some(y)) = (a.normal_form(), b.normal_form()) {
        if let Some(diff) = x.sub(&y) {
            return diff.signum();
        }
    }
    let mut w = super::default_precision_bits();
    loop {
        let (ea, _) = a.enclose_escalating(w)?;
        let (eb, _) = b.enclose_escalating(w)?;
        if ea.hi < eb.lo {
            return Ok(Ordering::Less);
        }
        if ea.lo > eb.hi {
            return Ok(Ordering::Greater);
        }
        if ea.is_point() && eb.is_point() {
            return Ok(Ordering::Equal);
        }
        if w >= PRECISION_CAP {
            return Err(ExactError::Undecided(PRECISION_CAP));
        }
        w = (2 * w).min(PRECISION_CAP);
    }
}

impl ops::Add for AlgebraicExpr {
    type Output = AlgebraicExpr;
    fn add(self, rhs: Self) -> Self {
        E::Add(vec![self, rhs])
    }
}

impl ops::Sub for AlgebraicExpr {
    type Output = AlgebraicExpr;
    fn sub(self, rhs: Self) -> Self {
        E::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for AlgebraicExpr {
    type Output = AlgebraicExpr;
    fn mul(self, rhs: Self) -> Self {
        E::Mul(vec![self, rhs])
    }
}

impl ops::Div for AlgebraicExpr {
    type Output = AlgebraicExpr;
    fn div(self, rhs: Self) -> Self {
        E::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for AlgebraicExpr {
    type Output = AlgebraicExpr;
    fn neg(self) -> Self {
        E::Neg(Box::new(self))
    }
}

fn write_rat(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "(rat {} {})", r.numer(), r.denom())
    }
}

impl fmt::Display for AlgebraicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, xs: &[&AlgebraicExpr]| {
            write!(f, "({op}")?;
            for x in xs {
                write!(f, " {x}")?;
            }
            f.write_str(")")
        };
        match self {
            E::Rat(r) => write_rat(f, r),
            E::Add(xs) => list(f, "add", &xs.iter().collect::<Vec<_>>()),
            E::Mul(xs) => list(f, "mul", &xs.iter().collect::<Vec<_>>()),
            E::Sub(a, b) => list(f, "sub", &[a, b]),
            E::Div(a, b) => list(f, "div", &[a, b]),
            E::Neg(a) => list(f, "neg", &[a]),
            E::Sqrt(a) => list(f, "sqrt", &[a]),
            E::Cbrt(a) => list(f, "cbrt", &[a]),
            E::Pow(a, k) => write!(f, "(pow {a} {k})"),
            E::Root(tag) => {
                f.write_str("(root (poly")?;
                for c in tag.poly.coeffs() {
                    f.write_str(" ")?;
                    write_rat(f, c)?;
                }
                f.write_str(") ")?;
                write_rat(f, &tag.lo)?;
                f.write_str(" ")?;
                write_rat(f, &tag.hi)?;
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(s: &str) -> Vec<String> {
    s.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn read(tokens: &[String], pos: &mut usize) -> Result<Sexp, ExactError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| ExactError::Parse("unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                    None => return Err(ExactError::Parse("unbalanced parenthesis".into())),
                }
            }
        }
        ")" => Err(ExactError::Parse("unexpected ')'".into())),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

fn parse_int(s: &str) -> Result<BigInt, ExactError> {
    BigInt::from_str(s).map_err(|_| ExactError::Parse(format!("not an integer: {s}")))
}

fn to_rational(s: &Sexp) -> Result<Rational, ExactError> {
    match to_expr(s)? {
        E::Rat(r) => Ok(r),
        other => Err(ExactError::Parse(format!("expected a rational, got {other}"))),
    }
}

fn to_expr(s: &Sexp) -> Result<AlgebraicExpr, ExactError> {
    let items = match s {
        Sexp::Atom(a) => return Ok(E::Rat(Rational::from_integer(parse_int(a)?))),
        Sexp::List(items) => items,
    };
    let (head, args) = match items.split_first() {
        Some((Sexp::Atom(h), rest)) => (h.as_str(), rest),
        _ => return Err(ExactError::Parse("expected an operator".into())),
    };
    let arity = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(ExactError::Parse(format!("{head} takes {k} argument(s), got {}", args.len())))
        }
    };
    let sub = |i: usize| to_expr(&args[i]).map(Box::new);
    match head {
        "rat" => {
            arity(2)?;
            let (p, q) = match (&args[0], &args[1]) {
                (Sexp::Atom(p), Sexp::Atom(q)) => (parse_int(p)?, parse_int(q)?),
                _ => return Err(ExactError::Parse("rat takes two integers".into())),
            };
            if q.is_zero() {
                return Err(ExactError::Parse("zero denominator".into()));
            }
            Ok(E::Rat(Rational::new(p, q)))
        }
        "add" | "mul" => {
            if args.is_empty() {
                return Err(ExactError::Parse(format!("{head} needs arguments")));
            }
            let xs = args.iter().map(to_expr).collect::<Result<Vec<_>, _>>()?;
            Ok(if head == "add" { E::Add(xs) } else { E::Mul(xs) })
        }
        "sub" => {
            arity(2)?;
            Ok(E::Sub(sub(0)?, sub(1)?))
        }
        "div" => {
            arity(2)?;
            Ok(E::Div(sub(0)?, sub(1)?))
        }
        "neg" => {
            arity(1)?;
            Ok(E::Neg(sub(0)?))
        }
        "sqrt" => {
            arity(1)?;
            Ok(E::Sqrt(sub(0)?))
        }
        "cbrt" => {
            arity(1)?;
            Ok(E::Cbrt(sub(0)?))
        }
        "pow" => {
            arity(2)?;
            let k = match &args[1] {
                Sexp::Atom(k) => k
                    .parse::<i32>()
                    .map_err(|_| ExactError::Parse(format!("bad exponent {k}")))?,
                _ => return Err(ExactError::Parse("pow exponent must be an integer".into())),
            };
            Ok(E::Pow(sub(0)?, k))
        }
        "root" => {
            arity(3)?;
            let coeffs = match &args[0] {
                Sexp::List(items) if matches!(items.first(), Some(Sexp::Atom(h)) if h == "poly") => items[1..]
                    .iter()
                    .map(to_rational)
                    .collect::<Result<Vec<_>, _>>()?,
                _ => return Err(ExactError::Parse("root needs (poly c0 c1 ...)".into())),
            };
            E::root(Poly::new(coeffs), to_rational(&args[1])?, to_rational(&args[2])?)
        }
        other => Err(ExactError::Parse(format!("unknown operator {other}"))),
    }
}

impl FromStr for AlgebraicExpr {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let sexp = read(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(ExactError::Parse("trailing input".into()));
        }
        to_expr(&sexp)
    }
}

/// Sign of a rational, for callers that only need a quick test.
pub fn rational_sign(r: &Rational) -> Ordering {
    if r.is_positive() {
        Ordering::Greater
    } else if r.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> AlgebraicExpr {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt3_over_9() {
        let e = parse("(div (sqrt 3) 9)");
        let iv = interval_eval(&e, 64).unwrap();
        // sqrt(3) = 1.7320508075688772935274463415058723669428...
        let digits = Rational::new(
            BigInt::from_str("19245008972987525483638292683398581854920").unwrap(),
            BigInt::from(10).pow(41),
        );
        assert!(iv.contains(&digits));
        assert!(iv.hi_f64() - iv.lo_f64() < 1e-15);
    }

    #[test]
    fn rational_is_a_point() {
        let iv = interval_eval(&parse("(rat 7 341)"), 64).unwrap();
        assert!(iv.is_point());
        assert_eq!(iv.lo, Rational::new(7.into(), 341.into()));
    }

    #[test]
    fn tagged_cubic_root() {
        let f = parse("(root (poly -1 11 -27 19) (rat 1 2) (rat 3 5))");
        let iv = interval_eval(&f, 64).unwrap();
        assert!((iv.mid_f64() - 0.5839).abs() < 1e-4);
        let delta7 = parse("(sub (root (poly -1 11 -27 19) (rat 1 2) (rat 3 5)) (rat 1 2))");
        assert!((delta7.to_f64() - 0.0838590090).abs() < 1e-10);
    }

    #[test]
    fn n9_value_digits() {
        let e = parse("(add (rat -11 64) (mul (rat 9 320) (sqrt 65)))");
        // sqrt(65) = 8.0622577482985496523671784...
        let s65 = Rational::new(BigInt::from_str("80622577482985496523671784").unwrap(), BigInt::from(10).pow(25));
        let approx = Rational::new((-11).into(), 64.into()) + Rational::new(9.into(), 320.into()) * s65;
        let iv = interval_eval(&e, 60).unwrap();
        let tol = Rational::new(1.into(), BigInt::from(10).pow(17));
        assert!(iv.lo <= &approx + &tol && &approx - &tol <= iv.hi);
        assert!((iv.mid_f64() - 0.0548759).abs() < 1e-7);
    }

    #[test]
    fn comparisons() {
        let a = parse("(div (sqrt 3) 9)");
        assert_eq!(certified_compare(&a, &AlgebraicExpr::rat(1, 8)).unwrap(), Ordering::Greater);
        let x = parse("(div (sub (sqrt 13) 1) 36)");
        let y = parse("(add (rat -1 36) (mul (rat 1 36) (sqrt 13)))");
        assert_eq!(certified_compare(&x, &y).unwrap(), Ordering::Equal);
        let spurious = parse("(add (rat 19 166) (mul (rat 3 166) (sqrt 65)))");
        let genuine = parse("(sub (rat 9 16) (mul (rat 3 80) (sqrt 65)))");
        assert!((spurious.to_f64() - genuine.to_f64()).abs() < 1e-5);
        assert_ne!(certified_compare(&spurious, &genuine).unwrap(), Ordering::Equal);
    }

    #[test]
    fn unsupported_equality_is_undecided() {
        // cbrt(2)^3 - 2 is zero but outside the supported normal forms
        let e = parse("(sub (pow (cbrt 2) 3) 2)");
        assert_eq!(
            certified_compare(&e, &AlgebraicExpr::int(0)),
            Err(ExactError::Undecided(PRECISION_CAP))
        );
    }

    #[test]
    fn round_trip_syntax() {
        for s in [
            "(add (rat -11 64) (mul (rat 9 320) (sqrt 65)))",
            "(sub (root (poly -1 11 -27 19) (rat 1 2) (rat 3 5)) (rat 1 2))",
            "(pow (cbrt (add 63 (mul 8 (sqrt 62)))) -1)",
            "(neg (div 1 3))",
        ] {
            let e = parse(s);
            assert_eq!(e.to_string(), s);
            assert_eq!(parse(&e.to_string()), e);
        }
    }

    #[test]
    fn parse_errors() {
        for s in ["(add", "(foo 1)", "(rat 1 0)", "(sqrt 1 2)", "(root (poly -1 0 1) 0 1) 3", "(root (poly -1 0 1) -2 2)"] {
            assert!(s.parse::<AlgebraicExpr>().is_err(), "{s}");
        }
    }

    #[test]
    fn sqrt_of_negative_is_rejected() {
        assert!(matches!(interval_eval(&parse("(sqrt -2)"), 64), Err(ExactError::Domain(_))));
    }

    #[test]
    fn precision_above_cap() {
        assert_eq!(
            interval_eval(&parse("(sqrt 2)"), PRECISION_CAP + 1),
            Err(ExactError::PrecisionCap(PRECISION_CAP + 1))
        );
    }
}
