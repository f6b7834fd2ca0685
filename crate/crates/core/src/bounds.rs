//! Classical bounds on the optimal value: the `1/(n-2)` upper bound, the
//! asymptotic `n^(-8/7 - 1/2000)` envelope and the parabola construction
//! modulo a prime.

use crate::corpus::{self, CorpusError};
use crate::exact::Rational;
use crate::geometry::Configuration;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("n = {0} is too small (need n >= 3)")]
    TooFewPoints(usize),
    #[error("range {0}..={1} is outside the corpus range 3..=16")]
    BadRange(usize, usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// `1/(n-2)`.
pub fn roth_upper(n: usize) -> Result<Rational, BoundsError> {
    if n < 3 {
        return Err(BoundsError::TooFewPoints(n));
    }
    Ok(Rational::new(BigInt::from(1), BigInt::from(n - 2)))
}

pub const CPZ_EXPONENT: f64 = -8.0 / 7.0 - 1.0 / 2000.0;

/// `n^(-8/7 - 1/2000)`.
pub fn cpz_upper(n: usize) -> f64 {
    (n as f64).powf(CPZ_EXPONENT)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErdosConstruction {
    pub p: u64,
    /// Unscaled lattice points `(i, i^2 mod p)`.
    pub lattice: Vec<(u64, u64)>,
    /// Lattice scaled by `1/(p-1)` on both axes.
    pub config: Configuration,
    /// Smallest absolute lattice determinant over all triples.
    pub min_det: u64,
    /// Exact minimum triangle area of the scaled points.
    #[serde(serialize_with = "ser_rational")]
    pub min_area: Rational,
    /// `1/(2 p^2)`.
    #[serde(serialize_with = "ser_rational")]
    pub guarantee: Rational,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl ErdosConstruction {
    pub fn guarantee_holds(&self) -> bool {
        self.min_det >= 1 && self.min_area >= self.guarantee
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("construction serializes");
        v["n"] = self.config.n().into();
        v["points"] = self.config.points().iter().map(|&(x, y)| serde_json::json!([x, y])).collect();
        v.as_object_mut().expect("object").remove("config");
        v
    }
}

/// First `n` points of the parabola `y = x^2` over `Z_p`, with `p` the
/// smallest prime in `[n, 2n]`.
pub fn erdos_config(n: usize) -> Result<ErdosConstruction, BoundsError> {
    if n < 3 {
        return Err(BoundsError::TooFewPoints(n));
    }
    let p = (n as u64..=2 * n as u64).find(|&p| is_prime(p)).expect("Bertrand");
    let lattice: Vec<(u64, u64)> = (0..n as u64).map(|i| (i, i * i % p)).collect();
    let mut min_det = u64::MAX;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let [(x1, y1), (x2, y2), (x3, y3)] = [a, b, c].map(|k| (lattice[k].0 as i64, lattice[k].1 as i64));
                let det = ((x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)).unsigned_abs();
                min_det = min_det.min(det);
            }
        }
    }
    let s = (p - 1) as f64;
    let config = Configuration::new(lattice.iter().map(|&(x, y)| (x as f64 / s, y as f64 / s)).collect())
        .expect("scaled lattice lies in the square");
    let min_area = Rational::new(BigInt::from(min_det), BigInt::from(2 * (p - 1) * (p - 1)));
    let guarantee = Rational::new(BigInt::from(1), BigInt::from(2 * p * p));
    Ok(ErdosConstruction {
        p,
        lattice,
        config,
        min_det,
        min_area,
        guarantee,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    pub best_known: f64,
    pub roth: f64,
    pub cpz: f64,
}

pub fn bound_table(n_lo: usize, n_hi: usize) -> Result<Vec<BoundRow>, BoundsError> {
    if n_lo < corpus::N_MIN || n_hi > corpus::N_MAX || n_lo > n_hi {
        return Err(BoundsError::BadRange(n_lo, n_hi));
    }
    (n_lo..=n_hi)
        .map(|n| {
            Ok(BoundRow {
                n,
                best_known: corpus::get_entry(n)?.delta_f64(),
                roth: roth_upper(n)?.to_f64().expect("finite"),
                cpz: cpz_upper(n),
            })
        })
        .collect()
}

pub fn bound_table_csv(rows: &[BoundRow]) -> String {
    let mut s = String::from("n,best_known,roth,cpz\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.n, r.best_known, r.roth, r.cpz).unwrap();
    }
    s
}

/// Best-known values and the asymptotic envelope as two polylines on
/// linear axes.
pub fn bound_table_svg(rows: &[BoundRow]) -> String {
    let (w, h, m) = (640.0, 420.0, 50.0);
    let n_lo = rows.first().map_or(0, |r| r.n) as f64;
    let n_hi = rows.last().map_or(1, |r| r.n) as f64;
    let y_max = rows.iter().map(|r| r.best_known.max(r.cpz)).fold(0.0, f64::max) * 1.05;
    let sx = |n: f64| m + (n - n_lo) / (n_hi - n_lo).max(1.0) * (w - 2.0 * m);
    let sy = |v: f64| h - m - v / y_max * (h - 2.0 * m);
    let line = |f: &dyn Fn(&BoundRow) -> f64| {
        rows.iter()
            .map(|r| format!("{:.2},{:.2}", sx(r.n as f64), sy(f(r))))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    s.push('\n');
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<path d="M{m},{m} L{m},{b} L{r},{b}" fill="none" stroke="black"/>"#,
        b = h - m,
        r = w - m
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            sx(r.n as f64),
            h - m + 16.0,
            r.n
        )
        .unwrap();
    }
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#,
            m - 4.0,
            sy(v) + 4.0
        )
        .unwrap();
    }
    writeln!(s, r#"<polyline fill="none" stroke="crimson" stroke-width="2" points="{}"/>"#, line(&|r| r.cpz)).unwrap();
    writeln!(s, r#"<polyline fill="none" stroke="navy" stroke-width="2" points="{}"/>"#, line(&|r| r.best_known)).unwrap();
    for r in rows {
        writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="navy"/>"#, sx(r.n as f64), sy(r.best_known)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="20" font-size="13" fill="navy">best known</text>"#, w - 200.0).unwrap();
    writeln!(s, r#"<text x="{}" y="36" font-size="13" fill="crimson">n^(-8/7-1/2000)</text>"#, w - 200.0).unwrap();
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{certified_compare, rat, AlgebraicExpr};
    use std::cmp::Ordering;

    #[test]
    fn roth_values() {
        assert_eq!(roth_upper(3).unwrap(), rat(1, 1));
        assert_eq!(roth_upper(5).unwrap(), rat(1, 3));
        assert_eq!(roth_upper(16).unwrap(), rat(1, 14));
        assert_eq!(
            certified_compare(&AlgebraicExpr::rat(7, 341), &AlgebraicExpr::Rat(roth_upper(16).unwrap())).unwrap(),
            Ordering::Less
        );
        assert_eq!(roth_upper(2), Err(BoundsError::TooFewPoints(2)));
    }

    #[test]
    fn cpz_values() {
        assert_eq!(cpz_upper(1), 1.0);
        let c9 = cpz_upper(9);
        assert!((c9 - 0.0811).abs() < 1e-4 && c9 > 0.054876);
        assert!((cpz_upper(3) - 0.284).abs() < 1e-3);
        assert!((1..100).all(|n| cpz_upper(n + 1) < cpz_upper(n)));
    }

    #[test]
    fn erdos_small_cases() {
        let e5 = erdos_config(5).unwrap();
        assert_eq!(e5.p, 5);
        assert_eq!(e5.lattice, vec![(0, 0), (1, 1), (2, 4), (3, 4), (4, 1)]);
        assert_eq!(e5.guarantee, rat(1, 50));
        assert!(e5.guarantee_holds());
        let e3 = erdos_config(3).unwrap();
        assert_eq!(e3.p, 3);
        assert!(e3.min_area >= rat(1, 18));
        assert_eq!(erdos_config(8).unwrap().p, 11);
        assert!(erdos_config(2).is_err());
    }

    #[test]
    fn erdos_guarantee_up_to_fifty() {
        for n in 3..=50 {
            let e = erdos_config(n).unwrap();
            assert!(e.guarantee_holds(), "n = {n}");
            assert!(e.p >= n as u64 && e.p <= 2 * n as u64);
            let f = crate::geometry::min_triangle_area(&e.config).0;
            assert!(f > 0.0 && f >= e.guarantee.to_f64().unwrap() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn table_reproduces_the_envelope_ordering() {
        let rows = bound_table(3, 16).unwrap();
        assert_eq!(rows.len(), 14);
        for r in &rows {
            assert!(r.roth >= r.best_known);
            if r.n >= 6 {
                assert!(r.cpz > r.best_known, "n = {}", r.n);
            }
        }
        assert!(rows[0].best_known > rows[0].cpz);
        assert!((rows[8].best_known - 1.0 / 27.0).abs() < 1e-15);
        assert!(bound_table(2, 16).is_err());
        assert!(bound_table(3, 17).is_err());
        let csv = bound_table_csv(&rows);
        assert_eq!(csv.lines().count(), 15);
        let svg = bound_table_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
