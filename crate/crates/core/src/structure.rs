//! From a numerical optimum to exact coordinates.
//!
//! [`extract_structure`] reads off the critical triangles, boundary
//! incidences and coordinate coincidences of a configuration.
//! [`generate_system`] turns them into the equal-area polynomial system,
//! [`recognize_in_field`] proposes quadratic-field values for floating
//! coordinates and [`verify_exact`] decides whether a closed-form candidate
//! really has the claimed minimum area with all critical areas equal.

use crate::exact::{
    certified_compare, sturm_isolate, AlgebraicExpr, ExactError, FieldElem, IsolatingInterval, Poly,
    QuadExt, Rational,
};
use crate::geometry::{signed_area_of, Configuration, GeometryError, TriangleId};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_CRIT_TOL: f64 = 1e-3;
pub const DEFAULT_EDGE_TOL: f64 = 1e-6;
pub const DEFAULT_COINC_TOL: f64 = 1e-6;
/// A recognized value must reproduce the input to within this distance.
pub const RECOGNITION_TOL: f64 = 1e-9;
/// Largest discriminant tried by [`recognize_auto`].
pub const MAX_AUTO_DISCRIMINANT: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("objective must be positive, got {0}")]
    BadObjective(f64),
    #[error("no triangle has area within tolerance of {0}")]
    NoCriticalTriangle(f64),
    #[error("ambiguous structure: separation ratio {ratio:.3e} is below {required:.3e}")]
    Ambiguous { ratio: f64, required: f64 },
    #[error("no root gives a configuration inside the unit square")]
    NoFeasibleRoot,
    #[error("{0} roots give configurations inside the unit square")]
    MultipleFeasibleRoots(usize),
    #[error("bad exact configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Bottom,
    Right,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn offset(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Value an edge pins a coordinate to, if it pins this axis at all.
fn pinned(edges: &[Edge], axis: Axis) -> Option<i64> {
    edges.iter().find_map(|e| match (e, axis) {
        (Edge::Left, Axis::X) | (Edge::Bottom, Axis::Y) => Some(0),
        (Edge::Right, Axis::X) | (Edge::Top, Axis::Y) => Some(1),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coincidence {
    pub i: usize,
    pub j: usize,
    pub axis: Axis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub n: usize,
    pub z: f64,
    pub crit_tol: f64,
    pub edge_tol: f64,
    pub coinc_tol: f64,
    /// Triangles with area at most `z (1 + crit_tol)`, lexicographic.
    pub critical: Vec<TriangleId>,
    /// Orientation (`+1` counterclockwise, `-1` clockwise) of each critical
    /// triangle.
    pub signs: Vec<i8>,
    /// `boundary[i - 1]` lists the edges point `i` lies on.
    pub boundary: Vec<Vec<Edge>>,
    /// Shared coordinates among those not pinned by an edge.
    pub coincidences: Vec<Coincidence>,
    pub next_noncritical: Option<f64>,
    /// `next_noncritical / z - 1`, infinite when every triangle is critical.
    pub separation_ratio: f64,
}

impl StructureReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Critical triangles, boundary incidences and coincidences of `config`
/// certified with objective `z`.
pub fn extract_structure(
    config: &Configuration,
    z: f64,
    crit_tol: f64,
    edge_tol: f64,
    coinc_tol: f64,
) -> Result<StructureReport, StructureError> {
    if !(z > 0.0) {
        return Err(StructureError::BadObjective(z));
    }
    let threshold = z * (1.0 + crit_tol);
    let mut critical = Vec::new();
    let mut signs = Vec::new();
    let mut next: Option<f64> = None;
    for t in config.triangles() {
        let [a, b, c] = t.indices();
        let area = signed_area_of(config.point(a), config.point(b), config.point(c));
        if area.abs() <= threshold {
            critical.push(t);
            signs.push(if area < 0.0 { -1 } else { 1 });
        } else {
            next = Some(next.map_or(area.abs(), |v| v.min(area.abs())));
        }
    }
    if critical.is_empty() {
        return Err(StructureError::NoCriticalTriangle(z));
    }
    let separation_ratio = next.map_or(f64::INFINITY, |v| v / z - 1.0);
    if separation_ratio < 10.0 * crit_tol {
        return Err(StructureError::Ambiguous {
            ratio: separation_ratio,
            required: 10.0 * crit_tol,
        });
    }
    let boundary: Vec<Vec<Edge>> = config
        .points()
        .iter()
        .map(|&(x, y)| {
            let mut e = Vec::new();
            if x <= edge_tol {
                e.push(Edge::Left);
            }
            if y <= edge_tol {
                e.push(Edge::Bottom);
            }
            if x >= 1.0 - edge_tol {
                e.push(Edge::Right);
            }
            if y >= 1.0 - edge_tol {
                e.push(Edge::Top);
            }
            e
        })
        .collect();
    let n = config.n();
    let mut coincidences = Vec::new();
    for axis in [Axis::X, Axis::Y] {
        let coord = |i: usize| match axis {
            Axis::X => config.x(i),
            Axis::Y => config.y(i),
        };
        for i in 1..=n {
            if pinned(&boundary[i - 1], axis).is_some() {
                continue;
            }
            for j in i + 1..=n {
                if pinned(&boundary[j - 1], axis).is_none() && (coord(i) - coord(j)).abs() <= coinc_tol {
                    coincidences.push(Coincidence { i, j, axis });
                }
            }
        }
    }
    coincidences.sort();
    Ok(StructureReport {
        n,
        z,
        crit_tol,
        edge_tol,
        coinc_tol,
        critical,
        signs,
        boundary,
        coincidences,
        next_noncritical: next,
        separation_ratio,
    })
}

/// Sparse multivariate polynomial with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        let mut p = MPoly::zero(nvars);
        p.terms.insert(e, Rational::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// `(exponent vector, coefficient)` pairs in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert(&mut self, e: Vec<u32>, c: Rational) {
        let entry = self.terms.entry(e).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Rational) -> MPoly {
        if k.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert(e, c1 * c2);
            }
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.iter().zip(x).map(|(&k, &v)| v.powi(k as i32)).product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }

    /// Exact value at field elements; `None` if they do not share a field.
    pub fn eval_field(&self, x: &[FieldElem]) -> Option<FieldElem> {
        let mut acc = FieldElem::rational(Rational::zero());
        for (e, c) in &self.terms {
            let mut m = FieldElem::rational(c.clone());
            for (k, &p) in e.iter().enumerate() {
                if p > 0 {
                    m = m.mul(&x[k].pow(p as i32)?)?;
                }
            }
            acc = acc.add(&m)?;
        }
        Some(acc)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nvars": self.nvars,
            "terms": self.terms.iter().map(|(e, c)| json!({"exponents": e, "coef": c.to_string()})).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unknown {
    pub name: String,
    /// Every `(point, axis)` this unknown stands for.
    pub coords: Vec<(usize, Axis)>,
    /// Value in the configuration the system was generated from.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordSpec {
    Fixed(Rational),
    Unknown(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lhs: TriangleId,
    pub rhs: TriangleId,
    /// `sigma_lhs A_lhs - sigma_rhs A_rhs`.
    pub poly: MPoly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    pub n: usize,
    pub unknowns: Vec<Unknown>,
    /// `coords[i - 1] = [x spec, y spec]`.
    pub coords: Vec<[CoordSpec; 2]>,
    pub equations: Vec<Equation>,
}

impl PolySystem {
    /// Values of the unknowns read off a full coordinate assignment.
    pub fn unknown_values<T: Clone>(&self, coords: &[[T; 2]]) -> Vec<T> {
        self.unknowns
            .iter()
            .map(|u| {
                let (i, axis) = u.coords[0];
                coords[i - 1][axis.offset()].clone()
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let spec = |s: &CoordSpec| match s {
            CoordSpec::Fixed(r) => json!({"fixed": r.to_string()}),
            CoordSpec::Unknown(k) => json!({"unknown": self.unknowns[*k].name}),
        };
        json!({
            "n": self.n,
            "unknowns": self.unknowns,
            "coordinates": self.coords.iter().map(|[x, y]| json!([spec(x), spec(y)])).collect::<Vec<_>>(),
            "equations": self.equations.iter().map(|e| json!({
                "lhs": e.lhs,
                "rhs": e.rhs,
                "polynomial": e.poly.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn unknown_name(k: usize) -> String {
    if k < 26 {
        ((b'a' + k as u8) as char).to_string()
    } else {
        format!("u{k}")
    }
}

fn find(parent: &mut [usize], k: usize) -> usize {
    let mut r = k;
    while parent[r] != r {
        r = parent[r];
    }
    let mut c = k;
    while parent[c] != r {
        let next = parent[c];
        parent[c] = r;
        c = next;
    }
    r
}

/// Signed area of `(a, b, c)` as a polynomial in the given coordinates.
fn area_poly(coords: &[[MPoly; 2]], a: usize, b: usize, c: usize) -> MPoly {
    let (xa, ya) = (&coords[a - 1][0], &coords[a - 1][1]);
    let (xb, yb) = (&coords[b - 1][0], &coords[b - 1][1]);
    let (xc, yc) = (&coords[c - 1][0], &coords[c - 1][1]);
    let det = xb.sub(xa).mul(&yc.sub(ya)).sub(&yb.sub(ya).mul(&xc.sub(xa)));
    det.scale(&Rational::new(1.into(), 2.into()))
}

/// The equal-area system of a report: one unknown per class of coinciding
/// free coordinates, edge-pinned coordinates substituted, and the critical
/// areas (with their orientations) chained pairwise to the first one.
pub fn generate_system(report: &StructureReport, config: &Configuration) -> PolySystem {
    let n = report.n;
    let slot = |i: usize, axis: Axis| 2 * (i - 1) + axis.offset();
    let mut parent: Vec<usize> = (0..2 * n).collect();
    for c in &report.coincidences {
        let (a, b) = (find(&mut parent, slot(c.i, c.axis)), find(&mut parent, slot(c.j, c.axis)));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut unknowns: Vec<Unknown> = Vec::new();
    let mut class_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut specs: Vec<[CoordSpec; 2]> = Vec::with_capacity(n);
    for i in 1..=n {
        let mut pair = [CoordSpec::Fixed(Rational::zero()), CoordSpec::Fixed(Rational::zero())];
        for axis in [Axis::X, Axis::Y] {
            pair[axis.offset()] = match pinned(&report.boundary[i - 1], axis) {
                Some(v) => CoordSpec::Fixed(Rational::from_integer(v.into())),
                None => {
                    let root = find(&mut parent, slot(i, axis));
                    let k = *class_of.entry(root).or_insert_with(|| {
                        let value = match axis {
                            Axis::X => config.x(i),
                            Axis::Y => config.y(i),
                        };
                        unknowns.push(Unknown {
                            name: unknown_name(unknowns.len()),
                            coords: Vec::new(),
                            value,
                        });
                        unknowns.len() - 1
                    });
                    unknowns[k].coords.push((i, axis));
                    CoordSpec::Unknown(k)
                }
            };
        }
        specs.push(pair);
    }
    let m = unknowns.len();
    let polys: Vec<[MPoly; 2]> = specs
        .iter()
        .map(|pair| {
            pair.clone().map(|s| match s {
                CoordSpec::Fixed(r) => MPoly::constant(m, r),
                CoordSpec::Unknown(k) => MPoly::var(m, k),
            })
        })
        .collect();
    let signed = |idx: usize| {
        let TriangleId(a, b, c) = report.critical[idx];
        let p = area_poly(&polys, a, b, c);
        if report.signs[idx] < 0 {
            p.neg()
        } else {
            p
        }
    };
    let first = signed(0);
    let equations = (1..report.critical.len())
        .map(|k| Equation {
            lhs: report.critical[0],
            rhs: report.critical[k],
            poly: first.sub(&signed(k)),
        })
        .collect();
    PolySystem {
        n,
        unknowns,
        coords: specs,
        equations,
    }
}

/// Continued-fraction convergents `p/q` of `x` with `q <= max_den`; returns
/// the first within `tol` of `x`.
fn convergent_hit(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1): (i128, i128) = (0, 1);
    let (mut k0, mut k1): (i128, i128) = (1, 0);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2 as i64, k2 as u64));
        }
        let frac = r - a;
        if frac < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// Candidate `a + b sqrt(d)` with rational `a, b` of denominators at most
/// `max_den` reproducing `value` to [`RECOGNITION_TOL`]. Among all hits the
/// one with the smallest larger denominator wins. The result is a candidate
/// only; [`verify_exact`] decides.
pub fn recognize_in_field(value: f64, d: u64, max_den: u64) -> Option<QuadExt> {
    if d == 0 || max_den == 0 || !crate::exact::quad::is_squarefree(&BigInt::from(d)) {
        return None;
    }
    // (max denominator, sum of denominators, sum of |numerators|)
    type Key = (u64, u64, u64);
    let mut best: Option<(Key, (i64, u64), (i64, u64))> = None;
    if let Some((pa, qa)) = convergent_hit(value, max_den, RECOGNITION_TOL) {
        best = Some(((qa, qa + 1, pa.unsigned_abs()), (pa, qa), (0, 1)));
    }
    if d > 1 {
        let sd = (d as f64).sqrt();
        for qb in 1..=max_den {
            if best.as_ref().is_some_and(|(k, ..)| k.0 < qb) {
                break;
            }
            let pmax = ((value.abs() + 2.0) * qb as f64 / sd).ceil() as i64;
            for pb in -pmax..=pmax {
                if pb == 0 || (pb.unsigned_abs()).gcd(&qb) != 1 {
                    continue;
                }
                let r = value - pb as f64 * sd / qb as f64;
                if let Some((pa, qa)) = convergent_hit(r, max_den, RECOGNITION_TOL) {
                    let key = (qa.max(qb), qa + qb, pa.unsigned_abs() + pb.unsigned_abs());
                    if best.as_ref().is_none_or(|(k, ..)| key < *k) {
                        best = Some((key, (pa, qa), (pb, qb)));
                    }
                }
            }
        }
    }
    best.map(|(_, (pa, qa), (pb, qb))| {
        let a = Rational::new(pa.into(), qa.into());
        let b = Rational::new(pb.into(), qb.into());
        if pb == 0 || d == 1 {
            QuadExt::rational(a + b)
        } else {
            QuadExt::new(d, a, b).expect("squarefree discriminant")
        }
    })
}

/// [`recognize_in_field`] over every squarefree `d <= 100`; a rational hit
/// wins, then the smallest denominators, then the smallest `d`.
pub fn recognize_auto(value: f64, max_den: u64) -> Option<QuadExt> {
    let den = |q: &QuadExt| -> u64 {
        let a = q.a.denom().to_u64().unwrap_or(u64::MAX);
        let b = q.b.denom().to_u64().unwrap_or(u64::MAX);
        a.max(b)
    };
    let mut best: Option<(u64, QuadExt)> = None;
    for d in 1..=MAX_AUTO_DISCRIMINANT {
        if let Some(q) = recognize_in_field(value, d, max_den) {
            if q.is_rational() {
                return Some(q);
            }
            let k = den(&q);
            if best.as_ref().is_none_or(|(bk, _)| k < *bk) {
                best = Some((k, q));
            }
        }
    }
    best.map(|(_, q)| q)
}

/// A closed-form candidate configuration with its claimed minimum area.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactConfig {
    pub coords: Vec<[AlgebraicExpr; 2]>,
    pub delta: AlgebraicExpr,
}

impl ExactConfig {
    pub fn new(coords: Vec<[AlgebraicExpr; 2]>, delta: AlgebraicExpr) -> Self {
        ExactConfig { coords, delta }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// Floating image (each coordinate to about 60 bits).
    pub fn floating(&self) -> Result<Configuration, GeometryError> {
        Configuration::new(self.coords.iter().map(|[x, y]| (x.to_f64(), y.to_f64())).collect())
    }

    /// Copy with the coordinate of point `i` on `axis` replaced.
    pub fn with_coordinate(&self, i: usize, axis: Axis, e: AlgebraicExpr) -> ExactConfig {
        let mut c = self.clone();
        c.coords[i - 1][axis.offset()] = e;
        c
    }

    /// `{"n", "points", "exact", "delta"}` with expressions in s-expression
    /// text form.
    pub fn to_json(&self) -> Result<Value, GeometryError> {
        let f = self.floating()?;
        Ok(json!({
            "n": self.n(),
            "points": f.points().iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            "exact": self.coords.iter().map(|[x, y]| json!([x.to_string(), y.to_string()])).collect::<Vec<_>>(),
            "delta": self.delta.to_string(),
        }))
    }

    pub fn from_json(v: &Value) -> Result<ExactConfig, StructureError> {
        let bad = |m: &str| StructureError::BadConfig(m.to_string());
        let exact = v.get("exact").and_then(Value::as_array).ok_or_else(|| bad("missing \"exact\" array"))?;
        let parse = |s: &Value| -> Result<AlgebraicExpr, StructureError> {
            let text = s.as_str().ok_or_else(|| bad("expressions must be strings"))?;
            Ok(text.parse::<AlgebraicExpr>()?)
        };
        let mut coords = Vec::with_capacity(exact.len());
        for p in exact {
            let pair = p.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("points are [x, y] pairs"))?;
            coords.push([parse(&pair[0])?, parse(&pair[1])?]);
        }
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize != coords.len() {
                return Err(bad(&format!("n = {n} but {} points given", coords.len())));
            }
        }
        if coords.len() < 3 {
            return Err(bad("at least 3 points are needed"));
        }
        let delta = parse(v.get("delta").ok_or_else(|| bad("missing \"delta\""))?)?;
        Ok(ExactConfig { coords, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "approx", rename_all = "lowercase")]
pub enum ResidueStatus {
    Zero,
    Positive(f64),
    Negative(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationCheck {
    pub lhs: TriangleId,
    pub rhs: TriangleId,
    pub status: ResidueStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationResult {
    pub in_square: bool,
    /// The certified minimum area equals the claimed value.
    pub min_area_match: bool,
    /// Every chained equal-area equation has an exactly zero residue.
    pub equal_area_satisfied: bool,
    /// Triangles whose area equals the claimed value exactly.
    pub critical_count: usize,
    /// Chained equations over the numerically critical triangles.
    pub equations: Vec<EquationCheck>,
}

impl VerificationResult {
    pub fn passed(&self) -> bool {
        self.in_square && self.min_area_match && self.equal_area_satisfied
    }
}

/// Exact signed areas when all coordinates and the claim share one exact
/// normal form.
fn exact_areas(cand: &ExactConfig) -> Option<(Vec<[FieldElem; 2]>, Vec<FieldElem>, FieldElem)> {
    let coords: Vec<[FieldElem; 2]> = cand
        .coords
        .iter()
        .map(|[x, y]| Some([x.normal_form()?, y.normal_form()?]))
        .collect::<Option<_>>()?;
    let delta = cand.delta.normal_form()?;
    let half = FieldElem::rational(Rational::new(1.into(), 2.into()));
    let mut areas = Vec::new();
    for t in crate::geometry::triangles(cand.n()) {
        let [a, b, c] = t.indices().map(|k| &coords[k - 1]);
        let det = b[0]
            .sub(&a[0])?
            .mul(&c[1].sub(&a[1])?)?
            .sub(&b[1].sub(&a[1])?.mul(&c[0].sub(&a[0])?)?)?;
        areas.push(det.mul(&half)?);
    }
    // one more mix to make sure the claim lives in the same field
    areas.first()?.sub(&delta)?;
    Some((coords, areas, delta))
}

fn area_expr(cand: &ExactConfig, t: TriangleId) -> AlgebraicExpr {
    let [a, b, c] = t.indices().map(|k| &cand.coords[k - 1]);
    let d = |u: &AlgebraicExpr, v: &AlgebraicExpr| u.clone() - v.clone();
    AlgebraicExpr::rat(1, 2) * (d(&b[0], &a[0]) * d(&c[1], &a[1]) - d(&b[1], &a[1]) * d(&c[0], &a[0]))
}

fn status_of(sign: Ordering, approx: f64) -> ResidueStatus {
    match sign {
        Ordering::Equal => ResidueStatus::Zero,
        Ordering::Greater => ResidueStatus::Positive(approx),
        Ordering::Less => ResidueStatus::Negative(approx),
    }
}

/// Exact check of a candidate: coordinates in the square, minimum area equal
/// to the claim, and the chained equal-area equations over the triangles
/// that are critical in the floating image.
///
/// Candidates in a quadratic field or over a single tagged root are decided
/// exactly. Anything else goes through certified intervals, where an
/// equality can only be confirmed for rational values and otherwise ends in
/// [`ExactError::Undecided`].
pub fn verify_exact(cand: &ExactConfig) -> Result<VerificationResult, StructureError> {
    let n = cand.n();
    let image = cand.floating()?;
    let float_areas: Vec<f64> = image
        .triangles()
        .map(|t| {
            let [a, b, c] = t.indices();
            signed_area_of(image.point(a), image.point(b), image.point(c))
        })
        .collect();
    let float_min = float_areas.iter().fold(f64::INFINITY, |m, a| m.min(a.abs()));
    let threshold = cand.delta.to_f64().max(float_min) * (1.0 + DEFAULT_CRIT_TOL);
    let tris: Vec<TriangleId> = crate::geometry::triangles(n).collect();
    let reference: Vec<usize> = (0..tris.len()).filter(|&k| float_areas[k].abs() <= threshold).collect();

    if let Some((coords, areas, delta)) = exact_areas(cand) {
        let one = FieldElem::rational(Rational::one());
        let mut in_square = true;
        for c in coords.iter().flatten() {
            let hi = one.sub(c).expect("rational mixes with any field");
            in_square &= c.signum()? != Ordering::Less && hi.signum()? != Ordering::Less;
        }
        let mut signs = Vec::with_capacity(areas.len());
        let mut below = false;
        let mut critical_count = 0;
        for a in &areas {
            let s = a.signum()?;
            let abs = if s == Ordering::Less { a.neg() } else { a.clone() };
            match abs.sub(&delta).expect("same field").signum()? {
                Ordering::Less => below = true,
                Ordering::Equal => critical_count += 1,
                Ordering::Greater => {}
            }
            signs.push(s);
        }
        let oriented = |k: usize| {
            if signs[k] == Ordering::Less {
                areas[k].neg()
            } else {
                areas[k].clone()
            }
        };
        let mut equations = Vec::new();
        if let Some(&r0) = reference.first() {
            for &rk in &reference[1..] {
                let res = oriented(r0).sub(&oriented(rk)).expect("same field");
                let approx = res.enclose(64)?.mid_f64();
                equations.push(EquationCheck {
                    lhs: tris[r0],
                    rhs: tris[rk],
                    status: status_of(res.signum()?, approx),
                });
            }
        }
        let equal_area_satisfied = equations.iter().all(|e| e.status == ResidueStatus::Zero);
        return Ok(VerificationResult {
            in_square,
            min_area_match: !below && critical_count > 0,
            equal_area_satisfied,
            critical_count,
            equations,
        });
    }

    let zero = AlgebraicExpr::int(0);
    let one = AlgebraicExpr::int(1);
    let mut in_square = true;
    for c in cand.coords.iter().flatten() {
        in_square &= certified_compare(c, &zero)? != Ordering::Less && certified_compare(c, &one)? != Ordering::Greater;
    }
    let mut oriented = Vec::with_capacity(tris.len());
    let mut below = false;
    let mut critical_count = 0;
    for &t in &tris {
        let a = area_expr(cand, t);
        let abs = if certified_compare(&a, &zero)? == Ordering::Less { -a } else { a };
        match certified_compare(&abs, &cand.delta)? {
            Ordering::Less => below = true,
            Ordering::Equal => critical_count += 1,
            Ordering::Greater => {}
        }
        oriented.push(abs);
    }
    let mut equations = Vec::new();
    if let Some(&r0) = reference.first() {
        for &rk in &reference[1..] {
            let ord = certified_compare(&oriented[r0], &oriented[rk])?;
            let approx = oriented[r0].to_f64() - oriented[rk].to_f64();
            equations.push(EquationCheck {
                lhs: tris[r0],
                rhs: tris[rk],
                status: status_of(ord, approx),
            });
        }
    }
    let equal_area_satisfied = equations.iter().all(|e| e.status == ResidueStatus::Zero);
    Ok(VerificationResult {
        in_square,
        min_area_match: !below && critical_count > 0,
        equal_area_satisfied,
        critical_count,
        equations,
    })
}

/// Coordinates (and claimed minimum area) as polynomials in one algebraic
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RootParametrization {
    pub points: Vec<[Poly; 2]>,
    pub delta: Poly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxViolation {
    pub point: usize,
    pub axis: Axis,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootCandidate {
    pub root: IsolatingInterval,
    pub approx: f64,
    /// Coordinates certified outside `[0, 1]`; empty for a feasible root.
    pub violations: Vec<BoxViolation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSelection {
    pub root: IsolatingInterval,
    pub config: ExactConfig,
    /// Every real root examined, feasible or not.
    pub candidates: Vec<RootCandidate>,
}

/// `p(r)` as an expression over the tagged root `r`.
pub fn poly_at_root(p: &Poly, tag: &Arc<IsolatingInterval>) -> AlgebraicExpr {
    let terms: Vec<AlgebraicExpr> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| match k {
            0 => AlgebraicExpr::Rat(c.clone()),
            1 => AlgebraicExpr::Mul(vec![AlgebraicExpr::Rat(c.clone()), AlgebraicExpr::Root(tag.clone())]),
            _ => AlgebraicExpr::Mul(vec![
                AlgebraicExpr::Rat(c.clone()),
                AlgebraicExpr::Root(tag.clone()).pow(k as i32),
            ]),
        })
        .collect();
    match terms.len() {
        0 => AlgebraicExpr::int(0),
        1 => terms.into_iter().next().unwrap(),
        _ => AlgebraicExpr::Add(terms),
    }
}

/// Isolates the real roots of `poly` and keeps the unique one for which
/// every coordinate of `param` is certified inside `[0, 1]`.
pub fn select_feasible_root(param: &RootParametrization, poly: &Poly) -> Result<RootSelection, StructureError> {
    let mut candidates = Vec::new();
    let mut feasible = Vec::new();
    for iv in sturm_isolate(poly)? {
        let tag = Arc::new(iv.clone());
        let mut violations = Vec::new();
        for (idx, pair) in param.points.iter().enumerate() {
            for (axis, p) in [Axis::X, Axis::Y].into_iter().zip(pair) {
                let v = FieldElem::Root {
                    tag: tag.clone(),
                    residue: p.rem(&tag.poly)?,
                };
                let hi = FieldElem::rational(Rational::one()).sub(&v).expect("same ring");
                if v.signum()? == Ordering::Less || hi.signum()? == Ordering::Less {
                    violations.push(BoxViolation {
                        point: idx + 1,
                        axis,
                        value: v.enclose(64)?.mid_f64(),
                    });
                }
            }
        }
        if violations.is_empty() {
            feasible.push(tag.clone());
        }
        let mut fine = iv.clone();
        fine.refine_to(60);
        candidates.push(RootCandidate {
            approx: fine.midpoint_f64(),
            root: iv,
            violations,
        });
    }
    match feasible.len() {
        0 => Err(StructureError::NoFeasibleRoot),
        1 => {
            let tag = feasible.pop().unwrap();
            let coords = param
                .points
                .iter()
                .map(|[x, y]| [poly_at_root(x, &tag), poly_at_root(y, &tag)])
                .collect();
            Ok(RootSelection {
                root: (*tag).clone(),
                config: ExactConfig::new(coords, poly_at_root(&param.delta, &tag)),
                candidates,
            })
        }
        k => Err(StructureError::MultipleFeasibleRoots(k)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn convergents_find_small_fractions() {
        assert_eq!(convergent_hit(0.375, 100, 1e-12), Some((3, 8)));
        assert_eq!(convergent_hit(-0.2, 100, 1e-12), Some((-1, 5)));
        assert_eq!(convergent_hit(std::f64::consts::PI, 100, 1e-9), None);
    }

    #[test]
    fn recognizes_n8_value() {
        let v = (13f64.sqrt() - 1.0) / 36.0;
        let q = recognize_in_field(v, 13, 100).unwrap();
        assert_eq!(q, QuadExt::new(13, rat(-1, 36), rat(1, 36)).unwrap());
    }

    #[test]
    fn rationals_recognize_in_any_field() {
        for d in [2, 13, 65] {
            assert_eq!(recognize_in_field(0.5, d, 50).unwrap(), QuadExt::rational(rat(1, 2)));
        }
        assert!(recognize_in_field(0.5, 12, 50).is_none());
    }

    #[test]
    fn true_y3_beats_the_spurious_value() {
        let v = 9.0 / 16.0 - 3.0 * 65f64.sqrt() / 80.0;
        let q = recognize_in_field(v, 65, 200).unwrap();
        assert_eq!(q, QuadExt::new(65, rat(9, 16), rat(-3, 80)).unwrap());
    }

    #[test]
    fn auto_recognition_finds_the_field() {
        let q = recognize_auto(65f64.sqrt() / 10.0, 100).unwrap();
        assert_eq!(q.d, BigInt::from(65));
        assert_eq!(recognize_auto(0.25, 100).unwrap(), QuadExt::rational(rat(1, 4)));
    }

    #[test]
    fn mpoly_arithmetic() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let p = x.add(&y).mul(&x.sub(&y));
        let q = x.mul(&x).sub(&y.mul(&y));
        assert_eq!(p, q);
        assert!(p.sub(&q).is_zero());
        assert_eq!(p.total_degree(), 2);
        assert!((p.eval_f64(&[3.0, 2.0]) - 5.0).abs() < 1e-15);
        let f = [FieldElem::rational(rat(3, 1)), FieldElem::rational(rat(2, 1))];
        assert_eq!(p.eval_field(&f).unwrap().as_rational(), Some(rat(5, 1)));
    }

    #[test]
    fn trivial_box_rejects_both_roots_of_x2_minus_2() {
        let param = RootParametrization {
            points: vec![[Poly::x(), Poly::x()]],
            delta: Poly::x(),
        };
        let p = Poly::from_ints(&[-2, 0, 1]);
        assert_eq!(select_feasible_root(&param, &p), Err(StructureError::NoFeasibleRoot));
    }

    #[test]
    fn ambiguous_structure_is_refused() {
        // near-tie between the smallest areas
        let c = Configuration::new(vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.999, 1.0)]).unwrap();
        let z = crate::geometry::min_triangle_area(&c).0;
        let e = extract_structure(&c, z, 1e-3, 1e-6, 1e-6);
        assert!(matches!(e, Err(StructureError::Ambiguous { .. })), "{e:?}");
        assert!(matches!(extract_structure(&c, 0.0, 1e-3, 1e-6, 1e-6), Err(StructureError::BadObjective(_))));
    }

    #[test]
    fn exact_config_json_round_trip() {
        let c = ExactConfig::new(
            vec![
                [AlgebraicExpr::int(0), AlgebraicExpr::int(0)],
                [AlgebraicExpr::int(1), AlgebraicExpr::rat(1, 3)],
                [AlgebraicExpr::sqrt_int(2) - AlgebraicExpr::int(1), AlgebraicExpr::int(1)],
            ],
            AlgebraicExpr::rat(1, 6),
        );
        let back = ExactConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back.to_json().unwrap(), c.to_json().unwrap());
        assert!(ExactConfig::from_json(&json!({"n": 2, "exact": []})).is_err());
    }
}
