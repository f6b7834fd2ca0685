//! Optimal and best-known configurations for `3 <= n <= 16`.
//!
//! Entries up to `n = 9` are proven optimal; the rest are the best known.
//! Most carry closed-form coordinates; `n = 13, 14, 15` are six-digit
//! decimals and are only checked numerically.

use crate::exact::{certified_compare, rat, AlgebraicExpr, Poly, Rational};
use crate::geometry::{min_triangle_area, Configuration};
use crate::structure::{select_feasible_root, verify_exact, ExactConfig, RootParametrization, StructureError};
use serde::Serialize;
use serde_json::{json, Value};
use std::cmp::Ordering;
use thiserror::Error;

pub const N_MIN: usize = 3;
pub const N_MAX: usize = 16;
/// Tolerance for entries validated numerically.
pub const NUMERIC_TOL: f64 = 1e-5;
/// Default member of the `n = 6` family.
pub const N6_DEFAULT_C: (i64, i64) = (1, 8);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("no corpus entry for n = {0} (available: 3..=16)")]
    OutOfRange(usize),
    #[error("parameter c = {0} lies outside [0, 1/4]")]
    BadFamilyParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ProvenOptimal,
    BestKnown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationMode {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryData {
    Exact(ExactConfig),
    /// Decimal coordinates with the published decimal value.
    Decimal { config: Configuration, delta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub n: usize,
    pub provenance: Provenance,
    pub mode: ValidationMode,
    pub data: EntryData,
    /// Published value for numerically validated entries.
    pub published: Option<f64>,
}

impl CorpusEntry {
    pub fn configuration(&self) -> Configuration {
        match &self.data {
            EntryData::Exact(e) => e.floating().expect("corpus coordinates lie in the square"),
            EntryData::Decimal { config, .. } => config.clone(),
        }
    }

    pub fn exact(&self) -> Option<&ExactConfig> {
        match &self.data {
            EntryData::Exact(e) => Some(e),
            EntryData::Decimal { .. } => None,
        }
    }

    /// Claimed minimum area as a float.
    pub fn delta_f64(&self) -> f64 {
        match &self.data {
            EntryData::Exact(e) => e.delta.to_f64(),
            EntryData::Decimal { delta, .. } => *delta,
        }
    }

    pub fn to_json(&self) -> Value {
        let c = self.configuration();
        let mut v = json!({
            "n": self.n,
            "provenance": self.provenance,
            "validation": self.mode,
            "points": c.points().iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
        });
        match &self.data {
            EntryData::Exact(e) => {
                v["exact"] = json!(e.coords.iter().map(|[x, y]| json!([x.to_string(), y.to_string()])).collect::<Vec<_>>());
                v["delta"] = json!(e.delta.to_string());
            }
            EntryData::Decimal { delta, .. } => v["delta"] = json!(delta),
        }
        if let Some(p) = self.published {
            v["published"] = json!(p);
        }
        v
    }
}

type E = AlgebraicExpr;

fn r(p: i64, q: i64) -> E {
    E::rat(p, q)
}

fn i(k: i64) -> E {
    E::int(k)
}

/// `p + q sqrt(d)` with rational `p`, `q`.
fn surd(p: (i64, i64), q: (i64, i64), d: i64) -> E {
    E::Add(vec![r(p.0, p.1), E::Mul(vec![r(q.0, q.1), E::sqrt_int(d)])])
}

fn exact(coords: Vec<[E; 2]>, delta: E) -> EntryData {
    EntryData::Exact(ExactConfig::new(coords, delta))
}

/// The cubic `19 f^3 - 27 f^2 + 11 f - 1` whose middle root parametrizes
/// the optimal seven-point configuration.
pub fn n7_polynomial() -> Poly {
    Poly::from_ints(&[-1, 11, -27, 19])
}

/// Coordinates of the seven-point optimum as polynomials in `f`, with
/// minimum area `f - 1/2`.
pub fn n7_parametrization() -> RootParametrization {
    let p = |c: &[i64]| Poly::from_ints(c);
    let half = |c: &[i64]| Poly::from_ints(c).scale(&rat(1, 2));
    RootParametrization {
        points: vec![
            [p(&[0]), p(&[3, -16, 19])],
            [p(&[10, -27, 19]), p(&[0])],
            [p(&[1]), half(&[1, 10, -19])],
            [p(&[1]), p(&[1])],
            [p(&[0]), p(&[1])],
            [p(&[2, 8, -19]), p(&[5, -41, 57])],
            [p(&[10, -27, 19]), p(&[0, 1])],
        ],
        delta: Poly::new(vec![rat(-1, 2), rat(1, 1)]),
    }
}

/// Member `c` of the one-parameter family of six-point optima.
pub fn n6_family(c: Rational) -> Result<ExactConfig, CorpusError> {
    if c < rat(0, 1) || c > rat(1, 4) {
        return Err(CorpusError::BadFamilyParameter(c.to_string()));
    }
    let cv = || E::Rat(c.clone());
    Ok(ExactConfig::new(
        vec![
            [i(0), cv()],
            [r(1, 2), i(0)],
            [i(1), r(1, 2) - cv()],
            [r(1, 2), i(1)],
            [i(0), cv() + r(1, 2)],
            [i(1), i(1) - cv()],
        ],
        r(1, 8),
    ))
}

/// `z` of the ten-point configuration as a cube-root expression.
pub fn n10_z() -> E {
    let t = (i(63) + i(8) * E::sqrt_int(62)).cbrt();
    r(3, 4) - t.clone() / i(12) - i(1) / (i(12) * t)
}

/// Cubic with `n10_z` as its root in `(3/10, 1/3)`.
pub fn n10_z_cubic() -> Poly {
    Poly::from_ints(&[-4, 20, -27, 12])
}

/// `x` of the twelve-point configuration as a cube-root expression.
pub fn n12_x() -> E {
    let s = (i(27) + i(3) * E::sqrt_int(57)).cbrt();
    i(1) - (s.clone().pow(2) + i(6)) / (i(6) * s)
}

/// Cubic with `n12_x` as its root in `(1/10, 1/8)`.
pub fn n12_x_cubic() -> Poly {
    Poly::from_ints(&[-1, 10, -12, 4])
}

fn decimal(pts: &[(f64, f64)], delta: f64) -> EntryData {
    EntryData::Decimal {
        config: Configuration::new(pts.to_vec()).expect("table coordinates lie in the square"),
        delta,
    }
}

pub fn get_entry(n: usize) -> Result<CorpusEntry, CorpusError> {
    use Provenance::*;
    use ValidationMode::*;
    let (provenance, mode, data, published) = match n {
        3 => (ProvenOptimal, Exact, exact(vec![[i(0), i(0)], [i(1), i(0)], [i(0), i(1)]], r(1, 2)), None),
        4 => (
            ProvenOptimal,
            Exact,
            exact(vec![[i(0), i(0)], [i(1), i(0)], [i(1), i(1)], [i(0), i(1)]], r(1, 2)),
            None,
        ),
        5 => (
            ProvenOptimal,
            Exact,
            exact(
                vec![
                    [i(0), r(1, 3)],
                    [surd((0, 1), (1, 3), 3), i(0)],
                    [i(1), surd((1, 1), (-1, 3), 3)],
                    [r(2, 3), i(1)],
                    [i(0), i(1)],
                ],
                surd((0, 1), (1, 9), 3),
            ),
            None,
        ),
        6 => {
            let c = n6_family(rat(N6_DEFAULT_C.0, N6_DEFAULT_C.1)).expect("default c in range");
            (ProvenOptimal, Exact, EntryData::Exact(c), None)
        }
        7 => {
            let sel = select_feasible_root(&n7_parametrization(), &n7_polynomial())
                .expect("exactly one root of the cubic is feasible");
            (ProvenOptimal, Exact, EntryData::Exact(sel.config), None)
        }
        8 => (
            ProvenOptimal,
            Exact,
            exact(
                vec![
                    [i(0), i(0)],
                    [surd((1, 6), (1, 6), 13), i(0)],
                    [i(1), surd((7, 18), (-1, 18), 13)],
                    [i(1), i(1)],
                    [i(0), surd((11, 18), (1, 18), 13)],
                    [surd((5, 6), (-1, 6), 13), i(1)],
                    [surd((5, 6), (-1, 6), 13), surd((7, 9), (-1, 9), 13)],
                    [surd((1, 6), (1, 6), 13), surd((2, 9), (1, 9), 13)],
                ],
                surd((-1, 36), (1, 36), 13),
            ),
            None,
        ),
        9 => (
            ProvenOptimal,
            Exact,
            exact(
                vec![
                    [i(0), surd((1, 1), (-1, 10), 65)],
                    [surd((3, 8), (-1, 40), 65), i(0)],
                    [i(1), surd((9, 16), (-3, 80), 65)],
                    [surd((3, 8), (-1, 40), 65), i(1)],
                    [i(0), surd((5, 8), (1, 40), 65)],
                    [surd((1, 4), (1, 20), 65), surd((3, 4), (-1, 20), 65)],
                    [surd((7, 16), (3, 80), 65), i(0)],
                    [surd((0, 1), (1, 10), 65), i(1)],
                    [i(1), surd((5, 8), (1, 40), 65)],
                ],
                surd((-11, 64), (9, 320), 65),
            ),
            None,
        ),
        10 => {
            let z = n10_z();
            let x = z.clone() / i(2);
            let y = i(1) - i(3) * z.clone() + i(2) * z.clone().pow(2);
            let om = |e: &E| i(1) - e.clone();
            let coords = vec![
                [x.clone(), i(0)],
                [om(&y), i(0)],
                [i(0), x.clone()],
                [i(1), y.clone()],
                [om(&z), z.clone()],
                [z.clone(), om(&z)],
                [i(0), om(&y)],
                [i(1), om(&x)],
                [y.clone(), i(1)],
                [om(&x), i(1)],
            ];
            let delta = r(5, 8) * z.clone().pow(2) - r(1, 2) * z.pow(3);
            (BestKnown, Numeric, exact(coords, delta), Some(0.04654))
        }
        11 => (
            BestKnown,
            Exact,
            exact(
                vec![
                    [r(1, 3), i(0)],
                    [r(2, 3), i(0)],
                    [i(0), r(2, 9)],
                    [i(1), r(2, 9)],
                    [r(1, 3), r(4, 9)],
                    [r(2, 3), r(4, 9)],
                    [i(0), r(2, 3)],
                    [i(1), r(2, 3)],
                    [r(1, 2), r(7, 9)],
                    [r(1, 6), i(1)],
                    [r(5, 6), i(1)],
                ],
                r(1, 27),
            ),
            Some(0.03704),
        ),
        12 => {
            let x = n12_x();
            let y = i(2) * x.clone().pow(2) - i(3) * x.clone() + r(1, 2);
            let om = |e: &E| i(1) - e.clone();
            let coords = vec![
                [x.clone(), i(0)],
                [om(&x), i(0)],
                [i(0), x.clone()],
                [i(1), x.clone()],
                [r(1, 2), y.clone()],
                [y.clone(), r(1, 2)],
                [om(&y), r(1, 2)],
                [r(1, 2), om(&y)],
                [i(0), om(&x)],
                [i(1), om(&x)],
                [x.clone(), i(1)],
                [om(&x), i(1)],
            ];
            let delta = r(1, 4) * x.clone() + r(1, 2) * x.clone() * y - r(1, 2) * x.clone().pow(2);
            (BestKnown, Numeric, exact(coords, delta), Some(0.03260))
        }
        13 => (
            BestKnown,
            Numeric,
            decimal(
                &[
                    (0.964815, 0.087630),
                    (0.0, 1.0),
                    (0.896939, 0.902546),
                    (0.761346, 0.441996),
                    (0.655161, 1.0),
                    (0.748551, 0.0),
                    (0.0, 0.099250),
                    (1.0, 0.461332),
                    (0.328490, 0.633357),
                    (0.087939, 0.614507),
                    (0.345014, 0.901507),
                    (0.087938, 0.0),
                    (0.500181, 0.149235),
                ],
                0.02702,
            ),
            Some(0.02702),
        ),
        14 => (
            BestKnown,
            Numeric,
            decimal(
                &[
                    (0.077620, 0.0),
                    (0.922380, 1.0),
                    (0.922380, 0.0),
                    (0.077620, 1.0),
                    (0.0, 0.186886),
                    (1.0, 0.813114),
                    (1.0, 0.186886),
                    (0.0, 0.813114),
                    (0.292333, 0.321345),
                    (0.707667, 0.678655),
                    (0.707667, 0.321345),
                    (0.292333, 0.678655),
                    (0.5, 0.138278),
                    (0.5, 0.861722),
                ],
                0.02430,
            ),
            Some(0.02430),
        ),
        15 => (
            BestKnown,
            Numeric,
            decimal(
                &[
                    (0.934094, 1.0),
                    (0.287119, 0.302829),
                    (0.342286, 0.701349),
                    (0.963064, 0.095730),
                    (0.066630, 0.633568),
                    (0.648909, 0.0),
                    (0.277707, 1.0),
                    (0.066641, 0.0),
                    (0.589972, 0.272487),
                    (0.603055, 0.928222),
                    (0.895664, 0.684290),
                    (0.0, 0.192215),
                    (0.670814, 0.614942),
                    (0.0, 0.924975),
                    (1.0, 0.399875),
                ],
                0.02111,
            ),
            Some(0.02111),
        ),
        16 => (
            BestKnown,
            Exact,
            exact(
                vec![
                    [r(2, 31), i(0)],
                    [r(29, 31), i(1)],
                    [r(23, 31), i(0)],
                    [r(8, 31), i(1)],
                    [i(0), r(10, 33)],
                    [i(1), r(23, 33)],
                    [i(1), r(2, 33)],
                    [i(0), r(31, 33)],
                    [r(8, 31), r(4, 11)],
                    [r(23, 31), r(7, 11)],
                    [r(10, 31), r(2, 33)],
                    [r(21, 31), r(31, 33)],
                    [r(21, 31), r(10, 33)],
                    [r(10, 31), r(23, 33)],
                    [r(29, 31), r(4, 11)],
                    [r(2, 31), r(7, 11)],
                ],
                r(7, 341),
            ),
            Some(0.02053),
        ),
        _ => return Err(CorpusError::OutOfRange(n)),
    };
    Ok(CorpusEntry {
        n,
        provenance,
        mode,
        data,
        published,
    })
}

/// Smallest `|det|` over triples relative to the largest coordinate scale;
/// zero means three collinear (or two coincident) points.
fn no_collinear(c: &Configuration) -> bool {
    min_triangle_area(c).0 > 1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationLine {
    pub n: usize,
    pub mode: ValidationMode,
    pub min_area: f64,
    pub claimed: f64,
    pub no_collinear: bool,
    pub passed: bool,
    pub detail: String,
}

pub fn validate_entry(e: &CorpusEntry) -> ValidationLine {
    let c = e.configuration();
    let min_area = min_triangle_area(&c).0;
    let nc = no_collinear(&c);
    let mut line = ValidationLine {
        n: e.n,
        mode: e.mode,
        min_area,
        claimed: e.delta_f64(),
        no_collinear: nc,
        passed: false,
        detail: String::new(),
    };
    let ok = match (e.mode, &e.data) {
        (ValidationMode::Exact, EntryData::Exact(x)) => match verify_exact(x) {
            Ok(v) => {
                line.detail = format!(
                    "exact: min area = {} ({} critical, {} equations)",
                    x.delta,
                    v.critical_count,
                    v.equations.len()
                );
                v.passed()
            }
            Err(err) => {
                line.detail = format!("exact verification failed: {err}");
                false
            }
        },
        (ValidationMode::Numeric, _) => {
            let published = e.published.unwrap_or(line.claimed);
            let mut ok = (min_area - published).abs() <= NUMERIC_TOL;
            line.detail = format!("numeric: |{min_area:.7} - {published}| <= {NUMERIC_TOL:e}");
            if let EntryData::Exact(x) = &e.data {
                // the closed-form claim must also agree with the coordinates
                ok &= (x.delta.to_f64() - min_area).abs() <= 1e-12;
            }
            ok
        }
        (ValidationMode::Exact, EntryData::Decimal { .. }) => false,
    };
    line.passed = ok && nc;
    line
}

/// One report line per corpus entry.
pub fn validate_corpus() -> Vec<ValidationLine> {
    (N_MIN..=N_MAX).map(|n| validate_entry(&get_entry(n).expect("in range"))).collect()
}

/// Certified comparison of the claimed values of two exact entries.
pub fn compare_claims(a: &CorpusEntry, b: &CorpusEntry) -> Result<Ordering, StructureError> {
    match (a.exact(), b.exact()) {
        (Some(x), Some(y)) => Ok(certified_compare(&x.delta, &y.delta)?),
        _ => Ok(a.delta_f64().total_cmp(&b.delta_f64())),
    }
}

/// The whole corpus as JSON.
pub fn corpus_json() -> Value {
    Value::Array((N_MIN..=N_MAX).map(|n| get_entry(n).expect("in range").to_json()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{interval_eval, sturm_isolate};
    use crate::geometry::{apply_symmetry, area_distribution, D4};

    #[test]
    fn spot_coordinates() {
        let e8 = get_entry(8).unwrap();
        let p2 = &e8.exact().unwrap().coords[1];
        assert!((p2[0].to_f64() - (1.0 + 13f64.sqrt()) / 6.0).abs() < 1e-15);
        assert_eq!(p2[1], E::int(0));
        let c16 = get_entry(16).unwrap().configuration();
        assert_eq!(c16.point(1), (2.0 / 31.0, 0.0));
        assert_eq!(get_entry(4).unwrap().delta_f64(), 0.5);
        assert_eq!(get_entry(17), Err(CorpusError::OutOfRange(17)));
        assert_eq!(get_entry(2), Err(CorpusError::OutOfRange(2)));
    }

    #[test]
    fn provenance_split() {
        for n in N_MIN..=N_MAX {
            let e = get_entry(n).unwrap();
            assert_eq!(e.provenance == Provenance::ProvenOptimal, n <= 9, "n = {n}");
        }
    }

    #[test]
    fn values_strictly_decrease() {
        for n in 4..N_MAX {
            let (a, b) = (get_entry(n).unwrap(), get_entry(n + 1).unwrap());
            assert_eq!(compare_claims(&b, &a).unwrap(), Ordering::Less, "n = {n}");
        }
    }

    #[test]
    fn n6_area_multiset_is_independent_of_c() {
        let sorted = |c: Rational| {
            let x = n6_family(c).unwrap();
            let mut v: Vec<Rational> = crate::geometry::triangles(6)
                .map(|t| {
                    let [a, b, cc] = t.indices().map(|k| {
                        let p = &x.coords[k - 1];
                        (
                            p[0].normal_form().unwrap().as_rational().unwrap(),
                            p[1].normal_form().unwrap().as_rational().unwrap(),
                        )
                    });
                    let det = (&b.0 - &a.0) * (&cc.1 - &a.1) - (&b.1 - &a.1) * (&cc.0 - &a.0);
                    num_traits::Signed::abs(&det) / Rational::from_integer(2.into())
                })
                .collect();
            v.sort();
            v
        };
        let base = sorted(rat(0, 1));
        assert_eq!(base[0], rat(1, 8));
        for c in [rat(1, 16), rat(1, 8), rat(3, 16), rat(1, 4)] {
            assert_eq!(sorted(c), base);
        }
        assert!(n6_family(rat(1, 3)).is_err());
    }

    fn same_point_set(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
        a.iter().all(|p| b.iter().any(|q| (p.0 - q.0).abs() < 1e-12 && (p.1 - q.1).abs() < 1e-12))
    }

    #[test]
    fn n9_anti_diagonal_symmetry_is_exact() {
        let x = get_entry(9).unwrap();
        let coords = &x.exact().unwrap().coords;
        let nf = |e: &E| e.normal_form().unwrap();
        let one = crate::exact::FieldElem::rational(rat(1, 1));
        for p in coords {
            let img = [one.sub(&nf(&p[1])).unwrap(), one.sub(&nf(&p[0])).unwrap()];
            let hit = coords.iter().any(|q| nf(&q[0]) == img[0] && nf(&q[1]) == img[1]);
            assert!(hit);
        }
    }

    #[test]
    fn n8_is_centrally_symmetric() {
        let c = get_entry(8).unwrap().configuration();
        let img = apply_symmetry(&c, D4::Rot180);
        assert!(same_point_set(c.points(), img.points()));
    }

    #[test]
    fn cube_root_parameters_match_their_cubics() {
        for (e, p, approx) in [(n10_z(), n10_z_cubic(), 0.3156), (n12_x(), n12_x_cubic(), 0.1154)] {
            let enc = interval_eval(&e, 80).unwrap();
            assert!((enc.mid_f64() - approx).abs() < 1e-4);
            let roots = sturm_isolate(&p).unwrap();
            let hit: Vec<_> = roots
                .into_iter()
                .filter_map(|mut iv| {
                    iv.refine_to(90);
                    (iv.lo <= enc.lo && enc.hi <= iv.hi || enc.lo <= iv.hi && iv.lo <= enc.hi).then_some(iv)
                })
                .collect();
            assert_eq!(hit.len(), 1);
        }
    }

    #[test]
    fn corpus_json_lists_all_entries() {
        let v = corpus_json();
        assert_eq!(v.as_array().unwrap().len(), 14);
        assert_eq!(v[6]["n"], 9);
        let back = ExactConfig::from_json(&v[6]).unwrap();
        assert_eq!(&back, get_entry(9).unwrap().exact().unwrap());
        let _ = area_distribution(&get_entry(13).unwrap().configuration());
    }
}
