//! Floating-point geometry of point configurations in the unit square.
//!
//! Points are addressed 1-based throughout, so `TriangleId::new(1, 2, 3)`
//! names the first three points of a configuration.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Coordinates may stray outside `[0, 1]` by at most this much; they are
/// clamped back into the square.
pub const COORD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a configuration needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} = ({x}, {y}) lies outside the unit square")]
    OutOfSquare { index: usize, x: f64, y: f64 },
    #[error("invalid triangle {0} for a configuration of {1} points")]
    InvalidTriangle(TriangleId, usize),
    #[error("cannot cluster an empty area distribution")]
    EmptyDistribution,
    #[error("relative gap must be positive, got {0}")]
    BadGap(f64),
}

pub type Point = (f64, f64);

/// `n >= 3` points in the closed unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Point>,
}

impl Configuration {
    pub fn new(points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.len() < 3 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        let mut clamped = Vec::with_capacity(points.len());
        for (idx, &(x, y)) in points.iter().enumerate() {
            let ok = |v: f64| v.is_finite() && (-COORD_TOL..=1.0 + COORD_TOL).contains(&v);
            if !ok(x) || !ok(y) {
                return Err(GeometryError::OutOfSquare { index: idx + 1, x, y });
            }
            clamped.push((x.clamp(0.0, 1.0), y.clamp(0.0, 1.0)));
        }
        Ok(Self { points: clamped })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// 1-based access.
    pub fn point(&self, i: usize) -> Point {
        self.points[i - 1]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.points[i - 1].0
    }

    pub fn y(&self, i: usize) -> f64 {
        self.points[i - 1].1
    }

    pub fn triangles(&self) -> impl Iterator<Item = TriangleId> {
        triangles(self.n())
    }
}

/// A triangle `(i, j, k)` with `1 <= i < j < k <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriangleId(pub usize, pub usize, pub usize);

impl TriangleId {
    /// Builds the id from three distinct indices in any order.
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        TriangleId(v[0], v[1], v[2])
    }

    pub fn indices(self) -> [usize; 3] {
        [self.0, self.1, self.2]
    }

    pub fn contains(self, p: usize) -> bool {
        self.0 == p || self.1 == p || self.2 == p
    }

    pub fn is_valid(self, n: usize) -> bool {
        1 <= self.0 && self.0 < self.1 && self.1 < self.2 && self.2 <= n
    }
}

impl fmt::Display for TriangleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0, self.1, self.2)
    }
}

/// All `C(n, 3)` triangles in lexicographic order.
pub fn triangles(n: usize) -> impl Iterator<Item = TriangleId> {
    (1..=n).flat_map(move |i| {
        (i + 1..=n).flat_map(move |j| (j + 1..=n).map(move |k| TriangleId(i, j, k)))
    })
}

pub fn triangle_count(n: usize) -> usize {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// Signed area of `(p, q, r)`, positive when counterclockwise.
pub fn signed_area_of(p: Point, q: Point, r: Point) -> f64 {
    0.5 * ((q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0))
}

pub fn signed_area(config: &Configuration, t: TriangleId) -> Result<f64, GeometryError> {
    if !t.is_valid(config.n()) {
        return Err(GeometryError::InvalidTriangle(t, config.n()));
    }
    Ok(signed_area_unchecked(config, t))
}

/// Signed area of `(p_a, p_b, p_c)` for arbitrary distinct 1-based indices;
/// the order of the arguments fixes the orientation.
pub fn oriented_area(config: &Configuration, a: usize, b: usize, c: usize) -> f64 {
    signed_area_of(config.point(a), config.point(b), config.point(c))
}

pub(crate) fn signed_area_unchecked(config: &Configuration, t: TriangleId) -> f64 {
    signed_area_of(config.point(t.0), config.point(t.1), config.point(t.2))
}

/// Smallest absolute triangle area and the lexicographically first triangle
/// attaining it.
pub fn min_triangle_area(config: &Configuration) -> (f64, TriangleId) {
    let mut best = (f64::INFINITY, TriangleId(1, 2, 3));
    for t in config.triangles() {
        let a = signed_area_unchecked(config, t).abs();
        if a < best.0 {
            best = (a, t);
        }
    }
    best
}

/// Minimum area over points given as a plain slice (no square check).
pub fn min_area_of_points(points: &[Point]) -> f64 {
    let n = points.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                best = best.min(signed_area_of(points[i], points[j], points[k]).abs());
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaDistribution {
    pub entries: Vec<(TriangleId, f64)>,
    pub min_area: f64,
}

impl AreaDistribution {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn areas(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }
}

/// All absolute triangle areas in ascending order, ties kept in id order.
pub fn area_distribution(config: &Configuration) -> AreaDistribution {
    let mut entries: Vec<(TriangleId, f64)> = config
        .triangles()
        .map(|t| (t, signed_area_unchecked(config, t).abs()))
        .collect();
    // stable sort: triangles() already yields ids in lexicographic order
    entries.sort_by(|a, b| a.1.total_cmp(&b.1));
    let min_area = entries[0].1;
    AreaDistribution { entries, min_area }
}

/// The eight symmetries of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum D4 {
    Identity,
    /// Counterclockwise quarter turn about the centre.
    Rot90,
    Rot180,
    Rot270,
    /// `(x, y) -> (1 - x, y)`
    FlipX,
    /// `(x, y) -> (x, 1 - y)`
    FlipY,
    /// `(x, y) -> (y, x)`
    Diagonal,
    /// `(x, y) -> (1 - y, 1 - x)`
    AntiDiagonal,
}

impl D4 {
    pub const ALL: [D4; 8] = [
        D4::Identity,
        D4::Rot90,
        D4::Rot180,
        D4::Rot270,
        D4::FlipX,
        D4::FlipY,
        D4::Diagonal,
        D4::AntiDiagonal,
    ];

    pub fn apply(self, (x, y): Point) -> Point {
        match self {
            D4::Identity => (x, y),
            D4::Rot90 => (1.0 - y, x),
            D4::Rot180 => (1.0 - x, 1.0 - y),
            D4::Rot270 => (y, 1.0 - x),
            D4::FlipX => (1.0 - x, y),
            D4::FlipY => (x, 1.0 - y),
            D4::Diagonal => (y, x),
            D4::AntiDiagonal => (1.0 - y, 1.0 - x),
        }
    }

    /// Whether the map reverses orientation.
    pub fn is_reflection(self) -> bool {
        matches!(self, D4::FlipX | D4::FlipY | D4::Diagonal | D4::AntiDiagonal)
    }
}

pub fn apply_symmetry(config: &Configuration, g: D4) -> Configuration {
    Configuration {
        points: config.points.iter().map(|&p| g.apply(p)).collect(),
    }
}

/// One level of a clustered area distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaCluster {
    /// Mean area of the cluster.
    pub level: f64,
    pub multiplicity: usize,
}

/// Default relative gap separating two area clusters.
pub const DEFAULT_CLUSTER_GAP: f64 = 1e-3;

/// Splits the sorted areas wherever the relative jump between consecutive
/// values exceeds `rel_gap`.
pub fn cluster_areas(
    dist: &AreaDistribution,
    rel_gap: f64,
) -> Result<Vec<AreaCluster>, GeometryError> {
    if dist.is_empty() {
        return Err(GeometryError::EmptyDistribution);
    }
    if !(rel_gap > 0.0) {
        return Err(GeometryError::BadGap(rel_gap));
    }
    let mut clusters = Vec::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut prev: Option<f64> = None;
    for a in dist.areas() {
        if let Some(p) = prev {
            if (a - p) / p.max(1e-12) > rel_gap {
                clusters.push(AreaCluster {
                    level: sum / count as f64,
                    multiplicity: count,
                });
                sum = 0.0;
                count = 0;
            }
        }
        sum += a;
        count += 1;
        prev = Some(a);
    }
    clusters.push(AreaCluster {
        level: sum / count as f64,
        multiplicity: count,
    });
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(points: &[Point]) -> Configuration {
        Configuration::new(points.to_vec()).unwrap()
    }

    #[test]
    fn unit_right_triangle_orientation() {
        let c = cfg(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert_eq!(signed_area(&c, TriangleId(1, 2, 3)).unwrap(), 0.5);
        let c = cfg(&[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(signed_area(&c, TriangleId(1, 2, 3)).unwrap(), -0.5);
    }

    #[test]
    fn shoelace_on_rounded_n7_points() {
        // Hand evaluation of 1/2 * |det [[1,x,y]...]| for
        // p2 = (0.7127, 0), p3 = (1, 0.1808), p4 = (1, 1):
        // (x3-x2)(y4-y2) - (y3-y2)(x4-x2) = 0.2873 * 1 - 0.1808 * 0.2873
        //   = 0.2873 - 0.05194384 = 0.23535616, half of it is 0.11767808.
        let c = cfg(&[(0.7127, 0.0), (1.0, 0.1808), (1.0, 1.0)]);
        let a = signed_area(&c, TriangleId(1, 2, 3)).unwrap();
        assert!((a - 0.11767808).abs() < 1e-15, "{a}");
    }

    #[test]
    fn invalid_triangle_rejected() {
        let c = cfg(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(
            signed_area(&c, TriangleId(1, 2, 4)),
            Err(GeometryError::InvalidTriangle(..))
        ));
        assert!(signed_area(&c, TriangleId(2, 1, 3)).is_err());
    }

    #[test]
    fn configuration_validation() {
        assert_eq!(
            Configuration::new(vec![(0.0, 0.0), (1.0, 1.0)]),
            Err(GeometryError::TooFewPoints(2))
        );
        assert!(Configuration::new(vec![(0.0, 0.0), (1.0, 1.0), (1.2, 0.0)]).is_err());
        let c = Configuration::new(vec![(-1e-10, 0.0), (1.0, 1.0 + 1e-10), (0.5, 0.0)]).unwrap();
        assert_eq!(c.point(1), (0.0, 0.0));
        assert_eq!(c.point(2), (1.0, 1.0));
    }

    #[test]
    fn square_corners() {
        let c = cfg(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let (a, t) = min_triangle_area(&c);
        assert_eq!(a, 0.5);
        assert_eq!(t, TriangleId(1, 2, 3));
    }

    #[test]
    fn single_triangle_distribution() {
        let c = cfg(&[(0.1, 0.2), (0.9, 0.3), (0.4, 0.8)]);
        let d = area_distribution(&c);
        assert_eq!(d.len(), 1);
        assert_eq!(d.min_area, d.entries[0].1);
    }

    #[test]
    fn distribution_ties_in_id_order() {
        let c = cfg(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let d = area_distribution(&c);
        let ids: Vec<_> = d.entries.iter().map(|e| e.0).collect();
        assert_eq!(
            ids,
            vec![
                TriangleId(1, 2, 3),
                TriangleId(1, 2, 4),
                TriangleId(1, 3, 4),
                TriangleId(2, 3, 4)
            ]
        );
    }

    #[test]
    fn rotation_has_order_four() {
        let c = cfg(&[(0.1, 0.2), (0.9, 0.3), (0.4, 0.8), (0.25, 0.75)]);
        assert_eq!(apply_symmetry(&c, D4::Identity), c);
        let mut r = c.clone();
        for _ in 0..4 {
            r = apply_symmetry(&r, D4::Rot90);
        }
        for (p, q) in r.points().iter().zip(c.points()) {
            assert!((p.0 - q.0).abs() < 1e-15 && (p.1 - q.1).abs() < 1e-15);
        }
    }

    #[test]
    fn clustering() {
        let c = cfg(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
        let cl = cluster_areas(&area_distribution(&c), DEFAULT_CLUSTER_GAP).unwrap();
        assert_eq!(cl, vec![AreaCluster { level: 0.5, multiplicity: 4 }]);
        let empty = AreaDistribution { entries: vec![], min_area: 0.0 };
        assert_eq!(cluster_areas(&empty, 1e-3), Err(GeometryError::EmptyDistribution));
    }

    #[test]
    fn triangle_enumeration_count() {
        for n in 3..12 {
            assert_eq!(triangles(n).count(), triangle_count(n));
        }
    }
}
