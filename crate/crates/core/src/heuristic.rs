//! Incumbent generation: random starts that respect the boundary scaffold of
//! the final model, a single-point LP polish and a joint sequential LP step.
//!
//! For `n >= 5` every configuration produced here keeps `p1, p5` on the left
//! edge with `y1 <= y5`, `p2` on the bottom, `p3` on the right and `p4` on the
//! top with `x2 <= x4`, and the remaining points sorted by `x`.

use crate::geometry::{min_triangle_area, signed_area_of, Configuration, Point, TriangleId};
use crate::relax::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation, Sense};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("point index {i} out of range 1..={n}")]
    BadIndex { i: usize, n: usize },
    #[error("polish LP is infeasible at a feasible configuration")]
    Infeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Improvement below which a sweep counts as converged.
pub const SWEEP_TOL: f64 = 1e-10;

const SLP_RADIUS: f64 = 0.05;
const SLP_MIN_RADIUS: f64 = 1e-9;
const SLP_MAX_STEPS: usize = 400;

/// Coordinate index `2(i-1)` for `x_i`, `2(i-1)+1` for `y_i`.
fn xc(i: usize) -> usize {
    2 * (i - 1)
}

fn yc(i: usize) -> usize {
    2 * (i - 1) + 1
}

/// Fixed coordinates and `lhs <= rhs` orderings of the scaffold.
struct Scaffold {
    fixed: Vec<Option<f64>>,
    order: Vec<(usize, usize)>,
}

impl Scaffold {
    fn for_n(n: usize) -> Self {
        let mut fixed = vec![None; 2 * n];
        let mut order = Vec::new();
        if n >= 5 {
            fixed[xc(1)] = Some(0.0);
            fixed[yc(2)] = Some(0.0);
            fixed[xc(3)] = Some(1.0);
            fixed[yc(4)] = Some(1.0);
            fixed[xc(5)] = Some(0.0);
            order.push((yc(1), yc(5)));
            order.push((xc(2), xc(4)));
            for i in 6..n {
                order.push((xc(i), xc(i + 1)));
            }
        }
        Scaffold { fixed, order }
    }
}

fn flat(config: &Configuration) -> Vec<f64> {
    config.points().iter().flat_map(|&(x, y)| [x, y]).collect()
}

fn from_flat(v: &[f64]) -> Vec<Point> {
    v.chunks(2).map(|c| (c[0].clamp(0.0, 1.0), c[1].clamp(0.0, 1.0))).collect()
}

fn min_area(points: &[Point]) -> f64 {
    crate::geometry::min_area_of_points(points)
}

/// A random configuration; for `n >= 5` it satisfies the final model's
/// scaffold and ordering.
pub fn random_start<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Configuration, HeuristicError> {
    if n < 3 {
        return Err(HeuristicError::TooFewPoints(n));
    }
    let mut pts: Vec<Point> = Vec::with_capacity(n);
    if n < 5 {
        for _ in 0..n {
            pts.push((rng.random(), rng.random()));
        }
    } else {
        let (mut y1, mut y5): (f64, f64) = (rng.random(), rng.random());
        if y1 > y5 {
            std::mem::swap(&mut y1, &mut y5);
        }
        let (mut x2, mut x4): (f64, f64) = (rng.random(), rng.random());
        if x2 > x4 {
            std::mem::swap(&mut x2, &mut x4);
        }
        let y3: f64 = rng.random();
        pts.extend([(0.0, y1), (x2, 0.0), (1.0, y3), (x4, 1.0), (0.0, y5)]);
        let mut interior: Vec<Point> = (5..n).map(|_| (rng.random(), rng.random())).collect();
        interior.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.extend(interior);
    }
    Ok(Configuration::new(pts).expect("sampled inside the square"))
}

/// Moves point `i` to the optimum of the LP that maximizes the smallest area
/// among its triangles (orientations frozen), capped by the smallest area of
/// the triangles not containing it. The result is returned only if the
/// minimum area strictly increases; otherwise the input comes back unchanged.
pub fn polish_point(config: &Configuration, i: usize) -> Result<Configuration, HeuristicError> {
    let n = config.n();
    if i == 0 || i > n {
        return Err(HeuristicError::BadIndex { i, n });
    }
    let scaffold = Scaffold::for_n(n);
    let pts = config.points();
    let cur = flat(config);
    let (old_min, _) = min_triangle_area(config);

    let mut cap = f64::INFINITY;
    for t in config.triangles() {
        if !t.contains(i) {
            let [a, b, c] = t.indices();
            cap = cap.min(signed_area_of(pts[a - 1], pts[b - 1], pts[c - 1]).abs());
        }
    }

    let mut lp = LinearProgram::new(Sense::Maximize);
    let bounds = |k: usize| -> (f64, f64) {
        if let Some(v) = scaffold.fixed[k] {
            return (v, v);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for &(l, r) in &scaffold.order {
            if l == k {
                hi = hi.min(cur[r]);
            }
            if r == k {
                lo = lo.max(cur[l]);
            }
        }
        // current position is always admissible
        (lo.min(cur[k]), hi.max(cur[k]))
    };
    let (xlo, xhi) = bounds(xc(i));
    let (ylo, yhi) = bounds(yc(i));
    let vx = lp.add_var(xlo, xhi, 0.0);
    let vy = lp.add_var(ylo, yhi, 0.0);
    let vm = lp.add_var(-1.0, cap.min(1.0), 1.0);

    for t in config.triangles() {
        if !t.contains(i) {
            continue;
        }
        let area_at = |p: Point| {
            let q: Vec<Point> = t.indices().iter().map(|&k| if k == i { p } else { pts[k - 1] }).collect();
            signed_area_of(q[0], q[1], q[2])
        };
        let c0 = area_at((0.0, 0.0));
        let cx = area_at((1.0, 0.0)) - c0;
        let cy = area_at((0.0, 1.0)) - c0;
        let sigma = if area_at(pts[i - 1]) < 0.0 { -1.0 } else { 1.0 };
        // m - sigma * (cx X + cy Y) <= sigma * c0
        lp.add_row(vec![(vm, 1.0), (vx, -sigma * cx), (vy, -sigma * cy)], Relation::Le, sigma * c0);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(HeuristicError::Infeasible);
    }
    let mut moved = pts.to_vec();
    moved[i - 1] = (sol.x[vx].clamp(xlo, xhi), sol.x[vy].clamp(ylo, yhi));
    if min_area(&moved) > old_min {
        Ok(Configuration::new(moved).expect("LP bounds keep the point in the square"))
    } else {
        Ok(config.clone())
    }
}

/// Gradient of the signed area of `t` with respect to its six coordinates,
/// as `(coordinate index, partial derivative)` pairs.
fn area_gradient(p: &[f64], t: TriangleId) -> [(usize, f64); 6] {
    let [a, b, c] = t.indices();
    let (xa, ya, xb, yb, xcv, ycv) = (p[xc(a)], p[yc(a)], p[xc(b)], p[yc(b)], p[xc(c)], p[yc(c)]);
    [
        (xc(a), 0.5 * (yb - ycv)),
        (yc(a), 0.5 * (xcv - xb)),
        (xc(b), 0.5 * (ycv - ya)),
        (yc(b), -0.5 * (xcv - xa)),
        (xc(c), -0.5 * (yb - ya)),
        (yc(c), 0.5 * (xb - xa)),
    ]
}

/// One trust-region step of sequential linear programming over all free
/// coordinates jointly. Returns the improved configuration, or `None` when
/// the linearized step does not increase the true minimum area.
pub fn slp_step(config: &Configuration, radius: f64) -> Result<Option<Configuration>, HeuristicError> {
    let n = config.n();
    let scaffold = Scaffold::for_n(n);
    let cur = flat(config);
    let pts = config.points();
    let old_min = min_area(pts);

    let mut lp = LinearProgram::new(Sense::Maximize);
    let cols: Vec<Option<usize>> = (0..2 * n)
        .map(|k| match scaffold.fixed[k] {
            Some(_) => None,
            None => {
                let lo = (cur[k] - radius).max(0.0) - cur[k];
                let hi = (cur[k] + radius).min(1.0) - cur[k];
                Some(lp.add_var(lo.min(0.0), hi.max(0.0), 0.0))
            }
        })
        .collect();
    let vm = lp.add_var(-1.0, 1.0, 1.0);
    for &(l, r) in &scaffold.order {
        // cur_l + d_l <= cur_r + d_r
        let mut row = Vec::new();
        if let Some(c) = cols[l] {
            row.push((c, 1.0));
        }
        if let Some(c) = cols[r] {
            row.push((c, -1.0));
        }
        if !row.is_empty() {
            lp.add_row(row, Relation::Le, (cur[r] - cur[l]).max(0.0));
        }
    }
    // each coordinate moves at most `radius`, so a triangle's area moves by
    // at most 3 radius to first order plus 4 radius^2
    let reach = 3.0 * radius + 4.0 * radius * radius;
    for t in config.triangles() {
        let [a, b, c] = t.indices();
        let area = signed_area_of(pts[a - 1], pts[b - 1], pts[c - 1]);
        if area.abs() > old_min + 2.0 * reach {
            continue;
        }
        let sigma = if area < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![(vm, 1.0)];
        for (k, g) in area_gradient(&cur, t) {
            if let Some(col) = cols[k] {
                row.push((col, -sigma * g));
            }
        }
        lp.add_row(row, Relation::Le, sigma * area);
    }

    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut next = cur.clone();
    for k in 0..2 * n {
        if let Some(c) = cols[k] {
            next[k] = cur[k] + sol.x[c];
        }
    }
    for &(l, r) in &scaffold.order {
        if next[l] > next[r] {
            next[l] = next[r];
        }
    }
    let moved = from_flat(&next);
    if min_area(&moved) > old_min {
        Ok(Some(Configuration::new(moved).expect("clamped into the square")))
    } else {
        Ok(None)
    }
}

/// Trust-region SLP loop: grows the radius after a success, halves it after
/// a rejected step, and stops once it drops below `1e-9`.
pub fn slp_refine(config: &Configuration) -> Result<Configuration, HeuristicError> {
    let mut best = config.clone();
    let mut radius = SLP_RADIUS;
    for _ in 0..SLP_MAX_STEPS {
        if radius < SLP_MIN_RADIUS {
            break;
        }
        match slp_step(&best, radius)? {
            Some(c) => {
                best = c;
                radius = (radius * 1.5).min(SLP_RADIUS);
            }
            None => radius *= 0.5,
        }
    }
    Ok(best)
}

/// Round-robin polish sweeps, each followed by an SLP refinement, until a
/// sweep improves the minimum area by at most [`SWEEP_TOL`] or `sweeps`
/// sweeps have run.
pub fn local_search(config: &Configuration, sweeps: usize) -> Result<Configuration, HeuristicError> {
    let mut cur = config.clone();
    let mut value = min_triangle_area(&cur).0;
    for _ in 0..sweeps {
        let before = value;
        for i in 1..=cur.n() {
            cur = polish_point(&cur, i)?;
        }
        cur = slp_refine(&cur)?;
        value = min_triangle_area(&cur).0;
        if value - before <= SWEEP_TOL {
            break;
        }
    }
    Ok(cur)
}

/// Best configuration over `starts` random starts, each improved by
/// [`local_search`]. Ties keep the earliest start.
pub fn multistart<R: Rng + ?Sized>(
    n: usize,
    starts: usize,
    sweeps: usize,
    rng: &mut R,
) -> Result<Configuration, HeuristicError> {
    let mut best: Option<(f64, Configuration)> = None;
    for _ in 0..starts.max(1) {
        let c = local_search(&random_start(n, rng)?, sweeps)?;
        let v = min_triangle_area(&c).0;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, c));
        }
    }
    Ok(best.expect("at least one start").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_final;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn optimum5() -> Configuration {
        let s3 = 3f64.sqrt() / 3.0;
        Configuration::new(vec![(0.0, 1.0 / 3.0), (s3, 0.0), (1.0, 1.0 - s3), (2.0 / 3.0, 1.0), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn random_starts_are_feasible_for_the_final_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 5..=9 {
            let m = build_final(n, 0.5).unwrap();
            for _ in 0..20 {
                let c = random_start(n, &mut rng).unwrap();
                let mut a = m.embed(&c).unwrap();
                a.insert("z".into(), 0.0);
                assert!(m.check_feasible(&a).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn random_start_is_deterministic() {
        let a = random_start(8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = random_start(8, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!(random_start(2, &mut ChaCha8Rng::seed_from_u64(3)).is_err());
    }

    #[test]
    fn optimum_is_a_fixed_point() {
        let c = optimum5();
        let v = min_triangle_area(&c).0;
        for i in 1..=5 {
            let p = polish_point(&c, i).unwrap();
            for (a, b) in p.points().iter().zip(c.points()) {
                assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
            }
            assert!((min_triangle_area(&p).0 - v).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_point_recovers() {
        let c = optimum5();
        let v = min_triangle_area(&c).0;
        let mut pts = c.points().to_vec();
        pts[0].1 += 0.05;
        let p = polish_point(&Configuration::new(pts).unwrap(), 1).unwrap();
        assert!(min_triangle_area(&p).0 >= v - 1e-9);
    }

    #[test]
    fn apex_moves_to_a_corner() {
        let c = Configuration::new(vec![(0.0, 0.0), (1.0, 0.0), (0.4, 0.3)]).unwrap();
        let p = polish_point(&c, 3).unwrap();
        assert_eq!(p.point(3).1, 1.0);
        assert!((min_triangle_area(&p).0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_sweeps_return_the_start() {
        let a = multistart(6, 1, 0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = random_start(6, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_index() {
        assert_eq!(polish_point(&optimum5(), 6), Err(HeuristicError::BadIndex { i: 6, n: 5 }));
    }

    #[test]
    fn slp_improves_a_random_start() {
        let c = random_start(7, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let r = slp_refine(&c).unwrap();
        assert!(min_triangle_area(&r).0 > min_triangle_area(&c).0);
    }
}
