//! Solver-independent mixed-integer formulations of the max-min area problem.
//!
//! Two builders are provided. [`build_baseline`] keeps every coordinate free
//! and writes each signed area directly as a sum of coordinate products.
//! [`build_final`] substitutes `w_ij = x_i * y_j`, pins five boundary points
//! to their edges, orders the interior points by `x` and fixes the
//! orientation binaries that the boundary labelling determines.

use crate::geometry::{self, Configuration, TriangleId, D4};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("the model needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("objective bound must lie in (0, 1/2], got {0}")]
    BadObjectiveBound(f64),
    #[error("assignment is missing variable {0}")]
    MissingVariable(String),
    #[error("configuration has {got} points, model expects {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Baseline,
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

/// Index of the product `x_i * y_j` among the `n * n` ordered pairs.
pub fn product_index(n: usize, i: usize, j: usize) -> usize {
    (i - 1) * n + (j - 1)
}

/// The six `(coefficient, i, j)` product terms of `A_t = sum coef * x_i * y_j`.
pub fn area_terms(t: TriangleId) -> [(f64, usize, usize); 6] {
    let TriangleId(i, j, k) = t;
    [
        (0.5, i, j),
        (0.5, j, k),
        (0.5, k, i),
        (-0.5, i, k),
        (-0.5, j, i),
        (-0.5, k, j),
    ]
}

/// Triangles whose orientation the boundary labelling fixes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignSets {
    /// All three vertices among `p1..p5`: counterclockwise.
    pub t_plus: Vec<TriangleId>,
    /// `(1, 5, k)` for `k > 5`: clockwise.
    pub t_minus: Vec<TriangleId>,
}

impl SignSets {
    pub fn for_n(n: usize) -> Self {
        let t_plus = geometry::triangles(n.min(5)).collect();
        let t_minus = (6..=n).map(|k| TriangleId(1, 5, k)).collect();
        SignSets { t_plus, t_minus }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInstance {
    pub n: usize,
    pub kind: ModelKind,
    pub variables: Vec<Variable>,
    x: Vec<VarId>,
    y: Vec<VarId>,
    /// `w[product_index(i, j)]`, present for `i != j` in the final model.
    w: Vec<Option<VarId>>,
    pub triangles: Vec<TriangleId>,
    area: Vec<VarId>,
    binary: Vec<VarId>,
    z: VarId,
    /// Variables whose bounds coincide, with their value.
    pub fixed: Vec<(VarId, f64)>,
    /// `lhs <= rhs` pairs.
    pub ordering: Vec<(VarId, VarId)>,
    pub sign_sets: Option<SignSets>,
}

impl ModelInstance {
    fn empty(n: usize, kind: ModelKind) -> Self {
        ModelInstance {
            n,
            kind,
            variables: Vec::new(),
            x: Vec::new(),
            y: Vec::new(),
            w: Vec::new(),
            triangles: geometry::triangles(n).collect(),
            area: Vec::new(),
            binary: Vec::new(),
            z: VarId(0),
            fixed: Vec::new(),
            ordering: Vec::new(),
            sign_sets: None,
        }
    }

    fn add(&mut self, name: String, kind: VarKind, lo: f64, hi: f64) -> VarId {
        self.variables.push(Variable { name, kind, lo, hi });
        VarId(self.variables.len() - 1)
    }

    fn fix(&mut self, v: VarId, value: f64) {
        self.variables[v.0].lo = value;
        self.variables[v.0].hi = value;
        self.fixed.push((v, value));
    }

    pub fn x(&self, i: usize) -> VarId {
        self.x[i - 1]
    }

    pub fn y(&self, i: usize) -> VarId {
        self.y[i - 1]
    }

    pub fn w(&self, i: usize, j: usize) -> Option<VarId> {
        self.w.get(product_index(self.n, i, j)).copied().flatten()
    }

    /// Position of `t` in [`ModelInstance::triangles`].
    pub fn triangle_index(&self, t: TriangleId) -> usize {
        self.triangles.binary_search(&t).expect("triangle of this model")
    }

    pub fn area(&self, t: TriangleId) -> VarId {
        self.area[self.triangle_index(t)]
    }

    pub fn area_by_index(&self, idx: usize) -> VarId {
        self.area[idx]
    }

    pub fn binary(&self, t: TriangleId) -> VarId {
        self.binary[self.triangle_index(t)]
    }

    pub fn binary_by_index(&self, idx: usize) -> VarId {
        self.binary[idx]
    }

    pub fn z(&self) -> VarId {
        self.z
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn z_upper(&self) -> f64 {
        self.variables[self.z.0].hi
    }

    pub fn is_fixed(&self, v: VarId) -> bool {
        let var = &self.variables[v.0];
        var.lo == var.hi
    }

    /// Coordinate variables that are not fixed.
    pub fn free_coordinates(&self) -> Vec<VarId> {
        (1..=self.n)
            .flat_map(|i| [self.x(i), self.y(i)])
            .filter(|&v| !self.is_fixed(v))
            .collect()
    }

    /// Binaries fixed a priori.
    pub fn fixed_binaries(&self) -> usize {
        self.binary.iter().filter(|&&b| self.is_fixed(b)).count()
    }

    /// Full assignment induced by a configuration: products, signed areas,
    /// orientation binaries (fixed ones keep their value) and the largest
    /// objective value the couplings allow.
    pub fn embed(&self, config: &Configuration) -> Result<BTreeMap<String, f64>, ModelError> {
        if config.n() != self.n {
            return Err(ModelError::SizeMismatch {
                expected: self.n,
                got: config.n(),
            });
        }
        let mut vals = vec![0.0; self.variables.len()];
        for i in 1..=self.n {
            vals[self.x(i).0] = config.x(i);
            vals[self.y(i).0] = config.y(i);
        }
        for i in 1..=self.n {
            for j in 1..=self.n {
                if let Some(w) = self.w(i, j) {
                    vals[w.0] = config.x(i) * config.y(j);
                }
            }
        }
        let mut z = self.z_upper();
        for (idx, &t) in self.triangles.iter().enumerate() {
            let a = geometry::signed_area_unchecked(config, t);
            vals[self.area[idx].0] = a;
            let b = self.binary[idx];
            let bv = if self.is_fixed(b) {
                self.variables[b.0].lo
            } else if a >= 0.0 {
                1.0
            } else {
                0.0
            };
            vals[b.0] = bv;
            z = z.min((2.0 * bv - 1.0) * a);
        }
        vals[self.z.0] = z;
        Ok(self
            .variables
            .iter()
            .zip(vals)
            .map(|(v, val)| (v.name.clone(), val))
            .collect())
    }

    /// Every constraint violated by more than [`FEAS_TOL`], with the amount
    /// of violation.
    pub fn check_feasible(
        &self,
        assignment: &BTreeMap<String, f64>,
    ) -> Result<Vec<Violation>, ModelError> {
        let mut vals = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            match assignment.get(&v.name) {
                Some(&val) => vals.push(val),
                None => return Err(ModelError::MissingVariable(v.name.clone())),
            }
        }
        let val = |v: VarId| vals[v.0];
        let mut out = Vec::new();
        let mut report = |constraint: String, amount: f64| {
            if amount > FEAS_TOL {
                out.push(Violation { constraint, amount });
            }
        };
        for (v, var) in self.variables.iter().enumerate() {
            let x = vals[v];
            report(format!("{} >= {}", var.name, var.lo), var.lo - x);
            report(format!("{} <= {}", var.name, var.hi), x - var.hi);
            if var.kind == VarKind::Binary {
                report(format!("{} integral", var.name), x.min(1.0 - x).max(0.0));
            }
        }
        for i in 1..=self.n {
            for j in 1..=self.n {
                if let Some(w) = self.w(i, j) {
                    let prod = val(self.x(i)) * val(self.y(j));
                    report(
                        format!("{} = x{} * y{}", self.var(w).name, i, j),
                        (val(w) - prod).abs(),
                    );
                }
            }
        }
        for (idx, &t) in self.triangles.iter().enumerate() {
            let a = self.area[idx];
            let def: f64 = area_terms(t)
                .iter()
                .map(|&(c, i, j)| {
                    c * match self.w(i, j) {
                        Some(w) => val(w),
                        None => val(self.x(i)) * val(self.y(j)),
                    }
                })
                .sum();
            report(format!("{} definition", self.var(a).name), (val(a) - def).abs());
            let b = self.binary[idx];
            report(
                format!("z <= (2*{} - 1) * {}", self.var(b).name, self.var(a).name),
                val(self.z) - (2.0 * val(b) - 1.0) * val(a),
            );
        }
        for &(lhs, rhs) in &self.ordering {
            report(
                format!("{} <= {}", self.var(lhs).name, self.var(rhs).name),
                val(lhs) - val(rhs),
            );
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let name = |v: VarId| self.variables[v.0].name.clone();
        let mut rows = Vec::new();
        for (idx, &t) in self.triangles.iter().enumerate() {
            let terms: Vec<serde_json::Value> = area_terms(t)
                .iter()
                .map(|&(c, i, j)| match self.w(i, j) {
                    Some(w) => serde_json::json!({"coef": c, "var": name(w)}),
                    None => serde_json::json!({"coef": c, "product": [name(self.x(i)), name(self.y(j))]}),
                })
                .collect();
            rows.push(serde_json::json!({
                "kind": "area_definition",
                "area": name(self.area[idx]),
                "terms": terms,
            }));
            rows.push(serde_json::json!({
                "kind": "sign_coupling",
                "text": format!("z <= (2*{} - 1) * {}", name(self.binary[idx]), name(self.area[idx])),
            }));
        }
        for i in 1..=self.n {
            for j in 1..=self.n {
                if let Some(w) = self.w(i, j) {
                    rows.push(serde_json::json!({
                        "kind": "bilinear",
                        "var": name(w),
                        "product": [name(self.x(i)), name(self.y(j))],
                    }));
                }
            }
        }
        for &(l, r) in &self.ordering {
            rows.push(serde_json::json!({"kind": "ordering", "lhs": name(l), "rhs": name(r)}));
        }
        serde_json::json!({
            "n": self.n,
            "kind": self.kind,
            "variables": self.variables,
            "fixed": self.fixed.iter().map(|&(v, val)| serde_json::json!([name(v), val])).collect::<Vec<_>>(),
            "constraints": rows,
            "sign_sets": self.sign_sets,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: String,
    /// Positive amount by which the constraint is violated.
    pub amount: f64,
}

fn add_core(m: &mut ModelInstance, with_products: bool, z_hi: f64) {
    let n = m.n;
    for i in 1..=n {
        let x = m.add(format!("x{i}"), VarKind::Continuous, 0.0, 1.0);
        let y = m.add(format!("y{i}"), VarKind::Continuous, 0.0, 1.0);
        m.x.push(x);
        m.y.push(y);
    }
    m.w = vec![None; n * n];
    if with_products {
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    let w = m.add(format!("w{i}_{j}"), VarKind::Continuous, 0.0, 1.0);
                    m.w[product_index(n, i, j)] = Some(w);
                }
            }
        }
    }
    let tris = m.triangles.clone();
    for t in &tris {
        let a = m.add(format!("A{}_{}_{}", t.0, t.1, t.2), VarKind::Continuous, -0.5, 0.5);
        m.area.push(a);
    }
    for t in &tris {
        let b = m.add(format!("b{}_{}_{}", t.0, t.1, t.2), VarKind::Binary, 0.0, 1.0);
        m.binary.push(b);
    }
    m.z = m.add("z".to_string(), VarKind::Continuous, 0.0, z_hi);
}

/// The plain formulation: free coordinates, product-form areas, `z <= 1/2`.
pub fn build_baseline(n: usize) -> Result<ModelInstance, ModelError> {
    if n < 3 {
        return Err(ModelError::TooFewPoints(n));
    }
    let mut m = ModelInstance::empty(n, ModelKind::Baseline);
    add_core(&mut m, false, 0.5);
    Ok(m)
}

/// The strengthened formulation with objective bound `delta_prev`, the
/// optimal value for `n - 1` points.
///
/// For `n < 5` the boundary scaffold does not apply and only the product
/// substitution and the objective bound are added.
pub fn build_final(n: usize, delta_prev: f64) -> Result<ModelInstance, ModelError> {
    if n < 3 {
        return Err(ModelError::TooFewPoints(n));
    }
    if !(delta_prev > 0.0 && delta_prev <= 0.5) {
        return Err(ModelError::BadObjectiveBound(delta_prev));
    }
    let mut m = ModelInstance::empty(n, ModelKind::Final);
    add_core(&mut m, true, delta_prev);
    if n < 5 {
        return Ok(m);
    }
    let (x, y) = (|m: &ModelInstance, i| m.x(i), |m: &ModelInstance, i| m.y(i));
    for (v, val) in [
        (x(&m, 1), 0.0),
        (y(&m, 2), 0.0),
        (x(&m, 3), 1.0),
        (y(&m, 4), 1.0),
        (x(&m, 5), 0.0),
    ] {
        m.fix(v, val);
    }
    m.ordering.push((x(&m, 2), x(&m, 4)));
    m.ordering.push((y(&m, 1), y(&m, 5)));
    for i in 6..n {
        m.ordering.push((x(&m, i), x(&m, i + 1)));
    }
    let signs = SignSets::for_n(n);
    for &t in &signs.t_plus {
        let b = m.binary(t);
        m.fix(b, 1.0);
    }
    for &t in &signs.t_minus {
        let b = m.binary(t);
        m.fix(b, 0.0);
    }
    m.sign_sets = Some(signs);
    Ok(m)
}

/// Edge tolerance used when snapping points onto the square's boundary.
pub const EDGE_SNAP_TOL: f64 = 1e-6;

/// Relabels and transforms a configuration so that it satisfies the
/// boundary scaffold, ordering and sign fixing of the final model
/// (`n >= 5`). Coordinates within [`EDGE_SNAP_TOL`] of an edge are snapped
/// onto it. Returns `None` if no labelling fits.
pub fn canonical_labeling(config: &Configuration) -> Option<Configuration> {
    let n = config.n();
    if n < 5 {
        return Some(config.clone());
    }
    let near = |a: f64, b: f64| (a - b).abs() <= EDGE_SNAP_TOL;
    let signs = SignSets::for_n(n);
    for g in D4::ALL {
        let pts: Vec<_> = config.points().iter().map(|&p| g.apply(p)).collect();
        let on = |pred: &dyn Fn((f64, f64)) -> bool| -> Vec<usize> {
            (0..n).filter(|&k| pred(pts[k])).collect()
        };
        let left = on(&|p| near(p.0, 0.0));
        let bottom = on(&|p| near(p.1, 0.0));
        let right = on(&|p| near(p.0, 1.0));
        let top = on(&|p| near(p.1, 1.0));
        for &p1 in &left {
            for &p5 in &left {
                if p5 == p1 || pts[p1].1 > pts[p5].1 {
                    continue;
                }
                for &p2 in &bottom {
                    for &p4 in &top {
                        if pts[p2].0 > pts[p4].0 {
                            continue;
                        }
                        for &p3 in &right {
                            let chosen = [p1, p2, p3, p4, p5];
                            let mut uniq = chosen.to_vec();
                            uniq.sort_unstable();
                            uniq.dedup();
                            if uniq.len() < 5 {
                                continue;
                            }
                            let mut rest: Vec<usize> =
                                (0..n).filter(|k| !chosen.contains(k)).collect();
                            rest.sort_by(|&a, &b| pts[a].0.total_cmp(&pts[b].0));
                            let mut labelled: Vec<(f64, f64)> =
                                chosen.iter().chain(rest.iter()).map(|&k| pts[k]).collect();
                            labelled[0].0 = 0.0;
                            labelled[1].1 = 0.0;
                            labelled[2].0 = 1.0;
                            labelled[3].1 = 1.0;
                            labelled[4].0 = 0.0;
                            let cand = Configuration::new(labelled).ok()?;
                            let ok_plus = signs
                                .t_plus
                                .iter()
                                .all(|&t| geometry::signed_area_unchecked(&cand, t) >= -FEAS_TOL);
                            let ok_minus = signs
                                .t_minus
                                .iter()
                                .all(|&t| geometry::signed_area_unchecked(&cand, t) <= FEAS_TOL);
                            if ok_plus && ok_minus {
                                return Some(cand);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_sizes() {
        for (n, tris) in [(5, 10), (7, 35), (9, 84)] {
            let m = build_baseline(n).unwrap();
            assert_eq!(m.triangles.len(), tris);
            let bins = m.variables.iter().filter(|v| v.kind == VarKind::Binary).count();
            assert_eq!(bins, tris);
            let areas = m.variables.iter().filter(|v| v.name.starts_with('A')).count();
            assert_eq!(areas, tris);
            assert_eq!(m.variables.iter().filter(|v| v.name == "z").count(), 1);
            assert_eq!(m.z_upper(), 0.5);
            assert!(m.fixed.is_empty() && m.ordering.is_empty());
        }
        assert_eq!(build_baseline(2), Err(ModelError::TooFewPoints(2)));
    }

    #[test]
    fn final_model_scaffold() {
        let m = build_final(9, 0.0723764).unwrap();
        assert_eq!(m.fixed_binaries(), 14);
        assert_eq!(m.triangles.len(), 84);
        let s = m.sign_sets.as_ref().unwrap();
        assert_eq!(s.t_plus.len(), 10);
        assert_eq!(s.t_minus.len(), 4);
        assert!(s.t_plus.iter().all(|t| t.2 <= 5));
        assert!(s.t_minus.iter().all(|t| t.0 == 1 && t.1 == 5));

        let m = build_final(5, 0.5).unwrap();
        let free: Vec<_> = m.free_coordinates().iter().map(|&v| m.var(v).name.clone()).collect();
        assert_eq!(free, vec!["y1", "x2", "y3", "x4", "y5"]);

        let d5 = 3f64.sqrt() / 9.0;
        let m = build_final(6, d5).unwrap();
        assert!((m.z_upper() - 0.19245008972987526).abs() < 1e-15);
        assert_eq!(build_final(6, 0.0), Err(ModelError::BadObjectiveBound(0.0)));
        assert_eq!(build_final(6, 0.6), Err(ModelError::BadObjectiveBound(0.6)));
    }

    #[test]
    fn small_final_models_have_no_scaffold() {
        let m = build_final(4, 0.5).unwrap();
        assert!(m.fixed.is_empty() && m.sign_sets.is_none());
        assert!(m.w(1, 2).is_some());
    }

    #[test]
    fn degenerate_points_violate_couplings() {
        let m = build_final(5, 0.5).unwrap();
        let c = Configuration::new(vec![(0.0, 0.0); 5]).unwrap();
        let mut a = m.embed(&c).unwrap();
        a.insert("z".into(), 0.1);
        let v = m.check_feasible(&a).unwrap();
        assert!(v.iter().any(|v| v.constraint.starts_with("z <= (2*b")));
    }

    #[test]
    fn swapped_order_flags_exactly_that_constraint() {
        let m = build_final(5, 0.5).unwrap();
        let s3 = 3f64.sqrt() / 3.0;
        let good = vec![(0.0, 1.0 / 3.0), (s3, 0.0), (1.0, 1.0 - s3), (2.0 / 3.0, 1.0), (0.0, 1.0)];
        let c = Configuration::new(good.clone()).unwrap();
        assert!(m.check_feasible(&m.embed(&c).unwrap()).unwrap().is_empty());
        // move p2 to the right of p4 while keeping every orientation intact
        let mut bad = good;
        bad[1].0 = 0.7;
        let c = Configuration::new(bad).unwrap();
        let v = m.check_feasible(&m.embed(&c).unwrap()).unwrap();
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].constraint, "x2 <= x4");
    }

    #[test]
    fn missing_variable_is_an_error() {
        let m = build_baseline(3).unwrap();
        let c = Configuration::new(vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        let mut a = m.embed(&c).unwrap();
        a.remove("y2");
        assert_eq!(m.check_feasible(&a), Err(ModelError::MissingVariable("y2".into())));
    }

    #[test]
    fn area_terms_match_shoelace() {
        let c = Configuration::new(vec![(0.1, 0.7), (0.8, 0.2), (0.5, 0.9), (0.3, 0.3)]).unwrap();
        for t in c.triangles() {
            let s: f64 = area_terms(t).iter().map(|&(k, i, j)| k * c.x(i) * c.y(j)).sum();
            assert!((s - geometry::signed_area(&c, t).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn json_dump_lists_everything() {
        let m = build_final(5, 0.5).unwrap();
        let j = m.to_json();
        assert_eq!(j["variables"].as_array().unwrap().len(), m.variables.len());
        assert_eq!(j["fixed"].as_array().unwrap().len(), 5 + 10);
    }
}
